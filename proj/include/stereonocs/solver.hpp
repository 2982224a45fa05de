#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "stereonocs/geometry.hpp"
#include "stereonocs/nocs_map.hpp"
#include "stereonocs/stereo.hpp"

namespace stereonocs {

struct RansacPnPConfig {
    std::size_t max_iterations = 1000;
    double inlier_threshold = 2.0;  // pixels
    double confidence = 0.999;
    std::size_t sample_size = 4;    // three points for P3P plus one to disambiguate
    std::uint64_t seed = 0;

    void validate() const;
};

enum class PoseMethod { decoupled, joint, pnp };
std::string_view to_string(PoseMethod m);

struct PoseEstimate {
    Pose pose;
    std::size_t inlier_count = 0;
    double mean_residual = 0.0;  // pixels, over inliers
    PoseMethod method = PoseMethod::pnp;
    std::vector<std::size_t> inliers;  // indices into the input lists, ascending
};

/// Rigid candidates (R, t) for three bearing/point pairs, |bearing| = 1.
struct RigidCandidate {
    Rotation rotation;
    Vec3 translation;
};
std::vector<RigidCandidate> solve_p3p(std::span<const Vec3, 3> bearings, std::span<const Vec3, 3> points);

/// Levenberg-damped Gauss-Newton on the summed squared reprojection error.
RigidCandidate refine_pose_reprojection(std::span<const Pixel> pixels, std::span<const Vec3> points,
                                        const CameraIntrinsics& K, const RigidCandidate& initial,
                                        int max_iterations = 50);

/// RANSAC over P3P hypotheses followed by refinement on the consensus set.
/// Deterministic for a given seed. The returned pose has scale 1.
/// Throws InsufficientPoints, DegenerateConfiguration, NoConsensus.
PoseEstimate solve_pnp_ransac(std::span<const Pixel> pixels, std::span<const Vec3> points,
                              const CameraIntrinsics& K, const RansacPnPConfig& cfg = {});

/// Scales t along its own ray so that the mean camera depth of the given NOCS
/// points becomes `target_mean_depth`: alpha solves
/// mean_z(s R q) + alpha * t_z = target. Throws NonPositiveDepth.
Pose rescale_translation(const Pose& pose, double target_mean_depth, std::span<const NocsPoint> nocs_points);

/// Least-squares similarity dst ~ s R src + t (closed form, proper rotation).
/// Throws InsufficientPoints (< 3) and DegenerateConfiguration (collinear).
Pose fit_similarity_3d3d(std::span<const NocsPoint> src, std::span<const Vec3> dst);

struct DecoupledConfig {
    double match_eps = kDefaultMatchEps;
    ScaleOptions scale;
    RansacPnPConfig ransac;
    bool back_for_pnp = true;         // pool left back-map pixels into PnP
    bool back_for_scale = false;      // also match back maps for the scale step
    bool back_for_depth_target = false;
};

/// Inputs of the decoupled solver once correspondences exist.
struct DecoupledInputs {
    CorrespondenceSet stereo_matches;  // front (and optionally back) stereo pairs
    std::vector<Pixel> pnp_pixels;     // left-image pixels
    std::vector<NocsPoint> pnp_nocs;   // their NOCS coordinates
};

/// scale from stereo matches -> PnP on (pixel, s*q) -> depth rescaling.
PoseEstimate estimate_pose_decoupled(const DecoupledInputs& inputs, const StereoRig& rig,
                                     const DecoupledConfig& cfg = {});

/// Full pipeline from the four rendered or predicted maps.
PoseEstimate estimate_pose_decoupled(const NocsMap& left_front, const NocsMap& left_back, const NocsMap& right_front,
                                     const NocsMap& right_back, const StereoRig& rig,
                                     const DecoupledConfig& cfg = {});

/// Triangulates every stereo match, then fits one similarity transform.
PoseEstimate estimate_pose_joint(const CorrespondenceSet& stereo_matches, const StereoRig& rig);
PoseEstimate estimate_pose_joint(const NocsMap& left_front, const NocsMap& right_front, const StereoRig& rig,
                                 double match_eps = kDefaultMatchEps);

}  // namespace stereonocs

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stereonocs/geometry.hpp"
#include "stereonocs/nocs_map.hpp"

namespace stereonocs {

/// Two pinhole cameras. Extrinsics map left-camera coordinates to
/// right-camera coordinates: X_r = R_lr * X_l + t_lr. A rectified rig with
/// the right camera displaced by +b along x has R_lr = I, t_lr = (-b, 0, 0).
struct StereoRig {
    CameraIntrinsics left;
    CameraIntrinsics right;
    Rotation r_lr;
    Vec3 t_lr = Vec3::Zero();
    double baseline = 0.0;

    /// Validates baseline == |t_lr| within 1e-12.
    StereoRig(const CameraIntrinsics& kl, const CameraIntrinsics& kr, const Rotation& r, const Vec3& t);
    static StereoRig rectified(const CameraIntrinsics& K, double baseline);

    bool is_rectified(double tol = 1e-9) const;
    /// Right camera center expressed in the left frame.
    Vec3 right_center_in_left() const { return -(r_lr.matrix().transpose() * t_lr); }
    /// Pose of an object as seen from the right camera.
    Pose right_pose(const Pose& left_pose) const;
    /// 3x3 matrix G with epipolar residual = p_l^T G p_r (homogeneous pixels).
    Mat3 epipolar_form() const;
};

struct CorrespondencePair {
    Pixel left;
    Pixel right;
    NocsPoint nocs;  // left-map coordinate
    std::optional<double> depth;  // left-camera depth, meters
    NocsView view = NocsView::front;
};

using CorrespondenceSet = std::vector<CorrespondencePair>;

inline constexpr double kDefaultMatchEps = 0.01;

/// Mutual nearest neighbours in NOCS space between the masked pixels of two
/// maps, keeping pairs within `eps`. Ties break toward the lower row-major
/// pixel index, so the result is deterministic and symmetric under swapping
/// the maps. Pairs are returned in left row-major order.
/// Throws ShapeMismatch, ViewTagMismatch, EmptyMask.
CorrespondenceSet match_nocs_maps(const NocsMap& left, const NocsMap& right, double eps = kDefaultMatchEps);

/// f * b / |p_l - p_r| with f the left fx. Throws NotRectified, ZeroDisparity.
double disparity_depth(const CorrespondencePair& pair, const StereoRig& rig);

/// Midpoint of the common perpendicular of the two viewing rays, in the
/// left-camera frame. Throws ParallelRays.
Vec3 triangulate(const Pixel& left, const Pixel& right, const StereoRig& rig);

/// Left-camera 3D point of a correspondence: disparity depth on rectified
/// rigs, triangulation otherwise.
Vec3 correspondence_point(const CorrespondencePair& pair, const StereoRig& rig);

/// Fills `depth` for every pair; pairs whose depth cannot be recovered
/// (zero disparity, parallel rays, depth <= 0) are removed.
CorrespondenceSet with_depths(CorrespondenceSet pairs, const StereoRig& rig);

struct ScaleOptions {
    std::size_t pair_budget = 2048;
    std::uint64_t seed = 0;
    double min_nocs_separation = 0.05;
    bool trimmed = false;  // 20% two-sided trimmed mean instead of the plain mean
};

struct ScaleEstimate {
    double scale;
    std::vector<double> samples;
};

/// Averages |X_i - X_j| / |q_i - q_j| over randomly drawn correspondence pairs.
/// Pairs without depth are triangulated on the fly.
/// Throws InsufficientCorrespondences when no pair qualifies.
ScaleEstimate estimate_scale(const CorrespondenceSet& corr, const StereoRig& rig, const ScaleOptions& opts = {});

/// p_l^T K_l^-T [c]x R K_r^-1 p_r, where (R, c) is the motion of the right
/// camera relative to the left (R = R_lr^T, c = right camera center).
double epipolar_residual(const Pixel& left, const Pixel& right, const StereoRig& rig);

}  // namespace stereonocs

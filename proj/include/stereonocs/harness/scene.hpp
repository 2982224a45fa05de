#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>

#include "stereonocs/harness/shapes.hpp"
#include "stereonocs/nocs_map.hpp"
#include "stereonocs/stereo.hpp"

namespace stereonocs::harness {

struct SceneConfig {
    Category category = Category::bottle;
    ShapeRanges shape = ShapeRanges::defaults(Category::bottle);
    Range distance{0.4, 1.2};     // meters, camera to object center
    Range yaw_deg{0.0, 360.0};    // about the object's up axis; 0 shows the +z side, 90 turns +x away
    Range pitch_deg{-20.0, 20.0};
    Range roll_deg{-10.0, 10.0};
    double lateral_jitter = 0.05;  // object center offset, as a fraction of the distance
    double baseline = 0.06;        // meters
    double focal = 600.0;          // pixels
    int width = 224;
    int height = 224;
    int max_retries = 100;

    void validate() const;
    CameraIntrinsics intrinsics() const;
};

struct Scene {
    std::uint64_t seed = 0;
    Category category = Category::bottle;
    ShapeParams shape;
    NormalizedMesh object;  // NOCS mesh plus its metric normalization
    Vec3 nocs_extents = Vec3::Ones();
    Pose pose;  // left camera
    StereoRig rig = StereoRig::rectified(CameraIntrinsics(600, 600, 111.5, 111.5, 224, 224), 0.06);
};

/// Object orientation for the sampled angles: the object's +y is turned to
/// image-up before yaw (about the object axis), roll and pitch are applied.
Rotation scene_rotation(double yaw_deg, double pitch_deg, double roll_deg);

/// Deterministic in `seed`. Retries the placement until all eight corners of
/// the object's bounding box project inside both images.
/// Throws FrustumPlacementFailed after cfg.max_retries attempts.
Scene sample_scene(const SceneConfig& cfg, std::uint64_t seed);

/// True when every NOCS bounding-box corner projects inside both images.
bool scene_in_frustum(const Scene& scene);

struct StereoMaps {
    NocsMap left_front, left_back, right_front, right_back;
};

struct SceneRender {
    NocsRender left;
    NocsRender right;

    StereoMaps maps() const { return {left.front, left.back, right.front, right.back}; }
};

SceneRender render_scene_nocs(const Scene& scene, int jobs = 1);

/// Text form of a scene without its mesh: sections [scene] (category, seed,
/// scale, rotation as 9 row-major numbers, translation, nocs_center,
/// nocs_diagonal, nocs_extents), [left] and [right] (fx, fy, cx, cy, width,
/// height) and [extrinsics] (rotation, translation of left -> right).
void write_scene_ini(const Scene& scene, std::ostream& out);
/// Reads the text form; `object.mesh` is left empty. Throws InvalidConfig.
Scene read_scene_ini(std::istream& in);

/// Reads only the [left], [right] and [extrinsics] sections.
StereoRig read_rig_ini(std::istream& in);

}  // namespace stereonocs::harness

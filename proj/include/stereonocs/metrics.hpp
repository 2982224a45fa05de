#pragma once

#include <array>
#include <vector>

#include "stereonocs/geometry.hpp"

namespace stereonocs {

struct OrientedBox {
    Vec3 center = Vec3::Zero();
    Rotation rotation;
    Vec3 half_extents = Vec3::Constant(0.5);

    double volume() const { return 8.0 * half_extents.prod(); }
    std::array<Vec3, 8> corners() const;
    bool contains(const Vec3& x) const;
};

/// Box of the NOCS-space extents centered at (0.5,0.5,0.5), carried by the pose.
/// Throws InvalidParams for non-positive extents.
OrientedBox box_from_pose(const Pose& pose, const Vec3& nocs_extents);

/// Volume of the exact intersection polytope.
double intersection_volume(const OrientedBox& a, const OrientedBox& b);

/// Intersection over union; the intersection is the exact polytope obtained by
/// clipping `a` against the six face planes of `b`.
double iou_3d(const OrientedBox& a, const OrientedBox& b);

struct SymmetrySpec {
    enum class Kind { none, continuous, discrete };
    Kind kind = Kind::none;
    Vec3 axis = Vec3::UnitY();  // NOCS frame
    int order = 2;              // discrete only

    static SymmetrySpec none() { return {}; }
    static SymmetrySpec continuous(const Vec3& axis = Vec3::UnitY()) { return {Kind::continuous, axis.normalized(), 0}; }
    static SymmetrySpec discrete(int n, const Vec3& axis = Vec3::UnitY());
};

/// Geodesic rotation error in degrees, minimized over the symmetry group of
/// the ground truth.
double rotation_error_deg(const Rotation& pred, const Rotation& gt, const SymmetrySpec& sym = {});

/// Distance between the predicted and true object centers (NOCS (0.5,0.5,0.5)).
double translation_error_m(const Pose& pred, const Pose& gt);

struct TrialErrors {
    double iou = 0.0;
    double rot_err_deg = 180.0;
    double trans_err_m = 0.0;
    bool failed = false;  // counts as missing every threshold
};

struct Thresholds {
    double iou_low = 0.25;
    double iou_high = 0.50;
    double rot_deg = 10.0;
    double trans_tight_m = 0.05;
    double trans_loose_m = 0.10;
};

struct EvalReport {
    double iou25 = 0.0;     // fraction with IoU >= 0.25
    double iou50 = 0.0;
    double deg10_cm5 = 0.0;   // rotation <= 10 deg and translation <= 5 cm
    double deg10_cm10 = 0.0;
    double deg10 = 0.0;       // rotation <= 10 deg alone
    std::size_t trials = 0;
    std::size_t failures = 0;
};

/// Throws EmptyTrials.
EvalReport map_at_thresholds(const std::vector<TrialErrors>& trials, const Thresholds& th = {});

}  // namespace stereonocs

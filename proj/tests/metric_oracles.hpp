#pragma once

// Independent estimates for the box-overlap and symmetric rotation metrics.

#include <random>

#include "stereonocs/metrics.hpp"
#include "test_support.hpp"

namespace stereonocs::testing {

struct MonteCarloVolume {
    double volume;
    double standard_error;
};

/// Samples uniformly inside `a` and counts the hits inside `b`.
inline MonteCarloVolume monte_carlo_intersection(const OrientedBox& a, const OrientedBox& b, std::size_t samples,
                                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const Vec3 local(u(rng) * a.half_extents.x(), u(rng) * a.half_extents.y(), u(rng) * a.half_extents.z());
        inside += b.contains(a.center + a.rotation * local);
    }
    const double p = static_cast<double>(inside) / static_cast<double>(samples);
    const double va = a.volume();
    return {va * p, va * std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

/// Two overlapping boxes with random sizes, orientations and offsets.
inline std::pair<OrientedBox, OrientedBox> random_box_pair(std::mt19937_64& rng) {
    OrientedBox a, b;
    a.center = uniform_vec(rng, -1, 1);
    a.rotation = random_rotation(rng);
    a.half_extents = uniform_vec(rng, 0.1, 0.5);
    b.center = a.center + uniform_vec(rng, -0.3, 0.3);
    b.rotation = random_rotation(rng);
    b.half_extents = uniform_vec(rng, 0.1, 0.5);
    return {a, b};
}

/// Minimum geodesic error over `steps` rotations of the ground truth about `axis`.
inline double brute_force_symmetric_error_deg(const Rotation& pred, const Rotation& gt, const Vec3& axis, int steps) {
    double best = 180.0;
    for (int k = 0; k < steps; ++k) {
        const Rotation g = Rotation::from_axis_angle(axis, 2.0 * kPi * k / steps);
        best = std::min(best, rad_to_deg(pred.angle_to(gt * g)));
    }
    return best;
}

}  // namespace stereonocs::testing

#include <doctest.h>

#include "metric_oracles.hpp"
#include "stereonocs/error.hpp"
#include "stereonocs/metrics.hpp"

using namespace stereonocs;
using namespace stereonocs::testing;

namespace {

OrientedBox cube(const Vec3& center, double side) {
    OrientedBox b;
    b.center = center;
    b.half_extents = Vec3::Constant(side / 2);
    return b;
}

OrientedBox moved(const OrientedBox& b, const Rotation& r, const Vec3& t) {
    OrientedBox out = b;
    out.center = r * b.center + t;
    out.rotation = r * b.rotation;
    return out;
}

}  // namespace

TEST_CASE("analytic IoU cases") {
    const OrientedBox a = cube(Vec3(0.2, -0.4, 1.3), 0.7);
    CHECK(iou_3d(a, a) == 1.0);
    // Unit cubes offset by half a side: overlap 1/2, union 3/2.
    CHECK(std::abs(iou_3d(cube({0, 0, 0}, 1), cube({0.5, 0, 0}, 1)) - 1.0 / 3.0) < 1e-12);
    CHECK(iou_3d(cube({0, 0, 0}, 1), cube({3, 0, 0}, 1)) == 0.0);
    // Touching faces enclose no volume.
    CHECK(iou_3d(cube({0, 0, 0}, 1), cube({1, 0, 0}, 1)) < 1e-12);
    // Nested: the inner box is the intersection.
    CHECK(std::abs(iou_3d(cube({0, 0, 0}, 1), cube({0.1, 0, 0}, 0.5)) - 0.125) < 1e-12);

    OrientedBox r = a;
    r.rotation = Rotation::from_axis_angle(Vec3(1, 2, 3).normalized(), 0.9);
    CHECK(std::abs(iou_3d(r, r) - 1.0) < 1e-12);
}

TEST_CASE("IoU symmetry and rigid invariance") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const auto [a, b] = random_box_pair(rng);
        const double ab = iou_3d(a, b);
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(std::abs(ab - iou_3d(b, a)) < 1e-12);
        const Rotation g = random_rotation(rng);
        const Vec3 t = uniform_vec(rng, -2, 2);
        CHECK(std::abs(ab - iou_3d(moved(a, g, t), moved(b, g, t))) < 1e-9);
    }
}

TEST_CASE("intersection volume agrees with Monte Carlo") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 10; ++i) {
        const auto [a, b] = random_box_pair(rng);
        const MonteCarloVolume mc = monte_carlo_intersection(a, b, 1'000'000, 100 + i);
        const double v = intersection_volume(a, b);
        CHECK(std::abs(v - mc.volume) <= 3.0 * mc.standard_error);
        const double iou = iou_3d(a, b);
        CHECK(std::abs(iou - v / (a.volume() + b.volume() - v)) < 1e-12);
    }
}

TEST_CASE("box from pose carries the NOCS box corners") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const Pose pose(uniform(rng, 0.05, 0.5), random_rotation(rng), uniform_vec(rng, -1, 1));
        const Vec3 ext = uniform_vec(rng, 0.2, 1.0);
        const OrientedBox b = box_from_pose(pose, ext);
        const auto corners = b.corners();
        for (int c = 0; c < 8; ++c) {
            const Vec3 q = Vec3::Constant(0.5) + 0.5 * Vec3((c & 1) ? ext.x() : -ext.x(), (c & 2) ? ext.y() : -ext.y(),
                                                            (c & 4) ? ext.z() : -ext.z());
            CHECK((pose.apply(q) - corners[c]).norm() < 1e-12);
        }
    }
    CHECK_THROWS_AS(box_from_pose(Pose(), Vec3(1, 0, 1)), Error);
}

TEST_CASE("rotation errors") {
    const Rotation gt = Rotation::about_x(0.3);
    CHECK(rotation_error_deg(gt * Rotation::about_z(deg_to_rad(20)), gt) == doctest::Approx(20.0));
    // Spinning about the symmetry axis costs nothing under axial symmetry.
    CHECK(rotation_error_deg(gt * Rotation::about_y(1.3), gt, SymmetrySpec::continuous()) < 1e-6);
    // Discrete order 4: a quarter turn is free, an eighth is the worst case.
    CHECK(rotation_error_deg(gt * Rotation::about_y(kPi / 2), gt, SymmetrySpec::discrete(4)) < 1e-6);
    CHECK(rotation_error_deg(gt * Rotation::about_y(kPi / 4), gt, SymmetrySpec::discrete(4)) == doctest::Approx(45.0));
    CHECK_THROWS_AS(SymmetrySpec::discrete(1), Error);
}

TEST_CASE("continuous symmetry matches dense sampling") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        const Rotation gt = random_rotation(rng), pred = random_rotation(rng);
        const Vec3 axis = uniform_vec(rng, -1, 1).normalized();
        const double closed = rotation_error_deg(pred, gt, SymmetrySpec::continuous(axis));
        const double brute = brute_force_symmetric_error_deg(pred, gt, axis, 3600);
        CHECK(closed <= brute + 1e-9);
        CHECK(brute - closed < 0.1);
    }
}

TEST_CASE("translation error is measured at the object center") {
    const Pose gt(0.2, Rotation(), Vec3(0, 0, 1));
    const Pose pred(0.2, Rotation::about_y(kPi), Vec3(0.2, 0, 1.2));
    // Both centers sit at (0.1, 0.1, 1.1).
    CHECK(translation_error_m(pred, gt) < 1e-15);
    CHECK(translation_error_m(Pose(0.2, Rotation(), Vec3(0.03, 0.04, 1)), gt) == doctest::Approx(0.05));
}

TEST_CASE("mAP counts match an independent recount") {
    std::mt19937_64 rng(5);
    std::vector<TrialErrors> trials;
    for (int i = 0; i < 10; ++i) {
        TrialErrors t;
        t.iou = uniform(rng, 0, 1);
        t.rot_err_deg = uniform(rng, 0, 20);
        t.trans_err_m = uniform(rng, 0, 0.15);
        t.failed = i == 3;
        trials.push_back(t);
    }
    const EvalReport r = map_at_thresholds(trials);
    double i25 = 0, i50 = 0, a = 0, b = 0, c = 0;
    for (const auto& t : trials) {
        if (t.failed) continue;
        i25 += t.iou >= 0.25;
        i50 += t.iou >= 0.5;
        a += t.rot_err_deg <= 10 && t.trans_err_m <= 0.05;
        b += t.rot_err_deg <= 10 && t.trans_err_m <= 0.10;
        c += t.rot_err_deg <= 10;
    }
    CHECK(std::abs(r.iou25 - i25 / 10) < 1e-12);
    CHECK(std::abs(r.iou50 - i50 / 10) < 1e-12);
    CHECK(std::abs(r.deg10_cm5 - a / 10) < 1e-12);
    CHECK(std::abs(r.deg10_cm10 - b / 10) < 1e-12);
    CHECK(std::abs(r.deg10 - c / 10) < 1e-12);
    CHECK(r.failures == 1);
    CHECK(r.trials == 10);
    CHECK_THROWS_AS(map_at_thresholds({}), Error);
}

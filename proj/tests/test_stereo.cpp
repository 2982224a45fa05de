#include <doctest.h>

#include <set>

#include "stereonocs/error.hpp"
#include "stereonocs/stereo.hpp"
#include "test_support.hpp"

using namespace stereonocs;
using namespace stereonocs::testing;

namespace {

template <class F>
ErrorCode code_of(F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::Io;
}

CorrespondencePair pair_at(Pixel l, Pixel r) {
    CorrespondencePair p;
    p.left = l;
    p.right = r;
    return p;
}

// Exact stereo observation of a left-frame point.
CorrespondencePair observe(const Vec3& x, const NocsPoint& q, const StereoRig& rig, bool with_depth) {
    CorrespondencePair p;
    p.left = project_point(x, rig.left);
    p.right = project_point(rig.r_lr * x + rig.t_lr, rig.right);
    p.nocs = q;
    if (with_depth) p.depth = x.z();
    return p;
}

// Sphere of radius 5 cm one meter ahead, rendered in both cameras.
struct SphereStereo {
    NormalizedMesh sphere = normalize_mesh_to_nocs(uv_sphere(0.05, 32, 64));
    StereoRig rig = StereoRig::rectified(CameraIntrinsics(600, 600, 63.5, 63.5, 128, 128), 0.06);
    Vec3 center{0.03, 0.0, 1.0};
    Pose pose{sphere.normalization.diagonal, Rotation(), center - sphere.normalization.diagonal * Vec3::Constant(0.5)};
    NocsRender left, right;

    SphereStereo() {
        const MeshRaycaster rc(sphere.mesh);
        left = render_nocs_views(rc, pose, rig.left);
        right = render_nocs_views(rc, rig.right_pose(pose), rig.right);
    }
};

}  // namespace

TEST_CASE("rig construction") {
    const StereoRig r = StereoRig::rectified(CameraIntrinsics(600, 600, 100, 100), 0.06);
    CHECK(r.baseline == 0.06);
    CHECK(r.t_lr == Vec3(-0.06, 0, 0));
    CHECK(r.is_rectified());
    CHECK((r.right_center_in_left() - Vec3(0.06, 0, 0)).norm() == 0.0);
    CHECK(code_of([] { StereoRig::rectified(CameraIntrinsics(1, 1, 0, 0), 0.0); }) == ErrorCode::InvalidParams);
}

TEST_CASE("disparity depth examples") {
    const StereoRig r100 = StereoRig::rectified(CameraIntrinsics(100, 100, 0, 0), 0.06);
    CHECK(disparity_depth(pair_at({50, 20}, {40, 20}), r100) == doctest::Approx(0.6).epsilon(1e-15));
    const StereoRig r600 = StereoRig::rectified(CameraIntrinsics(600, 600, 0, 0), 0.06);
    CHECK(disparity_depth(pair_at({100, 20}, {64, 20}), r600) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(code_of([&] { disparity_depth(pair_at({5, 5}, {5, 5}), r600); }) == ErrorCode::ZeroDisparity);
    std::mt19937_64 rng(1);
    const StereoRig general = random_general_rig(rng);
    CHECK(code_of([&] { disparity_depth(pair_at({50, 5}, {5, 5}), general); }) == ErrorCode::NotRectified);
}

TEST_CASE("triangulation recovers exact points") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 500; ++i) {
        const StereoRig rig = random_general_rig(rng);
        const Vec3 x(uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), uniform(rng, 0.4, 3.0));
        const auto p = observe(x, {}, rig, false);
        CHECK((triangulate(p.left, p.right, rig) - x).norm() < 1e-9);
    }
}

TEST_CASE("triangulation agrees with disparity depth on rectified rigs") {
    const StereoRig rig = StereoRig::rectified(CameraIntrinsics(600, 600, 111.5, 111.5), 0.06);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const Vec3 x(uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2), uniform(rng, 0.4, 1.2));
        const auto p = observe(x, {}, rig, false);
        const double d = disparity_depth(p, rig);
        CHECK(std::abs(triangulate(p.left, p.right, rig).z() - d) <= 1e-9 * d);
    }
}

TEST_CASE("parallel rays") {
    const StereoRig rig = StereoRig::rectified(CameraIntrinsics(600, 600, 111.5, 111.5), 0.06);
    CHECK(code_of([&] { triangulate({40, 40}, {40, 40}, rig); }) == ErrorCode::ParallelRays);
    // A rotated rig sees distinct directions for the same pixel.
    const StereoRig turned(rig.left, rig.right, Rotation::about_y(0.1), Vec3(-0.06, 0, 0));
    CHECK(triangulate({40, 40}, {40, 40}, turned).allFinite());
}

TEST_CASE("scale estimation examples") {
    const StereoRig rig = StereoRig::rectified(CameraIntrinsics(600, 600, 111.5, 111.5), 0.06);

    SUBCASE("single ratio") {
        CorrespondenceSet c{observe({0, 0, 1.0}, {0, 0, 0}, rig, true), observe({0.1, 0, 1.0}, {0.5, 0, 0}, rig, true)};
        CHECK(estimate_scale(c, rig, {16, 0, 0.05, false}).scale == doctest::Approx(0.2).epsilon(1e-12));
    }

    SUBCASE("exact correspondences and homogeneity") {
        std::mt19937_64 rng(5);
        const Pose pose(0.2, random_rotation(rng), {0.02, -0.01, 0.8});
        CorrespondenceSet c, doubled;
        for (int i = 0; i < 300; ++i) {
            const NocsPoint q = uniform_vec(rng, 0, 1);
            c.push_back(observe(pose.apply(q), q, rig, true));
            auto d = c.back();
            *d.depth *= 2.0;
            doubled.push_back(d);
        }
        const ScaleEstimate s = estimate_scale(c, rig);
        CHECK(std::abs(s.scale - 0.2) < 1e-9);
        CHECK(s.samples.size() == ScaleOptions{}.pair_budget);
        CHECK(estimate_scale(doubled, rig).scale == 2.0 * s.scale);
        // Trimmed mean of exact data is the same scale.
        CHECK(std::abs(estimate_scale(c, rig, {512, 9, 0.05, true}).scale - 0.2) < 1e-9);
        // Without stored depth the rectified path triangulates on the fly.
        for (auto& p : c) p.depth.reset();
        CHECK(std::abs(estimate_scale(c, rig).scale - 0.2) < 1e-9);
    }

    SUBCASE("errors") {
        CorrespondenceSet one{observe({0, 0, 1.0}, {0, 0, 0}, rig, true)};
        CHECK(code_of([&] { estimate_scale(one, rig); }) == ErrorCode::InsufficientCorrespondences);
        CorrespondenceSet close{observe({0, 0, 1.0}, {0, 0, 0}, rig, true), observe({0.1, 0, 1.0}, {0.01, 0, 0}, rig, true)};
        CHECK(code_of([&] { estimate_scale(close, rig); }) == ErrorCode::InsufficientCorrespondences);
    }
}

TEST_CASE("epipolar residual") {
    const StereoRig rect = StereoRig::rectified(CameraIntrinsics(600, 600, 111.5, 111.5), 0.06);
    CHECK(std::abs(epipolar_residual({100, 50}, {90, 50}, rect)) < 1e-12);
    CHECK(std::abs(epipolar_residual({100, 50}, {90, 51}, rect)) > 1e-9);

    std::mt19937_64 rng(6);
    for (int i = 0; i < 1000; ++i) {
        const StereoRig rig = random_general_rig(rng);
        const Vec3 x(uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), uniform(rng, 0.4, 3.0));
        const auto p = observe(x, {}, rig, false);
        CHECK(std::abs(epipolar_residual(p.left, p.right, rig)) < 1e-9);
    }
}

TEST_CASE("matching synthetic maps") {
    std::mt19937_64 rng(7);
    NocsMap l(20, 40, NocsView::front), r(20, 40, NocsView::front);
    for (int row = 0; row < 20; ++row) {
        for (int col = 15; col < 35; ++col) {
            if (rng() % 4 == 0) continue;
            const NocsPoint q = uniform_vec(rng, 0, 1);
            l.set(row, col, q);
            r.set(row, col - 10, q);
        }
    }
    const CorrespondenceSet m = match_nocs_maps(l, r);
    CHECK(m.size() == l.masked_count());
    for (const auto& p : m) {
        CHECK(p.right.u == p.left.u - 10);
        CHECK(p.right.v == p.left.v);
        CHECK(p.nocs == l.at(static_cast<int>(p.left.v), static_cast<int>(p.left.u)));
    }

    NocsMap far(20, 40, NocsView::front);
    far.set(3, 3, {5, 5, 5});
    CHECK(match_nocs_maps(l, far).empty());

    NocsMap back(20, 40, NocsView::back);
    back.set(0, 0, {0.5, 0.5, 0.5});
    CHECK(code_of([&] { match_nocs_maps(l, back); }) == ErrorCode::ViewTagMismatch);
    CHECK(code_of([&] { match_nocs_maps(l, NocsMap(20, 40, NocsView::front)); }) == ErrorCode::EmptyMask);
    CHECK(code_of([&] { match_nocs_maps(l, NocsMap(20, 41, NocsView::front)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("matching is one-to-one and symmetric on noisy maps") {
    std::mt19937_64 rng(8);
    NocsMap l(16, 16, NocsView::front), r(16, 16, NocsView::front);
    for (int row = 0; row < 16; ++row) {
        for (int col = 0; col < 16; ++col) {
            // Dense coordinates on a coarse lattice so that many candidates compete.
            l.set(row, col, Vec3(col / 60.0, row / 60.0, 0.5) + uniform_vec(rng, -0.004, 0.004));
            r.set(row, col, Vec3(col / 60.0, row / 60.0, 0.5) + uniform_vec(rng, -0.004, 0.004));
        }
    }
    const CorrespondenceSet lr = match_nocs_maps(l, r);
    const CorrespondenceSet rl = match_nocs_maps(r, l);
    std::set<std::pair<double, double>> seen_l, seen_r;
    for (const auto& p : lr) {
        CHECK(seen_l.insert({p.left.u, p.left.v}).second);
        CHECK(seen_r.insert({p.right.u, p.right.v}).second);
    }
    std::set<std::array<double, 4>> a, b;
    for (const auto& p : lr) a.insert({p.left.u, p.left.v, p.right.u, p.right.v});
    for (const auto& p : rl) b.insert({p.right.u, p.right.v, p.left.u, p.left.v});
    CHECK(a == b);
    CHECK(lr.size() > 100);
}

TEST_CASE("rendered sphere: depths and triangulated points respect the quantization bound") {
    const SphereStereo s;
    const CorrespondenceSet m = with_depths(match_nocs_maps(s.left.front, s.right.front), s.rig);
    REQUIRE(m.size() > 200);
    const double fb = s.rig.left.fx * s.rig.baseline;
    const double radius = 0.05;
    for (const auto& p : m) {
        const double disp = (p.left.vec() - p.right.vec()).norm();
        const double bound = fb / (disp * (disp - 1.0));
        const int row = static_cast<int>(p.left.v), col = static_cast<int>(p.left.u);
        const Vec3 dir = pixel_ray_direction(p.left, s.rig.left);
        const double true_depth = s.left.front_distance[static_cast<std::size_t>(row) * 128 + col] * dir.z();
        CHECK(std::abs(disparity_depth(p, s.rig) - true_depth) <= bound);
        const Vec3 x = correspondence_point(p, s.rig);
        CHECK(std::abs((x - s.center).norm() - radius) <= 2.0 * bound);
    }
}

#include <doctest.h>

#include <Eigen/Geometry>
#include <algorithm>
#include <numeric>

#include "stereonocs/error.hpp"
#include "stereonocs/harness/scene.hpp"
#include "stereonocs/solver.hpp"
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

const CameraIntrinsics kCam(600, 600, 320, 240, 640, 480);

Pose random_object_pose(std::mt19937_64& rng, double scale = 1.0) {
    const Rotation r = random_rotation(rng);
    const Vec3 center(uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1), uniform(rng, 0.6, 1.5));
    return Pose(scale, r, center - scale * (r * Vec3::Constant(0.5)));
}

struct PnPData {
    std::vector<Pixel> pixels;
    std::vector<Vec3> points;
};

PnPData exact_pnp(const Pose& pose, std::size_t n, std::mt19937_64& rng) {
    PnPData d;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 p = uniform_vec(rng, 0, 0.2);
        d.points.push_back(p);
        d.pixels.push_back(project_point(pose.rotation * p + pose.translation, kCam));
    }
    return d;
}

}  // namespace

TEST_CASE("P3P returns the generating pose among its candidates") {
    std::mt19937_64 rng(1);
    int found = 0;
    for (int i = 0; i < 200; ++i) {
        const Pose pose = random_object_pose(rng);
        std::array<Vec3, 3> pts, bearings;
        for (int k = 0; k < 3; ++k) {
            pts[k] = uniform_vec(rng, 0, 1);
            bearings[k] = (pose.rotation * pts[k] + pose.translation).normalized();
        }
        const auto cands = solve_p3p(std::span<const Vec3, 3>(bearings), std::span<const Vec3, 3>(pts));
        CHECK(cands.size() <= 4);
        bool hit = false;
        for (const auto& c : cands) {
            hit |= c.rotation.angle_to(pose.rotation) < 1e-7 && (c.translation - pose.translation).norm() < 1e-7;
        }
        found += hit;
    }
    CHECK(found == 200);
}

TEST_CASE("RANSAC PnP on exact data") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
        const Pose pose = random_object_pose(rng);
        const PnPData d = exact_pnp(pose, 50, rng);
        const PoseEstimate est = solve_pnp_ransac(d.pixels, d.points, kCam, {});
        CHECK(est.pose.rotation.angle_to(pose.rotation) < 1e-6);
        CHECK((est.pose.translation - pose.translation).norm() < 1e-6);
        CHECK(est.pose.scale == 1.0);
        CHECK(est.inlier_count == 50);
        CHECK(est.mean_residual >= 0.0);
    }
}

TEST_CASE("RANSAC PnP with 30% gross outliers") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
        const Pose pose = random_object_pose(rng);
        PnPData d = exact_pnp(pose, 70, rng);
        std::vector<std::size_t> outliers;
        for (std::size_t k = 0; k < 30; ++k) {
            d.points.push_back(uniform_vec(rng, 0, 0.2));
            d.pixels.push_back({uniform(rng, 0, 639), uniform(rng, 0, 479)});
            outliers.push_back(70 + k);
        }
        RansacPnPConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(i);
        const PoseEstimate est = solve_pnp_ransac(d.pixels, d.points, kCam, cfg);
        CHECK(est.pose.rotation.angle_to(pose.rotation) < 1e-6);
        CHECK((est.pose.translation - pose.translation).norm() < 1e-6);
        CHECK(est.inlier_count <= d.points.size());
        for (std::size_t o : outliers) {
            const Pixel p = project_point(pose.rotation * d.points[o] + pose.translation, kCam);
            if (std::hypot(p.u - d.pixels[o].u, p.v - d.pixels[o].v) > 2.0) {
                CHECK(!std::binary_search(est.inliers.begin(), est.inliers.end(), o));
            }
        }
        for (std::size_t k = 0; k < 70; ++k) CHECK(std::binary_search(est.inliers.begin(), est.inliers.end(), k));
    }
}

TEST_CASE("RANSAC PnP is deterministic in its seed") {
    std::mt19937_64 rng(4);
    const Pose pose = random_object_pose(rng);
    PnPData d = exact_pnp(pose, 60, rng);
    for (auto& p : d.pixels) p.u += uniform(rng, -0.7, 0.7), p.v += uniform(rng, -0.7, 0.7);
    for (int k = 0; k < 20; ++k) d.pixels[static_cast<std::size_t>(k)] = {uniform(rng, 0, 639), uniform(rng, 0, 479)};
    RansacPnPConfig cfg;
    cfg.seed = 99;
    const PoseEstimate a = solve_pnp_ransac(d.pixels, d.points, kCam, cfg);
    const PoseEstimate b = solve_pnp_ransac(d.pixels, d.points, kCam, cfg);
    CHECK(a.inliers == b.inliers);
    CHECK(a.pose.rotation.matrix() == b.pose.rotation.matrix());
    CHECK(a.pose.translation == b.pose.translation);
}

TEST_CASE("refinement on a fixed inlier set is permutation invariant") {
    std::mt19937_64 rng(5);
    const Pose pose = random_object_pose(rng);
    PnPData d = exact_pnp(pose, 40, rng);
    for (auto& p : d.pixels) p.u += uniform(rng, -0.5, 0.5), p.v += uniform(rng, -0.5, 0.5);
    const RigidCandidate init{pose.rotation * Rotation::about_x(0.01), pose.translation + Vec3(0.002, 0, 0)};
    const RigidCandidate a = refine_pose_reprojection(d.pixels, d.points, kCam, init);

    std::vector<std::size_t> perm(d.points.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    PnPData p;
    for (std::size_t i : perm) p.pixels.push_back(d.pixels[i]), p.points.push_back(d.points[i]);
    const RigidCandidate b = refine_pose_reprojection(p.pixels, p.points, kCam, init);
    CHECK(a.rotation.angle_to(b.rotation) < 1e-9);
    CHECK((a.translation - b.translation).norm() < 1e-9);
}

TEST_CASE("PnP input errors") {
    std::vector<Pixel> px(3, Pixel{1, 1});
    std::vector<Vec3> pts{Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(0, 1, 1)};
    CHECK(code_of([&] { solve_pnp_ransac(px, pts, kCam); }) == ErrorCode::InsufficientPoints);

    std::vector<Pixel> px6(6, Pixel{320, 240});
    std::vector<Vec3> line;
    for (int i = 0; i < 6; ++i) line.emplace_back(0, 0, 0.1 * i);
    CHECK(code_of([&] { solve_pnp_ransac(px6, line, kCam); }) == ErrorCode::DegenerateConfiguration);

    RansacPnPConfig bad;
    bad.confidence = 1.0;
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidParams);
    bad = {};
    bad.inlier_threshold = 0.0;
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidParams);
}

TEST_CASE("translation rescaling") {
    // q = 0 contributes nothing to depth: mean depth 0.5 -> 1.0 doubles t.
    const std::vector<NocsPoint> origin(4, NocsPoint::Zero());
    const Pose p(0.3, Rotation::about_y(0.4), {0.1, 0.05, 0.5});
    const Pose r = rescale_translation(p, 1.0, origin);
    CHECK((r.translation - 2.0 * p.translation).norm() < 1e-15);
    CHECK(r.scale == p.scale);
    CHECK(r.rotation.matrix() == p.rotation.matrix());

    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) {
        const Pose pose = random_object_pose(rng, uniform(rng, 0.05, 0.3));
        std::vector<NocsPoint> q;
        for (int k = 0; k < 30; ++k) q.push_back(uniform_vec(rng, 0, 1));
        double current = 0.0;
        for (const auto& x : q) current += pose.apply(x).z();
        current /= 30.0;

        const Pose same = rescale_translation(pose, current, q);
        CHECK((same.translation - pose.translation).norm() < 1e-12);

        const double target = uniform(rng, 0.5, 2.0);
        const Pose out = rescale_translation(pose, target, q);
        double mean = 0.0;
        for (const auto& x : q) mean += out.apply(x).z();
        CHECK(std::abs(mean / 30.0 - target) < 1e-9);
        CHECK((out.translation.normalized() - pose.translation.normalized()).norm() < 1e-12);
    }
    CHECK(code_of([&] { rescale_translation(p, -1.0, origin); }) == ErrorCode::NonPositiveDepth);
}

TEST_CASE("similarity fit: exact data, identity and reflection trap") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const Pose pose(uniform(rng, 0.05, 2.0), random_rotation(rng), uniform_vec(rng, -1, 1));
        std::vector<NocsPoint> src;
        std::vector<Vec3> dst;
        for (int k = 0; k < 20; ++k) {
            src.push_back(uniform_vec(rng, 0, 1));
            dst.push_back(pose.apply(src.back()));
        }
        const Pose fit = fit_similarity_3d3d(src, dst);
        CHECK(std::abs(fit.scale - pose.scale) < 1e-9);
        CHECK(fit.rotation.angle_to(pose.rotation) < 1e-9);
        CHECK((fit.translation - pose.translation).norm() < 1e-9);
        for (std::size_t k = 0; k < src.size(); ++k) CHECK((fit.apply(src[k]) - dst[k]).norm() < 1e-9);
    }

    std::vector<NocsPoint> src{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(0.3, 0.2, 0.9)};
    const Pose id = fit_similarity_3d3d(src, std::vector<Vec3>(src.begin(), src.end()));
    CHECK(std::abs(id.scale - 1.0) < 1e-12);
    CHECK(id.rotation.angle_to(Rotation()) < 1e-12);
    CHECK(id.translation.norm() < 1e-12);

    std::vector<Vec3> mirrored;
    for (const auto& q : src) mirrored.push_back(Vec3(-q.x(), q.y(), q.z()));
    const Pose m = fit_similarity_3d3d(src, mirrored);
    CHECK(m.rotation.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("similarity fit agrees with Eigen's Umeyama on noisy data") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const Pose pose(uniform(rng, 0.05, 2.0), random_rotation(rng), uniform_vec(rng, -1, 1));
        const int n = 30;
        std::vector<NocsPoint> src;
        std::vector<Vec3> dst;
        Eigen::Matrix3Xd a(3, n), b(3, n);
        for (int k = 0; k < n; ++k) {
            src.push_back(uniform_vec(rng, 0, 1));
            dst.push_back(pose.apply(src.back()) + uniform_vec(rng, -0.02, 0.02));
            a.col(k) = src.back();
            b.col(k) = dst.back();
        }
        const Eigen::Matrix4d t = Eigen::umeyama(a, b, true);
        const double s = t.block<3, 1>(0, 0).norm();
        const Pose fit = fit_similarity_3d3d(src, dst);
        CHECK(std::abs(fit.scale - s) < 1e-9);
        CHECK((fit.rotation.matrix() - t.block<3, 3>(0, 0) / s).norm() < 1e-9);
        CHECK((fit.translation - t.block<3, 1>(0, 3)).norm() < 1e-9);
    }
}

TEST_CASE("similarity fit errors") {
    std::vector<NocsPoint> two{Vec3(0, 0, 0), Vec3(1, 0, 0)};
    CHECK(code_of([&] { fit_similarity_3d3d(two, std::vector<Vec3>(2)); }) == ErrorCode::InsufficientPoints);
    std::vector<NocsPoint> line{Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2), Vec3(3, 3, 3)};
    CHECK(code_of([&] { fit_similarity_3d3d(line, std::vector<Vec3>(line.begin(), line.end())); }) ==
          ErrorCode::DegenerateConfiguration);
}

TEST_CASE("decoupled and joint pipelines on analytic correspondences") {
    const StereoRig rig = StereoRig::rectified(CameraIntrinsics(600, 600, 111.5, 111.5, 224, 224), 0.06);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 10; ++i) {
        const Pose pose = random_object_pose(rng, uniform(rng, 0.1, 0.3));
        DecoupledInputs in;
        for (int k = 0; k < 200; ++k) {
            const NocsPoint q = uniform_vec(rng, 0, 1);
            const Vec3 x = pose.apply(q);
            CorrespondencePair p;
            p.left = project_point(x, rig.left);
            p.right = project_point(rig.r_lr * x + rig.t_lr, rig.right);
            p.nocs = q;
            in.stereo_matches.push_back(p);
            in.pnp_pixels.push_back(p.left);
            in.pnp_nocs.push_back(q);
        }
        const PoseEstimate d = estimate_pose_decoupled(in, rig);
        CHECK(d.method == PoseMethod::decoupled);
        CHECK(std::abs(d.pose.scale / pose.scale - 1.0) < 1e-6);
        CHECK(rad_to_deg(d.pose.rotation.angle_to(pose.rotation)) < 1e-4);
        CHECK((d.pose.translation - pose.translation).norm() < 1e-6);

        const PoseEstimate j = estimate_pose_joint(in.stereo_matches, rig);
        CHECK(j.method == PoseMethod::joint);
        CHECK(std::abs(j.pose.scale / pose.scale - 1.0) < 1e-6);
        CHECK(rad_to_deg(j.pose.rotation.angle_to(pose.rotation)) < 1e-4);
        CHECK((j.pose.translation - pose.translation).norm() < 1e-6);
    }
}

TEST_CASE("pipeline errors") {
    const StereoRig rig = StereoRig::rectified(CameraIntrinsics(600, 600, 111.5, 111.5, 224, 224), 0.06);
    CorrespondenceSet two(2);
    two[0].left = {10, 10}, two[0].right = {5, 10};
    two[1].left = {20, 10}, two[1].right = {15, 10};
    CHECK(code_of([&] { estimate_pose_joint(two, rig); }) == ErrorCode::InsufficientPoints);

    const NocsMap empty(224, 224, NocsView::front), empty_back(224, 224, NocsView::back);
    CHECK(code_of([&] { estimate_pose_decoupled(empty, empty_back, empty, empty_back, rig); }) == ErrorCode::EmptyMask);
    CHECK(code_of([&] { estimate_pose_joint(empty, empty, rig); }) == ErrorCode::EmptyMask);
}

TEST_CASE("rendered scene: both pipelines land near the true pose") {
    // Loose sanity bounds; the rendered-recovery tolerances are checked by the acceptance binary.
    harness::SceneConfig cfg;
    cfg.category = harness::Category::mug;
    cfg.shape = harness::ShapeRanges::defaults(cfg.category);
    const harness::Scene scene = harness::sample_scene(cfg, 12);
    const harness::StereoMaps maps = harness::render_scene_nocs(scene).maps();
    const PoseEstimate d =
        estimate_pose_decoupled(maps.left_front, maps.left_back, maps.right_front, maps.right_back, scene.rig);
    const PoseEstimate j = estimate_pose_joint(maps.left_front, maps.right_front, scene.rig);
    // Joint rotation is tilted by the quantized depths; PnP rotation is not.
    CHECK(rad_to_deg(d.pose.rotation.angle_to(scene.pose.rotation)) < 0.5);
    CHECK(rad_to_deg(j.pose.rotation.angle_to(scene.pose.rotation)) < 5.0);
    for (const Pose& p : {d.pose, j.pose}) {
        CHECK(std::abs(p.scale / scene.pose.scale - 1.0) < 0.1);
        CHECK((p.apply(Vec3::Constant(0.5)) - scene.pose.apply(Vec3::Constant(0.5))).norm() < 0.02);
    }
}

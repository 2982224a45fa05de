#include "stereonocs/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "stereonocs/error.hpp"

namespace stereonocs {

std::string_view to_string(PoseMethod m) {
    switch (m) {
        case PoseMethod::decoupled: return "decoupled";
        case PoseMethod::joint: return "joint";
        case PoseMethod::pnp: return "pnp";
    }
    return "unknown";
}

void RansacPnPConfig::validate() const {
    if (!(confidence > 0.0 && confidence < 1.0)) throw Error(ErrorCode::InvalidParams, "confidence must be in (0,1)");
    if (!(inlier_threshold > 0.0)) throw Error(ErrorCode::InvalidParams, "inlier threshold must be positive");
    if (sample_size != 4) throw Error(ErrorCode::InvalidParams, "the minimal solver uses exactly 4 points");
    if (max_iterations == 0) throw Error(ErrorCode::InvalidParams, "max_iterations must be positive");
}

namespace {

struct Similarity {
    double scale;
    Mat3 rotation;
    Vec3 translation;
};

// Centered cross-covariance SVD with reflection correction.
Similarity align_points(std::span<const Vec3> src, std::span<const Vec3> dst, bool with_scale) {
    const auto n = static_cast<double>(src.size());
    Vec3 mu_s = Vec3::Zero(), mu_d = Vec3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) mu_s += src[i], mu_d += dst[i];
    mu_s /= n;
    mu_d /= n;

    Mat3 cov = Mat3::Zero();
    double var_s = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Vec3 a = src[i] - mu_s;
        cov += (dst[i] - mu_d) * a.transpose();
        var_s += a.squaredNorm();
    }
    cov /= n;
    var_s /= n;

    Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vec3 signs = Vec3::Ones();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) signs.z() = -1.0;
    const Mat3 r = svd.matrixU() * signs.asDiagonal() * svd.matrixV().transpose();
    const double s = with_scale ? svd.singularValues().dot(signs) / var_s : 1.0;
    return {s, r, mu_d - s * r * mu_s};
}

bool collinear(std::span<const Vec3> pts) {
    Vec3 mu = Vec3::Zero();
    for (const auto& p : pts) mu += p;
    mu /= static_cast<double>(pts.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : pts) cov += (p - mu) * (p - mu).transpose();
    const Vec3 sv = Eigen::JacobiSVD<Mat3>(cov).singularValues();
    return !(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0];
}

// Real roots of c[0] + c[1] x + ... + c[n] x^n.
std::vector<double> real_roots(std::vector<double> c) {
    const double scale = std::accumulate(c.begin(), c.end(), 0.0, [](double m, double x) { return std::max(m, std::abs(x)); });
    if (!(scale > 0.0)) return {};
    while (c.size() > 1 && std::abs(c.back()) <= 1e-14 * scale) c.pop_back();
    const int deg = static_cast<int>(c.size()) - 1;
    if (deg < 1) return {};

    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 0; i < deg; ++i) comp(0, i) = -c[deg - 1 - i] / c[deg];
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);

    auto eval = [&](double x, double& deriv) {
        double p = 0.0;
        deriv = 0.0;
        for (int k = deg; k >= 0; --k) {
            deriv = deriv * x + p;
            p = p * x + c[k];
        }
        return p;
    };

    std::vector<double> roots;
    for (int i = 0; i < deg; ++i) {
        const auto z = es.eigenvalues()[i];
        if (std::abs(z.imag()) > 1e-6 * std::max(1.0, std::abs(z.real()))) continue;
        double x = z.real();
        for (int it = 0; it < 3; ++it) {
            double d = 0.0;
            const double p = eval(x, d);
            if (d == 0.0) break;
            x -= p / d;
        }
        roots.push_back(x);
    }
    return roots;
}

// Polynomial helpers on coefficient vectors (ascending powers).
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

std::vector<double> poly_axpy(double alpha, const std::vector<double>& x, std::vector<double> y) {
    if (y.size() < x.size()) y.resize(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
    return y;
}

double reprojection_error(const Pixel& px, const Vec3& xc, const CameraIntrinsics& K) {
    if (!(xc.z() > kMinDepth)) return std::numeric_limits<double>::infinity();
    const double du = K.fx * xc.x() / xc.z() + K.cx - px.u;
    const double dv = K.fy * xc.y() / xc.z() + K.cy - px.v;
    return std::sqrt(du * du + dv * dv);
}

struct Consensus {
    std::vector<std::size_t> inliers;
    double residual_sum = 0.0;
};

Consensus score(std::span<const Pixel> pixels, std::span<const Vec3> points, const CameraIntrinsics& K,
                const Mat3& r, const Vec3& t, double threshold) {
    Consensus c;
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const double e = reprojection_error(pixels[i], r * points[i] + t, K);
        if (e < threshold) {
            c.inliers.push_back(i);
            c.residual_sum += e;
        }
    }
    return c;
}

Mat3 so3_exp(const Vec3& w) {
    const double angle = w.norm();
    if (angle < 1e-300) return Mat3::Identity();
    return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

}  // namespace

std::vector<RigidCandidate> solve_p3p(std::span<const Vec3, 3> f, std::span<const Vec3, 3> p) {
    const double a2 = (p[1] - p[2]).squaredNorm();
    const double b2 = (p[0] - p[2]).squaredNorm();
    const double c2 = (p[0] - p[1]).squaredNorm();
    if (!(a2 > 0.0 && b2 > 0.0 && c2 > 0.0)) return {};
    const double ca = f[1].dot(f[2]);
    const double cb = f[0].dot(f[2]);
    const double cg = f[0].dot(f[1]);

    // Depths s2 = u s1, s3 = v s1. The law of cosines on the three sides gives
    // u = N(v) / D(v) and a quartic in v once u is substituted back.
    const double k = (a2 - c2) / b2;
    const std::vector<double> num{1.0 + k, -2.0 * k * cb, k - 1.0};
    const std::vector<double> den{2.0 * cg, -2.0 * ca};
    const std::vector<double> side_b{1.0, -2.0 * cb, 1.0};  // 1 + v^2 - 2 v cos(beta)

    const auto nn = poly_mul(num, num);
    const auto nd = poly_mul(num, den);
    const auto dd = poly_mul(den, den);
    auto quartic = poly_axpy(-2.0 * cg, nd, nn);
    quartic = poly_axpy(1.0, dd, quartic);
    quartic = poly_axpy(-c2 / b2, poly_mul(side_b, dd), quartic);

    std::vector<RigidCandidate> out;
    for (double v : real_roots(quartic)) {
        if (!(v > 0.0)) continue;
        const double d = den[0] + den[1] * v;
        if (std::abs(d) < 1e-12) continue;
        const double u = (num[0] + num[1] * v + num[2] * v * v) / d;
        if (!(u > 0.0)) continue;
        const double sb = side_b[0] + side_b[1] * v + side_b[2] * v * v;
        if (!(sb > 0.0)) continue;
        const double s1 = std::sqrt(b2 / sb);
        const std::array<Vec3, 3> cam{s1 * f[0], u * s1 * f[1], v * s1 * f[2]};
        const Similarity sim = align_points(p, cam, false);
        if (!sim.rotation.allFinite() || !sim.translation.allFinite()) continue;
        out.push_back({Rotation::from_matrix_unchecked(sim.rotation), sim.translation});
    }
    return out;
}

RigidCandidate refine_pose_reprojection(std::span<const Pixel> pixels, std::span<const Vec3> points,
                                        const CameraIntrinsics& K, const RigidCandidate& initial,
                                        int max_iterations) {
    using Vec6 = Eigen::Matrix<double, 6, 1>;
    using Mat6 = Eigen::Matrix<double, 6, 6>;

    Mat3 r = initial.rotation.matrix();
    Vec3 t = initial.translation;

    auto cost_of = [&](const Mat3& rr, const Vec3& tt) {
        double c = 0.0;
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            const Vec3 x = rr * points[i] + tt;
            if (!(x.z() > kMinDepth)) return std::numeric_limits<double>::infinity();
            const double du = K.fx * x.x() / x.z() + K.cx - pixels[i].u;
            const double dv = K.fy * x.y() / x.z() + K.cy - pixels[i].v;
            c += du * du + dv * dv;
        }
        return c;
    };

    double cost = cost_of(r, t);
    double lambda = 1e-6;
    for (int it = 0; it < max_iterations && std::isfinite(cost) && cost > 0.0; ++it) {
        Mat6 h = Mat6::Zero();
        Vec6 g = Vec6::Zero();
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            const Vec3 rx = r * points[i];
            const Vec3 x = rx + t;
            const double iz = 1.0 / x.z();
            const double du = K.fx * x.x() * iz + K.cx - pixels[i].u;
            const double dv = K.fy * x.y() * iz + K.cy - pixels[i].v;
            Eigen::Matrix<double, 2, 3> dp;
            dp << K.fx * iz, 0.0, -K.fx * x.x() * iz * iz, 0.0, K.fy * iz, -K.fy * x.y() * iz * iz;
            Eigen::Matrix<double, 3, 6> dx;
            dx.leftCols<3>() = -skew(rx);
            dx.rightCols<3>() = Mat3::Identity();
            const Eigen::Matrix<double, 2, 6> j = dp * dx;
            h += j.transpose() * j;
            g += j.transpose() * Eigen::Vector2d(du, dv);
        }

        bool improved = false;
        for (int attempt = 0; attempt < 10 && !improved; ++attempt) {
            Mat6 damped = h;
            damped.diagonal() += lambda * h.diagonal().cwiseMax(1e-12);
            const Vec6 step = -damped.ldlt().solve(g);
            if (!step.allFinite()) break;
            const Mat3 r_new = so3_exp(step.head<3>()) * r;
            const Vec3 t_new = t + step.tail<3>();
            const double c_new = cost_of(r_new, t_new);
            if (c_new <= cost) {
                const bool tiny = step.norm() < 1e-15 * (1.0 + t.norm());
                r = r_new;
                t = t_new;
                const double rel = cost - c_new;
                cost = c_new;
                lambda = std::max(lambda * 0.1, 1e-12);
                improved = true;
                if (tiny || rel <= 1e-20 * (1.0 + cost)) it = max_iterations;
            } else {
                lambda *= 10.0;
            }
        }
        if (!improved) break;
    }
    return {Rotation::project(r), t};
}

PoseEstimate solve_pnp_ransac(std::span<const Pixel> pixels, std::span<const Vec3> points,
                              const CameraIntrinsics& K, const RansacPnPConfig& cfg) {
    cfg.validate();
    if (pixels.size() != points.size()) throw Error(ErrorCode::ShapeMismatch, "pixel and point lists differ in length");
    const std::size_t n = pixels.size();
    if (n < cfg.sample_size) throw Error(ErrorCode::InsufficientPoints, "PnP needs at least 4 correspondences");
    if (collinear(points)) throw Error(ErrorCode::DegenerateConfiguration, "3D points are collinear");

    std::vector<Vec3> bearings(n);
    const Mat3 kinv = K.inverse_matrix();
    for (std::size_t i = 0; i < n; ++i) bearings[i] = (kinv * pixels[i].homogeneous()).normalized();

    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    Consensus best;
    bool have_best = false;
    RigidCandidate best_model;
    std::size_t needed = cfg.max_iterations;

    for (std::size_t iter = 0; iter < std::min(needed, cfg.max_iterations); ++iter) {
        std::array<std::size_t, 4> idx{};
        for (std::size_t k = 0; k < 4; ++k) {
            do {
                idx[k] = pick(rng);
            } while (std::find(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx[k]) !=
                     idx.begin() + static_cast<std::ptrdiff_t>(k));
        }
        const std::array<Vec3, 3> f{bearings[idx[0]], bearings[idx[1]], bearings[idx[2]]};
        const std::array<Vec3, 3> p{points[idx[0]], points[idx[1]], points[idx[2]]};
        if ((p[1] - p[0]).cross(p[2] - p[0]).norm() <= 1e-12 * (p[1] - p[0]).squaredNorm()) continue;

        const auto candidates = solve_p3p(f, p);
        const RigidCandidate* chosen = nullptr;
        double chosen_err = std::numeric_limits<double>::infinity();
        for (const auto& c : candidates) {
            const double e = reprojection_error(pixels[idx[3]], c.rotation * points[idx[3]] + c.translation, K);
            if (e < chosen_err) {
                chosen_err = e;
                chosen = &c;
            }
        }
        if (!chosen) continue;

        Consensus cons = score(pixels, points, K, chosen->rotation.matrix(), chosen->translation, cfg.inlier_threshold);
        const bool better = !have_best || cons.inliers.size() > best.inliers.size() ||
                            (cons.inliers.size() == best.inliers.size() && cons.residual_sum < best.residual_sum);
        if (!better) continue;
        best = std::move(cons);
        best_model = *chosen;
        have_best = true;

        const double w = static_cast<double>(best.inliers.size()) / static_cast<double>(n);
        const double miss = 1.0 - std::pow(w, 4.0);
        if (miss <= 0.0) {
            needed = 0;
        } else if (miss < 1.0) {
            needed = static_cast<std::size_t>(std::ceil(std::log(1.0 - cfg.confidence) / std::log(miss)));
        }
    }
    if (!have_best || best.inliers.size() < cfg.sample_size) {
        throw Error(ErrorCode::NoConsensus, "no hypothesis reached the minimal inlier count");
    }

    RigidCandidate model = best_model;
    std::vector<std::size_t> inliers = best.inliers;
    for (int round = 0; round < 4; ++round) {
        std::vector<Pixel> in_px;
        std::vector<Vec3> in_pt;
        for (std::size_t i : inliers) in_px.push_back(pixels[i]), in_pt.push_back(points[i]);
        model = refine_pose_reprojection(in_px, in_pt, K, model);
        Consensus again = score(pixels, points, K, model.rotation.matrix(), model.translation, cfg.inlier_threshold);
        if (again.inliers.size() < cfg.sample_size) break;
        const bool same = again.inliers == inliers;
        inliers = std::move(again.inliers);
        if (same) break;
    }

    PoseEstimate est;
    est.pose = Pose(1.0, model.rotation, model.translation);
    est.inliers = inliers;
    est.inlier_count = inliers.size();
    double sum = 0.0;
    for (std::size_t i : inliers) sum += reprojection_error(pixels[i], model.rotation * points[i] + model.translation, K);
    est.mean_residual = inliers.empty() ? 0.0 : sum / static_cast<double>(inliers.size());
    est.method = PoseMethod::pnp;
    return est;
}

Pose rescale_translation(const Pose& pose, double target_mean_depth, std::span<const NocsPoint> nocs_points) {
    if (nocs_points.empty()) throw Error(ErrorCode::InsufficientPoints, "no points to measure the mean depth");
    if (!(target_mean_depth > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "target mean depth must be positive");
    double rotated_z = 0.0;
    double current = 0.0;
    for (const auto& q : nocs_points) {
        const double z = pose.scale * (pose.rotation.matrix().row(2).dot(q));
        rotated_z += z;
        current += z + pose.translation.z();
    }
    rotated_z /= static_cast<double>(nocs_points.size());
    current /= static_cast<double>(nocs_points.size());
    if (!(current > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "current mean depth is not positive");
    if (!(pose.translation.z() > kMinDepth)) throw Error(ErrorCode::NonPositiveDepth, "translation depth must exceed 1e-9");
    if (target_mean_depth == current) return pose;

    const double alpha = (target_mean_depth - rotated_z) / pose.translation.z();
    if (!(alpha > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "rescaling would flip the translation");
    return Pose(pose.scale, pose.rotation, alpha * pose.translation);
}

Pose fit_similarity_3d3d(std::span<const NocsPoint> src, std::span<const Vec3> dst) {
    if (src.size() != dst.size()) throw Error(ErrorCode::ShapeMismatch, "point lists differ in length");
    if (src.size() < 3) throw Error(ErrorCode::InsufficientPoints, "similarity fit needs at least 3 pairs");
    if (collinear(src)) throw Error(ErrorCode::DegenerateConfiguration, "source points are collinear");
    const Similarity sim = align_points(src, dst, true);
    if (!(sim.scale > 0.0) || !std::isfinite(sim.scale)) {
        throw Error(ErrorCode::DegenerateConfiguration, "similarity fit produced a non-positive scale");
    }
    return Pose(sim.scale, Rotation::from_matrix_unchecked(sim.rotation), sim.translation);
}

// --- pipelines --------------------------------------------------------------

namespace {

void append_masked(const NocsMap& map, std::vector<Pixel>& pixels, std::vector<NocsPoint>& nocs) {
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c) {
            if (!map.masked(r, c)) continue;
            pixels.push_back({static_cast<double>(c), static_cast<double>(r)});
            nocs.push_back(map.at(r, c));
        }
    }
}

double mean_reprojection(const CorrespondenceSet& corr, const Pose& pose, const CameraIntrinsics& K) {
    double sum = 0.0;
    for (const auto& c : corr) sum += reprojection_error(c.left, pose.apply(c.nocs), K);
    return corr.empty() ? 0.0 : sum / static_cast<double>(corr.size());
}

}  // namespace

PoseEstimate estimate_pose_decoupled(const DecoupledInputs& in, const StereoRig& rig, const DecoupledConfig& cfg) {
    const CorrespondenceSet matches = with_depths(in.stereo_matches, rig);
    const ScaleEstimate scale = estimate_scale(matches, rig, cfg.scale);

    std::vector<Vec3> model(in.pnp_nocs.size());
    for (std::size_t i = 0; i < model.size(); ++i) model[i] = scale.scale * in.pnp_nocs[i];
    PoseEstimate pnp = solve_pnp_ransac(in.pnp_pixels, model, rig.left, cfg.ransac);

    std::vector<NocsPoint> depth_points;
    double depth_sum = 0.0;
    for (const auto& m : matches) {
        if (m.view == NocsView::back && !cfg.back_for_depth_target) continue;
        depth_points.push_back(m.nocs);
        depth_sum += *m.depth;
    }
    if (depth_points.empty()) throw Error(ErrorCode::InsufficientCorrespondences, "no matches for the depth target");
    const Pose unscaled(scale.scale, pnp.pose.rotation, pnp.pose.translation);
    const Pose rescaled = rescale_translation(unscaled, depth_sum / static_cast<double>(depth_points.size()), depth_points);

    PoseEstimate out = std::move(pnp);
    out.pose = rescaled;
    out.method = PoseMethod::decoupled;
    return out;
}

PoseEstimate estimate_pose_decoupled(const NocsMap& left_front, const NocsMap& left_back, const NocsMap& right_front,
                                     const NocsMap& right_back, const StereoRig& rig, const DecoupledConfig& cfg) {
    DecoupledInputs in;
    in.stereo_matches = match_nocs_maps(left_front, right_front, cfg.match_eps);
    if (cfg.back_for_scale) {
        const auto back = match_nocs_maps(left_back, right_back, cfg.match_eps);
        in.stereo_matches.insert(in.stereo_matches.end(), back.begin(), back.end());
    }
    append_masked(left_front, in.pnp_pixels, in.pnp_nocs);
    if (cfg.back_for_pnp) append_masked(left_back, in.pnp_pixels, in.pnp_nocs);
    return estimate_pose_decoupled(in, rig, cfg);
}

PoseEstimate estimate_pose_joint(const CorrespondenceSet& stereo_matches, const StereoRig& rig) {
    if (stereo_matches.size() < 3) throw Error(ErrorCode::InsufficientPoints, "joint fit needs at least 3 matches");
    const CorrespondenceSet matches = with_depths(stereo_matches, rig);
    if (matches.size() < 3) throw Error(ErrorCode::InsufficientPoints, "fewer than 3 matches with valid depth");
    std::vector<NocsPoint> src;
    std::vector<Vec3> dst;
    for (const auto& m : matches) {
        src.push_back(m.nocs);
        dst.push_back(correspondence_point(m, rig));
    }
    PoseEstimate out;
    out.pose = fit_similarity_3d3d(src, dst);
    out.inlier_count = matches.size();
    out.inliers.resize(matches.size());
    std::iota(out.inliers.begin(), out.inliers.end(), std::size_t{0});
    out.mean_residual = mean_reprojection(matches, out.pose, rig.left);
    out.method = PoseMethod::joint;
    return out;
}

PoseEstimate estimate_pose_joint(const NocsMap& left_front, const NocsMap& right_front, const StereoRig& rig,
                                 double match_eps) {
    return estimate_pose_joint(match_nocs_maps(left_front, right_front, match_eps), rig);
}

}  // namespace stereonocs

#include "stereonocs/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "stereonocs/error.hpp"

namespace stereonocs {

StereoRig::StereoRig(const CameraIntrinsics& kl, const CameraIntrinsics& kr, const Rotation& r, const Vec3& t)
    : left(kl), right(kr), r_lr(r), t_lr(t), baseline(t.norm()) {
    if (!(baseline > 0.0)) throw Error(ErrorCode::InvalidParams, "stereo baseline must be positive");
}

StereoRig StereoRig::rectified(const CameraIntrinsics& K, double baseline) {
    return StereoRig(K, K, Rotation::identity(), Vec3(-baseline, 0.0, 0.0));
}

bool StereoRig::is_rectified(double tol) const {
    return (r_lr.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol;
}

Pose StereoRig::right_pose(const Pose& p) const {
    return Pose(p.scale, r_lr * p.rotation, r_lr * p.translation + t_lr);
}

Mat3 StereoRig::epipolar_form() const {
    const Mat3 motion = r_lr.matrix().transpose();
    return left.inverse_matrix().transpose() * skew(right_center_in_left()) * motion * right.inverse_matrix();
}

double epipolar_residual(const Pixel& left, const Pixel& right, const StereoRig& rig) {
    return left.homogeneous().dot(rig.epipolar_form() * right.homogeneous());
}

// --- matching ---------------------------------------------------------------

namespace {

struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const {
        std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
        h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
        h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

struct MaskedPoints {
    std::vector<std::size_t> pixel;  // row-major pixel index
    std::vector<NocsPoint> coord;
};

MaskedPoints collect(const NocsMap& map) {
    MaskedPoints pts;
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c) {
            if (!map.masked(r, c)) continue;
            pts.pixel.push_back(static_cast<std::size_t>(r) * map.width() + c);
            pts.coord.push_back(map.at(r, c));
        }
    }
    return pts;
}

class PointGrid {
public:
    PointGrid(const std::vector<NocsPoint>& pts, double cell) : pts_(pts), cell_(cell) {
        for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(i);
    }

    /// Nearest point within sqrt(max_sq); ties toward the lower index.
    std::optional<std::size_t> nearest(const NocsPoint& q, double max_sq) const {
        const CellKey k = key(q);
        std::optional<std::size_t> best;
        double best_d = INFINITY;
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    const auto it = cells_.find({k.x + dx, k.y + dy, k.z + dz});
                    if (it == cells_.end()) continue;
                    for (std::size_t i : it->second) {
                        const double d = (pts_[i] - q).squaredNorm();
                        if (d > max_sq) continue;
                        if (!best || d < best_d || (d == best_d && i < *best)) {
                            best_d = d;
                            best = i;
                        }
                    }
                }
            }
        }
        return best;
    }

private:
    CellKey key(const NocsPoint& q) const {
        return {static_cast<std::int64_t>(std::floor(q.x() / cell_)), static_cast<std::int64_t>(std::floor(q.y() / cell_)),
                static_cast<std::int64_t>(std::floor(q.z() / cell_))};
    }

    const std::vector<NocsPoint>& pts_;
    double cell_;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

Pixel pixel_of(std::size_t index, int width) {
    return {static_cast<double>(index % static_cast<std::size_t>(width)),
            static_cast<double>(index / static_cast<std::size_t>(width))};
}

}  // namespace

CorrespondenceSet match_nocs_maps(const NocsMap& left, const NocsMap& right, double eps) {
    if (left.height() != right.height() || left.width() != right.width()) {
        throw Error(ErrorCode::ShapeMismatch, "NOCS maps differ in size");
    }
    if (left.view() != right.view()) throw Error(ErrorCode::ViewTagMismatch, "cannot match front against back");
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidParams, "matching tolerance must be positive");

    const MaskedPoints lp = collect(left);
    const MaskedPoints rp = collect(right);
    if (lp.coord.empty() || rp.coord.empty()) throw Error(ErrorCode::EmptyMask, "a NOCS map has no object pixels");

    const double max_sq = eps * eps;
    const PointGrid right_grid(rp.coord, eps);
    const PointGrid left_grid(lp.coord, eps);

    CorrespondenceSet out;
    for (std::size_t i = 0; i < lp.coord.size(); ++i) {
        const auto j = right_grid.nearest(lp.coord[i], max_sq);
        if (!j) continue;
        const auto back = left_grid.nearest(rp.coord[*j], max_sq);
        if (!back || *back != i) continue;
        CorrespondencePair pair;
        pair.left = pixel_of(lp.pixel[i], left.width());
        pair.right = pixel_of(rp.pixel[*j], right.width());
        pair.nocs = lp.coord[i];
        pair.view = left.view();
        out.push_back(pair);
    }
    return out;
}

// --- depth ------------------------------------------------------------------

double disparity_depth(const CorrespondencePair& pair, const StereoRig& rig) {
    if (!rig.is_rectified()) throw Error(ErrorCode::NotRectified, "disparity depth needs a rectified rig");
    const double disparity = (pair.left.vec() - pair.right.vec()).norm();
    if (!(disparity > 1e-6)) throw Error(ErrorCode::ZeroDisparity, "disparity below 1e-6 px");
    return rig.left.fx * rig.baseline / disparity;
}

Vec3 triangulate(const Pixel& left, const Pixel& right, const StereoRig& rig) {
    const Vec3 o1 = Vec3::Zero();
    const Vec3 d1 = rig.left.inverse_matrix() * left.homogeneous();
    const Vec3 o2 = rig.right_center_in_left();
    const Vec3 d2 = rig.r_lr.matrix().transpose() * (rig.right.inverse_matrix() * right.homogeneous());

    // Minimize |o1 + a d1 - (o2 + b d2)| over a, b.
    const double aa = d1.dot(d1), bb = d2.dot(d2), ab = d1.dot(d2);
    const Vec3 w = o1 - o2;
    const double denom = aa * bb - ab * ab;
    if (!(denom > 1e-14 * aa * bb)) throw Error(ErrorCode::ParallelRays, "viewing rays are parallel");
    const double a = (ab * d2.dot(w) - bb * d1.dot(w)) / denom;
    const double b = (aa * d2.dot(w) - ab * d1.dot(w)) / denom;
    return 0.5 * ((o1 + a * d1) + (o2 + b * d2));
}

Vec3 correspondence_point(const CorrespondencePair& pair, const StereoRig& rig) {
    if (pair.depth) return pixel_backproject(pair.left, *pair.depth, rig.left);
    if (rig.is_rectified()) return pixel_backproject(pair.left, disparity_depth(pair, rig), rig.left);
    return triangulate(pair.left, pair.right, rig);
}

CorrespondenceSet with_depths(CorrespondenceSet pairs, const StereoRig& rig) {
    CorrespondenceSet out;
    out.reserve(pairs.size());
    for (auto& p : pairs) {
        try {
            p.depth.reset();
            const Vec3 x = correspondence_point(p, rig);
            if (!(x.z() > kMinDepth)) continue;
            p.depth = x.z();
            out.push_back(p);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroDisparity && e.code() != ErrorCode::ParallelRays &&
                e.code() != ErrorCode::NonPositiveDepth) {
                throw;
            }
        }
    }
    return out;
}

// --- scale ------------------------------------------------------------------

ScaleEstimate estimate_scale(const CorrespondenceSet& corr, const StereoRig& rig, const ScaleOptions& opts) {
    if (corr.size() < 2) throw Error(ErrorCode::InsufficientCorrespondences, "need at least two correspondences");
    std::vector<Vec3> points;
    points.reserve(corr.size());
    for (const auto& c : corr) points.push_back(correspondence_point(c, rig));

    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<std::size_t> pick(0, corr.size() - 1);
    const double min_sep_sq = opts.min_nocs_separation * opts.min_nocs_separation;
    const std::size_t max_attempts = 20 * opts.pair_budget + 1000;

    ScaleEstimate est{0.0, {}};
    est.samples.reserve(opts.pair_budget);
    for (std::size_t attempt = 0; attempt < max_attempts && est.samples.size() < opts.pair_budget; ++attempt) {
        const std::size_t i = pick(rng);
        const std::size_t j = pick(rng);
        if (i == j) continue;
        const double nocs_sq = (corr[i].nocs - corr[j].nocs).squaredNorm();
        if (nocs_sq < min_sep_sq || nocs_sq == 0.0) continue;
        est.samples.push_back((points[i] - points[j]).norm() / std::sqrt(nocs_sq));
    }
    if (est.samples.empty()) {
        throw Error(ErrorCode::InsufficientCorrespondences, "no correspondence pair has enough NOCS separation");
    }

    if (opts.trimmed) {
        std::vector<double> sorted = est.samples;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t cut = sorted.size() / 5;
        const auto first = sorted.begin() + static_cast<std::ptrdiff_t>(cut);
        const auto last = sorted.end() - static_cast<std::ptrdiff_t>(cut);
        est.scale = std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
    } else {
        est.scale = std::accumulate(est.samples.begin(), est.samples.end(), 0.0) /
                    static_cast<double>(est.samples.size());
    }
    return est;
}

}  // namespace stereonocs

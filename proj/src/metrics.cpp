#include "stereonocs/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "stereonocs/error.hpp"

namespace stereonocs {

std::array<Vec3, 8> OrientedBox::corners() const {
    std::array<Vec3, 8> out;
    for (int c = 0; c < 8; ++c) {
        const Vec3 local((c & 1) ? half_extents.x() : -half_extents.x(), (c & 2) ? half_extents.y() : -half_extents.y(),
                         (c & 4) ? half_extents.z() : -half_extents.z());
        out[c] = center + rotation * local;
    }
    return out;
}

bool OrientedBox::contains(const Vec3& x) const {
    const Vec3 local = rotation.matrix().transpose() * (x - center);
    return (local.cwiseAbs().array() <= half_extents.array()).all();
}

OrientedBox box_from_pose(const Pose& pose, const Vec3& nocs_extents) {
    if (!(nocs_extents.array() > 0.0).all()) throw Error(ErrorCode::InvalidParams, "box extents must be positive");
    OrientedBox b;
    b.center = pose.apply(Vec3::Constant(0.5));
    b.rotation = pose.rotation;
    b.half_extents = 0.5 * pose.scale * nocs_extents;
    return b;
}

// --- convex polytope clipping ----------------------------------------------

namespace {

using Polygon = std::vector<Vec3>;
using Polytope = std::vector<Polygon>;

Polytope box_polytope(const OrientedBox& b) {
    const auto c = b.corners();
    // Corner index bits: 1 -> +x, 2 -> +y, 4 -> +z.
    static constexpr int faces[6][4] = {{0, 2, 6, 4}, {1, 5, 7, 3}, {0, 4, 5, 1},
                                        {2, 3, 7, 6}, {0, 1, 3, 2}, {4, 6, 7, 5}};
    Polytope p;
    for (const auto& f : faces) p.push_back({c[f[0]], c[f[1]], c[f[2]], c[f[3]]});
    return p;
}

double polytope_volume(const Polytope& p) {
    Vec3 ref = Vec3::Zero();
    std::size_t n = 0;
    for (const auto& f : p) {
        for (const auto& v : f) ref += v, ++n;
    }
    if (n == 0) return 0.0;
    ref /= static_cast<double>(n);
    double vol = 0.0;
    for (const auto& f : p) {
        for (std::size_t k = 1; k + 1 < f.size(); ++k) {
            vol += std::abs((f[0] - ref).dot((f[k] - ref).cross(f[k + 1] - ref)));
        }
    }
    return vol / 6.0;
}

// Keeps the part with n.x <= d. Points within `tol` of the plane count as inside.
Polytope clip(const Polytope& poly, const Vec3& n, double d, double tol) {
    bool any_outside = false;
    for (const auto& f : poly) {
        for (const auto& v : f) any_outside |= n.dot(v) - d > tol;
    }
    if (!any_outside) return poly;

    Polytope out;
    Polygon cap;
    for (const auto& f : poly) {
        Polygon g;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const Vec3& a = f[i];
            const Vec3& b = f[(i + 1) % f.size()];
            const double da = n.dot(a) - d, db = n.dot(b) - d;
            const bool ina = da <= tol, inb = db <= tol;
            if (ina) g.push_back(a);
            if (ina != inb) {
                const Vec3 x = a + (da / (da - db)) * (b - a);
                g.push_back(x);
                cap.push_back(x);
            }
        }
        if (g.size() >= 3) out.push_back(std::move(g));
    }
    if (cap.size() >= 3) {
        Vec3 mid = Vec3::Zero();
        for (const auto& v : cap) mid += v;
        mid /= static_cast<double>(cap.size());
        const Vec3 e1 = n.unitOrthogonal();
        const Vec3 e2 = n.cross(e1);
        std::sort(cap.begin(), cap.end(), [&](const Vec3& a, const Vec3& b) {
            return std::atan2((a - mid).dot(e2), (a - mid).dot(e1)) < std::atan2((b - mid).dot(e2), (b - mid).dot(e1));
        });
        out.push_back(std::move(cap));
    }
    return out;
}

}  // namespace

double intersection_volume(const OrientedBox& a, const OrientedBox& b) {
    const double scale = std::max(a.half_extents.maxCoeff() + a.center.norm(), b.half_extents.maxCoeff() + b.center.norm());
    const double tol = 1e-12 * scale;
    Polytope inter = box_polytope(a);
    for (int axis = 0; axis < 3 && !inter.empty(); ++axis) {
        const Vec3 n = b.rotation.matrix().col(axis);
        const double c = n.dot(b.center);
        inter = clip(inter, n, c + b.half_extents[axis], tol);
        if (!inter.empty()) inter = clip(inter, -n, -c + b.half_extents[axis], tol);
    }
    return polytope_volume(inter);
}

double iou_3d(const OrientedBox& a, const OrientedBox& b) {
    // Both volumes go through the same polytope routine as the intersection,
    // so identical boxes give exactly 1.
    const double va = polytope_volume(box_polytope(a));
    const double vb = polytope_volume(box_polytope(b));
    const double vi = std::min({intersection_volume(a, b), va, vb});
    const double uni = va + vb - vi;
    return uni > 0.0 ? vi / uni : 0.0;
}

// --- rotation / translation errors -------------------------------------------

SymmetrySpec SymmetrySpec::discrete(int n, const Vec3& axis) {
    if (n < 2) throw Error(ErrorCode::InvalidParams, "discrete symmetry order must be >= 2");
    return {Kind::discrete, axis.normalized(), n};
}

namespace {

double geodesic_deg(const Mat3& a, const Mat3& b) {
    return rad_to_deg(Eigen::AngleAxisd(a * b.transpose()).angle());
}

}  // namespace

double rotation_error_deg(const Rotation& pred, const Rotation& gt, const SymmetrySpec& sym) {
    switch (sym.kind) {
        case SymmetrySpec::Kind::none:
            return geodesic_deg(pred.matrix(), gt.matrix());
        case SymmetrySpec::Kind::continuous: {
            const Vec3 a = pred * sym.axis;
            const Vec3 b = gt * sym.axis;
            return rad_to_deg(std::atan2(a.cross(b).norm(), a.dot(b)));
        }
        case SymmetrySpec::Kind::discrete: {
            double best = 180.0;
            for (int k = 0; k < sym.order; ++k) {
                const Mat3 g = Eigen::AngleAxisd(2.0 * kPi * k / sym.order, sym.axis).toRotationMatrix();
                best = std::min(best, geodesic_deg(pred.matrix(), gt.matrix() * g));
            }
            return best;
        }
    }
    return 180.0;
}

double translation_error_m(const Pose& pred, const Pose& gt) {
    return (pred.apply(Vec3::Constant(0.5)) - gt.apply(Vec3::Constant(0.5))).norm();
}

EvalReport map_at_thresholds(const std::vector<TrialErrors>& trials, const Thresholds& th) {
    if (trials.empty()) throw Error(ErrorCode::EmptyTrials, "no trials to evaluate");
    EvalReport r;
    r.trials = trials.size();
    std::size_t i25 = 0, i50 = 0, t5 = 0, t10 = 0, r10 = 0;
    for (const auto& t : trials) {
        if (t.failed) {
            ++r.failures;
            continue;
        }
        i25 += t.iou >= th.iou_low;
        i50 += t.iou >= th.iou_high;
        const bool rot_ok = t.rot_err_deg <= th.rot_deg;
        r10 += rot_ok;
        t5 += rot_ok && t.trans_err_m <= th.trans_tight_m;
        t10 += rot_ok && t.trans_err_m <= th.trans_loose_m;
    }
    const double n = static_cast<double>(trials.size());
    r.iou25 = static_cast<double>(i25) / n;
    r.iou50 = static_cast<double>(i50) / n;
    r.deg10_cm5 = static_cast<double>(t5) / n;
    r.deg10_cm10 = static_cast<double>(t10) / n;
    r.deg10 = static_cast<double>(r10) / n;
    return r;
}

}  // namespace stereonocs

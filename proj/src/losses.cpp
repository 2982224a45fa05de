#include "stereonocs/losses.hpp"

#include <array>
#include <cmath>

#include "stereonocs/error.hpp"
#include "stereonocs/simd/kernels.hpp"

namespace stereonocs {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct SoaPoints {
    std::vector<double> x, y, z;

    explicit SoaPoints(const PointMatrix& p) {
        x.resize(static_cast<std::size_t>(p.rows()));
        y.resize(x.size());
        z.resize(x.size());
        for (Eigen::Index i = 0; i < p.rows(); ++i) x[i] = p(i, 0), y[i] = p(i, 1), z[i] = p(i, 2);
    }

    simd::Nearest nearest(const double* q) const {
        return simd::nearest_point(x.data(), y.data(), z.data(), x.size(), q[0], q[1], q[2]);
    }
};

}  // namespace

EpipolarLoss loss_epipolar(const std::vector<PixelPair>& pairs, const StereoRig& rig) {
    if (pairs.empty()) throw Error(ErrorCode::EmptyPairList, "epipolar loss needs at least one pair");
    const Mat3 g = rig.epipolar_form();
    const double n = static_cast<double>(pairs.size());
    EpipolarLoss out{0.0, std::vector<PixelPairGradient>(pairs.size())};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const Vec3 pl = pairs[i].left.homogeneous();
        const Vec3 pr = pairs[i].right.homogeneous();
        const Vec3 g_pr = g * pr;
        const Vec3 gt_pl = g.transpose() * pl;
        const double r = pl.dot(g_pr);
        out.value += std::abs(r);
        const double k = sign(r) / n;
        out.gradient[i].left = k * g_pr.head<2>();
        out.gradient[i].right = k * gt_pl.head<2>();
    }
    out.value /= n;
    return out;
}

PointLoss loss_chamfer(const PointMatrix& pred, const PointMatrix& gt) {
    if (pred.rows() == 0 || gt.rows() == 0) throw Error(ErrorCode::EmptySet, "Chamfer distance of an empty set");
    const SoaPoints pred_soa(pred), gt_soa(gt);
    PointLoss out{0.0, PointMatrix::Zero(pred.rows(), 3)};
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
        const auto nn = gt_soa.nearest(pred.row(i).data());
        out.value += nn.sq_dist;
        out.gradient.row(i) += 2.0 * (pred.row(i) - gt.row(static_cast<Eigen::Index>(nn.index)));
    }
    for (Eigen::Index j = 0; j < gt.rows(); ++j) {
        const auto nn = pred_soa.nearest(gt.row(j).data());
        out.value += nn.sq_dist;
        const auto i = static_cast<Eigen::Index>(nn.index);
        out.gradient.row(i) += 2.0 * (pred.row(i) - gt.row(j));
    }
    return out;
}

PointLoss loss_nocs_l1(const PointMatrix& pred, const PointMatrix& gt) {
    if (pred.rows() != gt.rows()) throw Error(ErrorCode::ShapeMismatch, "NOCS point sets differ in size");
    if (pred.rows() == 0) throw Error(ErrorCode::EmptySet, "L1 loss of an empty set");
    const double n = 3.0 * static_cast<double>(pred.rows());
    const PointMatrix diff = pred - gt;
    PointLoss out{diff.cwiseAbs().sum() / n, PointMatrix(pred.rows(), 3)};
    out.gradient = diff.unaryExpr([n](double d) { return sign(d) / n; });
    return out;
}

PointLoss loss_deform_reg(const PointMatrix& d) {
    if (d.rows() == 0) throw Error(ErrorCode::EmptySet, "deformation field has no rows");
    const double n = static_cast<double>(d.rows());
    PointLoss out{0.0, PointMatrix::Zero(d.rows(), 3)};
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        const double norm = d.row(i).norm();
        out.value += norm;
        if (norm > 0.0) out.gradient.row(i) = d.row(i) / (n * norm);
    }
    out.value /= n;
    return out;
}

MatrixLoss loss_entropy(const MatchingMatrix& a) {
    if (a.rows() == 0) throw Error(ErrorCode::EmptySet, "matching matrix has no rows");
    const double m = static_cast<double>(a.rows());
    MatrixLoss out{0.0, Eigen::MatrixXd::Zero(a.rows(), a.cols())};
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double x = a(i, j);
            if (x < 0.0) throw Error(ErrorCode::NegativeEntry, "matching weight below zero");
            if (!(x <= 1.0)) throw Error(ErrorCode::InvalidParams, "matching weight above one");
            if (x == 0.0) continue;
            const double lx = std::log(x);
            out.value -= x * lx;
            out.gradient(i, j) = -(lx + 1.0) / m;
        }
    }
    out.value /= m;
    return out;
}

void LossWeights::validate() const {
    for (double w : {epipolar, chamfer, nocs, entropy, deform}) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidParams, "loss weights must be finite and >= 0");
    }
}

double loss_total(const LossComponents& c, const LossWeights& w) {
    w.validate();
    const std::array<double, 5> terms{w.epipolar * c.epipolar, w.chamfer * c.chamfer, w.nocs * c.nocs,
                                      w.entropy * c.entropy, w.deform * c.deform};
    for (double v : {c.epipolar, c.chamfer, c.nocs, c.entropy, c.deform}) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteComponent, "loss component is not finite");
    }
    // Neumaier summation: the five weighted terms span four decades.
    double sum = 0.0, comp = 0.0;
    for (double t : terms) {
        const double s = sum + t;
        comp += std::abs(sum) >= std::abs(t) ? (sum - s) + t : (t - s) + sum;
        sum = s;
    }
    return sum + comp;
}

}  // namespace stereonocs

#pragma once

#include <utility>
#include <vector>

#include "stereonocs/fusion.hpp"
#include "stereonocs/geometry.hpp"
#include "stereonocs/stereo.hpp"

namespace stereonocs {

struct PixelPair {
    Pixel left;
    Pixel right;
};

/// d loss / d pixel coordinates for one pair.
struct PixelPairGradient {
    Eigen::Vector2d left = Eigen::Vector2d::Zero();
    Eigen::Vector2d right = Eigen::Vector2d::Zero();
};

struct EpipolarLoss {
    double value;
    std::vector<PixelPairGradient> gradient;
};

/// Mean absolute epipolar residual over the pairs. The gradient uses
/// sign(0) = 0. Throws EmptyPairList.
EpipolarLoss loss_epipolar(const std::vector<PixelPair>& pairs, const StereoRig& rig);

struct PointLoss {
    double value;
    PointMatrix gradient;  // same shape as the differentiated input
};

/// Sum over both directions of squared nearest-neighbour distances. The
/// gradient is taken with the nearest-neighbour assignment held fixed.
/// Throws EmptySet.
PointLoss loss_chamfer(const PointMatrix& pred, const PointMatrix& gt);

/// Mean absolute difference over all 3M entries. Throws ShapeMismatch.
PointLoss loss_nocs_l1(const PointMatrix& pred, const PointMatrix& gt);

/// Mean Euclidean row norm of the deformation field; zero rows get a zero gradient.
PointLoss loss_deform_reg(const PointMatrix& deformation);

struct MatrixLoss {
    double value;
    Eigen::MatrixXd gradient;
};

/// (1/M) sum -a ln a with 0 ln 0 = 0 and a zero gradient at exact zeros.
/// Throws NegativeEntry for a < 0 and InvalidParams for a > 1.
MatrixLoss loss_entropy(const MatchingMatrix& a);

struct LossWeights {
    double epipolar = 0.01;
    double chamfer = 5.0;
    double nocs = 1.0;
    double entropy = 0.0001;
    double deform = 0.01;

    void validate() const;
};

struct LossComponents {
    double epipolar = 0.0;
    double chamfer = 0.0;
    double nocs = 0.0;
    double entropy = 0.0;
    double deform = 0.0;
};

/// Weighted sum with compensated accumulation. Throws NonFiniteComponent.
double loss_total(const LossComponents& c, const LossWeights& w = {});

}  // namespace stereonocs

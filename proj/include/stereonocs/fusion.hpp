#pragma once

#include <Eigen/Core>
#include <vector>

namespace stereonocs {

/// H x W x C feature array, channel-fastest.
class FeatureGrid {
public:
    FeatureGrid() = default;
    FeatureGrid(int height, int width, int channels, double fill = 0.0);

    int height() const { return h_; }
    int width() const { return w_; }
    int channels() const { return c_; }

    double& operator()(int h, int w, int c) { return data_[offset(h, w) + c]; }
    double operator()(int h, int w, int c) const { return data_[offset(h, w) + c]; }
    double* at(int h, int w) { return data_.data() + offset(h, w); }
    const double* at(int h, int w) const { return data_.data() + offset(h, w); }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t offset(int h, int w) const { return (static_cast<std::size_t>(h) * w_ + w) * c_; }

    int h_ = 0, w_ = 0, c_ = 0;
    std::vector<double> data_;
};

/// H x W x W; entry (h, i, j) weighs column j of the source row h for target column i.
class AttentionMap {
public:
    AttentionMap() = default;
    AttentionMap(int height, int width);

    int height() const { return h_; }
    int width() const { return w_; }
    double& operator()(int h, int i, int j) { return data_[(static_cast<std::size_t>(h) * w_ + i) * w_ + j]; }
    double operator()(int h, int i, int j) const { return data_[(static_cast<std::size_t>(h) * w_ + i) * w_ + j]; }
    const double* row(int h, int i) const { return data_.data() + (static_cast<std::size_t>(h) * w_ + i) * w_; }
    double* row(int h, int i) { return data_.data() + (static_cast<std::size_t>(h) * w_ + i) * w_; }

private:
    int h_ = 0, w_ = 0;
    std::vector<double> data_;
};

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;  // N x 3
using MatchingMatrix = Eigen::MatrixXd;                                         // M x N, row-stochastic

enum class Activation { identity, relu };

/// Single affine layer 2C -> C over [F; F_warped], then an elementwise activation.
struct MlpWeights {
    Eigen::MatrixXd weight;  // C x 2C
    Eigen::VectorXd bias;    // C
    Activation activation = Activation::identity;
};

/// Subtracts each channel's spatial mean.
FeatureGrid whiten(const FeatureGrid& f);

struct ParallaxAttention {
    AttentionMap right_to_left;  // rows indexed by left column, softmax over right columns
    AttentionMap left_to_right;
};

/// Row-wise correlation of the whitened grids, softmax-normalized along the
/// last axis. Throws ShapeMismatch.
ParallaxAttention parallax_attention(const FeatureGrid& left, const FeatureGrid& right);

/// out[h, i, :] = sum_j A[h, i, j] * F[h, j, :]. Throws ShapeMismatch.
FeatureGrid warp_features(const AttentionMap& a, const FeatureGrid& f);

/// Throws ShapeMismatch when grids or weights disagree in shape.
FeatureGrid fuse(const FeatureGrid& f, const FeatureGrid& warped, const MlpWeights& w);

/// Projection onto the first C inputs: fuse(F, G, w) == F.
MlpWeights passthrough_weights(int channels);
/// fuse(F, G, w) == (F + G) / 2.
MlpWeights averaging_weights(int channels);

/// P + D. Throws ShapeMismatch.
PointMatrix deform_prior(const PointMatrix& prior, const PointMatrix& deformation);

/// A * P'. Rows of A must be nonnegative and sum to 1 within 1e-4.
/// Throws ShapeMismatch, NotRowStochastic.
PointMatrix predict_nocs_points(const MatchingMatrix& a, const PointMatrix& deformed_prior);

}  // namespace stereonocs

#include "stereonocs/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "stereonocs/error.hpp"
#include "stereonocs/simd/kernels.hpp"

namespace stereonocs {

FeatureGrid::FeatureGrid(int height, int width, int channels, double fill) : h_(height), w_(width), c_(channels) {
    if (height < 0 || width < 0 || channels < 0) throw Error(ErrorCode::InvalidParams, "negative grid size");
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

AttentionMap::AttentionMap(int height, int width) : h_(height), w_(width) {
    if (height < 0 || width < 0) throw Error(ErrorCode::InvalidParams, "negative attention size");
    data_.assign(static_cast<std::size_t>(height) * width * width, 0.0);
}

FeatureGrid whiten(const FeatureGrid& f) {
    if (static_cast<long>(f.height()) * f.width() < 2) {
        throw Error(ErrorCode::InvalidParams, "whitening needs at least two positions");
    }
    const int c = f.channels();
    std::vector<double> mean(static_cast<std::size_t>(c), 0.0);
    for (int h = 0; h < f.height(); ++h) {
        for (int w = 0; w < f.width(); ++w) {
            for (int k = 0; k < c; ++k) mean[k] += f(h, w, k);
        }
    }
    const double n = static_cast<double>(f.height()) * f.width();
    for (double& m : mean) m /= n;

    FeatureGrid out = f;
    for (int h = 0; h < f.height(); ++h) {
        for (int w = 0; w < f.width(); ++w) {
            for (int k = 0; k < c; ++k) out(h, w, k) -= mean[k];
        }
    }
    return out;
}

namespace {

void softmax_inplace(double* x, int n) {
    const double top = *std::max_element(x, x + n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        x[i] = std::exp(x[i] - top);
        sum += x[i];
    }
    for (int i = 0; i < n; ++i) x[i] /= sum;
}

void require_same_shape(const FeatureGrid& a, const FeatureGrid& b) {
    if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels()) {
        throw Error(ErrorCode::ShapeMismatch, "feature grids differ in shape");
    }
}

}  // namespace

ParallaxAttention parallax_attention(const FeatureGrid& left, const FeatureGrid& right) {
    require_same_shape(left, right);
    const FeatureGrid wl = whiten(left);
    const FeatureGrid wr = whiten(right);
    const int H = left.height(), W = left.width();
    const auto C = static_cast<std::size_t>(left.channels());

    ParallaxAttention out{AttentionMap(H, W), AttentionMap(H, W)};
    for (int h = 0; h < H; ++h) {
        for (int i = 0; i < W; ++i) {
            for (int j = 0; j < W; ++j) {
                const double s = simd::dot(wl.at(h, i), wr.at(h, j), C);
                out.right_to_left(h, i, j) = s;
                out.left_to_right(h, j, i) = s;
            }
        }
        for (int i = 0; i < W; ++i) {
            softmax_inplace(out.right_to_left.row(h, i), W);
            softmax_inplace(out.left_to_right.row(h, i), W);
        }
    }
    return out;
}

FeatureGrid warp_features(const AttentionMap& a, const FeatureGrid& f) {
    if (a.height() != f.height() || a.width() != f.width()) {
        throw Error(ErrorCode::ShapeMismatch, "attention and features differ in shape");
    }
    const auto C = static_cast<std::size_t>(f.channels());
    FeatureGrid out(f.height(), f.width(), f.channels());
    for (int h = 0; h < f.height(); ++h) {
        for (int i = 0; i < f.width(); ++i) {
            const double* weights = a.row(h, i);
            for (int j = 0; j < f.width(); ++j) {
                if (weights[j] != 0.0) simd::axpy(weights[j], f.at(h, j), out.at(h, i), C);
            }
        }
    }
    return out;
}

FeatureGrid fuse(const FeatureGrid& f, const FeatureGrid& warped, const MlpWeights& w) {
    require_same_shape(f, warped);
    const int c = f.channels();
    if (w.weight.rows() != c || w.weight.cols() != 2 * c || w.bias.size() != c) {
        throw Error(ErrorCode::ShapeMismatch, "MLP weights do not map 2C to C");
    }
    FeatureGrid out(f.height(), f.width(), c);
    Eigen::VectorXd in(2 * c);
    for (int h = 0; h < f.height(); ++h) {
        for (int x = 0; x < f.width(); ++x) {
            in.head(c) = Eigen::Map<const Eigen::VectorXd>(f.at(h, x), c);
            in.tail(c) = Eigen::Map<const Eigen::VectorXd>(warped.at(h, x), c);
            Eigen::Map<Eigen::VectorXd> y(out.at(h, x), c);
            y.noalias() = w.weight * in + w.bias;
            if (w.activation == Activation::relu) y = y.cwiseMax(0.0);
        }
    }
    return out;
}

MlpWeights passthrough_weights(int channels) {
    MlpWeights w;
    w.weight = Eigen::MatrixXd::Zero(channels, 2 * channels);
    w.weight.leftCols(channels).setIdentity();
    w.bias = Eigen::VectorXd::Zero(channels);
    return w;
}

MlpWeights averaging_weights(int channels) {
    MlpWeights w;
    w.weight.resize(channels, 2 * channels);
    w.weight << 0.5 * Eigen::MatrixXd::Identity(channels, channels), 0.5 * Eigen::MatrixXd::Identity(channels, channels);
    w.bias = Eigen::VectorXd::Zero(channels);
    return w;
}

PointMatrix deform_prior(const PointMatrix& prior, const PointMatrix& deformation) {
    if (prior.rows() != deformation.rows()) throw Error(ErrorCode::ShapeMismatch, "deformation rows differ from prior");
    return prior + deformation;
}

PointMatrix predict_nocs_points(const MatchingMatrix& a, const PointMatrix& deformed_prior) {
    if (a.cols() != deformed_prior.rows()) throw Error(ErrorCode::ShapeMismatch, "matching matrix columns != prior rows");
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if ((a.row(i).array() < 0.0).any()) throw Error(ErrorCode::NotRowStochastic, "negative matching weight");
        if (std::abs(a.row(i).sum() - 1.0) > 1e-4) throw Error(ErrorCode::NotRowStochastic, "row does not sum to 1");
    }
    return a * deformed_prior;
}

}  // namespace stereonocs

#include <doctest.h>

#include <numeric>

#include "stereonocs/error.hpp"
#include "stereonocs/fusion.hpp"
#include "test_support.hpp"

using namespace stereonocs;
using namespace stereonocs::testing;

namespace {

FeatureGrid random_grid(int h, int w, int c, std::mt19937_64& rng, double lo = -1, double hi = 1) {
    FeatureGrid g(h, w, c);
    for (double& x : g.data()) x = uniform(rng, lo, hi);
    return g;
}

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

int row_argmax(const AttentionMap& a, int h, int i) {
    const double* r = a.row(h, i);
    return static_cast<int>(std::max_element(r, r + a.width()) - r);
}

}  // namespace

TEST_CASE("whiten removes the spatial mean per channel") {
    std::mt19937_64 rng(1);
    const FeatureGrid g = random_grid(5, 7, 4, rng, 2, 9);
    const FeatureGrid w = whiten(g);
    for (int c = 0; c < 4; ++c) {
        double sum = 0.0;
        for (int h = 0; h < 5; ++h) {
            for (int x = 0; x < 7; ++x) sum += w(h, x, c);
        }
        CHECK(std::abs(sum / 35.0) < 1e-9);
    }
    const FeatureGrid again = whiten(w);
    for (std::size_t i = 0; i < w.data().size(); ++i) CHECK(std::abs(again.data()[i] - w.data()[i]) < 1e-12);

    const FeatureGrid flat = whiten(FeatureGrid(3, 3, 2, 4.25));
    for (double x : flat.data()) CHECK(x == 0.0);
    CHECK(code_of([] { whiten(FeatureGrid(1, 1, 3)); }) == ErrorCode::InvalidParams);
}

TEST_CASE("attention rows are stochastic and positive") {
    std::mt19937_64 rng(2);
    const FeatureGrid l = random_grid(4, 9, 6, rng), r = random_grid(4, 9, 6, rng);
    const ParallaxAttention a = parallax_attention(l, r);
    for (const AttentionMap* m : {&a.right_to_left, &a.left_to_right}) {
        for (int h = 0; h < 4; ++h) {
            for (int i = 0; i < 9; ++i) {
                const double* row = m->row(h, i);
                CHECK(std::abs(std::accumulate(row, row + 9, 0.0) - 1.0) < 1e-6);
                for (int j = 0; j < 9; ++j) CHECK(row[j] > 0.0);
            }
        }
    }
    CHECK(code_of([&] { parallax_attention(l, random_grid(4, 9, 5, rng)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("constant features give uniform attention") {
    const ParallaxAttention a = parallax_attention(FeatureGrid(2, 5, 3, 1.5), FeatureGrid(2, 5, 3, 1.5));
    for (int h = 0; h < 2; ++h) {
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) CHECK(a.right_to_left(h, i, j) == doctest::Approx(0.2).epsilon(1e-15));
        }
    }
}

TEST_CASE("one-hot permuted features: attention argmax recovers the permutation") {
    const int W = 6, C = 6;
    const std::array<int, 6> perm{3, 0, 5, 1, 4, 2};
    FeatureGrid l(2, W, C), r(2, W, C);
    for (int h = 0; h < 2; ++h) {
        for (int w = 0; w < W; ++w) {
            r(h, w, w) = 50.0;
            l(h, w, perm[w]) = 50.0;
        }
    }
    const ParallaxAttention a = parallax_attention(l, r);
    for (int h = 0; h < 2; ++h) {
        for (int i = 0; i < W; ++i) {
            CHECK(row_argmax(a.right_to_left, h, i) == perm[i]);
            CHECK(a.right_to_left(h, i, perm[i]) > 0.999);
        }
    }
}

TEST_CASE("common positive scaling keeps each row's argmax") {
    std::mt19937_64 rng(3);
    const FeatureGrid l = random_grid(3, 8, 4, rng), r = random_grid(3, 8, 4, rng);
    FeatureGrid l2 = l, r2 = r;
    for (double& x : l2.data()) x *= 1.7;
    for (double& x : r2.data()) x *= 1.7;
    const ParallaxAttention a = parallax_attention(l, r), b = parallax_attention(l2, r2);
    for (int h = 0; h < 3; ++h) {
        for (int i = 0; i < 8; ++i) CHECK(row_argmax(a.right_to_left, h, i) == row_argmax(b.right_to_left, h, i));
    }
}

TEST_CASE("warping with identity, permutation and uniform attention") {
    std::mt19937_64 rng(4);
    const int H = 3, W = 5, C = 4;
    const FeatureGrid f = random_grid(H, W, C, rng);
    AttentionMap id(H, W), perm(H, W), uni(H, W);
    const std::array<int, 5> p{2, 4, 0, 1, 3};
    for (int h = 0; h < H; ++h) {
        for (int i = 0; i < W; ++i) {
            id(h, i, i) = 1.0;
            perm(h, i, p[i]) = 1.0;
            for (int j = 0; j < W; ++j) uni(h, i, j) = 1.0 / W;
        }
    }
    CHECK(warp_features(id, f).data() == f.data());
    const FeatureGrid pw = warp_features(perm, f);
    const FeatureGrid uw = warp_features(uni, f);
    for (int h = 0; h < H; ++h) {
        for (int i = 0; i < W; ++i) {
            for (int c = 0; c < C; ++c) {
                CHECK(pw(h, i, c) == f(h, p[i], c));
                double mean = 0.0;
                for (int j = 0; j < W; ++j) mean += f(h, j, c);
                CHECK(std::abs(uw(h, i, c) - mean / W) < 1e-12);
            }
        }
    }
    CHECK(code_of([&] { warp_features(AttentionMap(H, W + 1), f); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("fusion weights") {
    std::mt19937_64 rng(5);
    const int H = 3, W = 4, C = 5;
    const FeatureGrid f = random_grid(H, W, C, rng), g = random_grid(H, W, C, rng);
    CHECK(fuse(f, g, passthrough_weights(C)).data() == f.data());
    const FeatureGrid avg = fuse(f, g, averaging_weights(C));
    for (std::size_t i = 0; i < f.data().size(); ++i) CHECK(avg.data()[i] == doctest::Approx(0.5 * (f.data()[i] + g.data()[i])));

    MlpWeights w;
    w.weight = Eigen::MatrixXd::Random(C, 2 * C);
    w.bias = Eigen::VectorXd::Random(C);
    w.activation = Activation::relu;
    const FeatureGrid out = fuse(f, g, w);
    for (int h = 0; h < H; ++h) {
        for (int x = 0; x < W; ++x) {
            for (int o = 0; o < C; ++o) {
                double acc = w.bias[o];
                for (int k = 0; k < C; ++k) acc += w.weight(o, k) * f(h, x, k) + w.weight(o, C + k) * g(h, x, k);
                CHECK(std::abs(out(h, x, o) - std::max(acc, 0.0)) < 1e-9);
            }
        }
    }
    w.bias.resize(C + 1);
    CHECK(code_of([&] { fuse(f, g, w); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("prior deformation") {
    std::mt19937_64 rng(6);
    PointMatrix p(20, 3), d(20, 3);
    for (Eigen::Index i = 0; i < 20; ++i) p.row(i) = uniform_vec(rng, 0, 1), d.row(i) = uniform_vec(rng, -0.1, 0.1);
    CHECK(deform_prior(p, PointMatrix::Zero(20, 3)) == p);
    CHECK(deform_prior(p, -p).isZero(0.0));
    CHECK((deform_prior(p, d) - p - d).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(code_of([&] { deform_prior(p, PointMatrix(19, 3)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("NOCS prediction is a convex combination of the prior") {
    std::mt19937_64 rng(7);
    const int M = 30, N = 25;
    PointMatrix prior(N, 3);
    for (Eigen::Index i = 0; i < N; ++i) prior.row(i) = uniform_vec(rng, 0, 1);

    MatchingMatrix perm = MatchingMatrix::Zero(M, N);
    for (int i = 0; i < M; ++i) perm(i, (7 * i) % N) = 1.0;
    const PointMatrix sel = predict_nocs_points(perm, prior);
    for (int i = 0; i < M; ++i) CHECK(sel.row(i) == prior.row((7 * i) % N));

    const PointMatrix cen = predict_nocs_points(MatchingMatrix::Constant(M, N, 1.0 / N), prior);
    const Eigen::RowVector3d centroid = prior.colwise().mean();
    for (int i = 0; i < M; ++i) CHECK((cen.row(i) - centroid).norm() < 1e-12);

    MatchingMatrix a(M, N);
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < N; ++j) a(i, j) = uniform(rng, 0, 1) * (rng() % 3 == 0);
        a(i, i % N) += 0.01;
        a.row(i) /= a.row(i).sum();
    }
    const PointMatrix out = predict_nocs_points(a, prior);
    const Eigen::RowVector3d lo = prior.colwise().minCoeff(), hi = prior.colwise().maxCoeff();
    for (int i = 0; i < M; ++i) {
        CHECK((out.row(i).array() >= lo.array() - 1e-12).all());
        CHECK((out.row(i).array() <= hi.array() + 1e-12).all());
        // Any supporting hyperplane of the prior also bounds the output.
        for (int k = 0; k < 10; ++k) {
            const Vec3 n = uniform_vec(rng, -1, 1);
            const double support = (prior * n).maxCoeff();
            CHECK(out.row(i).dot(n.transpose()) <= support + 1e-12);
        }
    }

    MatchingMatrix bad = a;
    bad(0, 0) += 0.01;
    CHECK(code_of([&] { predict_nocs_points(bad, prior); }) == ErrorCode::NotRowStochastic);
    bad = a;
    bad(1, 0) = -1e-3;
    bad(1, 1) += 1e-3;
    CHECK(code_of([&] { predict_nocs_points(bad, prior); }) == ErrorCode::NotRowStochastic);
    CHECK(code_of([&] { predict_nocs_points(MatchingMatrix::Constant(2, N + 1, 1.0 / (N + 1)), prior); }) ==
          ErrorCode::ShapeMismatch);
}

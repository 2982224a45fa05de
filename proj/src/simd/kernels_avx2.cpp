// Compiled with -mavx2 (no FMA, so products and sums round exactly like the
// scalar reference). Only called after the dispatcher has checked CPUID.

#include <immintrin.h>

#include <cmath>

#include "stereonocs/simd/kernels.hpp"

namespace stereonocs::simd::avx2 {

namespace {
constexpr std::size_t kLanes = 4;
}

void intersect_triangles(const RayDesc& r, const TriangleSoA& tri, double t_min, double* t_out,
                         double* u_out, double* v_out, std::uint8_t* hit) {
    const __m256d ox = _mm256_set1_pd(r.ox), oy = _mm256_set1_pd(r.oy), oz = _mm256_set1_pd(r.oz);
    const __m256d dx = _mm256_set1_pd(r.dx), dy = _mm256_set1_pd(r.dy), dz = _mm256_set1_pd(r.dz);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d tmin = _mm256_set1_pd(t_min);
    const __m256d det_eps = _mm256_set1_pd(1e-20);
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

    std::size_t i = 0;
    for (; i + kLanes <= tri.count; i += kLanes) {
        const __m256d e1x = _mm256_loadu_pd(tri.e1x + i), e1y = _mm256_loadu_pd(tri.e1y + i),
                      e1z = _mm256_loadu_pd(tri.e1z + i);
        const __m256d e2x = _mm256_loadu_pd(tri.e2x + i), e2y = _mm256_loadu_pd(tri.e2y + i),
                      e2z = _mm256_loadu_pd(tri.e2z + i);

        const __m256d px = _mm256_sub_pd(_mm256_mul_pd(dy, e2z), _mm256_mul_pd(dz, e2y));
        const __m256d py = _mm256_sub_pd(_mm256_mul_pd(dz, e2x), _mm256_mul_pd(dx, e2z));
        const __m256d pz = _mm256_sub_pd(_mm256_mul_pd(dx, e2y), _mm256_mul_pd(dy, e2x));
        const __m256d det = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(e1x, px), _mm256_mul_pd(e1y, py)),
                                          _mm256_mul_pd(e1z, pz));
        const __m256d inv = _mm256_div_pd(one, det);

        const __m256d tx = _mm256_sub_pd(ox, _mm256_loadu_pd(tri.v0x + i));
        const __m256d ty = _mm256_sub_pd(oy, _mm256_loadu_pd(tri.v0y + i));
        const __m256d tz = _mm256_sub_pd(oz, _mm256_loadu_pd(tri.v0z + i));
        const __m256d u = _mm256_mul_pd(
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(tx, px), _mm256_mul_pd(ty, py)), _mm256_mul_pd(tz, pz)),
            inv);

        const __m256d qx = _mm256_sub_pd(_mm256_mul_pd(ty, e1z), _mm256_mul_pd(tz, e1y));
        const __m256d qy = _mm256_sub_pd(_mm256_mul_pd(tz, e1x), _mm256_mul_pd(tx, e1z));
        const __m256d qz = _mm256_sub_pd(_mm256_mul_pd(tx, e1y), _mm256_mul_pd(ty, e1x));
        const __m256d v = _mm256_mul_pd(
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, qx), _mm256_mul_pd(dy, qy)), _mm256_mul_pd(dz, qz)),
            inv);
        const __m256d t = _mm256_mul_pd(
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(e2x, qx), _mm256_mul_pd(e2y, qy)), _mm256_mul_pd(e2z, qz)),
            inv);

        __m256d ok = _mm256_cmp_pd(_mm256_and_pd(det, abs_mask), det_eps, _CMP_GT_OQ);
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(u, zero, _CMP_GE_OQ));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(u, one, _CMP_LE_OQ));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(v, zero, _CMP_GE_OQ));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(_mm256_add_pd(u, v), one, _CMP_LE_OQ));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(t, tmin, _CMP_GT_OQ));

        _mm256_storeu_pd(t_out + i, t);
        _mm256_storeu_pd(u_out + i, u);
        _mm256_storeu_pd(v_out + i, v);
        const int bits = _mm256_movemask_pd(ok);
        for (std::size_t k = 0; k < kLanes; ++k) hit[i + k] = static_cast<std::uint8_t>((bits >> k) & 1);
    }
    if (i < tri.count) {
        TriangleSoA tail{tri.v0x + i, tri.v0y + i, tri.v0z + i, tri.e1x + i, tri.e1y + i,
                         tri.e1z + i, tri.e2x + i, tri.e2y + i, tri.e2z + i, tri.count - i};
        scalar::intersect_triangles(r, tail, t_min, t_out + i, u_out + i, v_out + i, hit + i);
    }
}

Nearest nearest_point(const double* xs, const double* ys, const double* zs, std::size_t n, double px,
                      double py, double pz) {
    const __m256d qx = _mm256_set1_pd(px), qy = _mm256_set1_pd(py), qz = _mm256_set1_pd(pz);
    __m256d best = _mm256_set1_pd(INFINITY);
    __m256d best_idx = _mm256_set1_pd(0.0);
    __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    const __m256d step = _mm256_set1_pd(static_cast<double>(kLanes));

    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d ddx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), qx);
        const __m256d ddy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), qy);
        const __m256d ddz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), qz);
        const __m256d d = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(ddx, ddx), _mm256_mul_pd(ddy, ddy)),
                                        _mm256_mul_pd(ddz, ddz));
        const __m256d lt = _mm256_cmp_pd(d, best, _CMP_LT_OQ);
        best = _mm256_blendv_pd(best, d, lt);
        best_idx = _mm256_blendv_pd(best_idx, idx, lt);
        idx = _mm256_add_pd(idx, step);
    }

    alignas(32) double lane_best[kLanes];
    alignas(32) double lane_idx[kLanes];
    _mm256_store_pd(lane_best, best);
    _mm256_store_pd(lane_idx, best_idx);
    Nearest out{0, INFINITY};
    for (std::size_t k = 0; k < kLanes; ++k) {
        const auto li = static_cast<std::size_t>(lane_idx[k]);
        if (lane_best[k] < out.sq_dist || (lane_best[k] == out.sq_dist && li < out.index)) {
            out = {li, lane_best[k]};
        }
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - px;
        const double dy = ys[i] - py;
        const double dz = zs[i] - pz;
        const double d = dx * dx + dy * dy + dz * dz;
        if (d < out.sq_dist) out = {i, d};
    }
    return out;
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + kLanes), _mm256_loadu_pd(b + i + kLanes)));
    }
    for (; i + kLanes <= n; i += kLanes) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    alignas(32) double lanes[kLanes];
    _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(a, _mm256_loadu_pd(x + i))));
    }
    for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

}  // namespace stereonocs::simd::avx2

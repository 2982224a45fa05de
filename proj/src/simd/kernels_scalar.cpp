#include <cmath>

#include "stereonocs/simd/kernels.hpp"

namespace stereonocs::simd::scalar {

void intersect_triangles(const RayDesc& r, const TriangleSoA& tri, double t_min, double* t_out,
                         double* u_out, double* v_out, std::uint8_t* hit) {
    for (std::size_t i = 0; i < tri.count; ++i) {
        const double e1x = tri.e1x[i], e1y = tri.e1y[i], e1z = tri.e1z[i];
        const double e2x = tri.e2x[i], e2y = tri.e2y[i], e2z = tri.e2z[i];

        const double px = r.dy * e2z - r.dz * e2y;
        const double py = r.dz * e2x - r.dx * e2z;
        const double pz = r.dx * e2y - r.dy * e2x;
        const double det = e1x * px + e1y * py + e1z * pz;
        const double inv = 1.0 / det;

        const double tx = r.ox - tri.v0x[i];
        const double ty = r.oy - tri.v0y[i];
        const double tz = r.oz - tri.v0z[i];
        const double u = (tx * px + ty * py + tz * pz) * inv;

        const double qx = ty * e1z - tz * e1y;
        const double qy = tz * e1x - tx * e1z;
        const double qz = tx * e1y - ty * e1x;
        const double v = (r.dx * qx + r.dy * qy + r.dz * qz) * inv;
        const double t = (e2x * qx + e2y * qy + e2z * qz) * inv;

        // NaN from det == 0 fails every comparison.
        const bool ok = std::abs(det) > 1e-20 && u >= 0.0 && u <= 1.0 && v >= 0.0 && u + v <= 1.0 && t > t_min;
        t_out[i] = t;
        u_out[i] = u;
        v_out[i] = v;
        hit[i] = ok ? 1 : 0;
    }
}

Nearest nearest_point(const double* xs, const double* ys, const double* zs, std::size_t n, double px,
                      double py, double pz) {
    Nearest best{0, INFINITY};
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - px;
        const double dy = ys[i] - py;
        const double dz = zs[i] - pz;
        const double d = dx * dx + dy * dy + dz * dz;
        if (d < best.sq_dist) best = {i, d};
    }
    return best;
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

}  // namespace stereonocs::simd::scalar

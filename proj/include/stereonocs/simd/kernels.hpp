#pragma once

// Data-parallel inner loops used by the ray caster, the Chamfer loss and the
// attention math. Each kernel has a scalar reference and an AVX2 variant; the
// variant is picked once at runtime from CPUID and can be forced for tests or
// through the STEREONOCS_SIMD environment variable ("scalar" or "avx2").
//
// The ray/triangle and nearest-neighbor kernels perform the same IEEE
// operations in the same order in every variant, so their results are
// bit-identical. dot() reassociates its sum and agrees to rounding only.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace stereonocs::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

/// Best ISA supported by the running CPU and compiled into this build.
Isa detected_isa();
/// ISA used by the dispatching entry points below.
Isa active_isa();
/// Overrides the active ISA. Requests for an unsupported ISA fall back to scalar.
void force_isa(Isa isa);

/// Structure-of-arrays triangle block with precomputed edges
/// (e1 = v1 - v0, e2 = v2 - v0).
struct TriangleSoA {
    const double* v0x;
    const double* v0y;
    const double* v0z;
    const double* e1x;
    const double* e1y;
    const double* e1z;
    const double* e2x;
    const double* e2y;
    const double* e2z;
    std::size_t count;
};

struct RayDesc {
    double ox, oy, oz;
    double dx, dy, dz;
};

/// Moller-Trumbore against every triangle in the block. For each triangle i
/// writes hit[i] = 1 and the ray parameter / barycentrics when the ray meets
/// the closed triangle with t > t_min, otherwise hit[i] = 0 (t/u/v unspecified).
void intersect_triangles(const RayDesc& ray, const TriangleSoA& tris, double t_min,
                         double* t, double* u, double* v, std::uint8_t* hit);

/// Index of the point nearest to (px,py,pz) and its squared distance.
/// Ties resolve to the lowest index. n must be > 0.
struct Nearest {
    std::size_t index;
    double sq_dist;
};
Nearest nearest_point(const double* xs, const double* ys, const double* zs, std::size_t n,
                      double px, double py, double pz);

double dot(const double* a, const double* b, std::size_t n);

/// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

namespace scalar {
void intersect_triangles(const RayDesc&, const TriangleSoA&, double, double*, double*, double*, std::uint8_t*);
Nearest nearest_point(const double*, const double*, const double*, std::size_t, double, double, double);
double dot(const double*, const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
}  // namespace scalar

#if defined(STEREONOCS_HAVE_AVX2)
namespace avx2 {
void intersect_triangles(const RayDesc&, const TriangleSoA&, double, double*, double*, double*, std::uint8_t*);
Nearest nearest_point(const double*, const double*, const double*, std::size_t, double, double, double);
double dot(const double*, const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
}  // namespace avx2
#endif

}  // namespace stereonocs::simd

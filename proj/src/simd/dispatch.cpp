#include <atomic>
#include <cstdlib>
#include <string>

#include "stereonocs/simd/kernels.hpp"

namespace stereonocs::simd {

namespace {

Isa probe() {
#if defined(STEREONOCS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#endif
    return Isa::scalar;
}

Isa initial_isa() {
    const Isa best = probe();
    if (const char* env = std::getenv("STEREONOCS_SIMD")) {
        if (std::string(env) == "scalar") return Isa::scalar;
    }
    return best;
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
    static const Isa isa = probe();
    return isa;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
    active().store(isa, std::memory_order_relaxed);
}

void intersect_triangles(const RayDesc& ray, const TriangleSoA& tris, double t_min, double* t, double* u,
                         double* v, std::uint8_t* hit) {
#if defined(STEREONOCS_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::intersect_triangles(ray, tris, t_min, t, u, v, hit);
#endif
    scalar::intersect_triangles(ray, tris, t_min, t, u, v, hit);
}

Nearest nearest_point(const double* xs, const double* ys, const double* zs, std::size_t n, double px,
                      double py, double pz) {
#if defined(STEREONOCS_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::nearest_point(xs, ys, zs, n, px, py, pz);
#endif
    return scalar::nearest_point(xs, ys, zs, n, px, py, pz);
}

double dot(const double* a, const double* b, std::size_t n) {
#if defined(STEREONOCS_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::dot(a, b, n);
#endif
    return scalar::dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#if defined(STEREONOCS_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::axpy(alpha, x, y, n);
#endif
    scalar::axpy(alpha, x, y, n);
}

}  // namespace stereonocs::simd

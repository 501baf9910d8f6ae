#include <atomic>
#include <cstdlib>
#include <string>

#include "dpdist/error.hpp"
#include "dpdist/simd/kernels.hpp"

namespace dpdist::simd {

namespace {

Isa initial_isa() noexcept {
    const Isa best = detect_isa();
    if (const char* env = std::getenv("DPDIST_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Isa::scalar;
        if (v == "avx2" && best == Isa::avx2) return Isa::avx2;
    }
    return best;
}

std::atomic<Isa>& current() noexcept {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

Isa detect_isa() noexcept {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
    return Isa::scalar;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    if (isa == Isa::avx2 && detect_isa() != Isa::avx2) throw ArgumentError("CPU does not support AVX2+FMA");
    current().store(isa, std::memory_order_relaxed);
}

void gemm_nt(MatrixView a, MatrixView b, double* c, std::size_t ldc) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_isa() == Isa::avx2) return avx2::gemm_nt(a, b, c, ldc);
#endif
    scalar::gemm_nt(a, b, c, ldc);
}

void min_squared_distances(std::span<const double> qx, std::span<const double> qy, std::span<const double> qz,
                           std::span<const double> sx, std::span<const double> sy, std::span<const double> sz,
                           std::span<double> out) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_isa() == Isa::avx2) return avx2::min_squared_distances(qx, qy, qz, sx, sy, sz, out);
#endif
    scalar::min_squared_distances(qx, qy, qz, sx, sy, sz, out);
}

}  // namespace dpdist::simd

#pragma once

// Data-parallel inner loops. Every kernel has a portable scalar reference
// implementation and an AVX2+FMA variant; the variant is chosen once at
// startup from CPUID and can be pinned with DPDIST_SIMD=scalar|avx2.

#include <cstddef>
#include <span>
#include <string_view>

namespace dpdist::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best ISA supported by this CPU (ignores the environment override).
Isa detect_isa() noexcept;
/// Currently selected ISA.
Isa active_isa() noexcept;
/// Pins the kernel table. Throws ArgumentError if the CPU lacks the ISA.
void set_isa(Isa isa);

/// Row-major dense view.
struct MatrixView {
    const double* data;
    std::size_t rows;
    std::size_t cols;
    std::size_t stride;
};

/// C[i][j] = sum_p A[i][p] * B[j][p]  (A: m x k, B: n x k, C: m x n).
/// Each entry is reduced in an order that depends only on k, so a row's
/// result does not depend on m, n or its position in the batch.
void gemm_nt(MatrixView a, MatrixView b, double* c, std::size_t ldc);

/// out[i] = min_j |q_i - s_j|^2 over the SoA point set (sx, sy, sz).
/// Bitwise equal across ISAs.
void min_squared_distances(std::span<const double> qx, std::span<const double> qy, std::span<const double> qz,
                           std::span<const double> sx, std::span<const double> sy, std::span<const double> sz,
                           std::span<double> out);

/// Scalar reference implementations, callable directly for equivalence tests.
namespace scalar {
void gemm_nt(MatrixView a, MatrixView b, double* c, std::size_t ldc);
void min_squared_distances(std::span<const double> qx, std::span<const double> qy, std::span<const double> qz,
                           std::span<const double> sx, std::span<const double> sy, std::span<const double> sz,
                           std::span<double> out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void gemm_nt(MatrixView a, MatrixView b, double* c, std::size_t ldc);
void min_squared_distances(std::span<const double> qx, std::span<const double> qy, std::span<const double> qz,
                           std::span<const double> sx, std::span<const double> sy, std::span<const double> sz,
                           std::span<double> out);
}  // namespace avx2
#endif

}  // namespace dpdist::simd

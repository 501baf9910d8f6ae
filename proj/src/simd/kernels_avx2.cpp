// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpdist/simd/kernels.hpp"

namespace dpdist::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
    // ((l0 + l2) + (l1 + l3)), fixed for every dot product.
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double finish(__m256d acc, const double* a, const double* b, std::size_t p, std::size_t k) {
    double s = hsum(acc);
    for (; p < k; ++p) s = std::fma(a[p], b[p], s);
    return s;
}

// Single dot product with the same reduction shape as the blocked kernel.
inline double dot1(const double* a, const double* b, std::size_t k) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + p), _mm256_loadu_pd(b + p), acc);
    return finish(acc, a, b, p, k);
}

// 4 rows of A against 3 rows of B: 12 accumulators + 7 operands fit the
// 16 ymm registers.
inline void block4x3(const double* a0, const double* a1, const double* a2, const double* a3, const double* b0,
                     const double* b1, const double* b2, std::size_t k, double* c, std::size_t ldc) {
    __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd(), c02 = _mm256_setzero_pd();
    __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd(), c12 = _mm256_setzero_pd();
    __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd(), c22 = _mm256_setzero_pd();
    __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd(), c32 = _mm256_setzero_pd();
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
        const __m256d vb0 = _mm256_loadu_pd(b0 + p);
        const __m256d vb1 = _mm256_loadu_pd(b1 + p);
        const __m256d vb2 = _mm256_loadu_pd(b2 + p);
        __m256d va = _mm256_loadu_pd(a0 + p);
        c00 = _mm256_fmadd_pd(va, vb0, c00);
        c01 = _mm256_fmadd_pd(va, vb1, c01);
        c02 = _mm256_fmadd_pd(va, vb2, c02);
        va = _mm256_loadu_pd(a1 + p);
        c10 = _mm256_fmadd_pd(va, vb0, c10);
        c11 = _mm256_fmadd_pd(va, vb1, c11);
        c12 = _mm256_fmadd_pd(va, vb2, c12);
        va = _mm256_loadu_pd(a2 + p);
        c20 = _mm256_fmadd_pd(va, vb0, c20);
        c21 = _mm256_fmadd_pd(va, vb1, c21);
        c22 = _mm256_fmadd_pd(va, vb2, c22);
        va = _mm256_loadu_pd(a3 + p);
        c30 = _mm256_fmadd_pd(va, vb0, c30);
        c31 = _mm256_fmadd_pd(va, vb1, c31);
        c32 = _mm256_fmadd_pd(va, vb2, c32);
    }
    c[0] = finish(c00, a0, b0, p, k);
    c[1] = finish(c01, a0, b1, p, k);
    c[2] = finish(c02, a0, b2, p, k);
    c[ldc + 0] = finish(c10, a1, b0, p, k);
    c[ldc + 1] = finish(c11, a1, b1, p, k);
    c[ldc + 2] = finish(c12, a1, b2, p, k);
    c[2 * ldc + 0] = finish(c20, a2, b0, p, k);
    c[2 * ldc + 1] = finish(c21, a2, b1, p, k);
    c[2 * ldc + 2] = finish(c22, a2, b2, p, k);
    c[3 * ldc + 0] = finish(c30, a3, b0, p, k);
    c[3 * ldc + 1] = finish(c31, a3, b1, p, k);
    c[3 * ldc + 2] = finish(c32, a3, b2, p, k);
}

// Rows of B per cache tile: keeps the B tile resident in L2 while all rows
// of A stream past it.
constexpr std::size_t kTileBytes = 512 * 1024;

}  // namespace

void gemm_nt(MatrixView a, MatrixView b, double* c, std::size_t ldc) {
    const std::size_t m = a.rows;
    const std::size_t n = b.rows;
    const std::size_t k = a.cols;
    const std::size_t tile = std::max<std::size_t>(3, (kTileBytes / std::max<std::size_t>(k * sizeof(double), 1)) / 3 * 3);

    for (std::size_t j0 = 0; j0 < n; j0 += tile) {
        const std::size_t j1 = std::min(n, j0 + tile);
        std::size_t i = 0;
        for (; i + 4 <= m; i += 4) {
            const double* a0 = a.data + i * a.stride;
            const double* a1 = a0 + a.stride;
            const double* a2 = a1 + a.stride;
            const double* a3 = a2 + a.stride;
            std::size_t j = j0;
            for (; j + 3 <= j1; j += 3) {
                const double* b0 = b.data + j * b.stride;
                block4x3(a0, a1, a2, a3, b0, b0 + b.stride, b0 + 2 * b.stride, k, c + i * ldc + j, ldc);
            }
            for (; j < j1; ++j) {
                const double* bj = b.data + j * b.stride;
                c[i * ldc + j] = dot1(a0, bj, k);
                c[(i + 1) * ldc + j] = dot1(a1, bj, k);
                c[(i + 2) * ldc + j] = dot1(a2, bj, k);
                c[(i + 3) * ldc + j] = dot1(a3, bj, k);
            }
        }
        for (; i < m; ++i) {
            const double* ai = a.data + i * a.stride;
            for (std::size_t j = j0; j < j1; ++j) c[i * ldc + j] = dot1(ai, b.data + j * b.stride, k);
        }
    }
}

void min_squared_distances(std::span<const double> qx, std::span<const double> qy, std::span<const double> qz,
                           std::span<const double> sx, std::span<const double> sy, std::span<const double> sz,
                           std::span<double> out) {
    const std::size_t n = sx.size();
    for (std::size_t i = 0; i < qx.size(); ++i) {
        const __m256d x = _mm256_set1_pd(qx[i]);
        const __m256d y = _mm256_set1_pd(qy[i]);
        const __m256d z = _mm256_set1_pd(qz[i]);
        __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            // Same operation order as the scalar path, no FMA contraction.
            const __m256d dx = _mm256_sub_pd(x, _mm256_loadu_pd(sx.data() + j));
            const __m256d dy = _mm256_sub_pd(y, _mm256_loadu_pd(sy.data() + j));
            const __m256d dz = _mm256_sub_pd(z, _mm256_loadu_pd(sz.data() + j));
            const __m256d d = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                                            _mm256_mul_pd(dz, dz));
            best = _mm256_min_pd(best, d);
        }
        alignas(32) double lanes[4];
        _mm256_store_pd(lanes, best);
        double b = std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
        for (; j < n; ++j) {
            const double dx = qx[i] - sx[j];
            const double dy = qy[i] - sy[j];
            const double dz = qz[i] - sz[j];
            b = std::min(b, dx * dx + dy * dy + dz * dz);
        }
        out[i] = b;
    }
}

}  // namespace dpdist::simd::avx2

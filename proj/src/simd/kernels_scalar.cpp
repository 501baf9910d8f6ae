#include <algorithm>
#include <cmath>
#include <limits>

#include "dpdist/simd/kernels.hpp"

namespace dpdist::simd::scalar {

void gemm_nt(MatrixView a, MatrixView b, double* c, std::size_t ldc) {
    const std::size_t k = a.cols;
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.data + i * a.stride;
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* br = b.data + j * b.stride;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
            c[i * ldc + j] = s;
        }
    }
}

void min_squared_distances(std::span<const double> qx, std::span<const double> qy, std::span<const double> qz,
                           std::span<const double> sx, std::span<const double> sy, std::span<const double> sz,
                           std::span<double> out) {
    for (std::size_t i = 0; i < qx.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < sx.size(); ++j) {
            const double dx = qx[i] - sx[j];
            const double dy = qy[i] - sy[j];
            const double dz = qz[i] - sz[j];
            best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        out[i] = best;
    }
}

}  // namespace dpdist::simd::scalar

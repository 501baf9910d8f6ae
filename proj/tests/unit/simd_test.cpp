#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "dpdist/random.hpp"
#include "dpdist/simd/kernels.hpp"

using namespace dpdist;

namespace {

bool have_avx2() { return simd::detect_isa() == simd::Isa::avx2; }

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1, 1);
    return v;
}

}  // namespace

TEST_SUITE("simd") {

TEST_CASE("scalar gemm matches a naive triple loop") {
    const std::size_t m = 7, n = 5, k = 13;
    const auto a = random_values(m * k, 1), b = random_values(n * k, 2);
    std::vector<double> c(m * n);
    simd::scalar::gemm_nt({a.data(), m, k, k}, {b.data(), n, k, k}, c.data(), n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
            CHECK(c[i * n + j] == doctest::Approx(s).epsilon(1e-13));
        }
}

TEST_CASE("avx2 gemm agrees with scalar reference") {
    if (!have_avx2()) return;
    for (std::size_t m : {1u, 3u, 4u, 9u, 33u})
        for (std::size_t n : {1u, 2u, 3u, 7u, 50u})
            for (std::size_t k : {1u, 3u, 4u, 5u, 17u, 300u}) {
                const auto a = random_values(m * k, m * 100 + k), b = random_values(n * k, n * 7 + k);
                std::vector<double> c0(m * n), c1(m * n);
                simd::scalar::gemm_nt({a.data(), m, k, k}, {b.data(), n, k, k}, c0.data(), n);
                simd::avx2::gemm_nt({a.data(), m, k, k}, {b.data(), n, k, k}, c1.data(), n);
                for (std::size_t i = 0; i < c0.size(); ++i)
                    CHECK(std::abs(c0[i] - c1[i]) <= 1e-12 * (1.0 + static_cast<double>(k)));
            }
}

TEST_CASE("gemm rows do not depend on batch position") {
    const std::size_t k = 37, n = 11;
    const auto a = random_values(9 * k, 3), b = random_values(n * k, 4);
    for (auto isa : {simd::Isa::scalar, simd::Isa::avx2}) {
        if (isa == simd::Isa::avx2 && !have_avx2()) continue;
        simd::set_isa(isa);
        std::vector<double> full(9 * n), one(n);
        simd::gemm_nt({a.data(), 9, k, k}, {b.data(), n, k, k}, full.data(), n);
        for (std::size_t r = 0; r < 9; ++r) {
            simd::gemm_nt({a.data() + r * k, 1, k, k}, {b.data(), n, k, k}, one.data(), n);
            for (std::size_t j = 0; j < n; ++j) CHECK(one[j] == full[r * n + j]);
        }
    }
    simd::set_isa(simd::detect_isa());
}

TEST_CASE("min squared distances are bitwise equal across variants") {
    if (!have_avx2()) return;
    for (std::size_t nq : {1u, 5u, 64u})
        for (std::size_t ns : {1u, 3u, 4u, 9u, 513u}) {
            const auto qx = random_values(nq, 1), qy = random_values(nq, 2), qz = random_values(nq, 3);
            const auto sx = random_values(ns, 4), sy = random_values(ns, 5), sz = random_values(ns, 6);
            std::vector<double> o0(nq), o1(nq);
            simd::scalar::min_squared_distances(qx, qy, qz, sx, sy, sz, o0);
            simd::avx2::min_squared_distances(qx, qy, qz, sx, sy, sz, o1);
            CHECK(o0 == o1);
        }
}

TEST_CASE("isa selection") {
    CHECK(simd::isa_name(simd::Isa::scalar) == "scalar");
    simd::set_isa(simd::Isa::scalar);
    CHECK(simd::active_isa() == simd::Isa::scalar);
    simd::set_isa(simd::detect_isa());
}

}

#pragma once

#include <cmath>
#include <cstdint>

#include "dpdist/geometry.hpp"
#include "dpdist/random.hpp"

namespace testing {

inline dpdist::PointCloud random_cloud(std::size_t n, std::uint64_t seed, double half = 1.0) {
    dpdist::Rng rng(seed);
    dpdist::PointCloud c;
    for (std::size_t i = 0; i < n; ++i) c.push_back({rng.uniform(-half, half), rng.uniform(-half, half), rng.uniform(-half, half)});
    return c;
}

inline dpdist::TriangleMesh unit_square() {
    dpdist::TriangleMesh m;
    m.vertices = {{-0.5, -0.5, 0}, {0.5, -0.5, 0}, {0.5, 0.5, 0}, {-0.5, 0.5, 0}};
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    return m;
}

inline dpdist::TriangleMesh random_soup(std::size_t triangles, std::uint64_t seed) {
    dpdist::Rng rng(seed);
    dpdist::TriangleMesh m;
    for (std::size_t t = 0; t < triangles; ++t) {
        const dpdist::Point3 c{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        for (int v = 0; v < 3; ++v)
            m.vertices.push_back(c + dpdist::Point3{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)});
        const auto b = static_cast<std::uint32_t>(3 * t);
        m.triangles.push_back({b, b + 1, b + 2});
    }
    return m;
}

}  // namespace testing

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <algorithm>

#include "dpdist/error.hpp"
#include "dpdist/geometry.hpp"
#include "dpdist/spatial.hpp"
#include "support.hpp"

using namespace dpdist;

TEST_SUITE("geometry") {

TEST_CASE("apply_transform fixtures") {
    const PointCloud c = testing::random_cloud(10, 1);
    CHECK(apply_transform(c, RigidTransform::identity()) == c);

    const PointCloud origin(std::vector<Point3>{{0, 0, 0}});
    const auto moved = apply_transform(origin, RigidTransform(Quaternion::identity(), {0.1, 0, 0}));
    CHECK(moved[0] == Point3{0.1, 0, 0});

    const auto turned = apply_transform(PointCloud(std::vector<Point3>{{1, 0, 0}}),
                                        RigidTransform::from_axis_angle({0, 0, 1}, std::numbers::pi / 2, {}));
    CHECK(distance(turned[0], {0, 1, 0}) < 1e-6);
}

TEST_CASE("non-unit quaternion is rejected") {
    CHECK_THROWS_AS(RigidTransform(Quaternion{1.1, 0, 0, 0}, {}), ArgumentError);
    CHECK_NOTHROW(RigidTransform(Quaternion{1.0 + 1e-7, 0, 0, 0}, {}));
}

TEST_CASE("rigid invariance and inverse") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        TransformSpec spec;
        spec.kind = TransformKind::registration;
        const RigidTransform t = random_rigid_transform(spec, seed);
        const PointCloud c = testing::random_cloud(30, seed + 100);
        const PointCloud m = apply_transform(c, t);
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j)
                CHECK(std::abs(distance(m[i], m[j]) - distance(c[i], c[j])) < 1e-6);
        const PointCloud back = apply_transform(m, t.inverse());
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(distance(back[i], c[i]) < 1e-6);
        const RigidTransform both = t.inverse() * t;
        CHECK(rotation_angle_between(both.rotation(), Quaternion::identity()) < 1e-9);
    }
}

TEST_CASE("composition applies right operand first") {
    const auto a = RigidTransform::from_axis_angle({1, 2, 3}, 0.7, {0.1, -0.2, 0.3});
    const auto b = RigidTransform::from_axis_angle({-1, 0, 2}, 1.3, {0.5, 0.0, -0.1});
    const Point3 p{0.3, -0.4, 0.9};
    CHECK(distance((a * b).apply(p), a.apply(b.apply(p))) < 1e-12);
}

TEST_CASE("rotation vector round trip") {
    const Point3 v{0.3, -0.2, 0.5};
    const Point3 w = Quaternion::from_rotation_vector(v).to_rotation_vector();
    CHECK(distance(v, w) < 1e-12);
    CHECK(Quaternion::from_rotation_vector({}).w == 1.0);
}

TEST_CASE("point_triangle_distance fixtures") {
    const Point3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
    CHECK(point_triangle_distance({0, 0, 1}, a, b, c) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(point_triangle_distance({2, 0, 0}, a, b, c) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(point_triangle_distance({0.2, 0.2, 0}, a, b, c) == 0.0);
    // Degenerate triangles fall back to segments and points.
    CHECK(point_triangle_distance({0.5, 1, 0}, a, b, b) == doctest::Approx(1.0));
    CHECK(point_triangle_distance({0, 0, 3}, a, a, a) == doctest::Approx(3.0));
}

TEST_CASE("point_triangle_distance against a dense parametric search") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        Point3 v[3];
        for (auto& x : v) x = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const Point3 p{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        double best = 1e300;
        const int steps = 200;
        for (int i = 0; i <= steps; ++i)
            for (int j = 0; i + j <= steps; ++j) {
                const double s = double(i) / steps, t = double(j) / steps;
                best = std::min(best, distance(p, v[0] + s * (v[1] - v[0]) + t * (v[2] - v[0])));
            }
        const double d = point_triangle_distance(p, v[0], v[1], v[2]);
        CHECK(d <= best + 1e-12);
        CHECK(d >= best - 0.02);
    }
}

TEST_CASE("point_mesh_distance fixtures") {
    const TriangleMesh sq = testing::unit_square();
    CHECK(point_mesh_distance({0, 0, 2}, sq) == 2.0);
    for (const auto& v : sq.vertices) CHECK(point_mesh_distance(v, sq) == 0.0);
    CHECK_THROWS_AS(point_mesh_distance_brute({0, 0, 0}, TriangleMesh{}), EmptyInputError);
}

TEST_CASE("sample_mesh_surface stays on the mesh and is deterministic") {
    TriangleMesh tri;
    tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    tri.triangles = {{0, 1, 2}};
    const PointCloud s = sample_mesh_surface(tri, 100, 3);
    CHECK(s.size() == 100);
    for (const auto& p : s) CHECK(point_mesh_distance_brute(p, tri) <= 1e-9);
    CHECK(sample_mesh_surface(tri, 100, 3) == s);
    CHECK_FALSE(sample_mesh_surface(tri, 100, 4) == s);

    const TriangleMesh soup = testing::random_soup(20, 9);
    for (const auto& p : sample_mesh_surface(soup, 500, 1)) CHECK(point_mesh_distance(p, soup) <= 1e-9);
}

TEST_CASE("sample_mesh_surface splits by area") {
    // Areas 9:1; the count in the large triangle is binomial(10000, 0.9).
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {3, 0, 0}, {0, 3, 0}, {10, 0, 0}, {11, 0, 0}, {10, 1, 0}};
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    const std::size_t n = 10000;
    const PointCloud s = sample_mesh_surface(m, n, 11);
    std::size_t big = 0;
    for (const auto& p : s) big += p.x < 5.0;
    const double sd = std::sqrt(n * 0.9 * 0.1);
    CHECK(std::abs(static_cast<double>(big) - 9000.0) <= 3.0 * sd);
}

TEST_CASE("sample_mesh_surface rejects zero area") {
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    m.triangles = {{0, 1, 2}};
    CHECK_THROWS_AS(sample_mesh_surface(m, 5, 1), DegenerateError);
}

TEST_CASE("farthest point sampling fixtures") {
    const PointCloud line(std::vector<Point3>{{0, 0, 0}, {1, 0, 0}, {10, 0, 0}});
    const auto two = farthest_point_sampling_from(line, 2, 0);
    CHECK(two == std::vector<std::size_t>{0, 2});
    const auto all = farthest_point_sampling(line, 3, 7);
    CHECK(all.size() == 3);
    CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == 3);
    const auto one = farthest_point_sampling(line, 1, 7);
    CHECK(one.front() == all.front());
    CHECK_THROWS_AS(farthest_point_sampling(line, 4, 1), ArgumentError);
}

TEST_CASE("farthest point sampling greedy certificate") {
    const PointCloud c = testing::random_cloud(300, 4);
    const auto idx = farthest_point_sampling(c, 60, 8);
    for (std::size_t s = 1; s < idx.size(); ++s) {
        double best = -1.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            double d = 1e300;
            for (std::size_t j = 0; j < s; ++j) d = std::min(d, squared_distance(c[i], c[idx[j]]));
            best = std::max(best, d);
        }
        double got = 1e300;
        for (std::size_t j = 0; j < s; ++j) got = std::min(got, squared_distance(c[idx[s]], c[idx[j]]));
        CHECK(got == best);
    }
}

TEST_CASE("farthest point sampling handles duplicates") {
    const PointCloud c(std::vector<Point3>{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
    const auto idx = farthest_point_sampling_from(c, 3, 1);
    CHECK(idx == std::vector<std::size_t>{1, 0, 2});
}

TEST_CASE("normalize_mesh") {
    TriangleMesh cube;
    for (int i = 0; i < 8; ++i) cube.vertices.push_back({i & 1 ? 1.0 : -1.0, i & 2 ? 1.0 : -1.0, i & 4 ? 1.0 : -1.0});
    cube.triangles = {{0, 1, 2}};
    const TriangleMesh n = normalize_mesh(cube);
    for (const auto& v : n.vertices) {
        CHECK(std::abs(std::abs(v.x) - 0.8 / std::sqrt(3.0)) < 1e-12);
        CHECK(std::abs(norm(v) - 0.8) < 1e-12);
    }
    const TriangleMesh again = normalize_mesh(n);
    for (std::size_t i = 0; i < n.vertices.size(); ++i) CHECK(distance(again.vertices[i], n.vertices[i]) < 1e-9);

    TriangleMesh tri;
    tri.vertices = {{3, 4, 5}, {4, 4, 5}, {3, 6, 5}};
    tri.triangles = {{0, 1, 2}};
    const TriangleMesh t = normalize_mesh(tri);
    double max_norm = 0.0;
    Point3 lo{1e9, 1e9, 1e9}, hi{-1e9, -1e9, -1e9};
    for (const auto& v : t.vertices) {
        max_norm = std::max(max_norm, norm(v));
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
    }
    CHECK(max_norm == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(norm(lo + hi) < 1e-12);

    TriangleMesh point;
    point.vertices = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
    point.triangles = {{0, 1, 2}};
    CHECK_THROWS_AS(normalize_mesh(point), DegenerateError);
}

TEST_CASE("random_rigid_transform kinds") {
    TransformSpec spec;
    spec.kind = TransformKind::translation26;
    spec.magnitude = 0.2;
    const auto& dirs = grid_directions();
    spec.direction = static_cast<int>(std::find(dirs.begin(), dirs.end(), Point3{1, 0, 0}) - dirs.begin());
    const auto t = random_rigid_transform(spec, 1);
    CHECK(distance(t.translation(), {0.2, 0, 0}) < 1e-15);
    CHECK(t.rotation().w == 1.0);

    spec.kind = TransformKind::rotation26;
    spec.magnitude = 0.0;
    spec.direction = -1;
    const auto r = random_rigid_transform(spec, 2);
    CHECK(rotation_angle_between(r.rotation(), Quaternion::identity()) == 0.0);
    CHECK(norm(r.translation()) == 0.0);

    spec.magnitude = 20.0;
    const auto r20 = random_rigid_transform(spec, 3);
    CHECK(rotation_angle_between(r20.rotation(), Quaternion::identity()) * 180 / std::numbers::pi ==
          doctest::Approx(20.0));

    spec.kind = TransformKind::registration;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto g = random_rigid_transform(spec, s);
        CHECK(rotation_angle_between(g.rotation(), Quaternion::identity()) <= std::numbers::pi / 4 + 1e-12);
        CHECK(norm(g.translation()) <= 0.1 + 1e-12);
        const auto g2 = random_rigid_transform(spec, s);
        CHECK(g2.translation() == g.translation());
    }
    CHECK(dirs.size() == 26);
}

}

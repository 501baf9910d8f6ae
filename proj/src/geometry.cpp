#include "dpdist/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <string>

#include "dpdist/error.hpp"
#include "dpdist/random.hpp"

namespace dpdist {

void TriangleMesh::validate() const {
    const auto n = vertices.size();
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        for (auto idx : triangles[t]) {
            if (idx >= n) {
                throw DataError("triangle " + std::to_string(t) + " references vertex " + std::to_string(idx) +
                                " but the mesh has " + std::to_string(n) + " vertices");
            }
        }
    }
    for (const auto& v : vertices) {
        if (!is_finite(v)) throw DataError("mesh contains a non-finite vertex");
    }
}

double TriangleMesh::triangle_area(std::size_t t) const noexcept {
    const auto& tri = triangles[t];
    const Point3& a = vertices[tri[0]];
    return 0.5 * norm(cross(vertices[tri[1]] - a, vertices[tri[2]] - a));
}

double TriangleMesh::total_area() const noexcept {
    double area = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) area += triangle_area(t);
    return area;
}

// ---------------------------------------------------------------------------
// Quaternions and rigid transforms

Quaternion Quaternion::from_axis_angle(const Point3& axis, double angle) {
    const double n = dpdist::norm(axis);
    if (!(n > 0.0)) {
        if (angle == 0.0) return identity();
        throw ArgumentError("rotation axis must be nonzero");
    }
    const double h = 0.5 * angle;
    const double s = std::sin(h) / n;
    return {std::cos(h), axis.x * s, axis.y * s, axis.z * s};
}

Quaternion Quaternion::from_rotation_vector(const Point3& v) {
    const double angle = dpdist::norm(v);
    if (angle == 0.0) return identity();
    return from_axis_angle(v, angle);
}

Quaternion Quaternion::normalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw ArgumentError("cannot normalize a zero quaternion");
    return {w / n, x / n, y / n, z / n};
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) noexcept {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Point3 Quaternion::rotate(const Point3& p) const noexcept {
    // v' = v + 2w (q x v) + 2 q x (q x v)
    const Point3 q{x, y, z};
    const Point3 t = 2.0 * cross(q, p);
    return p + w * t + cross(q, t);
}

Point3 Quaternion::to_rotation_vector() const noexcept {
    Quaternion q = *this;
    if (q.w < 0.0) q = {-q.w, -q.x, -q.y, -q.z};
    const double s = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
    if (s == 0.0) return {};
    const double angle = 2.0 * std::atan2(s, q.w);
    return Point3{q.x, q.y, q.z} * (angle / s);
}

double rotation_angle_between(const Quaternion& a, const Quaternion& b) noexcept {
    const Quaternion d = a.conjugate() * b;
    const double s = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    return 2.0 * std::atan2(s, std::abs(d.w));
}

RigidTransform::RigidTransform(const Quaternion& rotation, const Point3& translation)
    : rotation_(rotation), translation_(translation) {
    if (!std::isfinite(rotation.norm()) || std::abs(rotation.norm() - 1.0) > kUnitTolerance) {
        throw ArgumentError("invalid transform: rotation quaternion is not unit length");
    }
    if (!is_finite(translation)) throw ArgumentError("invalid transform: non-finite translation");
}

RigidTransform RigidTransform::from_axis_angle(const Point3& axis, double angle, const Point3& translation) {
    return {Quaternion::from_axis_angle(axis, angle), translation};
}

RigidTransform RigidTransform::inverse() const {
    const Quaternion inv = rotation_.conjugate();
    return {inv, -inv.rotate(translation_)};
}

RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    return {(a.rotation_ * b.rotation_).normalized(), a.rotation_.rotate(b.translation_) + a.translation_};
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
    std::vector<Point3> out;
    out.reserve(cloud.size());
    for (const auto& p : cloud) out.push_back(t.apply(p));
    return PointCloud(std::move(out));
}

// ---------------------------------------------------------------------------
// Point to triangle

namespace {

Point3 closest_point_on_segment(const Point3& p, const Point3& a, const Point3& b) {
    const Point3 ab = b - a;
    const double len2 = squared_norm(ab);
    if (len2 == 0.0) return a;
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

Point3 closest_on_edges(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
    Point3 best = closest_point_on_segment(p, a, b);
    double best_d = squared_distance(p, best);
    for (const Point3 q : {closest_point_on_segment(p, b, c), closest_point_on_segment(p, c, a)}) {
        const double d = squared_distance(p, q);
        if (d < best_d) {
            best_d = d;
            best = q;
        }
    }
    return best;
}

}  // namespace

namespace {

struct Closest {
    Point3 point;
    bool face = false;  // interior of the face rather than an edge or vertex
};

Closest closest_feature(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
    const Point3 ab = b - a;
    const Point3 ac = c - a;
    const Point3 n = cross(ab, ac);
    const double n2 = squared_norm(n);
    // Degenerate (collinear or coincident) vertices: the triangle is its edges.
    if (!(n2 > 1e-24 * squared_norm(ab) * squared_norm(ac)) || n2 == 0.0) return {closest_on_edges(p, a, b, c)};

    // Voronoi-region walk (Ericson, Real-Time Collision Detection 5.1.5).
    const Point3 ap = p - a;
    const double d1 = dot(ab, ap);
    const double d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return {a};

    const Point3 bp = p - b;
    const double d3 = dot(ab, bp);
    const double d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return {b};

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return {a + (d1 / (d1 - d3)) * ab};

    const Point3 cp = p - c;
    const double d5 = dot(ab, cp);
    const double d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return {c};

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return {a + (d2 / (d2 - d6)) * ac};

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        return {b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b)};
    }

    const double denom = 1.0 / (va + vb + vc);
    return {a + (vb * denom) * ab + (vc * denom) * ac, true};
}

}  // namespace

Point3 closest_point_on_triangle(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
    return closest_feature(p, a, b, c).point;
}

double point_triangle_distance(const Point3& p, const Point3& v0, const Point3& v1, const Point3& v2) {
    const Closest f = closest_feature(p, v0, v1, v2);
    if (!f.face) return distance(p, f.point);
    // Plane distance avoids the rounding of the reconstructed foot point.
    const Point3 n = cross(v1 - v0, v2 - v0);
    return std::abs(dot(p - v0, n)) / norm(n);
}

double point_mesh_distance_brute(const Point3& p, const TriangleMesh& mesh) {
    if (mesh.triangles.empty()) throw EmptyInputError("empty surface: mesh has no triangles");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : mesh.triangles) {
        best = std::min(best, point_triangle_distance(p, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Sampling

PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
    std::vector<double> cumulative(mesh.triangles.size());
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        total += mesh.triangle_area(t);
        cumulative[t] = total;
    }
    if (!(total > 0.0)) throw DegenerateError("degenerate surface: total mesh area is zero");

    Rng rng(seed);
    std::vector<Point3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double target = rng.uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        // Zero-area triangles share their cumulative value with the previous
        // entry, so upper_bound never lands on them.
        std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
        const auto& tri = mesh.triangles[t];
        const double r1 = std::sqrt(rng.uniform());
        const double r2 = rng.uniform();
        const Point3& a = mesh.vertices[tri[0]];
        const Point3& b = mesh.vertices[tri[1]];
        const Point3& c = mesh.vertices[tri[2]];
        out.push_back((1.0 - r1) * a + (r1 * (1.0 - r2)) * b + (r1 * r2) * c);
    }
    return PointCloud(std::move(out));
}

std::vector<std::size_t> farthest_point_sampling_from(const PointCloud& cloud, std::size_t m, std::size_t start) {
    const std::size_t n = cloud.size();
    if (m > n) throw ArgumentError("farthest point sampling: requested " + std::to_string(m) + " of " + std::to_string(n) + " points");
    if (m == 0) return {};
    if (start >= n) throw ArgumentError("farthest point sampling: start index out of range");

    std::vector<std::size_t> selected;
    selected.reserve(m);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    std::vector<char> taken(n, 0);
    std::size_t current = start;
    for (std::size_t s = 0; s < m; ++s) {
        selected.push_back(current);
        taken[current] = 1;
        const Point3 c = cloud[current];
        std::size_t next = 0;
        double next_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            min_d2[i] = std::min(min_d2[i], squared_distance(cloud[i], c));
            if (!taken[i] && min_d2[i] > next_d) {
                next_d = min_d2[i];
                next = i;
            }
        }
        current = next;
    }
    return selected;
}

std::vector<std::size_t> farthest_point_sampling(const PointCloud& cloud, std::size_t m, std::uint64_t seed) {
    if (m > cloud.size()) {
        throw ArgumentError("farthest point sampling: requested " + std::to_string(m) + " of " +
                            std::to_string(cloud.size()) + " points");
    }
    if (m == 0) return {};
    Rng rng(seed);
    return farthest_point_sampling_from(cloud, m, static_cast<std::size_t>(rng.below(cloud.size())));
}

PointCloud select(const PointCloud& cloud, std::span<const std::size_t> indices) {
    std::vector<Point3> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(cloud[i]);
    return PointCloud(std::move(out));
}

TriangleMesh normalize_mesh(const TriangleMesh& mesh) {
    if (mesh.vertices.empty()) throw DegenerateError("degenerate shape: mesh has no vertices");
    Point3 lo = mesh.vertices.front();
    Point3 hi = lo;
    for (const auto& v : mesh.vertices) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
    }
    const Point3 center = 0.5 * (lo + hi);
    double max_norm = 0.0;
    for (const auto& v : mesh.vertices) max_norm = std::max(max_norm, norm(v - center));
    if (!(max_norm > 0.0)) throw DegenerateError("degenerate shape: all vertices coincide");

    const double scale = kNormalizedRadius / max_norm;
    TriangleMesh out;
    out.triangles = mesh.triangles;
    out.vertices.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) out.vertices.push_back((v - center) * scale);
    return out;
}

// ---------------------------------------------------------------------------
// Random transforms

const std::array<Point3, 26>& grid_directions() {
    static const std::array<Point3, 26> dirs = [] {
        std::array<Point3, 26> d{};
        std::size_t i = 0;
        for (int x = -1; x <= 1; ++x)
            for (int y = -1; y <= 1; ++y)
                for (int z = -1; z <= 1; ++z)
                    if (x != 0 || y != 0 || z != 0) d[i++] = {double(x), double(y), double(z)};
        return d;
    }();
    return dirs;
}

Point3 random_unit_vector(Rng& rng) {
    for (;;) {
        const Point3 v{rng.normal(), rng.normal(), rng.normal()};
        const double n = norm(v);
        if (n > 1e-12) return v * (1.0 / n);
    }
}

RigidTransform random_rigid_transform(const TransformSpec& spec, std::uint64_t seed) {
    if (!(spec.magnitude >= 0.0)) throw ArgumentError("transform magnitude must be nonnegative");
    Rng rng(seed);
    const auto& dirs = grid_directions();
    auto pick_direction = [&]() -> Point3 {
        if (spec.direction >= 26) throw ArgumentError("direction index must be in [0, 26)");
        const std::size_t idx = spec.direction >= 0 ? static_cast<std::size_t>(spec.direction)
                                                     : static_cast<std::size_t>(rng.below(26));
        const Point3 d = dirs[idx];
        return d * (1.0 / norm(d));
    };

    switch (spec.kind) {
        case TransformKind::translation26:
            return {Quaternion::identity(), pick_direction() * spec.magnitude};
        case TransformKind::rotation26: {
            const Point3 axis = pick_direction();
            return {Quaternion::from_axis_angle(axis, spec.magnitude * std::numbers::pi / 180.0), {}};
        }
        case TransformKind::registration: {
            const double angle = rng.uniform(-spec.max_angle_deg, spec.max_angle_deg) * std::numbers::pi / 180.0;
            const Point3 axis = random_unit_vector(rng);
            const double shift = rng.uniform(-spec.max_translation, spec.max_translation);
            const Point3 dir = random_unit_vector(rng);
            return {Quaternion::from_axis_angle(axis, angle), dir * shift};
        }
    }
    throw ArgumentError("unknown transform kind");
}

}  // namespace dpdist

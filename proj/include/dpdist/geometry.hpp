#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dpdist/random.hpp"

namespace dpdist {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Point3& operator+=(const Point3& o) noexcept { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Point3& operator-=(const Point3& o) noexcept { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Point3& operator*=(double s) noexcept { x *= s; y *= s; z *= s; return *this; }

    constexpr double operator[](std::size_t i) const noexcept { return i == 0 ? x : (i == 1 ? y : z); }

    friend constexpr bool operator==(const Point3&, const Point3&) = default;
};

constexpr Point3 operator+(Point3 a, const Point3& b) noexcept { return a += b; }
constexpr Point3 operator-(Point3 a, const Point3& b) noexcept { return a -= b; }
constexpr Point3 operator-(const Point3& a) noexcept { return {-a.x, -a.y, -a.z}; }
constexpr Point3 operator*(Point3 a, double s) noexcept { return a *= s; }
constexpr Point3 operator*(double s, Point3 a) noexcept { return a *= s; }

constexpr double dot(const Point3& a, const Point3& b) noexcept { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Point3 cross(const Point3& a, const Point3& b) noexcept {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
constexpr double squared_norm(const Point3& a) noexcept { return dot(a, a); }
inline double norm(const Point3& a) noexcept { return std::sqrt(squared_norm(a)); }

/// Squared Euclidean distance, evaluated as dx*dx + dy*dy + dz*dz in that order.
/// The SIMD nearest-neighbour kernels reproduce exactly this operation order.
constexpr double squared_distance(const Point3& a, const Point3& b) noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}
inline double distance(const Point3& a, const Point3& b) noexcept { return std::sqrt(squared_distance(a, b)); }

inline bool is_finite(const Point3& p) noexcept {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

/// Ordered point sequence. Order is significant for determinism of pooled
/// statistics but not for any distance value.
class PointCloud {
public:
    PointCloud() = default;
    explicit PointCloud(std::vector<Point3> points) : points_(std::move(points)) {}

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }

    const Point3& operator[](std::size_t i) const noexcept { return points_[i]; }
    Point3& operator[](std::size_t i) noexcept { return points_[i]; }

    std::span<const Point3> points() const noexcept { return points_; }
    std::vector<Point3>& mutable_points() noexcept { return points_; }

    void push_back(const Point3& p) { points_.push_back(p); }
    void reserve(std::size_t n) { points_.reserve(n); }

    auto begin() const noexcept { return points_.begin(); }
    auto end() const noexcept { return points_.end(); }

    friend bool operator==(const PointCloud&, const PointCloud&) = default;

private:
    std::vector<Point3> points_;
};

using Triangle = std::array<std::uint32_t, 3>;

struct TriangleMesh {
    std::vector<Point3> vertices;
    std::vector<Triangle> triangles;

    /// Throws DataError when an index is out of range.
    void validate() const;

    double triangle_area(std::size_t t) const noexcept;
    double total_area() const noexcept;
};

struct Quaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    static Quaternion identity() noexcept { return {}; }
    /// Rotation of `angle` radians about `axis` (normalized internally).
    static Quaternion from_axis_angle(const Point3& axis, double angle);
    /// Axis-angle vector: direction is the axis, length the angle in radians.
    static Quaternion from_rotation_vector(const Point3& v);

    double norm() const noexcept { return std::sqrt(w * w + x * x + y * y + z * z); }
    Quaternion conjugate() const noexcept { return {w, -x, -y, -z}; }
    Quaternion normalized() const;

    Point3 rotate(const Point3& p) const noexcept;
    Point3 to_rotation_vector() const noexcept;

    friend Quaternion operator*(const Quaternion& a, const Quaternion& b) noexcept;
};

/// Geodesic angle between two rotations, in radians, within [0, pi].
double rotation_angle_between(const Quaternion& a, const Quaternion& b) noexcept;

/// p -> R p + t.
class RigidTransform {
public:
    static constexpr double kUnitTolerance = 1e-6;

    RigidTransform() = default;
    /// Throws ArgumentError if |rotation| deviates from 1 by more than kUnitTolerance.
    RigidTransform(const Quaternion& rotation, const Point3& translation);

    static RigidTransform identity() { return {}; }
    static RigidTransform from_axis_angle(const Point3& axis, double angle, const Point3& translation);

    const Quaternion& rotation() const noexcept { return rotation_; }
    const Point3& translation() const noexcept { return translation_; }

    Point3 apply(const Point3& p) const noexcept { return rotation_.rotate(p) + translation_; }
    RigidTransform inverse() const;
    /// (a * b)(p) == a(b(p)).
    friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b);

private:
    Quaternion rotation_{};
    Point3 translation_{};
};

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t);

/// Exact Euclidean distance from p to the closed triangle (v0, v1, v2).
/// Degenerate triangles reduce to segment or point distance.
double point_triangle_distance(const Point3& p, const Point3& v0, const Point3& v1, const Point3& v2);

/// Closest point on the closed triangle.
Point3 closest_point_on_triangle(const Point3& p, const Point3& v0, const Point3& v1, const Point3& v2);

/// Brute-force minimum over all triangles. Throws EmptyInputError for a mesh
/// with no triangles.
double point_mesh_distance_brute(const Point3& p, const TriangleMesh& mesh);

/// Area-weighted uniform surface sample. Throws DegenerateError when the
/// total area is zero.
PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Greedy farthest-point sampling. The first index is drawn from `seed`;
/// ties in the max-min distance go to the lowest index.
std::vector<std::size_t> farthest_point_sampling(const PointCloud& cloud, std::size_t m, std::uint64_t seed);
/// Same greedy rule with an explicit start index.
std::vector<std::size_t> farthest_point_sampling_from(const PointCloud& cloud, std::size_t m, std::size_t start);

PointCloud select(const PointCloud& cloud, std::span<const std::size_t> indices);

/// Centers the bounding box at the origin and scales so the largest vertex
/// norm is exactly kNormalizedRadius.
inline constexpr double kNormalizedRadius = 0.8;
TriangleMesh normalize_mesh(const TriangleMesh& mesh);

enum class TransformKind { translation26, rotation26, registration };

/// The 26 nonzero vectors with components in {-1, 0, 1}, unnormalized, in
/// lexicographic order of (x, y, z).
const std::array<Point3, 26>& grid_directions();

struct TransformSpec {
    TransformKind kind = TransformKind::translation26;
    /// translation26: translation length. rotation26: angle in degrees.
    double magnitude = 0.0;
    /// Fixed direction index into grid_directions(); negative draws one at random.
    int direction = -1;
    /// registration: rotation angle range (degrees) and translation range.
    double max_angle_deg = 45.0;
    double max_translation = 0.1;
};

RigidTransform random_rigid_transform(const TransformSpec& spec, std::uint64_t seed);

Point3 random_unit_vector(Rng& rng);

}  // namespace dpdist

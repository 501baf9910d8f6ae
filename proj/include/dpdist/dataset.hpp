#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpdist/geometry.hpp"

namespace dpdist {

// ---------------------------------------------------------------------------
// Text formats

/// OFF reader. Faces with more than three vertices are fan triangulated
/// as (0,1,2), (0,2,3), ... Errors carry the offending line number.
TriangleMesh parse_off(std::string_view text);
std::string write_off(const TriangleMesh& mesh);

/// One point per line, three whitespace separated reals, '#' starts a comment.
PointCloud read_xyz(std::string_view text);
/// Writes 17 significant digits, so read_xyz(write_xyz(c)) == c exactly.
std::string write_xyz(const PointCloud& cloud);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// ---------------------------------------------------------------------------
// Synthetic shapes

enum class ShapeKind { plane, sphere, box, cylinder, wedge, chair };

std::string_view shape_kind_name(ShapeKind kind) noexcept;
/// Throws ArgumentError for an unknown name.
ShapeKind parse_shape_kind(std::string_view name);

/// Dimensions, interpreted per kind:
///   plane    (width, depth, -)        rectangle in z = 0
///   sphere   (radius, -, -)           UV sphere
///   box      (sx, sy, sz)             full extents, centred
///   cylinder (radius, height, -)      capped, axis z
///   wedge    (sx, sy, sz)             right-triangle prism extruded along y
///   chair    (seat width, back height, leg height)
struct ShapeSpec {
    ShapeKind kind = ShapeKind::sphere;
    std::array<double, 3> size{1.0, 1.0, 1.0};
    int resolution = 16;
};

/// Throws ArgumentError on a nonpositive dimension. Closed kinds (sphere,
/// box, cylinder, wedge) are watertight with shared vertices.
TriangleMesh make_synthetic_shape(const ShapeSpec& spec);

/// Closed-form unsigned distance for plane, sphere and box specs (in the
/// shape's own frame); empty for other kinds.
std::optional<double> analytic_distance(const ShapeSpec& spec, const Point3& p);

/// Random dimensions for `kind`, a random rotation, then normalize_mesh().
TriangleMesh random_synthetic_mesh(ShapeKind kind, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Training data

enum class SampleSource { surface, near, uniform };

struct TrainingSample {
    Point3 query;
    double gt_distance = 0.0;
    SampleSource source = SampleSource::surface;
};

/// One surface cloud and N labelled queries: N - 2*(N/4) on the surface,
/// N/4 within 0.1 of it, N/4 uniform in [-1, 1]^3.
struct TrainingBatch {
    PointCloud surface_cloud;
    std::vector<TrainingSample> samples;
};

inline constexpr double kNearShellWidth = 0.1;
inline constexpr double kQueryCubeHalfExtent = 1.0;

TrainingBatch generate_training_batch(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

}  // namespace dpdist

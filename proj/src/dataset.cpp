#include "dpdist/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dpdist/error.hpp"
#include "dpdist/random.hpp"
#include "dpdist/spatial.hpp"

namespace dpdist {

namespace {

// Splits text into lines, tracking 1-based line numbers.
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    /// Next line with comments stripped and at least one token; false at EOF.
    bool next(std::vector<std::string_view>& tokens) {
        while (pos_ < text_.size()) {
            const auto end = text_.find('\n', pos_);
            std::string_view line = text_.substr(pos_, end == std::string_view::npos ? std::string_view::npos : end - pos_);
            pos_ = end == std::string_view::npos ? text_.size() : end + 1;
            ++line_;
            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            tokens.clear();
            std::size_t i = 0;
            while (i < line.size()) {
                while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
                const std::size_t start = i;
                while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
                if (i > start) tokens.push_back(line.substr(start, i - start));
            }
            if (!tokens.empty()) return true;
        }
        return false;
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

double parse_real(std::string_view token, std::size_t line) {
    double v = 0.0;
    const auto* first = token.data();
    if (!token.empty() && token.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
        throw ParseError(line, "expected a finite real number, got '" + std::string(token) + "'");
    }
    return v;
}

std::size_t parse_count(std::string_view token, std::size_t line) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ParseError(line, "expected a nonnegative integer, got '" + std::string(token) + "'");
    }
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// OFF

TriangleMesh parse_off(std::string_view text) {
    LineReader reader(text);
    std::vector<std::string_view> tok;
    if (!reader.next(tok)) throw ParseError(reader.line(), "missing OFF header");

    // ModelNet files sometimes glue the counts onto the header: "OFF490 518 0".
    std::vector<std::string_view> counts;
    if (tok[0].substr(0, 3) != "OFF") throw ParseError(reader.line(), "missing OFF header");
    if (tok[0].size() > 3) {
        counts.push_back(tok[0].substr(3));
        counts.insert(counts.end(), tok.begin() + 1, tok.end());
    } else {
        counts.assign(tok.begin() + 1, tok.end());
    }
    if (counts.empty()) {
        if (!reader.next(tok)) throw ParseError(reader.line(), "missing vertex/face counts");
        counts = tok;
    }
    if (counts.size() < 2) throw ParseError(reader.line(), "counts line needs vertex and face counts");
    const std::size_t nv = parse_count(counts[0], reader.line());
    const std::size_t nf = parse_count(counts[1], reader.line());

    TriangleMesh mesh;
    mesh.vertices.reserve(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        if (!reader.next(tok)) throw ParseError(reader.line(), "count mismatch: expected " + std::to_string(nv) + " vertices");
        if (tok.size() < 3) throw ParseError(reader.line(), "vertex line needs 3 coordinates");
        mesh.vertices.push_back({parse_real(tok[0], reader.line()), parse_real(tok[1], reader.line()),
                                 parse_real(tok[2], reader.line())});
    }
    for (std::size_t f = 0; f < nf; ++f) {
        if (!reader.next(tok)) throw ParseError(reader.line(), "count mismatch: expected " + std::to_string(nf) + " faces");
        const std::size_t n = parse_count(tok[0], reader.line());
        if (n < 3) throw ParseError(reader.line(), "face needs at least 3 vertices");
        if (tok.size() < n + 1) throw ParseError(reader.line(), "face lists fewer indices than declared");
        std::vector<std::uint32_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t v = parse_count(tok[i + 1], reader.line());
            if (v >= nv) throw ParseError(reader.line(), "vertex index " + std::to_string(v) + " out of range");
            idx[i] = static_cast<std::uint32_t>(v);
        }
        for (std::size_t i = 1; i + 1 < n; ++i) mesh.triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
    if (reader.next(tok)) throw ParseError(reader.line(), "count mismatch: unexpected data after the declared faces");
    return mesh;
}

std::string write_off(const TriangleMesh& mesh) {
    std::string out = "OFF\n" + std::to_string(mesh.vertices.size()) + " " + std::to_string(mesh.triangles.size()) + " 0\n";
    char buf[96];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v.x, v.y, v.z);
        out += buf;
    }
    for (const auto& t : mesh.triangles) {
        std::snprintf(buf, sizeof buf, "3 %u %u %u\n", t[0], t[1], t[2]);
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------
// XYZ

PointCloud read_xyz(std::string_view text) {
    LineReader reader(text);
    std::vector<std::string_view> tok;
    PointCloud cloud;
    while (reader.next(tok)) {
        if (tok.size() != 3) {
            throw ParseError(reader.line(), "expected 3 columns, found " + std::to_string(tok.size()));
        }
        cloud.push_back({parse_real(tok[0], reader.line()), parse_real(tok[1], reader.line()),
                         parse_real(tok[2], reader.line())});
    }
    return cloud;
}

std::string write_xyz(const PointCloud& cloud) {
    std::string out;
    out.reserve(cloud.size() * 64);
    char buf[96];
    for (const auto& p : cloud) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
        out += buf;
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Synthetic shapes

std::string_view shape_kind_name(ShapeKind kind) noexcept {
    switch (kind) {
        case ShapeKind::plane: return "plane";
        case ShapeKind::sphere: return "sphere";
        case ShapeKind::box: return "box";
        case ShapeKind::cylinder: return "cylinder";
        case ShapeKind::wedge: return "wedge";
        case ShapeKind::chair: return "chair";
    }
    return "unknown";
}

ShapeKind parse_shape_kind(std::string_view name) {
    for (auto k : {ShapeKind::plane, ShapeKind::sphere, ShapeKind::box, ShapeKind::cylinder, ShapeKind::wedge,
                   ShapeKind::chair}) {
        if (shape_kind_name(k) == name) return k;
    }
    throw ArgumentError("unknown shape kind '" + std::string(name) + "'");
}

namespace {

void append_box(TriangleMesh& mesh, const Point3& lo, const Point3& hi) {
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (int i = 0; i < 8; ++i) {
        mesh.vertices.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
    }
    // Outward-facing quads as vertex bit patterns (x=1, y=2, z=4).
    static constexpr std::uint32_t quads[6][4] = {
        {0, 2, 3, 1}, {4, 5, 7, 6},  // z- , z+
        {0, 1, 5, 4}, {2, 6, 7, 3},  // y- , y+
        {0, 4, 6, 2}, {1, 3, 7, 5},  // x- , x+
    };
    for (const auto& q : quads) {
        mesh.triangles.push_back({base + q[0], base + q[1], base + q[2]});
        mesh.triangles.push_back({base + q[0], base + q[2], base + q[3]});
    }
}

TriangleMesh make_sphere(double r, int res) {
    TriangleMesh mesh;
    const int rings = std::max(res, 3);
    const int segments = 2 * rings;
    mesh.vertices.push_back({0.0, 0.0, r});
    for (int i = 1; i < rings; ++i) {
        const double theta = std::numbers::pi * i / rings;
        for (int j = 0; j < segments; ++j) {
            const double phi = 2.0 * std::numbers::pi * j / segments;
            mesh.vertices.push_back({r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi),
                                     r * std::cos(theta)});
        }
    }
    mesh.vertices.push_back({0.0, 0.0, -r});
    const auto south = static_cast<std::uint32_t>(mesh.vertices.size() - 1);
    auto ring = [&](int i, int j) { return static_cast<std::uint32_t>(1 + (i - 1) * segments + (j % segments)); };
    for (int j = 0; j < segments; ++j) mesh.triangles.push_back({0, ring(1, j), ring(1, j + 1)});
    for (int i = 1; i + 1 < rings; ++i) {
        for (int j = 0; j < segments; ++j) {
            mesh.triangles.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
            mesh.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
        }
    }
    for (int j = 0; j < segments; ++j) mesh.triangles.push_back({south, ring(rings - 1, j + 1), ring(rings - 1, j)});
    return mesh;
}

TriangleMesh make_cylinder(double r, double h, int res) {
    TriangleMesh mesh;
    const int segments = std::max(res, 3);
    mesh.vertices.push_back({0.0, 0.0, -0.5 * h});
    mesh.vertices.push_back({0.0, 0.0, 0.5 * h});
    for (int j = 0; j < segments; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / segments;
        mesh.vertices.push_back({r * std::cos(phi), r * std::sin(phi), -0.5 * h});
        mesh.vertices.push_back({r * std::cos(phi), r * std::sin(phi), 0.5 * h});
    }
    auto lo = [&](int j) { return static_cast<std::uint32_t>(2 + 2 * (j % segments)); };
    auto hi = [&](int j) { return static_cast<std::uint32_t>(3 + 2 * (j % segments)); };
    for (int j = 0; j < segments; ++j) {
        mesh.triangles.push_back({0, lo(j + 1), lo(j)});
        mesh.triangles.push_back({1, hi(j), hi(j + 1)});
        mesh.triangles.push_back({lo(j), lo(j + 1), hi(j + 1)});
        mesh.triangles.push_back({lo(j), hi(j + 1), hi(j)});
    }
    return mesh;
}

TriangleMesh make_wedge(double sx, double sy, double sz) {
    TriangleMesh mesh;
    const double x0 = -0.5 * sx, x1 = 0.5 * sx, z0 = -0.5 * sz, z1 = 0.5 * sz;
    for (double y : {-0.5 * sy, 0.5 * sy}) {
        mesh.vertices.push_back({x0, y, z0});
        mesh.vertices.push_back({x1, y, z0});
        mesh.vertices.push_back({x0, y, z1});
    }
    mesh.triangles = {
        {0, 2, 1}, {3, 4, 5},             // end caps
        {0, 1, 4}, {0, 4, 3},             // bottom
        {0, 3, 5}, {0, 5, 2},             // vertical back
        {1, 2, 5}, {1, 5, 4},             // slope
    };
    return mesh;
}

TriangleMesh make_chair(double seat_width, double back_height, double leg_height) {
    const double depth = 0.9 * seat_width;
    const double t = 0.12;
    const double w2 = 0.5 * seat_width;
    const double d2 = 0.5 * depth;
    TriangleMesh mesh;
    append_box(mesh, {-w2, -d2, leg_height}, {w2, d2, leg_height + t});
    append_box(mesh, {-w2, d2 - t, leg_height + t}, {w2, d2, leg_height + t + back_height});
    for (double sx : {-1.0, 1.0}) {
        for (double sy : {-1.0, 1.0}) {
            const double cx = sx * (w2 - 0.5 * t);
            const double cy = sy * (d2 - 0.5 * t);
            append_box(mesh, {cx - 0.5 * t, cy - 0.5 * t, 0.0}, {cx + 0.5 * t, cy + 0.5 * t, leg_height});
        }
    }
    return mesh;
}

}  // namespace

TriangleMesh make_synthetic_shape(const ShapeSpec& spec) {
    const auto& s = spec.size;
    auto need = [&](std::initializer_list<double> dims) {
        for (double d : dims) {
            if (!(d > 0.0) || !std::isfinite(d)) {
                throw ArgumentError(std::string(shape_kind_name(spec.kind)) + " dimensions must be positive");
            }
        }
    };
    if (spec.resolution < 1) throw ArgumentError("shape resolution must be positive");
    switch (spec.kind) {
        case ShapeKind::plane: {
            need({s[0], s[1]});
            TriangleMesh mesh;
            const double a = 0.5 * s[0], b = 0.5 * s[1];
            mesh.vertices = {{-a, -b, 0.0}, {a, -b, 0.0}, {a, b, 0.0}, {-a, b, 0.0}};
            mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
            return mesh;
        }
        case ShapeKind::sphere:
            need({s[0]});
            return make_sphere(s[0], spec.resolution);
        case ShapeKind::box: {
            need({s[0], s[1], s[2]});
            TriangleMesh mesh;
            append_box(mesh, {-0.5 * s[0], -0.5 * s[1], -0.5 * s[2]}, {0.5 * s[0], 0.5 * s[1], 0.5 * s[2]});
            return mesh;
        }
        case ShapeKind::cylinder:
            need({s[0], s[1]});
            return make_cylinder(s[0], s[1], spec.resolution);
        case ShapeKind::wedge:
            need({s[0], s[1], s[2]});
            return make_wedge(s[0], s[1], s[2]);
        case ShapeKind::chair:
            need({s[0], s[1], s[2]});
            return make_chair(s[0], s[1], s[2]);
    }
    throw ArgumentError("unknown shape kind");
}

std::optional<double> analytic_distance(const ShapeSpec& spec, const Point3& p) {
    const auto& s = spec.size;
    switch (spec.kind) {
        case ShapeKind::sphere:
            return std::abs(norm(p) - s[0]);
        case ShapeKind::plane: {
            const double dx = std::max(std::abs(p.x) - 0.5 * s[0], 0.0);
            const double dy = std::max(std::abs(p.y) - 0.5 * s[1], 0.0);
            return std::sqrt(dx * dx + dy * dy + p.z * p.z);
        }
        case ShapeKind::box: {
            const Point3 q{std::abs(p.x) - 0.5 * s[0], std::abs(p.y) - 0.5 * s[1], std::abs(p.z) - 0.5 * s[2]};
            const double inner = std::max({q.x, q.y, q.z});
            if (inner <= 0.0) return -inner;
            return norm(Point3{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)});
        }
        default:
            return std::nullopt;
    }
}

TriangleMesh random_synthetic_mesh(ShapeKind kind, std::uint64_t seed) {
    Rng rng(seed);
    ShapeSpec spec;
    spec.kind = kind;
    switch (kind) {
        case ShapeKind::plane:
            spec.size = {rng.uniform(0.6, 1.6), rng.uniform(0.6, 1.6), 1.0};
            break;
        case ShapeKind::sphere:
            spec.size = {1.0, 1.0, 1.0};
            spec.resolution = 24;
            break;
        case ShapeKind::box:
        case ShapeKind::wedge:
            spec.size = {rng.uniform(0.4, 1.6), rng.uniform(0.4, 1.6), rng.uniform(0.4, 1.6)};
            break;
        case ShapeKind::cylinder:
            spec.size = {rng.uniform(0.3, 0.8), rng.uniform(0.4, 1.6), 1.0};
            spec.resolution = 32;
            break;
        case ShapeKind::chair:
            spec.size = {rng.uniform(0.8, 1.2), rng.uniform(0.6, 1.2), rng.uniform(0.5, 1.0)};
            break;
    }
    TriangleMesh mesh = make_synthetic_shape(spec);
    // Uniform random rotation from a normalized Gaussian 4-vector.
    Quaternion q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    q = q.normalized();
    for (auto& v : mesh.vertices) v = q.rotate(v);
    return normalize_mesh(mesh);
}

// ---------------------------------------------------------------------------
// Training batches

TrainingBatch generate_training_batch(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
    const MeshDistanceIndex index(mesh);
    const std::size_t n_near = n / 4;
    const std::size_t n_uniform = n / 4;
    const std::size_t n_surface = n - n_near - n_uniform;

    TrainingBatch batch;
    batch.surface_cloud = sample_mesh_surface(mesh, n, derive_seed(seed, 1));
    batch.samples.reserve(n);

    const PointCloud on_surface = sample_mesh_surface(mesh, n_surface + n_near, derive_seed(seed, 2));
    for (std::size_t i = 0; i < n_surface; ++i) {
        batch.samples.push_back({on_surface[i], index.distance(on_surface[i]), SampleSource::surface});
    }
    Rng rng(derive_seed(seed, 3));
    for (std::size_t i = 0; i < n_near; ++i) {
        const Point3 dir = random_unit_vector(rng);
        const Point3 q = on_surface[n_surface + i] + dir * rng.uniform(0.0, kNearShellWidth);
        batch.samples.push_back({q, index.distance(q), SampleSource::near});
    }
    for (std::size_t i = 0; i < n_uniform; ++i) {
        const Point3 q{rng.uniform(-kQueryCubeHalfExtent, kQueryCubeHalfExtent),
                       rng.uniform(-kQueryCubeHalfExtent, kQueryCubeHalfExtent),
                       rng.uniform(-kQueryCubeHalfExtent, kQueryCubeHalfExtent)};
        batch.samples.push_back({q, index.distance(q), SampleSource::uniform});
    }
    return batch;
}

}  // namespace dpdist

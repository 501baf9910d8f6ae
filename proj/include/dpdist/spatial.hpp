#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dpdist/geometry.hpp"

namespace dpdist {

/// Static 3-d tree over a point set for exact nearest-neighbour queries.
/// Distances are evaluated with squared_distance(), so results are bitwise
/// equal to a brute-force scan.
class KdTree {
public:
    explicit KdTree(std::span<const Point3> points, std::size_t leaf_size = 8);

    struct Hit {
        std::size_t index = 0;
        double squared_distance = 0.0;
    };

    /// Requires a nonempty tree.
    Hit nearest(const Point3& q) const;

    std::size_t size() const noexcept { return points_.size(); }

private:
    struct Node {
        // Leaves: [begin, end) into order_. Inner: split axis/value, children.
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        int axis = 0;
        double split = 0.0;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size);
    void search(std::int32_t node, const Point3& q, Hit& best) const;

    std::vector<Point3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

/// Bounding-volume hierarchy over the triangles of a mesh for exact unsigned
/// point-to-surface distance. Matches point_mesh_distance_brute() bitwise.
class MeshDistanceIndex {
public:
    /// Throws EmptyInputError for a mesh without triangles.
    explicit MeshDistanceIndex(const TriangleMesh& mesh);

    double distance(const Point3& p) const;

    const TriangleMesh& mesh() const noexcept { return mesh_; }

private:
    struct Box {
        Point3 lo;
        Point3 hi;
        double squared_distance(const Point3& p) const noexcept;
    };
    struct Node {
        Box box;
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);

    TriangleMesh mesh_;
    std::vector<std::uint32_t> order_;
    std::vector<Box> tri_boxes_;
    std::vector<Point3> centroids_;
    std::vector<Node> nodes_;
};

/// Unsigned distance from p to the mesh surface via a MeshDistanceIndex.
double point_mesh_distance(const Point3& p, const TriangleMesh& mesh);

}  // namespace dpdist

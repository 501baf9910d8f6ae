#include "dpdist/spatial.hpp"

#include <algorithm>
#include <limits>

#include "dpdist/error.hpp"

namespace dpdist {

namespace {
constexpr std::size_t kMeshLeafSize = 4;
}

KdTree::KdTree(std::span<const Point3> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()), order_(points.size()) {
    for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
    if (!points_.empty()) build(0, static_cast<std::uint32_t>(order_.size()), std::max<std::size_t>(leaf_size, 1));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= leaf_size) return id;

    Point3 lo = points_[order_[begin]];
    Point3 hi = lo;
    for (auto i = begin; i < end; ++i) {
        const Point3& p = points_[order_[i]];
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    const Point3 ext = hi - lo;
    const int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
    if (ext[axis] == 0.0) return id;  // all coincident: keep as one leaf

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[order_[mid]][axis];
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    const auto left = build(begin, mid, leaf_size);
    const auto right = build(mid, end, leaf_size);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

KdTree::Hit KdTree::nearest(const Point3& q) const {
    if (points_.empty()) throw EmptyInputError("nearest-neighbour query on an empty point set");
    Hit best{0, std::numeric_limits<double>::infinity()};
    search(0, q, best);
    return best;
}

void KdTree::search(std::int32_t node_id, const Point3& q, Hit& best) const {
    const Node& node = nodes_[node_id];
    if (node.left < 0) {
        for (auto i = node.begin; i < node.end; ++i) {
            const double d = squared_distance(q, points_[order_[i]]);
            if (d < best.squared_distance || (d == best.squared_distance && order_[i] < best.index)) {
                best = {order_[i], d};
            }
        }
        return;
    }
    // Left holds coordinates <= split, right holds coordinates >= split.
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    search(near, q, best);
    if (diff * diff <= best.squared_distance) search(far, q, best);
}

// ---------------------------------------------------------------------------

double MeshDistanceIndex::Box::squared_distance(const Point3& p) const noexcept {
    const double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
    const double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
    const double dz = std::max({lo.z - p.z, 0.0, p.z - hi.z});
    return dx * dx + dy * dy + dz * dz;
}

MeshDistanceIndex::MeshDistanceIndex(const TriangleMesh& mesh) : mesh_(mesh) {
    if (mesh_.triangles.empty()) throw EmptyInputError("empty surface: mesh has no triangles");
    mesh_.validate();
    const auto n = mesh_.triangles.size();
    order_.resize(n);
    tri_boxes_.resize(n);
    centroids_.resize(n);
    for (std::uint32_t t = 0; t < n; ++t) {
        order_[t] = t;
        const auto& tri = mesh_.triangles[t];
        const Point3& a = mesh_.vertices[tri[0]];
        const Point3& b = mesh_.vertices[tri[1]];
        const Point3& c = mesh_.vertices[tri[2]];
        tri_boxes_[t] = {{std::min({a.x, b.x, c.x}), std::min({a.y, b.y, c.y}), std::min({a.z, b.z, c.z})},
                         {std::max({a.x, b.x, c.x}), std::max({a.y, b.y, c.y}), std::max({a.z, b.z, c.z})}};
        centroids_[t] = (a + b + c) * (1.0 / 3.0);
    }
    build(0, static_cast<std::uint32_t>(n));
}

std::int32_t MeshDistanceIndex::build(std::uint32_t begin, std::uint32_t end) {
    Box box = tri_boxes_[order_[begin]];
    Point3 clo = centroids_[order_[begin]];
    Point3 chi = clo;
    for (auto i = begin; i < end; ++i) {
        const Box& b = tri_boxes_[order_[i]];
        box.lo = {std::min(box.lo.x, b.lo.x), std::min(box.lo.y, b.lo.y), std::min(box.lo.z, b.lo.z)};
        box.hi = {std::max(box.hi.x, b.hi.x), std::max(box.hi.y, b.hi.y), std::max(box.hi.z, b.hi.z)};
        const Point3& c = centroids_[order_[i]];
        clo = {std::min(clo.x, c.x), std::min(clo.y, c.y), std::min(clo.z, c.z)};
        chi = {std::max(chi.x, c.x), std::max(chi.y, c.y), std::max(chi.z, c.z)};
    }
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({box, begin, end});
    if (end - begin <= kMeshLeafSize) return id;

    const Point3 ext = chi - clo;
    const int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return centroids_[a][axis] < centroids_[b][axis]; });
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

double MeshDistanceIndex::distance(const Point3& p) const {
    double best = std::numeric_limits<double>::infinity();
    double best_d2 = best;
    std::int32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (node.box.squared_distance(p) > best_d2) continue;
        if (node.left < 0) {
            for (auto i = node.begin; i < node.end; ++i) {
                const auto& tri = mesh_.triangles[order_[i]];
                const double d = point_triangle_distance(p, mesh_.vertices[tri[0]], mesh_.vertices[tri[1]],
                                                         mesh_.vertices[tri[2]]);
                if (d < best) {
                    best = d;
                    // Slack keeps boxes whose squared bound rounds just above best^2.
                    best_d2 = d * d * (1.0 + 1e-12) + 1e-300;
                }
            }
            continue;
        }
        const double dl = nodes_[node.left].box.squared_distance(p);
        const double dr = nodes_[node.right].box.squared_distance(p);
        // Push the farther child first so the nearer one is popped next.
        if (dl <= dr) {
            stack[top++] = node.right;
            stack[top++] = node.left;
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
    return best;
}

double point_mesh_distance(const Point3& p, const TriangleMesh& mesh) {
    return MeshDistanceIndex(mesh).distance(p);
}

}  // namespace dpdist

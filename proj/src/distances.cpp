#include "dpdist/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dpdist/error.hpp"
#include "dpdist/simd/kernels.hpp"
#include "dpdist/spatial.hpp"

namespace dpdist {

namespace {

void require_nonempty(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) throw EmptyInputError("distance between point clouds requires nonempty clouds");
}

double directed_max(const NnDistanceProfile& p) {
    return *std::max_element(p.distances.begin(), p.distances.end());
}

double mean_square(const NnDistanceProfile& p) {
    double s = 0.0;
    for (double d : p.distances) s += d * d;
    return s / static_cast<double>(p.distances.size());
}

}  // namespace

NnDistanceProfile nn_distances(const PointCloud& a, const PointCloud& b, NnBackend backend) {
    require_nonempty(a, b);
    NnDistanceProfile out;
    out.distances.resize(a.size());
    if (backend == NnBackend::tree) {
        const KdTree tree(b.points());
        for (std::size_t i = 0; i < a.size(); ++i) out.distances[i] = std::sqrt(tree.nearest(a[i]).squared_distance);
        return out;
    }

    auto split = [](const PointCloud& c, std::vector<double>& x, std::vector<double>& y, std::vector<double>& z) {
        x.reserve(c.size());
        y.reserve(c.size());
        z.reserve(c.size());
        for (const auto& p : c) {
            x.push_back(p.x);
            y.push_back(p.y);
            z.push_back(p.z);
        }
    };
    std::vector<double> ax, ay, az, bx, by, bz;
    split(a, ax, ay, az);
    split(b, bx, by, bz);
    simd::min_squared_distances(ax, ay, az, bx, by, bz, out.distances);
    for (auto& d : out.distances) d = std::sqrt(d);
    return out;
}

double hausdorff(const PointCloud& a, const PointCloud& b) {
    return std::max(directed_max(nn_distances(a, b)), directed_max(nn_distances(b, a)));
}

double chamfer(const PointCloud& a, const PointCloud& b) {
    return mean_square(nn_distances(a, b)) + mean_square(nn_distances(b, a));
}

double nearest_rank_quantile(std::vector<double> values, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ArgumentError("fraction must lie in (0, 1]");
    if (values.empty()) throw EmptyInputError("quantile of an empty profile");
    const auto n = values.size();
    auto rank = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
    return values[rank - 1];
}

double partial_hausdorff(const PointCloud& a, const PointCloud& b, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ArgumentError("partial Hausdorff fraction must lie in (0, 1]");
    require_nonempty(a, b);
    return std::max(nearest_rank_quantile(nn_distances(a, b).distances, fraction),
                    nearest_rank_quantile(nn_distances(b, a).distances, fraction));
}

std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
    // Jonker-Volgenant style shortest augmenting path with row/column
    // potentials; 1-based internal indexing, column 0 is the virtual source.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
    return assignment;
}

double emd(const PointCloud& a, const PointCloud& b) {
    require_nonempty(a, b);
    if (a.size() != b.size()) {
        throw ArgumentError("EMD cardinality mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                            " points");
    }
    const std::size_t n = a.size();
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = distance(a[i], b[j]);
    const auto match = solve_assignment(cost, n);
    // Sum the matched costs in a canonical order (sorted) so emd(a, b) and
    // emd(b, a) add the same multiset of values in the same sequence.
    std::vector<double> matched(n);
    for (std::size_t i = 0; i < n; ++i) matched[i] = cost[i * n + match[i]];
    std::sort(matched.begin(), matched.end());
    double total = 0.0;
    for (double d : matched) total += d;
    return total;
}

double emd_normalized(const PointCloud& a, const PointCloud& b) {
    return emd(a, b) / static_cast<double>(a.size());
}

}  // namespace dpdist

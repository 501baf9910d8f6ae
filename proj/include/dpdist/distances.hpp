#pragma once

#include <cstddef>
#include <vector>

#include "dpdist/geometry.hpp"

namespace dpdist {

/// Entry i is the distance from A[i] to its nearest neighbour in B.
struct NnDistanceProfile {
    std::vector<double> distances;
};

enum class NnBackend { tree, brute_force };

/// Throws EmptyInputError if either cloud is empty.
NnDistanceProfile nn_distances(const PointCloud& a, const PointCloud& b, NnBackend backend = NnBackend::tree);

double hausdorff(const PointCloud& a, const PointCloud& b);

/// Mean squared nearest-neighbour distance, summed over both directions.
double chamfer(const PointCloud& a, const PointCloud& b);

/// Max over both directions of the nearest-rank f-quantile of the directed
/// profile (rank ceil(f*N), 1-indexed into the ascending profile).
/// Throws ArgumentError unless 0 < f <= 1.
double partial_hausdorff(const PointCloud& a, const PointCloud& b, double fraction);

/// Nearest-rank quantile of a profile; exposed for the tests.
double nearest_rank_quantile(std::vector<double> values, double fraction);

/// Minimum over bijections of the summed matched distances. Requires equal
/// sizes (throws ArgumentError otherwise).
double emd(const PointCloud& a, const PointCloud& b);
/// emd(a, b) / N.
double emd_normalized(const PointCloud& a, const PointCloud& b);

/// Optimal assignment for a square row-major cost matrix (O(n^3) shortest
/// augmenting paths with potentials). Returns the column for each row.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n);

}  // namespace dpdist

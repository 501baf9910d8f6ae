#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "dpdist/geometry.hpp"

namespace dpdist {

/// Per-Gaussian derivative components: alpha, mu (x, y, z), sigma (x, y, z).
inline constexpr std::size_t kFisherComponents = 7;
/// Pooled statistics: max, min, mean.
inline constexpr std::size_t kFisherPools = 3;
/// Channels per Gaussian, ordered [max(7) | min(7) | mean(7)].
inline constexpr std::size_t kFisherChannels = kFisherComponents * kFisherPools;

using GridIndex = std::array<int, 3>;

/// Uniform mixture of K^3 isotropic Gaussians on the cell-centred lattice
/// of [-1, 1]^3 with shared sigma and weight 1/K^3.
class GaussianGrid {
public:
    /// Throws ArgumentError unless K >= 2 and sigma > 0.
    GaussianGrid(int resolution, double sigma);

    int resolution() const noexcept { return resolution_; }
    double sigma() const noexcept { return sigma_; }
    double weight() const noexcept { return weight_; }
    double spacing() const noexcept { return 2.0 / resolution_; }
    std::size_t size() const noexcept { return centers_.size(); }

    const std::vector<Point3>& centers() const noexcept { return centers_; }
    const Point3& center(std::size_t flat) const noexcept { return centers_[flat]; }

    /// Flat index of (ix, iy, iz): (ix * K + iy) * K + iz.
    std::size_t flat_index(const GridIndex& i) const noexcept {
        const auto k = static_cast<std::size_t>(resolution_);
        return (static_cast<std::size_t>(i[0]) * k + static_cast<std::size_t>(i[1])) * k + static_cast<std::size_t>(i[2]);
    }

    /// Lattice coordinate of index i along one axis.
    double coordinate(int i) const noexcept { return -1.0 + (i + 0.5) * 2.0 / resolution_; }

    friend bool operator==(const GaussianGrid& a, const GaussianGrid& b) noexcept {
        return a.resolution_ == b.resolution_ && a.sigma_ == b.sigma_;
    }

private:
    int resolution_;
    double sigma_;
    double weight_;
    std::vector<Point3> centers_;
};

/// Posterior responsibilities of every Gaussian for p; sums to 1.
std::vector<double> soft_assign(const Point3& p, const GaussianGrid& grid);
/// Allocation-free variant; `out` must hold grid.size() values.
void soft_assign(const Point3& p, const GaussianGrid& grid, std::span<double> out);

/// Global K x K x K x 21 tensor of pooled Fisher derivatives for one cloud.
class FisherGrid {
public:
    FisherGrid(GaussianGrid grid, std::vector<double> values, std::size_t cloud_size);

    const GaussianGrid& grid() const noexcept { return grid_; }
    std::size_t cloud_size() const noexcept { return cloud_size_; }
    std::size_t channels() const noexcept { return kFisherChannels; }

    std::span<const double> values() const noexcept { return values_; }
    /// The 21 channels of one Gaussian.
    std::span<const double> cell(const GridIndex& i) const noexcept {
        return std::span<const double>(values_).subspan(grid_.flat_index(i) * kFisherChannels, kFisherChannels);
    }
    double at(const GridIndex& i, std::size_t channel) const noexcept { return cell(i)[channel]; }

private:
    GaussianGrid grid_;
    std::vector<double> values_;
    std::size_t cloud_size_;
};

/// Throws EmptyInputError for an empty cloud.
FisherGrid compute_fisher_grid(const PointCloud& cloud, const GaussianGrid& grid);

/// Nearest lattice index, clamped per axis; exact midpoints go to the lower index.
GridIndex nearest_grid_index(const Point3& p, const GaussianGrid& grid) noexcept;

/// k x k x k x 21 window of a FisherGrid centred on an anchor Gaussian,
/// flattened as ((dx * k + dy) * k + dz) * 21 + channel.
struct LocalPatch {
    int size = 0;
    GridIndex anchor{};
    std::vector<double> values;
};

/// Throws ArgumentError for even k or k > K.
LocalPatch extract_local_patch(const FisherGrid& fg, const Point3& p, int k);
/// Writes the flattened patch straight into `out` (k^3 * 21 values).
void extract_local_patch_into(const FisherGrid& fg, const GridIndex& anchor, int k, std::span<double> out);

}  // namespace dpdist

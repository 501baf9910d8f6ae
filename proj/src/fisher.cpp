#include "dpdist/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpdist/error.hpp"

namespace dpdist {

GaussianGrid::GaussianGrid(int resolution, double sigma) : resolution_(resolution), sigma_(sigma) {
    if (resolution < 2) throw ArgumentError("Gaussian grid resolution K must be at least 2");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("Gaussian grid sigma must be positive");
    const auto k = static_cast<std::size_t>(resolution);
    weight_ = 1.0 / static_cast<double>(k * k * k);
    centers_.reserve(k * k * k);
    for (int ix = 0; ix < resolution; ++ix)
        for (int iy = 0; iy < resolution; ++iy)
            for (int iz = 0; iz < resolution; ++iz) centers_.push_back({coordinate(ix), coordinate(iy), coordinate(iz)});
}

void soft_assign(const Point3& p, const GaussianGrid& grid, std::span<double> out) {
    // Equal weights and a shared sigma: the posterior is a softmax of
    // -|p - mu|^2 / (2 sigma^2). Shift by the max exponent before exp().
    const double inv = 1.0 / (2.0 * grid.sigma() * grid.sigma());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        out[g] = -squared_distance(p, grid.center(g)) * inv;
        top = std::max(top, out[g]);
    }
    double total = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        out[g] = std::exp(out[g] - top);
        total += out[g];
    }
    const double scale = 1.0 / total;
    for (std::size_t g = 0; g < grid.size(); ++g) out[g] *= scale;
}

std::vector<double> soft_assign(const Point3& p, const GaussianGrid& grid) {
    std::vector<double> out(grid.size());
    soft_assign(p, grid, out);
    return out;
}

FisherGrid::FisherGrid(GaussianGrid grid, std::vector<double> values, std::size_t cloud_size)
    : grid_(std::move(grid)), values_(std::move(values)), cloud_size_(cloud_size) {
    if (values_.size() != grid_.size() * kFisherChannels) throw ArgumentError("Fisher tensor size does not match grid");
}

FisherGrid compute_fisher_grid(const PointCloud& cloud, const GaussianGrid& grid) {
    if (cloud.empty()) throw EmptyInputError("Fisher representation of an empty cloud");
    const std::size_t G = grid.size();
    const double w = grid.weight();
    const double sqrt_w = std::sqrt(w);
    const double sigma = grid.sigma();
    const double alpha_scale = 1.0 / sqrt_w;
    const double mu_scale = 1.0 / (sigma * sqrt_w);
    const double sigma_scale = 1.0 / std::sqrt(2.0 * w);
    const double inv_var = 1.0 / (sigma * sigma);

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> mx(G * kFisherComponents, -inf);
    std::vector<double> mn(G * kFisherComponents, inf);
    std::vector<double> sum(G * kFisherComponents, 0.0);
    std::vector<double> gamma(G);

    // Accumulation runs over the cloud in its stored order for every Gaussian.
    for (const auto& p : cloud) {
        soft_assign(p, grid, gamma);
        for (std::size_t g = 0; g < G; ++g) {
            const double y = gamma[g];
            const Point3 d = p - grid.center(g);
            const double comp[kFisherComponents] = {
                (y - w) * alpha_scale,
                y * d.x * mu_scale,
                y * d.y * mu_scale,
                y * d.z * mu_scale,
                y * (d.x * d.x * inv_var - 1.0) * sigma_scale,
                y * (d.y * d.y * inv_var - 1.0) * sigma_scale,
                y * (d.z * d.z * inv_var - 1.0) * sigma_scale,
            };
            double* pmx = &mx[g * kFisherComponents];
            double* pmn = &mn[g * kFisherComponents];
            double* psum = &sum[g * kFisherComponents];
            for (std::size_t c = 0; c < kFisherComponents; ++c) {
                pmx[c] = std::max(pmx[c], comp[c]);
                pmn[c] = std::min(pmn[c], comp[c]);
                psum[c] += comp[c];
            }
        }
    }

    const double inv_n = 1.0 / static_cast<double>(cloud.size());
    std::vector<double> values(G * kFisherChannels);
    for (std::size_t g = 0; g < G; ++g) {
        double* out = &values[g * kFisherChannels];
        for (std::size_t c = 0; c < kFisherComponents; ++c) {
            out[c] = mx[g * kFisherComponents + c];
            out[kFisherComponents + c] = mn[g * kFisherComponents + c];
            out[2 * kFisherComponents + c] = sum[g * kFisherComponents + c] * inv_n;
        }
    }
    return FisherGrid(grid, std::move(values), cloud.size());
}

GridIndex nearest_grid_index(const Point3& p, const GaussianGrid& grid) noexcept {
    const int K = grid.resolution();
    auto axis = [K](double v) {
        // Continuous lattice coordinate; ceil(u - 0.5) rounds half down.
        const double u = (v + 1.0) * K * 0.5 - 0.5;
        if (!(u > 0.0)) return 0;  // also catches NaN
        if (u >= K - 1) return K - 1;
        return static_cast<int>(std::ceil(u - 0.5));
    };
    return {axis(p.x), axis(p.y), axis(p.z)};
}

void extract_local_patch_into(const FisherGrid& fg, const GridIndex& anchor, int k, std::span<double> out) {
    const int K = fg.grid().resolution();
    const int h = k / 2;
    std::size_t o = 0;
    for (int dx = -h; dx <= h; ++dx) {
        for (int dy = -h; dy <= h; ++dy) {
            for (int dz = -h; dz <= h; ++dz) {
                const GridIndex i{anchor[0] + dx, anchor[1] + dy, anchor[2] + dz};
                const bool inside = i[0] >= 0 && i[0] < K && i[1] >= 0 && i[1] < K && i[2] >= 0 && i[2] < K;
                if (inside) {
                    const auto cell = fg.cell(i);
                    std::copy(cell.begin(), cell.end(), out.begin() + static_cast<std::ptrdiff_t>(o));
                } else {
                    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(o), kFisherChannels, 0.0);
                }
                o += kFisherChannels;
            }
        }
    }
}

LocalPatch extract_local_patch(const FisherGrid& fg, const Point3& p, int k) {
    if (k <= 0 || k % 2 == 0) throw ArgumentError("local patch size k must be odd and positive");
    if (k > fg.grid().resolution()) throw ArgumentError("local patch size k exceeds grid resolution K");
    LocalPatch patch;
    patch.size = k;
    patch.anchor = nearest_grid_index(p, fg.grid());
    patch.values.resize(static_cast<std::size_t>(k * k * k) * kFisherChannels);
    extract_local_patch_into(fg, patch.anchor, k, patch.values);
    return patch;
}

}  // namespace dpdist

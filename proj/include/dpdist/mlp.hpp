#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpdist/fisher.hpp"

namespace dpdist {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t i) noexcept { return data.data() + i * cols; }
    const double* row(std::size_t i) const noexcept { return data.data() + i * cols; }
    std::span<double> row_span(std::size_t i) noexcept { return {row(i), cols}; }
    std::span<const double> row_span(std::size_t i) const noexcept { return {row(i), cols}; }
};

/// Frame of the three query columns: the raw point, or its offset from the
/// anchor Gaussian the patch is centred on.
enum class QueryFrame : std::uint8_t { absolute = 0, anchor = 1 };

/// Everything needed to rebuild the input pipeline and the network shape.
struct NetworkConfig {
    int patch_size = 5;                          // k, odd
    std::size_t channels = kFisherChannels;      // F
    int grid_resolution = 8;                     // K
    double sigma = 0.125;
    std::vector<std::size_t> hidden{1024, 1024, 1024};
    QueryFrame query_frame = QueryFrame::absolute;

    std::size_t input_width() const noexcept {
        const auto k = static_cast<std::size_t>(patch_size);
        return 3 + k * k * k * channels;
    }
    /// Throws ArgumentError on inconsistent values.
    void validate() const;

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Affine layer, optionally followed by batch normalization and a rectifier.
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weight;  // out x in
    std::vector<double> bias;    // out
    bool batch_norm = false;     // hidden layers: affine -> BN -> ReLU
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<double> running_mean;
    std::vector<double> running_var;
};

enum class Mode { training, inference };

/// Distance regressor: [query | flattened patch] -> hidden layers -> scalar.
/// Inputs are standardized per feature with (input_mean, input_scale)
/// before the first layer; identity unless training fitted them.
struct MlpModel {
    NetworkConfig config;
    std::vector<double> input_mean;
    std::vector<double> input_scale;
    std::vector<DenseLayer> layers;
    Mode mode = Mode::inference;
    std::uint64_t steps = 0;
    std::uint64_t seed = 0;

    std::size_t input_width() const noexcept { return config.input_width(); }
    std::size_t parameter_count() const noexcept;
};

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

/// He-uniform weights (variance 2/fan_in), zero biases, unit BN scale.
/// Weights are rounded to float32 so the model round-trips through the
/// archive exactly.
MlpModel init_model(const NetworkConfig& config, std::uint64_t seed);

/// Trainable tensors in a fixed order: per layer W, b, then gamma, beta.
std::vector<std::span<double>> parameter_tensors(MlpModel& model);
std::vector<std::string> parameter_names(const MlpModel& model);

/// Rounds every stored value to the nearest float32.
void round_to_archive_precision(MlpModel& model);

/// Activations kept for backpropagation.
struct ForwardCache {
    std::size_t batch = 0;
    std::vector<Matrix> inputs;   // input to each layer; layer 0 keeps only the standardized query columns
    std::vector<Matrix> normed;   // BN xhat per hidden layer
    std::vector<Matrix> pre_relu; // BN output per hidden layer
    std::vector<std::vector<double>> batch_mean;
    std::vector<std::vector<double>> batch_var;
    std::vector<std::vector<double>> inv_std;
    std::vector<double> output;
    // Layer 0 runs as Wq*q + Wp*patch; rows sharing a patch share one
    // product. patch_group[b] indexes the standardized row of unique_patches.
    std::vector<std::size_t> patch_group;
    Matrix unique_patches;
};

/// Batched forward pass. Training mode normalizes with batch statistics;
/// inference mode with running statistics. Does not modify the model.
void forward_batch(const MlpModel& model, const Matrix& input, Mode mode, ForwardCache& cache);

/// Inference-mode outputs for every row. Throws ArgumentError on width mismatch.
std::vector<double> predict(const MlpModel& model, const Matrix& input);
double predict_one(const MlpModel& model, std::span<const double> input);

struct Gradients {
    std::vector<std::vector<double>> tensors;  // parallel to parameter_tensors()
    Matrix input;                              // d loss / d raw input, when requested
};

/// Backpropagates d loss / d output (one value per row) through a cache
/// produced by forward_batch in `mode`.
Gradients backward(const MlpModel& model, const ForwardCache& cache, std::span<const double> output_grad, Mode mode,
                   bool want_input_grad);

/// Adam with bias correction and a step-decay schedule.
struct OptimizerState {
    double base_rate = 1e-3;
    double decay = 0.5;
    std::uint64_t decay_interval = 300000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;

    /// base * decay^floor(step / interval).
    double effective_rate() const noexcept;
};

/// One Adam update on a list of tensors; advances opt.step.
void adam_update(OptimizerState& opt, std::span<const std::span<double>> params,
                 const std::vector<std::vector<double>>& grads);

/// Mean |pred - gt| for one batch, then backprop (subgradient 0 at 0),
/// running-statistics update, and an Adam step. Returns the pre-update loss.
/// Throws ArgumentError unless the model is in training mode; NumericError
/// when the loss is not finite.
double train_step(MlpModel& model, OptimizerState& opt, const Matrix& input, std::span<const double> target);

struct GradientCheckReport {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    /// Entries whose +/- epsilon probes changed a rectifier's active set; the
    /// difference quotient is not a derivative there, so they are not compared.
    std::size_t skipped_kinks = 0;
    std::string worst;
};

struct GradientCheckOptions {
    std::size_t trials = 10;
    double epsilon = 1e-3;
    /// Cap on probed entries per tensor (all entries when the tensor is
    /// smaller). Probed indices are drawn from `seed`.
    std::size_t max_entries_per_tensor = 48;
    std::uint64_t seed = 0;
};

/// Compares backprop gradients of 0.5*(f(x) - t)^2 with central differences,
/// BN frozen at running statistics, for parameters and query coordinates.
/// Inputs are Fisher patches of random clouds at random queries.
GradientCheckReport gradient_check(const MlpModel& model, const GradientCheckOptions& options);

}  // namespace dpdist

namespace dpdist {

/// The query columns of the network input for q anchored at `anchor`.
Point3 query_columns(const Point3& q, const GridIndex& anchor, const GaussianGrid& grid, QueryFrame frame) noexcept;

/// Network input rows [q | flattened k^3 patch around q] for a batch of
/// queries against one FisherGrid.
Matrix spd_inputs(const FisherGrid& fg, std::span<const Point3> queries, const NetworkConfig& config);

/// Learned point-to-surface distance of each query against the cloud behind
/// fg, clamped at 0. Throws ArgumentError when the model's K, sigma or F do
/// not match the grid.
std::vector<double> spd_distances(const MlpModel& model, const FisherGrid& fg, std::span<const Point3> queries);
double spd_distance(const MlpModel& model, const Point3& b, const FisherGrid& fg);

/// The first layer splits as W[q | patch] + b = Wq*q + (Wp*patch + b). The
/// bracketed term depends only on the anchor cell, so callers that query one
/// grid many times can cache it per cell.
std::vector<double> patch_projection(const MlpModel& model, std::span<const double> patch);
/// Inference outputs (unclamped) given each query's columns (see
/// query_columns) and its cached patch term.
std::vector<double> predict_projected(const MlpModel& model, std::span<const Point3> queries,
                                      std::span<const double* const> projections);

}  // namespace dpdist

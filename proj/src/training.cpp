#include "dpdist/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "dpdist/error.hpp"
#include "dpdist/random.hpp"
#include "dpdist/spatial.hpp"

namespace dpdist {

namespace {

// Stream tags for derive_seed.
enum : std::uint64_t { kInitStream = 1, kPoolStream, kStandardizeStream, kStepStream };

struct StepData {
    Matrix input;
    std::vector<double> target;
};

StepData assemble(const std::vector<TriangleMesh>& meshes, const TrainConfig& config, std::uint64_t stream,
                  std::uint64_t step) {
    const GaussianGrid grid(config.network.grid_resolution, config.network.sigma);
    const std::size_t n = config.cloud_size;
    StepData data;
    data.input = Matrix(config.batch_size * n, config.network.input_width());
    data.target.resize(config.batch_size * n);
    Rng pick(derive_seed(config.seed, stream, step));
    for (std::size_t j = 0; j < config.batch_size; ++j) {
        const TriangleMesh& mesh = meshes[pick.below(meshes.size())];
        const TrainingBatch batch = generate_training_batch(mesh, n, derive_seed(config.seed, stream, step, j + 1));
        const FisherGrid fg = compute_fisher_grid(batch.surface_cloud, grid);
        std::vector<Point3> queries;
        queries.reserve(n);
        for (const auto& s : batch.samples) queries.push_back(s.query);
        const Matrix rows = spd_inputs(fg, queries, config.network);
        std::copy(rows.data.begin(), rows.data.end(),
                  data.input.data.begin() + static_cast<std::ptrdiff_t>(j * n * rows.cols));
        for (std::size_t i = 0; i < n; ++i) data.target[j * n + i] = batch.samples[i].gt_distance;
    }
    return data;
}

void fit_standardization(MlpModel& model, const std::vector<TriangleMesh>& meshes, const TrainConfig& config) {
    const std::size_t width = model.input_width();
    std::vector<double> sum(width, 0.0), sum2(width, 0.0);
    std::size_t count = 0;
    for (std::size_t b = 0; b < config.standardize_batches; ++b) {
        const StepData data = assemble(meshes, config, kStandardizeStream, b);
        for (std::size_t r = 0; r < data.input.rows; ++r) {
            const double* row = data.input.row(r);
            for (std::size_t j = 0; j < width; ++j) {
                sum[j] += row[j];
                sum2[j] += row[j] * row[j];
            }
        }
        count += data.input.rows;
    }
    const double n = static_cast<double>(count);
    for (std::size_t j = 0; j < width; ++j) {
        const double mean = sum[j] / n;
        const double var = std::max(sum2[j] / n - mean * mean, 0.0);
        const double sd = std::sqrt(var);
        model.input_mean[j] = static_cast<double>(static_cast<float>(mean));
        // Features that never vary (padding far from any surface) keep unit scale.
        model.input_scale[j] = sd > 1e-6 ? static_cast<double>(static_cast<float>(1.0 / sd)) : 1.0;
    }
}

}  // namespace

void TrainConfig::validate() const {
    network.validate();
    if (cloud_size < 4) throw ArgumentError("cloud size N must be at least 4");
    if (batch_size == 0) throw ArgumentError("batch size must be positive");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
    if (!(decay > 0.0 && decay <= 1.0)) throw ArgumentError("decay must lie in (0, 1]");
    if (decay_interval == 0) throw ArgumentError("decay interval must be positive");
    if (mesh_dir.empty() && kinds.empty()) throw ArgumentError("no training shapes configured");
    if (mesh_dir.empty() && pool_size == 0) throw ArgumentError("pool size must be positive");
}

std::vector<TriangleMesh> training_meshes(const TrainConfig& config) {
    std::vector<TriangleMesh> meshes;
    if (!config.mesh_dir.empty()) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(config.mesh_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".off") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) meshes.push_back(normalize_mesh(parse_off(read_file(f.string()))));
        if (meshes.empty()) throw DataError("no .off files found in '" + config.mesh_dir + "'");
        return meshes;
    }
    for (std::size_t i = 0; i < config.pool_size; ++i) {
        const ShapeKind kind = config.kinds[i % config.kinds.size()];
        meshes.push_back(random_synthetic_mesh(kind, derive_seed(config.seed, kPoolStream, i)));
    }
    return meshes;
}

TrainResult train(const TrainConfig& config, const ProgressFn& progress) {
    config.validate();
    return train(config, training_meshes(config), progress);
}

TrainResult train(const TrainConfig& config, const std::vector<TriangleMesh>& meshes, const ProgressFn& progress) {
    config.validate();
    if (meshes.empty()) throw DataError("no training meshes");

    TrainResult result;
    result.model = init_model(config.network, derive_seed(config.seed, kInitStream));
    result.model.seed = config.seed;
    if (config.standardize_batches > 0) fit_standardization(result.model, meshes, config);
    result.model.mode = Mode::training;

    OptimizerState opt;
    opt.base_rate = config.learning_rate;
    opt.decay = config.decay;
    opt.decay_interval = config.decay_interval;

    result.history.reserve(config.max_steps);
    for (std::size_t step = 0; step < config.max_steps; ++step) {
        const StepData data = assemble(meshes, config, kStepStream, step);
        const double rate = opt.effective_rate();
        const double loss = train_step(result.model, opt, data.input, data.target);
        result.history.push_back({step, loss, rate});
        if (progress) progress(result.history.back());
    }
    result.model.mode = Mode::inference;
    round_to_archive_precision(result.model);
    return result;
}

std::string loss_history_csv(const std::vector<LossRecord>& history) {
    std::string out = "step,loss,learning_rate\n";
    char buf[96];
    for (const auto& r : history) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.step, r.loss, r.learning_rate);
        out += buf;
    }
    return out;
}

HeldOutReport evaluate_held_out(const MlpModel& model, const std::vector<TriangleMesh>& meshes, std::size_t cloud_size,
                                std::size_t batches_per_mesh, std::uint64_t seed, double max_distance) {
    const GaussianGrid grid(model.config.grid_resolution, model.config.sigma);
    HeldOutReport report;
    double total = 0.0;
    for (std::size_t m = 0; m < meshes.size(); ++m) {
        for (std::size_t b = 0; b < batches_per_mesh; ++b) {
            const TrainingBatch batch = generate_training_batch(meshes[m], cloud_size, derive_seed(seed, m, b));
            const FisherGrid fg = compute_fisher_grid(batch.surface_cloud, grid);
            std::vector<Point3> queries;
            std::vector<double> truth;
            for (const auto& s : batch.samples) {
                if (s.gt_distance <= max_distance) {
                    queries.push_back(s.query);
                    truth.push_back(s.gt_distance);
                }
            }
            if (queries.empty()) continue;
            const auto pred = predict(model, spd_inputs(fg, queries, model.config));
            for (std::size_t i = 0; i < pred.size(); ++i) total += std::abs(std::max(pred[i], 0.0) - truth[i]);
            report.queries += pred.size();
        }
    }
    report.mean_abs_error = report.queries ? total / static_cast<double>(report.queries) : 0.0;
    return report;
}

}  // namespace dpdist

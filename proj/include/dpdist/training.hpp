#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dpdist/dataset.hpp"
#include "dpdist/mlp.hpp"

namespace dpdist {

struct TrainConfig {
    NetworkConfig network;
    std::size_t cloud_size = 64;        // N: surface points and queries per shape
    std::size_t batch_size = 16;        // shapes per optimizer step
    std::size_t max_steps = 1000;
    std::uint64_t seed = 0;
    double learning_rate = 1e-3;
    double decay = 0.5;
    std::uint64_t decay_interval = 300000;
    /// Synthetic training families; ignored when mesh_dir is set.
    std::vector<ShapeKind> kinds{ShapeKind::plane, ShapeKind::sphere, ShapeKind::box};
    /// Distinct random meshes generated up front and sampled per step.
    std::size_t pool_size = 64;
    /// Directory of OFF files used instead of synthetic shapes.
    std::string mesh_dir;
    /// Fit per-feature input standardization on this many batches before
    /// training (0 disables it).
    std::size_t standardize_batches = 16;

    /// Throws ArgumentError (even k, zero sizes, ...).
    void validate() const;
};

struct LossRecord {
    std::size_t step = 0;
    double loss = 0.0;
    double learning_rate = 0.0;
};

struct TrainResult {
    MlpModel model;
    std::vector<LossRecord> history;
};

/// Meshes the trainer draws from: generated synthetic shapes or the
/// normalized OFF files of mesh_dir (sorted by file name).
std::vector<TriangleMesh> training_meshes(const TrainConfig& config);

using ProgressFn = std::function<void(const LossRecord&)>;

/// Deterministic per seed. The returned model is in inference mode and
/// rounded to archive precision.
TrainResult train(const TrainConfig& config, const ProgressFn& progress = {});
TrainResult train(const TrainConfig& config, const std::vector<TriangleMesh>& meshes, const ProgressFn& progress = {});

/// CSV with header step,loss,learning_rate.
std::string loss_history_csv(const std::vector<LossRecord>& history);

struct HeldOutReport {
    double mean_abs_error = 0.0;
    std::size_t queries = 0;
};

/// Mean |spd_distance - exact mesh distance| over training-style queries
/// whose exact distance is at most max_distance.
HeldOutReport evaluate_held_out(const MlpModel& model, const std::vector<TriangleMesh>& meshes, std::size_t cloud_size,
                                std::size_t batches_per_mesh, std::uint64_t seed, double max_distance);

}  // namespace dpdist

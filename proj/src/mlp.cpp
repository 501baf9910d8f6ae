#include "dpdist/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <unordered_map>

#include "dpdist/error.hpp"
#include "dpdist/random.hpp"
#include "dpdist/simd/kernels.hpp"

namespace dpdist {

namespace {

simd::MatrixView view(const Matrix& m) { return {m.data.data(), m.rows, m.cols, m.cols}; }
simd::MatrixView view(const std::vector<double>& data, std::size_t rows, std::size_t cols) {
    return {data.data(), rows, cols, cols};
}

Matrix transpose(const std::vector<double>& data, std::size_t rows, std::size_t cols) {
    constexpr std::size_t kTile = 32;
    Matrix t(cols, rows);
    for (std::size_t i0 = 0; i0 < rows; i0 += kTile) {
        const std::size_t i1 = std::min(rows, i0 + kTile);
        for (std::size_t j0 = 0; j0 < cols; j0 += kTile) {
            const std::size_t j1 = std::min(cols, j0 + kTile);
            for (std::size_t i = i0; i < i1; ++i)
                for (std::size_t j = j0; j < j1; ++j) t.data[j * rows + i] = data[i * cols + j];
        }
    }
    return t;
}

Matrix transpose(const Matrix& m) { return transpose(m.data, m.rows, m.cols); }

double to_float(double v) { return static_cast<double>(static_cast<float>(v)); }

void round_all(std::vector<double>& v) {
    for (auto& x : v) x = to_float(x);
}

// z = Wp*patch + Wq*q + b, with the patch product computed once per group.
void first_layer_affine(const MlpModel& model, const ForwardCache& cache, Matrix& z) {
    const DenseLayer& layer = model.layers.front();
    const Matrix& x = cache.inputs[0];
    const std::size_t B = cache.batch;
    Matrix zp(cache.unique_patches.rows, layer.out);
    Matrix zq(B, layer.out);
    simd::gemm_nt(view(cache.unique_patches), {layer.weight.data() + 3, layer.out, layer.in - 3, layer.in},
                  zp.data.data(), layer.out);
    simd::gemm_nt(view(x), {layer.weight.data(), layer.out, 3, layer.in}, zq.data.data(), layer.out);
    for (std::size_t b = 0; b < B; ++b) {
        const double* p = zp.row(cache.patch_group[b]);
        const double* q = zq.row(b);
        double* zr = z.row(b);
        for (std::size_t o = 0; o < layer.out; ++o) zr[o] = p[o] + q[o] + layer.bias[o];
    }
}

// Runs layers [first, end) given the input to `first` already in cache.inputs[first].
void forward_from(const MlpModel& model, std::size_t first, Mode mode, ForwardCache& cache) {
    const std::size_t B = cache.batch;
    for (std::size_t l = first; l < model.layers.size(); ++l) {
        const DenseLayer& layer = model.layers[l];
        Matrix z(B, layer.out);
        if (l == 0) {
            first_layer_affine(model, cache, z);
        } else {
            simd::gemm_nt(view(cache.inputs[l]), view(layer.weight, layer.out, layer.in), z.data.data(), layer.out);
            for (std::size_t b = 0; b < B; ++b) {
                double* zr = z.row(b);
                for (std::size_t o = 0; o < layer.out; ++o) zr[o] += layer.bias[o];
            }
        }
        if (!layer.batch_norm) {
            cache.output.assign(B, 0.0);
            for (std::size_t b = 0; b < B; ++b) cache.output[b] = z.data[b * layer.out];
            continue;
        }
        auto& mean = cache.batch_mean[l];
        auto& var = cache.batch_var[l];
        auto& inv_std = cache.inv_std[l];
        mean.assign(layer.out, 0.0);
        var.assign(layer.out, 0.0);
        inv_std.assign(layer.out, 0.0);
        if (mode == Mode::training) {
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t o = 0; o < layer.out; ++o) mean[o] += z.data[b * layer.out + o];
            for (auto& m : mean) m /= static_cast<double>(B);
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t o = 0; o < layer.out; ++o) {
                    const double d = z.data[b * layer.out + o] - mean[o];
                    var[o] += d * d;
                }
            }
            for (std::size_t o = 0; o < layer.out; ++o) {
                var[o] /= static_cast<double>(B);
                inv_std[o] = 1.0 / std::sqrt(var[o] + kBatchNormEpsilon);
            }
        } else {
            for (std::size_t o = 0; o < layer.out; ++o) {
                mean[o] = layer.running_mean[o];
                var[o] = layer.running_var[o];
                inv_std[o] = 1.0 / std::sqrt(layer.running_var[o] + kBatchNormEpsilon);
            }
        }
        Matrix& xhat = cache.normed[l];
        Matrix& y = cache.pre_relu[l];
        Matrix& next = cache.inputs[l + 1];
        xhat = Matrix(B, layer.out);
        y = Matrix(B, layer.out);
        next = Matrix(B, layer.out);
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t o = 0; o < layer.out; ++o) {
                const std::size_t i = b * layer.out + o;
                xhat.data[i] = (z.data[i] - mean[o]) * inv_std[o];
                y.data[i] = layer.gamma[o] * xhat.data[i] + layer.beta[o];
                next.data[i] = y.data[i] > 0.0 ? y.data[i] : 0.0;
            }
        }
    }
}

void prepare_cache(const MlpModel& model, const Matrix& input, ForwardCache& cache) {
    if (input.cols != model.input_width()) {
        throw ArgumentError("input width " + std::to_string(input.cols) + " does not match model width " +
                            std::to_string(model.input_width()));
    }
    const std::size_t L = model.layers.size();
    const std::size_t B = input.rows;
    cache.batch = B;
    cache.inputs.resize(L);
    cache.normed.resize(L);
    cache.pre_relu.resize(L);
    cache.batch_mean.resize(L);
    cache.batch_var.resize(L);
    cache.inv_std.resize(L);

    Matrix& xq = cache.inputs[0];
    xq = Matrix(B, 3);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t j = 0; j < 3; ++j) xq.row(b)[j] = (input.row(b)[j] - model.input_mean[j]) * model.input_scale[j];

    // Group rows by identical raw patch columns; the hash only narrows the
    // candidates, equality is decided by memcmp.
    const std::size_t width = input.cols - 3;
    const std::size_t bytes = width * sizeof(double);
    constexpr std::size_t kHashStride = 7;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_hash;
    std::vector<std::size_t> representative;
    cache.patch_group.assign(B, 0);
    for (std::size_t b = 0; b < B; ++b) {
        const double* p = input.row(b) + 3;
        std::uint64_t h = 1469598103934665603ULL;
        for (std::size_t i = 0; i < width; i += kHashStride) {
            std::uint64_t w;
            std::memcpy(&w, p + i, sizeof w);
            h = (h ^ w) * 1099511628211ULL;
        }
        auto& bucket = by_hash[h];
        std::size_t group = representative.size();
        for (std::size_t g : bucket) {
            if (std::memcmp(input.row(representative[g]) + 3, p, bytes) == 0) {
                group = g;
                break;
            }
        }
        if (group == representative.size()) {
            representative.push_back(b);
            bucket.push_back(group);
        }
        cache.patch_group[b] = group;
    }
    Matrix& up = cache.unique_patches;
    up = Matrix(representative.size(), width);
    const double* mean = model.input_mean.data() + 3;
    const double* scale = model.input_scale.data() + 3;
    for (std::size_t g = 0; g < representative.size(); ++g) {
        const double* src = input.row(representative[g]) + 3;
        double* dst = up.row(g);
        for (std::size_t j = 0; j < width; ++j) dst[j] = (src[j] - mean[j]) * scale[j];
    }
}

}  // namespace

void NetworkConfig::validate() const {
    if (patch_size <= 0 || patch_size % 2 == 0) throw ArgumentError("patch size k must be odd and positive");
    if (grid_resolution < 2) throw ArgumentError("grid resolution K must be at least 2");
    if (patch_size > grid_resolution) throw ArgumentError("patch size k exceeds grid resolution K");
    if (channels != kFisherChannels) {
        throw ArgumentError("channel count F must be " + std::to_string(kFisherChannels));
    }
    if (!(sigma > 0.0)) throw ArgumentError("sigma must be positive");
    for (auto w : hidden) {
        if (w == 0) throw ArgumentError("hidden layer widths must be positive");
    }
}

std::size_t MlpModel::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size() + l.gamma.size() + l.beta.size();
    return n;
}

MlpModel init_model(const NetworkConfig& config, std::uint64_t seed) {
    config.validate();
    MlpModel model;
    model.config = config;
    model.seed = seed;
    model.input_mean.assign(config.input_width(), 0.0);
    model.input_scale.assign(config.input_width(), 1.0);

    Rng rng(seed);
    std::size_t in = config.input_width();
    std::vector<std::size_t> widths = config.hidden;
    widths.push_back(1);
    for (std::size_t l = 0; l < widths.size(); ++l) {
        DenseLayer layer;
        layer.in = in;
        layer.out = widths[l];
        const double bound = std::sqrt(6.0 / static_cast<double>(in));
        layer.weight.resize(layer.in * layer.out);
        for (auto& w : layer.weight) w = to_float(rng.uniform(-bound, bound));
        layer.bias.assign(layer.out, 0.0);
        layer.batch_norm = l + 1 < widths.size();
        if (layer.batch_norm) {
            layer.gamma.assign(layer.out, 1.0);
            layer.beta.assign(layer.out, 0.0);
            layer.running_mean.assign(layer.out, 0.0);
            layer.running_var.assign(layer.out, 1.0);
        }
        model.layers.push_back(std::move(layer));
        in = widths[l];
    }
    return model;
}

std::vector<std::span<double>> parameter_tensors(MlpModel& model) {
    std::vector<std::span<double>> out;
    for (auto& l : model.layers) {
        out.emplace_back(l.weight);
        out.emplace_back(l.bias);
        if (l.batch_norm) {
            out.emplace_back(l.gamma);
            out.emplace_back(l.beta);
        }
    }
    return out;
}

std::vector<std::string> parameter_names(const MlpModel& model) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const auto p = "layer" + std::to_string(i) + ".";
        out.push_back(p + "weight");
        out.push_back(p + "bias");
        if (model.layers[i].batch_norm) {
            out.push_back(p + "gamma");
            out.push_back(p + "beta");
        }
    }
    return out;
}

void round_to_archive_precision(MlpModel& model) {
    round_all(model.input_mean);
    round_all(model.input_scale);
    for (auto& l : model.layers) {
        round_all(l.weight);
        round_all(l.bias);
        round_all(l.gamma);
        round_all(l.beta);
        round_all(l.running_mean);
        round_all(l.running_var);
    }
}

void forward_batch(const MlpModel& model, const Matrix& input, Mode mode, ForwardCache& cache) {
    prepare_cache(model, input, cache);
    forward_from(model, 0, mode, cache);
}

std::vector<double> predict(const MlpModel& model, const Matrix& input) {
    ForwardCache cache;
    forward_batch(model, input, Mode::inference, cache);
    return cache.output;
}

double predict_one(const MlpModel& model, std::span<const double> input) {
    Matrix m(1, input.size());
    std::copy(input.begin(), input.end(), m.data.begin());
    return predict(model, m)[0];
}

Gradients backward(const MlpModel& model, const ForwardCache& cache, std::span<const double> output_grad, Mode mode,
                   bool want_input_grad) {
    const std::size_t B = cache.batch;
    const std::size_t L = model.layers.size();
    Gradients grads;
    // Tensor slots in parameter_tensors() order.
    std::vector<std::size_t> slot(L);
    std::size_t n_tensors = 0;
    for (std::size_t l = 0; l < L; ++l) {
        slot[l] = n_tensors;
        n_tensors += model.layers[l].batch_norm ? 4 : 2;
    }
    grads.tensors.resize(n_tensors);

    // d loss / d (layer output), starting from the scalar head.
    Matrix d_out(B, 1);
    std::copy(output_grad.begin(), output_grad.end(), d_out.data.begin());

    for (std::size_t l = L; l-- > 0;) {
        const DenseLayer& layer = model.layers[l];
        Matrix dz(B, layer.out);
        if (layer.batch_norm) {
            const Matrix& xhat = cache.normed[l];
            const Matrix& y = cache.pre_relu[l];
            auto& dgamma = grads.tensors[slot[l] + 2];
            auto& dbeta = grads.tensors[slot[l] + 3];
            dgamma.assign(layer.out, 0.0);
            dbeta.assign(layer.out, 0.0);
            Matrix dxhat(B, layer.out);
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t o = 0; o < layer.out; ++o) {
                    const std::size_t i = b * layer.out + o;
                    const double dy = y.data[i] > 0.0 ? d_out.data[i] : 0.0;
                    dgamma[o] += dy * xhat.data[i];
                    dbeta[o] += dy;
                    dxhat.data[i] = dy * layer.gamma[o];
                }
            }
            const auto& inv_std = cache.inv_std[l];
            if (mode == Mode::training) {
                std::vector<double> sum_dx(layer.out, 0.0), sum_dx_xhat(layer.out, 0.0);
                for (std::size_t b = 0; b < B; ++b) {
                    for (std::size_t o = 0; o < layer.out; ++o) {
                        const std::size_t i = b * layer.out + o;
                        sum_dx[o] += dxhat.data[i];
                        sum_dx_xhat[o] += dxhat.data[i] * xhat.data[i];
                    }
                }
                const double nb = static_cast<double>(B);
                for (std::size_t b = 0; b < B; ++b) {
                    for (std::size_t o = 0; o < layer.out; ++o) {
                        const std::size_t i = b * layer.out + o;
                        dz.data[i] = inv_std[o] / nb * (nb * dxhat.data[i] - sum_dx[o] - xhat.data[i] * sum_dx_xhat[o]);
                    }
                }
            } else {
                for (std::size_t b = 0; b < B; ++b)
                    for (std::size_t o = 0; o < layer.out; ++o)
                        dz.data[b * layer.out + o] = dxhat.data[b * layer.out + o] * inv_std[o];
            }
        } else {
            dz = d_out;
        }

        auto& dw = grads.tensors[slot[l]];
        auto& db = grads.tensors[slot[l] + 1];
        db.assign(layer.out, 0.0);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t o = 0; o < layer.out; ++o) db[o] += dz.data[b * layer.out + o];

        // dW = dz^T x: both operands transposed so the reduction runs over the batch.
        dw.assign(layer.out * layer.in, 0.0);
        if (l == 0) {
            // Patch columns reduce over groups of rows sharing a patch.
            const Matrix& up = cache.unique_patches;
            Matrix dz_group(up.rows, layer.out);
            for (std::size_t b = 0; b < B; ++b) {
                double* acc = dz_group.row(cache.patch_group[b]);
                const double* d = dz.row(b);
                for (std::size_t o = 0; o < layer.out; ++o) acc[o] += d[o];
            }
            const Matrix dz_t = transpose(dz);
            const Matrix xq_t = transpose(cache.inputs[0]);
            simd::gemm_nt(view(dz_t), view(xq_t), dw.data(), layer.in);
            const Matrix dzg_t = transpose(dz_group);
            const Matrix up_t = transpose(up);
            simd::gemm_nt(view(dzg_t), view(up_t), dw.data() + 3, layer.in);
        } else {
            const Matrix dz_t = transpose(dz);
            const Matrix x_t = transpose(cache.inputs[l]);
            simd::gemm_nt(view(dz_t), view(x_t), dw.data(), layer.in);
        }

        if (l > 0 || want_input_grad) {
            const Matrix w_t = transpose(layer.weight, layer.out, layer.in);
            Matrix dx(B, layer.in);
            simd::gemm_nt(view(dz), view(w_t), dx.data.data(), layer.in);
            d_out = std::move(dx);
        }
    }
    if (want_input_grad) {
        grads.input = std::move(d_out);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t j = 0; j < grads.input.cols; ++j) grads.input.data[b * grads.input.cols + j] *= model.input_scale[j];
    }
    return grads;
}

double OptimizerState::effective_rate() const noexcept {
    const std::uint64_t interval = std::max<std::uint64_t>(decay_interval, 1);
    return base_rate * std::pow(decay, static_cast<double>(step / interval));
}

void adam_update(OptimizerState& opt, std::span<const std::span<double>> params,
                 const std::vector<std::vector<double>>& grads) {
    if (opt.first_moment.size() != params.size()) {
        opt.first_moment.resize(params.size());
        opt.second_moment.resize(params.size());
        for (std::size_t t = 0; t < params.size(); ++t) {
            opt.first_moment[t].assign(params[t].size(), 0.0);
            opt.second_moment[t].assign(params[t].size(), 0.0);
        }
    }
    const double rate = opt.effective_rate();
    const double t = static_cast<double>(opt.step + 1);
    const double c1 = 1.0 - std::pow(opt.beta1, t);
    const double c2 = 1.0 - std::pow(opt.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto p = params[k];
        const auto& g = grads[k];
        auto& m = opt.first_moment[k];
        auto& v = opt.second_moment[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
            v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            p[i] -= rate * mhat / (std::sqrt(vhat) + opt.epsilon);
        }
    }
    ++opt.step;
}

double train_step(MlpModel& model, OptimizerState& opt, const Matrix& input, std::span<const double> target) {
    if (model.mode != Mode::training) throw ArgumentError("train_step requires a model in training mode");
    if (target.size() != input.rows || input.rows == 0) throw ArgumentError("batch targets do not match inputs");
    ForwardCache cache;
    forward_batch(model, input, Mode::training, cache);

    const double nb = static_cast<double>(input.rows);
    double loss = 0.0;
    std::vector<double> d_out(input.rows);
    for (std::size_t b = 0; b < input.rows; ++b) {
        const double r = cache.output[b] - target[b];
        loss += std::abs(r);
        d_out[b] = (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) / nb;
    }
    loss /= nb;
    if (!std::isfinite(loss)) {
        throw NumericError("training diverged at step " + std::to_string(opt.step) + ": loss is not finite");
    }

    const Gradients grads = backward(model, cache, d_out, Mode::training, false);

    const double unbias = input.rows > 1 ? nb / (nb - 1.0) : 1.0;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        if (!layer.batch_norm) continue;
        for (std::size_t o = 0; o < layer.out; ++o) {
            layer.running_mean[o] = kBatchNormMomentum * layer.running_mean[o] + (1.0 - kBatchNormMomentum) * cache.batch_mean[l][o];
            layer.running_var[o] =
                kBatchNormMomentum * layer.running_var[o] + (1.0 - kBatchNormMomentum) * cache.batch_var[l][o] * unbias;
        }
    }

    auto params = parameter_tensors(model);
    adam_update(opt, params, grads.tensors);
    ++model.steps;
    return loss;
}

// ---------------------------------------------------------------------------
// Gradient check

namespace {

struct Probe {
    double loss;
    std::vector<char> pattern;
};

Probe evaluate_from(const MlpModel& model, std::size_t layer, ForwardCache cache, double target) {
    forward_from(model, layer, Mode::inference, cache);
    Probe p;
    const double r = cache.output[0] - target;
    p.loss = 0.5 * r * r;
    for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
        for (double v : cache.pre_relu[l].data) p.pattern.push_back(v > 0.0 ? 1 : 0);
    }
    return p;
}

Matrix random_check_input(const MlpModel& model, Rng& rng) {
    // A noisy sphere patch of random radius and offset, queried at a random point.
    const GaussianGrid grid(model.config.grid_resolution, model.config.sigma);
    PointCloud cloud;
    const Point3 c{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    const double r = rng.uniform(0.3, 0.7);
    for (int i = 0; i < 64; ++i) {
        Point3 d{rng.normal(), rng.normal(), rng.normal()};
        d *= r / norm(d);
        cloud.push_back(c + d);
    }
    const FisherGrid fg = compute_fisher_grid(cloud, grid);
    const Point3 q{rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9)};
    Matrix input(1, model.input_width());
    input.data[0] = q.x;
    input.data[1] = q.y;
    input.data[2] = q.z;
    extract_local_patch_into(fg, nearest_grid_index(q, grid), model.config.patch_size,
                             std::span<double>(input.data).subspan(3));
    return input;
}

}  // namespace

GradientCheckReport gradient_check(const MlpModel& source, const GradientCheckOptions& options) {
    MlpModel model = source;
    model.mode = Mode::inference;
    const double eps = options.epsilon;
    constexpr double kFloor = 1e-6;
    GradientCheckReport report;
    Rng rng(options.seed);
    const auto names = parameter_names(model);

    // Layer owning each tensor slot.
    std::vector<std::size_t> owner;
    for (std::size_t l = 0; l < model.layers.size(); ++l) owner.insert(owner.end(), model.layers[l].batch_norm ? 4 : 2, l);

    auto compare = [&](double analytic, const Probe& plus, const Probe& minus, const Probe& base, const std::string& what) {
        if (plus.pattern != base.pattern || minus.pattern != base.pattern) {
            ++report.skipped_kinks;
            return;
        }
        const double numeric = (plus.loss - minus.loss) / (2.0 * eps);
        const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kFloor});
        ++report.checked;
        if (rel > report.max_relative_error || report.worst.empty()) {
            report.max_relative_error = rel;
            report.worst = what;
        }
    };

    for (std::size_t trial = 0; trial < options.trials; ++trial) {
        const Matrix input = random_check_input(model, rng);
        const double target = rng.uniform(0.0, 0.5);

        ForwardCache cache;
        forward_batch(model, input, Mode::inference, cache);
        const double residual = cache.output[0] - target;
        const std::vector<double> d_out{residual};
        const Gradients grads = backward(model, cache, d_out, Mode::inference, true);
        const Probe base = evaluate_from(model, 0, cache, target);

        auto params = parameter_tensors(model);
        for (std::size_t t = 0; t < params.size(); ++t) {
            auto tensor = params[t];
            std::vector<std::size_t> picks;
            if (tensor.size() <= options.max_entries_per_tensor) {
                for (std::size_t i = 0; i < tensor.size(); ++i) picks.push_back(i);
            } else {
                std::set<std::size_t> chosen;
                while (chosen.size() < options.max_entries_per_tensor) chosen.insert(rng.below(tensor.size()));
                picks.assign(chosen.begin(), chosen.end());
            }
            const std::size_t layer = owner[t];
            for (auto i : picks) {
                const double saved = tensor[i];
                tensor[i] = saved + eps;
                const Probe plus = evaluate_from(model, layer, cache, target);
                tensor[i] = saved - eps;
                const Probe minus = evaluate_from(model, layer, cache, target);
                tensor[i] = saved;
                compare(grads.tensors[t][i], plus, minus, base,
                        names[t] + "[" + std::to_string(i) + "] trial " + std::to_string(trial));
            }
        }

        for (std::size_t c = 0; c < 3; ++c) {
            Matrix shifted = input;
            shifted.data[c] = input.data[c] + eps;
            ForwardCache cp;
            forward_batch(model, shifted, Mode::inference, cp);
            const Probe plus = evaluate_from(model, 0, cp, target);
            shifted.data[c] = input.data[c] - eps;
            forward_batch(model, shifted, Mode::inference, cp);
            const Probe minus = evaluate_from(model, 0, cp, target);
            compare(grads.input.data[c], plus, minus, base, "input[" + std::to_string(c) + "] trial " + std::to_string(trial));
        }
    }
    return report;
}

}  // namespace dpdist

namespace dpdist {

Point3 query_columns(const Point3& q, const GridIndex& anchor, const GaussianGrid& grid, QueryFrame frame) noexcept {
    if (frame == QueryFrame::absolute) return q;
    return q - Point3{grid.coordinate(anchor[0]), grid.coordinate(anchor[1]), grid.coordinate(anchor[2])};
}

Matrix spd_inputs(const FisherGrid& fg, std::span<const Point3> queries, const NetworkConfig& config) {
    const int patch_size = config.patch_size;
    if (patch_size <= 0 || patch_size % 2 == 0) throw ArgumentError("local patch size k must be odd and positive");
    if (patch_size > fg.grid().resolution()) throw ArgumentError("local patch size k exceeds grid resolution K");
    const auto k = static_cast<std::size_t>(patch_size);
    Matrix rows(queries.size(), 3 + k * k * k * kFisherChannels);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        double* r = rows.row(i);
        const GridIndex anchor = nearest_grid_index(queries[i], fg.grid());
        const Point3 q = query_columns(queries[i], anchor, fg.grid(), config.query_frame);
        r[0] = q.x;
        r[1] = q.y;
        r[2] = q.z;
        extract_local_patch_into(fg, anchor, patch_size, rows.row_span(i).subspan(3));
    }
    return rows;
}

}  // namespace dpdist

namespace dpdist {

namespace {

void check_grid(const MlpModel& model, const FisherGrid& fg) {
    if (model.config.channels != kFisherChannels) throw ArgumentError("model channel count does not match F");
    if (model.config.grid_resolution != fg.grid().resolution() || model.config.sigma != fg.grid().sigma())
        throw ArgumentError("model was trained for a different Gaussian grid");
}

}  // namespace

std::vector<double> spd_distances(const MlpModel& model, const FisherGrid& fg, std::span<const Point3> queries) {
    check_grid(model, fg);
    auto out = predict(model, spd_inputs(fg, queries, model.config));
    for (auto& v : out) v = std::max(v, 0.0);
    return out;
}

double spd_distance(const MlpModel& model, const Point3& b, const FisherGrid& fg) {
    return spd_distances(model, fg, std::span<const Point3>(&b, 1))[0];
}

std::vector<double> patch_projection(const MlpModel& model, std::span<const double> patch) {
    const DenseLayer& layer = model.layers.front();
    if (patch.size() + 3 != layer.in) throw ArgumentError("patch width does not match model");
    std::vector<double> x(patch.size());
    for (std::size_t j = 0; j < patch.size(); ++j) x[j] = (patch[j] - model.input_mean[j + 3]) * model.input_scale[j + 3];
    std::vector<double> out(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
        const double* w = layer.weight.data() + o * layer.in + 3;
        double acc = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) acc += w[j] * x[j];
        out[o] = acc + layer.bias[o];
    }
    return out;
}

std::vector<double> predict_projected(const MlpModel& model, std::span<const Point3> queries,
                                      std::span<const double* const> projections) {
    if (projections.size() != queries.size()) throw ArgumentError("one projection per query required");
    const DenseLayer& layer = model.layers.front();
    const std::size_t B = queries.size();
    ForwardCache cache;
    cache.batch = B;
    const std::size_t L = model.layers.size();
    cache.inputs.resize(L);
    cache.normed.resize(L);
    cache.pre_relu.resize(L);
    cache.batch_mean.resize(L);
    cache.batch_var.resize(L);
    cache.inv_std.resize(L);
    Matrix z(B, layer.out);
    for (std::size_t b = 0; b < B; ++b) {
        const double q[3] = {(queries[b].x - model.input_mean[0]) * model.input_scale[0],
                             (queries[b].y - model.input_mean[1]) * model.input_scale[1],
                             (queries[b].z - model.input_mean[2]) * model.input_scale[2]};
        double* zr = z.row(b);
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double* w = layer.weight.data() + o * layer.in;
            zr[o] = projections[b][o] + (w[0] * q[0] + w[1] * q[1] + w[2] * q[2]);
        }
    }
    if (!layer.batch_norm) {
        cache.output.resize(B);
        for (std::size_t b = 0; b < B; ++b) cache.output[b] = z.row(b)[0];
        return cache.output;
    }
    Matrix next(B, layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
        const double inv_std = 1.0 / std::sqrt(layer.running_var[o] + kBatchNormEpsilon);
        for (std::size_t b = 0; b < B; ++b) {
            const double y = layer.gamma[o] * ((z.row(b)[o] - layer.running_mean[o]) * inv_std) + layer.beta[o];
            next.row(b)[o] = y > 0.0 ? y : 0.0;
        }
    }
    cache.inputs[1] = std::move(next);
    forward_from(model, 1, Mode::inference, cache);
    return cache.output;
}

}  // namespace dpdist

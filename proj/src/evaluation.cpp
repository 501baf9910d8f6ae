#include "dpdist/evaluation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>

#include "dpdist/csv.hpp"
#include "dpdist/distances.hpp"
#include "dpdist/error.hpp"
#include "dpdist/fisher.hpp"
#include "dpdist/random.hpp"
#include "dpdist/spatial.hpp"

namespace dpdist {

namespace {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Every result is
// written by index, so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

GaussianGrid model_grid(const MlpModel& model) {
    return GaussianGrid(model.config.grid_resolution, model.config.sigma);
}

double directed_spd(const MlpModel& model, const PointCloud& queries, const FisherGrid& fg) {
    return mean(spd_distances(model, fg, queries.points()));
}

DetectionCurve detection(const DistanceMethod& method, const std::vector<TriangleMesh>& meshes,
                         const std::vector<double>& magnitudes, const DetectionOptions& options, TransformKind kind) {
    method.validate();
    if (meshes.empty()) throw ArgumentError("detection needs at least one mesh");
    if (options.trials == 0) throw ArgumentError("detection needs at least one trial");
    if (!std::is_sorted(magnitudes.begin(), magnitudes.end()) || magnitudes.empty())
        throw ArgumentError("magnitudes must be nonempty and ascending");
    for (double m : magnitudes)
        if (!(m >= 0.0)) throw ArgumentError("magnitudes must be nonnegative");

    const std::size_t M = magnitudes.size();
    std::vector<unsigned char> success(options.trials * M, 0);
    parallel_for(options.trials, options.threads, [&](std::size_t t) {
        const TriangleMesh& mesh = meshes[t % meshes.size()];
        const std::uint64_t trial_seed = derive_seed(options.seed, t);
        std::vector<PointCloud> clouds;
        if (options.identical_samples) {
            clouds = disjoint_samples(mesh, options.cloud_size, 1, trial_seed);
            clouds.push_back(clouds[0]);
            clouds.push_back(clouds[0]);
        } else {
            clouds = disjoint_samples(mesh, options.cloud_size, 3, trial_seed);
        }
        const PointCloud& a = clouds[0];
        const PointCloud& c = clouds[2];
        const double stationary = evaluate_distance(method, c, a);
        for (std::size_t m = 0; m < M; ++m) {
            TransformSpec spec;
            spec.kind = kind;
            spec.magnitude = magnitudes[m];
            const RigidTransform move = random_rigid_transform(spec, derive_seed(trial_seed, m + 1));
            const double moved = evaluate_distance(method, apply_transform(clouds[1], move), a);
            success[t * M + m] = stationary < moved;
        }
    });

    DetectionCurve curve;
    curve.magnitudes = magnitudes;
    for (std::size_t m = 0; m < M; ++m) {
        std::size_t wins = 0;
        for (std::size_t t = 0; t < options.trials; ++t) wins += success[t * M + m];
        curve.trials.push_back(options.trials);
        curve.successes.push_back(wins);
        curve.accuracy.push_back(static_cast<double>(wins) / static_cast<double>(options.trials));
    }
    return curve;
}

RigidTransform transform_from_parameters(const std::array<double, 6>& p) {
    return {Quaternion::from_rotation_vector({p[0], p[1], p[2]}), {p[3], p[4], p[5]}};
}

// Loss against a fixed template. One-sided DPDist keeps the template's grid
// and caches the first-layer patch term per anchor cell.
class TemplateLoss {
public:
    TemplateLoss(const DistanceMethod& method, const PointCloud& templ) : method_(method), templ_(templ) {
        if (method_.tag == MethodTag::dpdist_one_sided) {
            fg_.emplace(compute_fisher_grid(templ_, model_grid(*method_.model)));
            cache_.resize(fg_->grid().size());
            const auto k = static_cast<std::size_t>(method_.model->config.patch_size);
            patch_.resize(k * k * k * kFisherChannels);
        }
    }

    double operator()(const PointCloud& moved) {
        if (!fg_) return evaluate_distance(method_, moved, templ_);
        const MlpModel& model = *method_.model;
        std::vector<const double*> rows(moved.size());
        std::vector<Point3> columns(moved.size());
        for (std::size_t i = 0; i < moved.size(); ++i) {
            const GridIndex anchor = nearest_grid_index(moved[i], fg_->grid());
            columns[i] = query_columns(moved[i], anchor, fg_->grid(), model.config.query_frame);
            auto& slot = cache_[fg_->grid().flat_index(anchor)];
            if (slot.empty()) {
                extract_local_patch_into(*fg_, anchor, model.config.patch_size, patch_);
                slot = patch_projection(model, patch_);
            }
            rows[i] = slot.data();
        }
        const auto out = predict_projected(model, columns, rows);
        double sum = 0.0;
        for (double v : out) sum += std::max(v, 0.0);
        return sum / static_cast<double>(out.size());
    }

private:
    const DistanceMethod& method_;
    const PointCloud& templ_;
    std::optional<FisherGrid> fg_;
    std::vector<std::vector<double>> cache_;
    std::vector<double> patch_;
};

}  // namespace

DistanceMethod DistanceMethod::parse(std::string_view name, const MlpModel* model) {
    const std::string s = lower(name);
    DistanceMethod m;
    m.model = model;
    if (s == "dpdist") {
        m.tag = MethodTag::dpdist;
    } else if (s == "dpdist-one-sided") {
        m.tag = MethodTag::dpdist_one_sided;
    } else if (s == "cd" || s == "chamfer") {
        m.tag = MethodTag::chamfer;
    } else if (s == "emd") {
        m.tag = MethodTag::emd;
    } else if (s == "hausdorff" || s == "h") {
        m.tag = MethodTag::hausdorff;
    } else if (s.starts_with("ph:") || (s.starts_with("ph(") && s.ends_with(")"))) {
        m.tag = MethodTag::partial_hausdorff;
        const std::string_view num = s.starts_with("ph:") ? std::string_view(s).substr(3)
                                                          : std::string_view(s).substr(3, s.size() - 4);
        const auto [end, ec] = std::from_chars(num.data(), num.data() + num.size(), m.fraction);
        if (ec != std::errc() || end != num.data() + num.size())
            throw ArgumentError("bad partial Hausdorff fraction in '" + std::string(name) + "'");
    } else {
        throw ArgumentError("unknown distance method '" + std::string(name) + "'");
    }
    return m;
}

std::string DistanceMethod::name() const {
    switch (tag) {
        case MethodTag::dpdist: return "DPDist";
        case MethodTag::dpdist_one_sided: return "DPDist-one-sided";
        case MethodTag::chamfer: return "CD";
        case MethodTag::emd: return "EMD";
        case MethodTag::hausdorff: return "Hausdorff";
        case MethodTag::partial_hausdorff: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "PH(%g)", fraction);
            return buf;
        }
    }
    return "?";
}

void DistanceMethod::validate() const {
    if (learned()) {
        if (model == nullptr) throw ArgumentError(name() + " needs a trained model");
        if (model->config.channels != kFisherChannels) throw ArgumentError("model channel count does not match F");
        if (model->input_width() != model->layers.front().in) throw ArgumentError("model width is inconsistent");
    }
    if (tag == MethodTag::partial_hausdorff && !(fraction > 0.0 && fraction <= 1.0))
        throw ArgumentError("partial Hausdorff fraction must lie in (0, 1]");
}

double dpdist(const MlpModel& model, const PointCloud& a, const PointCloud& b, bool symmetric) {
    if (a.empty() || b.empty()) throw EmptyInputError("dpdist of an empty cloud");
    const GaussianGrid grid = model_grid(model);
    const double forward = directed_spd(model, a, compute_fisher_grid(b, grid));
    if (!symmetric) return forward;
    return forward + directed_spd(model, b, compute_fisher_grid(a, grid));
}

double evaluate_distance(const DistanceMethod& method, const PointCloud& a, const PointCloud& b) {
    switch (method.tag) {
        case MethodTag::dpdist: return dpdist(*method.model, a, b, true);
        case MethodTag::dpdist_one_sided: return dpdist(*method.model, a, b, false);
        case MethodTag::chamfer: return chamfer(a, b);
        case MethodTag::emd: return emd(a, b);
        case MethodTag::hausdorff: return hausdorff(a, b);
        case MethodTag::partial_hausdorff: return partial_hausdorff(a, b, method.fraction);
    }
    throw ArgumentError("unknown distance method");
}

std::vector<PointCloud> disjoint_samples(const TriangleMesh& mesh, std::size_t n, std::size_t count,
                                         std::uint64_t seed) {
    if (n == 0 || count == 0) throw ArgumentError("sample size and count must be positive");
    const std::size_t total = n * count;
    const PointCloud dense = sample_mesh_surface(mesh, std::max<std::size_t>(2048, 8 * total), derive_seed(seed, 1));
    std::vector<std::size_t> picked = farthest_point_sampling(dense, total, derive_seed(seed, 2));
    Rng rng(derive_seed(seed, 3));
    for (std::size_t i = total; i > 1; --i) std::swap(picked[i - 1], picked[rng.below(i)]);
    std::vector<PointCloud> out;
    for (std::size_t c = 0; c < count; ++c)
        out.push_back(select(dense, std::span<const std::size_t>(picked).subspan(c * n, n)));
    return out;
}

std::pair<PointCloud, PointCloud> evaluation_pair_sampler(const TriangleMesh& mesh, std::size_t n,
                                                          std::uint64_t seed) {
    auto clouds = disjoint_samples(mesh, n, 2, seed);
    return {std::move(clouds[0]), std::move(clouds[1])};
}

DetectionCurve translation_detection(const DistanceMethod& method, const std::vector<TriangleMesh>& meshes,
                                     const std::vector<double>& magnitudes, const DetectionOptions& options) {
    return detection(method, meshes, magnitudes, options, TransformKind::translation26);
}

DetectionCurve rotation_detection(const DistanceMethod& method, const std::vector<TriangleMesh>& meshes,
                                  const std::vector<double>& angles_deg, const DetectionOptions& options) {
    return detection(method, meshes, angles_deg, options, TransformKind::rotation26);
}

double identification_topm(const DistanceMethod& method, const std::vector<TriangleMesh>& objects, std::size_t n,
                           std::size_t m, std::uint64_t seed, std::size_t threads) {
    method.validate();
    const std::size_t count = objects.size();
    if (count < 2) throw ArgumentError("identification needs at least two objects");
    if (m == 0 || m > count) throw ArgumentError("m must lie in [1, object count]");
    std::vector<unsigned char> hit(count, 0);
    parallel_for(count, threads, [&](std::size_t i) {
        const auto [a, a_again] = evaluation_pair_sampler(objects[i], n, derive_seed(seed, i, i));
        const double own = evaluate_distance(method, a_again, a);
        std::size_t rank = 1;
        for (std::size_t j = 0; j < count; ++j) {
            if (j == i) continue;
            const PointCloud other = disjoint_samples(objects[j], n, 1, derive_seed(seed, i, j))[0];
            if (evaluate_distance(method, other, a) <= own) ++rank;
        }
        hit[i] = rank <= m;
    });
    std::size_t wins = 0;
    for (auto h : hit) wins += h;
    return static_cast<double>(wins) / static_cast<double>(count);
}

RegistrationResult register_clouds(const PointCloud& source, const PointCloud& templ, const DistanceMethod& loss,
                                   const RegistrationOptions& options) {
    loss.validate();
    if (source.empty() || templ.empty()) throw EmptyInputError("registration of an empty cloud");
    if (!(options.initial_step > 0.0) || !(options.epsilon > 0.0))
        throw ArgumentError("step and epsilon must be positive");

    TemplateLoss objective(loss, templ);
    auto evaluate = [&](const std::array<double, 6>& p) {
        return objective(apply_transform(source, transform_from_parameters(p)));
    };

    RegistrationResult result;
    std::array<double, 6> params{};
    double current = evaluate(params);
    double step = options.initial_step;
    std::array<double, 6> grad{};
    bool fresh_gradient = false;
    std::size_t it = 0;
    while (std::isfinite(current) && it < options.iterations && step >= options.min_step) {
        ++it;
        if (!fresh_gradient) {
            for (std::size_t i = 0; i < 6; ++i) {
                auto hi = params;
                auto lo = params;
                hi[i] += options.epsilon;
                lo[i] -= options.epsilon;
                grad[i] = (evaluate(hi) - evaluate(lo)) / (2.0 * options.epsilon);
            }
            fresh_gradient = true;
        }
        double gn = 0.0;
        for (double g : grad) gn += g * g;
        gn = std::sqrt(gn);
        if (!std::isfinite(gn)) {
            result.diverged = true;
            break;
        }
        if (gn == 0.0) break;
        auto candidate = params;
        for (std::size_t i = 0; i < 6; ++i) candidate[i] -= step * grad[i] / gn;
        const double value = evaluate(candidate);
        if (!std::isfinite(value)) {
            result.diverged = true;
            break;
        }
        if (value < current) {
            params = candidate;
            current = value;
            fresh_gradient = false;
        } else {
            step *= 0.5;
        }
    }
    if (!std::isfinite(current)) result.diverged = true;
    result.estimated = transform_from_parameters(params);
    result.iterations = it;
    result.final_loss = current;
    return result;
}

void score_registration(RegistrationResult& result, const RigidTransform& ground_truth) {
    result.ground_truth = ground_truth;
    result.rotation_error_deg =
        rotation_angle_between(result.estimated.rotation(), ground_truth.rotation()) * 180.0 / std::numbers::pi;
    result.translation_error = norm(result.estimated.translation() - ground_truth.translation());
}

std::vector<RegistrationResult> registration_benchmark(const DistanceMethod& loss,
                                                       const std::vector<TriangleMesh>& meshes,
                                                       const RegistrationBenchOptions& options) {
    loss.validate();
    if (meshes.empty()) throw ArgumentError("registration needs at least one mesh");
    std::vector<RegistrationResult> results(options.trials);
    parallel_for(options.trials, options.threads, [&](std::size_t t) {
        const TriangleMesh& mesh = meshes[t % meshes.size()];
        const std::uint64_t trial_seed = derive_seed(options.seed, t);
        PointCloud source_base;
        PointCloud templ;
        if (options.identical_samples) {
            templ = disjoint_samples(mesh, options.cloud_size, 1, trial_seed)[0];
            source_base = templ;
        } else {
            std::tie(source_base, templ) = evaluation_pair_sampler(mesh, options.cloud_size, trial_seed);
        }
        TransformSpec spec;
        spec.kind = TransformKind::registration;
        spec.max_angle_deg = options.max_angle_deg;
        spec.max_translation = options.max_translation;
        const RigidTransform misalign = random_rigid_transform(spec, derive_seed(trial_seed, 4));
        RegistrationResult r = register_clouds(apply_transform(source_base, misalign), templ, loss, options.solver);
        score_registration(r, misalign.inverse());
        results[t] = r;
    });
    return results;
}

double success_ratio(const std::vector<RegistrationResult>& results, double max_rotation_deg,
                     double max_translation) {
    if (results.empty()) throw ArgumentError("success ratio of an empty result set");
    std::size_t ok = 0;
    for (const auto& r : results)
        ok += !r.diverged && r.rotation_error_deg <= max_rotation_deg && r.translation_error <= max_translation;
    return static_cast<double>(ok) / static_cast<double>(results.size());
}

namespace {

FieldSlice slice_lattice(double z, std::size_t resolution, double extent, std::vector<Point3>& points) {
    if (resolution < 2) throw ArgumentError("slice resolution must be at least 2");
    if (!(extent > 0.0)) throw ArgumentError("slice extent must be positive");
    FieldSlice s;
    s.x0 = s.y0 = -extent;
    s.dx = s.dy = 2.0 * extent / static_cast<double>(resolution - 1);
    s.z = z;
    s.rows = s.cols = resolution;
    points.clear();
    for (std::size_t r = 0; r < resolution; ++r)
        for (std::size_t c = 0; c < resolution; ++c)
            points.push_back({s.x0 + static_cast<double>(c) * s.dx, s.y0 + static_cast<double>(r) * s.dy, z});
    return s;
}

}  // namespace

FieldSlice field_slice(const MlpModel& model, const PointCloud& cloud, double z, std::size_t resolution,
                       double extent) {
    if (cloud.empty()) throw EmptyInputError("field slice of an empty cloud");
    std::vector<Point3> points;
    FieldSlice s = slice_lattice(z, resolution, extent, points);
    s.values = spd_distances(model, compute_fisher_grid(cloud, model_grid(model)), points);
    return s;
}

FieldSlice field_slice_nearest(const PointCloud& cloud, double z, std::size_t resolution, double extent) {
    if (cloud.empty()) throw EmptyInputError("field slice of an empty cloud");
    std::vector<Point3> points;
    FieldSlice s = slice_lattice(z, resolution, extent, points);
    const KdTree tree(cloud.points());
    for (const auto& p : points) s.values.push_back(std::sqrt(tree.nearest(p).squared_distance));
    return s;
}

std::string detection_csv(const DetectionCurve& curve) {
    std::string out = "magnitude,accuracy,trials\n";
    for (std::size_t i = 0; i < curve.magnitudes.size(); ++i)
        out += format_real(curve.magnitudes[i]) + "," + format_real(curve.accuracy[i]) + "," +
               std::to_string(curve.trials[i]) + "\n";
    return out;
}

std::string detection_table_csv(const std::vector<std::pair<std::string, DetectionCurve>>& curves) {
    std::string out = "method,magnitude,accuracy,trials\n";
    for (const auto& [name, curve] : curves)
        for (std::size_t i = 0; i < curve.magnitudes.size(); ++i)
            out += name + "," + format_real(curve.magnitudes[i]) + "," + format_real(curve.accuracy[i]) + "," +
                   std::to_string(curve.trials[i]) + "\n";
    return out;
}

std::string registration_csv(const std::vector<RegistrationResult>& results) {
    std::string out = "trial,rotation_error_deg,translation_error,iterations,final_loss,diverged\n";
    for (std::size_t t = 0; t < results.size(); ++t) {
        const auto& r = results[t];
        out += std::to_string(t) + "," + format_real(r.rotation_error_deg) + "," + format_real(r.translation_error) +
               "," + std::to_string(r.iterations) + "," + format_real(r.final_loss) + "," +
               (r.diverged ? "1" : "0") + "\n";
    }
    return out;
}

std::string field_slice_csv(const FieldSlice& slice) {
    std::string out = "x0,y0,dx,dy,z\n";
    out += format_real(slice.x0) + "," + format_real(slice.y0) + "," + format_real(slice.dx) + "," +
           format_real(slice.dy) + "," + format_real(slice.z) + "\n";
    for (std::size_t r = 0; r < slice.rows; ++r) {
        for (std::size_t c = 0; c < slice.cols; ++c) {
            if (c) out += ",";
            out += format_real(slice.at(r, c));
        }
        out += "\n";
    }
    return out;
}

}  // namespace dpdist

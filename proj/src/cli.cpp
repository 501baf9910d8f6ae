#include "dpdist/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dpdist/archive.hpp"
#include "dpdist/csv.hpp"
#include "dpdist/dataset.hpp"
#include "dpdist/error.hpp"
#include "dpdist/evaluation.hpp"
#include "dpdist/random.hpp"
#include "dpdist/training.hpp"

namespace dpdist::cli {

namespace {

// Seed stream for benchmark meshes, kept apart from the training pool.
constexpr std::uint64_t kBenchMeshStream = 100;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_real(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw ArgumentError("'" + s + "' is not a number");
    return v;
}

std::vector<double> parse_reals(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(parse_real(item));
    return out;
}

std::vector<ShapeKind> parse_kinds(const std::string& s) {
    std::vector<ShapeKind> out;
    for (const auto& item : split_list(s)) out.push_back(parse_shape_kind(item));
    if (out.empty()) throw ArgumentError("no shape kinds given");
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(s)) {
        const double v = parse_real(item);
        if (!(v >= 1.0) || v != std::floor(v)) throw ArgumentError("'" + item + "' is not a positive integer");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

// Printed distances always carry a decimal point or exponent.
std::string format_printed(double v) {
    std::string s = format_real(v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

// Appends --key=value for every config entry whose key is absent from the
// command line, so explicit flags win. Unknown keys surface as parse errors.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].starts_with("--config=")) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    const std::string text = read_file(path);
    std::stringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ArgumentError(path + ":" + std::to_string(number) + ": expected key=value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty() || key == "config") throw ArgumentError(path + ":" + std::to_string(number) + ": bad key");
        const std::string flag = "--" + key;
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.starts_with(flag + "=");
        });
        if (!given) args.push_back(flag + "=" + value);
    }
    return args;
}

// Resolved options of a subcommand as a config file that reproduces the run.
std::string manifest_text(const CLI::App& sub) {
    std::string out = "# dpdist " DPDIST_VERSION "\n# command: " + sub.get_name() + "\n";
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string& name = opt->get_lnames().front();
        if (name == "help" || name == "config") continue;
        std::string value;
        if (opt->count() > 0) {
            for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
        } else {
            value = opt->get_default_str();
        }
        if (!value.empty()) out += name + "=" + value + "\n";
    }
    return out;
}

struct Outputs {
    std::string dir = ".";

    std::string path(const std::string& name) const { return (std::filesystem::path(dir) / name).string(); }
    void write(const std::string& name, std::string_view contents) const {
        std::filesystem::create_directories(dir);
        write_file(path(name), contents);
    }
};

std::vector<TriangleMesh> bench_meshes(const std::string& mesh_dir, const std::string& kinds, std::size_t count,
                                       std::uint64_t seed) {
    if (!mesh_dir.empty()) {
        TrainConfig scan;
        scan.mesh_dir = mesh_dir;
        return training_meshes(scan);
    }
    const auto list = parse_kinds(kinds);
    std::vector<TriangleMesh> meshes;
    for (std::size_t i = 0; i < count; ++i)
        meshes.push_back(random_synthetic_mesh(list[i % list.size()], derive_seed(seed, kBenchMeshStream, i)));
    return meshes;
}

std::vector<DistanceMethod> parse_methods(const std::string& s, const MlpModel* model) {
    std::vector<DistanceMethod> out;
    for (const auto& item : split_list(s)) {
        out.push_back(DistanceMethod::parse(item, model));
        out.back().validate();
    }
    if (out.empty()) throw ArgumentError("no methods given");
    return out;
}

struct Settings {
    // shared
    std::uint64_t seed = 0;
    std::string out = ".";
    std::size_t threads = 1;
    std::string config;
    std::string model;
    std::string mesh_dir;
    std::string kinds;
    std::size_t shapes = 10;
    std::size_t n = 64;
    std::size_t trials = 100;
    bool identical = false;
    std::string methods;
    // gen-data
    std::size_t count = 1;
    std::size_t points = 0;
    int resolution = 16;
    // train
    int k = 5;
    int grid = 8;
    double sigma = 0.125;
    std::string hidden = "1024,1024,1024";
    std::string query_frame = "absolute";
    std::size_t batch = 16;
    std::size_t steps = 1000;
    double lr = 1e-3;
    double decay = 0.5;
    std::uint64_t decay_interval = 300000;
    std::size_t pool = 64;
    std::size_t standardize = 16;
    std::size_t log_every = 100;
    // eval / field-slice
    std::string a;
    std::string b;
    std::string method = "cd";
    std::string cloud;
    std::string mode;
    double z = 0.0;
    std::size_t slice_resolution = 64;
    double extent = 1.0;
    // benches
    std::string magnitudes;
    std::string m_values = "1,5";
    std::size_t objects = 20;
    std::size_t iters = 200;
    double step = 0.05;
    double max_angle = 45.0;
    double max_translation = 0.1;
    std::string thresholds = "5:0.02,10:0.05";
    // gradcheck
    double epsilon = 1e-3;
    std::size_t entries = 48;
    double threshold = 1e-4;
};

NetworkConfig network_from(const Settings& s) {
    NetworkConfig net;
    net.patch_size = s.k;
    net.grid_resolution = s.grid;
    net.sigma = s.sigma;
    net.hidden = parse_sizes(s.hidden);
    net.query_frame = s.query_frame == "anchor" ? QueryFrame::anchor : QueryFrame::absolute;
    net.validate();
    return net;
}

void add_common(CLI::App* sub, Settings& s, bool seeded) {
    sub->add_option("--config", s.config, "Flat key=value file; explicit flags win");
    sub->add_option("--out", s.out, "Output directory")->capture_default_str();
    sub->add_option("--threads", s.threads, "Worker cap (results do not depend on it)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    if (seeded) sub->add_option("--seed", s.seed, "Master seed")->required();
}

int cmd_gen_data(const Settings& s, const CLI::App& sub) {
    const Outputs out{s.out};
    const auto kinds = parse_kinds(s.kinds);
    for (ShapeKind kind : kinds) {
        for (std::size_t i = 0; i < s.count; ++i) {
            const std::uint64_t seed = derive_seed(s.seed, static_cast<std::uint64_t>(kind), i);
            const TriangleMesh mesh = random_synthetic_mesh(kind, seed);
            const std::string stem = std::string(shape_kind_name(kind)) + "_" + std::to_string(i);
            out.write(stem + ".off", write_off(mesh));
            if (s.points > 0) out.write(stem + ".xyz", write_xyz(sample_mesh_surface(mesh, s.points, derive_seed(seed, 1))));
        }
    }
    out.write("manifest.txt", manifest_text(sub));
    return 0;
}

int cmd_train(const Settings& s, const CLI::App& sub) {
    TrainConfig config;
    config.network = network_from(s);
    config.cloud_size = s.n;
    config.batch_size = s.batch;
    config.max_steps = s.steps;
    config.seed = s.seed;
    config.learning_rate = s.lr;
    config.decay = s.decay;
    config.decay_interval = s.decay_interval;
    config.kinds = parse_kinds(s.kinds);
    config.pool_size = s.pool;
    config.mesh_dir = s.mesh_dir;
    config.standardize_batches = s.standardize;
    const auto result = train(config, [&](const LossRecord& r) {
        if (s.log_every > 0 && (r.step % s.log_every == 0 || r.step + 1 == s.steps))
            std::cerr << "step " << r.step << " loss " << r.loss << " lr " << r.learning_rate << "\n";
    });
    const Outputs out{s.out};
    std::filesystem::create_directories(out.dir);
    save_model(result.model, out.path("model.dpd1"));
    out.write("loss.csv", loss_history_csv(result.history));
    out.write("manifest.txt", manifest_text(sub));
    return 0;
}

std::optional<MlpModel> maybe_model(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return load_model(path);
}

int cmd_eval(const Settings& s, const CLI::App& sub) {
    const auto model = maybe_model(s.model);
    const DistanceMethod method = parse_methods(s.method, model ? &*model : nullptr).front();
    const double d = evaluate_distance(method, read_xyz(read_file(s.a)), read_xyz(read_file(s.b)));
    std::cout << format_printed(d) << "\n";
    const Outputs out{s.out};
    out.write("distance.csv", "method,distance\n" + method.name() + "," + format_real(d) + "\n");
    out.write("manifest.txt", manifest_text(sub));
    return 0;
}

int cmd_detect(const Settings& s, const CLI::App& sub, bool rotation) {
    const auto model = maybe_model(s.model);
    const auto methods = parse_methods(s.methods, model ? &*model : nullptr);
    const auto meshes = bench_meshes(s.mesh_dir, s.kinds, s.shapes, s.seed);
    const auto magnitudes = parse_reals(s.magnitudes.empty() ? (rotation ? "0,2,5,10,20" : "0,0.01,0.02,0.05,0.1")
                                                             : s.magnitudes);
    DetectionOptions options;
    options.cloud_size = s.n;
    options.trials = s.trials;
    options.seed = s.seed;
    options.identical_samples = s.identical;
    options.threads = s.threads;
    std::vector<std::pair<std::string, DetectionCurve>> curves;
    for (const auto& m : methods) {
        curves.emplace_back(m.name(), rotation ? rotation_detection(m, meshes, magnitudes, options)
                                               : translation_detection(m, meshes, magnitudes, options));
    }
    const std::string csv = detection_table_csv(curves);
    std::cout << csv;
    const Outputs out{s.out};
    out.write("detection.csv", csv);
    out.write("manifest.txt", manifest_text(sub));
    return 0;
}

int cmd_identify(const Settings& s, const CLI::App& sub) {
    const auto model = maybe_model(s.model);
    const auto methods = parse_methods(s.methods, model ? &*model : nullptr);
    const auto objects = bench_meshes(s.mesh_dir, s.kinds, s.objects, s.seed);
    std::string csv = "method,m,rate\n";
    for (const auto& method : methods)
        for (std::size_t m : parse_sizes(s.m_values))
            csv += method.name() + "," + std::to_string(m) + "," +
                   format_real(identification_topm(method, objects, s.n, m, s.seed, s.threads)) + "\n";
    std::cout << csv;
    const Outputs out{s.out};
    out.write("identification.csv", csv);
    out.write("manifest.txt", manifest_text(sub));
    return 0;
}

int cmd_register(const Settings& s, const CLI::App& sub) {
    const auto model = maybe_model(s.model);
    const auto methods = parse_methods(s.methods, model ? &*model : nullptr);
    const auto meshes = bench_meshes(s.mesh_dir, s.kinds, s.shapes, s.seed);
    std::vector<std::pair<double, double>> thresholds;
    for (const auto& item : split_list(s.thresholds)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ArgumentError("thresholds take the form degrees:translation");
        thresholds.emplace_back(parse_real(item.substr(0, colon)), parse_real(item.substr(colon + 1)));
    }
    RegistrationBenchOptions options;
    options.cloud_size = s.n;
    options.trials = s.trials;
    options.seed = s.seed;
    options.identical_samples = s.identical;
    options.max_angle_deg = s.max_angle;
    options.max_translation = s.max_translation;
    options.solver.iterations = s.iters;
    options.solver.initial_step = s.step;
    options.threads = s.threads;
    const Outputs out{s.out};
    std::string summary = "method,max_rotation_deg,max_translation,success_ratio\n";
    for (const auto& method : methods) {
        const auto results = registration_benchmark(method, meshes, options);
        out.write("registration_" + method.name() + ".csv", registration_csv(results));
        for (const auto& [rot, trans] : thresholds)
            summary += method.name() + "," + format_real(rot) + "," + format_real(trans) + "," +
                       format_real(success_ratio(results, rot, trans)) + "\n";
    }
    std::cout << summary;
    out.write("success_ratio.csv", summary);
    out.write("manifest.txt", manifest_text(sub));
    return 0;
}

int cmd_field_slice(const Settings& s, const CLI::App& sub) {
    const auto model = maybe_model(s.model);
    const std::string mode = s.mode.empty() ? (model ? "model" : "nearest") : s.mode;
    const PointCloud cloud = read_xyz(read_file(s.cloud));
    FieldSlice slice;
    if (mode == "model") {
        if (!model) throw ArgumentError("--mode model needs --model");
        slice = field_slice(*model, cloud, s.z, s.slice_resolution, s.extent);
    } else if (mode == "nearest") {
        slice = field_slice_nearest(cloud, s.z, s.slice_resolution, s.extent);
    } else {
        throw ArgumentError("--mode must be model or nearest");
    }
    const Outputs out{s.out};
    out.write("field_slice.csv", field_slice_csv(slice));
    out.write("manifest.txt", manifest_text(sub));
    return 0;
}

int cmd_gradcheck(const Settings& s, const CLI::App& sub) {
    const MlpModel model = s.model.empty() ? init_model(network_from(s), s.seed) : load_model(s.model);
    GradientCheckOptions options;
    options.trials = s.trials;
    options.epsilon = s.epsilon;
    options.max_entries_per_tensor = s.entries;
    options.seed = s.seed;
    const GradientCheckReport report = gradient_check(model, options);
    std::cout << format_real(report.max_relative_error) << "\n";
    std::cerr << "checked " << report.checked << " entries, skipped " << report.skipped_kinks << " at kinks, worst "
              << report.worst << "\n";
    const Outputs out{s.out};
    out.write("gradcheck.csv", "max_relative_error,checked,skipped_kinks\n" + format_real(report.max_relative_error) +
                                   "," + std::to_string(report.checked) + "," +
                                   std::to_string(report.skipped_kinks) + "\n");
    out.write("manifest.txt", manifest_text(sub));
    if (!(report.max_relative_error < s.threshold)) {
        std::cerr << "gradient check failed: " << report.max_relative_error << " >= " << s.threshold << "\n";
        return 3;
    }
    return 0;
}

void add_network_options(CLI::App* sub, Settings& s) {
    sub->add_option("--k", s.k, "Local patch size (odd)")->capture_default_str();
    sub->add_option("--K", s.grid, "Gaussian grid resolution")->capture_default_str();
    sub->add_option("--sigma", s.sigma, "Gaussian width")->capture_default_str();
    sub->add_option("--hidden", s.hidden, "Hidden layer widths")->capture_default_str();
    sub->add_option("--query-frame", s.query_frame, "Query columns: absolute or anchor (offset from the patch centre)")
        ->check(CLI::IsMember({"absolute", "anchor"}))
        ->capture_default_str();
}

}  // namespace

int run(int argc, char** argv) {
    // One Settings per subcommand: CLI11 writes defaults into the bound
    // variables when options are declared.
    std::deque<Settings> store;
    CLI::App app{"Point cloud distances: classical measures and a learned implicit-surface distance"};
    app.set_version_flag("--version", DPDIST_VERSION);
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "Write synthetic meshes and sampled clouds");
    Settings& s = store.emplace_back();
    add_common(gen, s, true);
    gen->add_option("--kinds", s.kinds, "Shape kinds")->default_val("plane,sphere,box,cylinder,wedge");
    gen->add_option("--count", s.count, "Meshes per kind")->capture_default_str();
    gen->add_option("--points", s.points, "Also write a surface sample of this size")->capture_default_str();

    auto* tr = app.add_subcommand("train", "Train the point-to-surface distance regressor");
    Settings& st = store.emplace_back();
    add_common(tr, st, true);
    add_network_options(tr, st);
    tr->add_option("--N", st.n, "Points per cloud")->capture_default_str();
    tr->add_option("--batch", st.batch, "Shapes per step")->capture_default_str();
    tr->add_option("--steps", st.steps, "Optimizer steps")->capture_default_str();
    tr->add_option("--lr", st.lr, "Base learning rate")->capture_default_str();
    tr->add_option("--decay", st.decay, "Learning-rate decay factor")->capture_default_str();
    tr->add_option("--decay-interval", st.decay_interval, "Steps per decay")->capture_default_str();
    tr->add_option("--kinds", st.kinds, "Synthetic training shapes")->default_val("plane,sphere,box");
    tr->add_option("--mesh-dir", st.mesh_dir, "Train on the OFF files of this directory");
    tr->add_option("--pool", st.pool, "Synthetic meshes generated up front")->capture_default_str();
    tr->add_option("--standardize", st.standardize, "Batches used to fit input standardization")
        ->capture_default_str();
    tr->add_option("--log-every", st.log_every, "Progress interval on stderr (0 = quiet)")->capture_default_str();

    auto* ev = app.add_subcommand("eval", "Distance between two .xyz clouds");
    Settings& se = store.emplace_back();
    add_common(ev, se, false);
    ev->add_option("a,--a", se.a, "First cloud")->required();
    ev->add_option("b,--b", se.b, "Second cloud")->required();
    ev->add_option("--method", se.method, "cd, emd, hausdorff, ph:<f>, dpdist, dpdist-one-sided")
        ->capture_default_str();
    ev->add_option("--model", se.model, "Model archive for learned methods");

    auto add_bench = [&](CLI::App* sub, Settings& s, const char* methods, const char* kinds) {
        add_common(sub, s, true);
        sub->add_option("--methods", s.methods, "Distance methods")->default_val(methods);
        sub->add_option("--model", s.model, "Model archive for learned methods");
        sub->add_option("--kinds", s.kinds, "Synthetic shape kinds")->default_val(kinds);
        sub->add_option("--mesh-dir", s.mesh_dir, "Use the OFF files of this directory");
        sub->add_option("--N", s.n, "Points per cloud")->capture_default_str();
    };
    auto* bt = app.add_subcommand("bench-translate", "Translation detection accuracy per magnitude");
    auto* br = app.add_subcommand("bench-rotate", "Rotation detection accuracy per angle (degrees)");
    Settings& sbt = store.emplace_back();
    Settings& sbr = store.emplace_back();
    for (auto [sub, s] : {std::pair<CLI::App*, Settings*>{bt, &sbt}, {br, &sbr}}) {
        add_bench(sub, *s, "cd,emd,hausdorff", "plane,sphere,box,cylinder,wedge");
        sub->add_option("--shapes", s->shapes, "Synthetic shapes")->capture_default_str();
        sub->add_option("--magnitudes", s->magnitudes, "Ascending magnitudes");
        sub->add_option("--trials", s->trials, "Trials per magnitude")->capture_default_str();
        sub->add_flag("--identical", s->identical, "Compare a sample with its own transformed copy");
    }

    auto* bi = app.add_subcommand("bench-identify", "Top-m identification rate");
    Settings& sbi = store.emplace_back();
    add_bench(bi, sbi, "cd,emd,hausdorff", "chair");
    bi->add_option("--objects", sbi.objects, "Objects in the set")->capture_default_str();
    bi->add_option("--m", sbi.m_values, "Ranks m")->capture_default_str();

    auto* rg = app.add_subcommand("register", "Rigid registration driven by a distance");
    Settings& srg = store.emplace_back();
    add_bench(rg, srg, "cd,dpdist-one-sided", "chair,wedge");
    rg->add_option("--shapes", srg.shapes, "Synthetic shapes")->capture_default_str();
    rg->add_option("--trials", srg.trials, "Registration trials")->default_val(50);
    rg->add_flag("--identical", srg.identical, "Register a sample to itself");
    rg->add_option("--iters", srg.iters, "Iterations per trial")->capture_default_str();
    rg->add_option("--step", srg.step, "Initial step length")->capture_default_str();
    rg->add_option("--max-angle", srg.max_angle, "Misalignment angle range (degrees)")->capture_default_str();
    rg->add_option("--max-translation", srg.max_translation, "Misalignment translation range")->capture_default_str();
    rg->add_option("--thresholds", srg.thresholds, "degrees:translation pairs")->capture_default_str();

    auto* fs = app.add_subcommand("field-slice", "Distance field on an XY slice as CSV");
    Settings& sfs = store.emplace_back();
    add_common(fs, sfs, false);
    fs->add_option("--cloud", sfs.cloud, "Input .xyz cloud")->required();
    fs->add_option("--model", sfs.model, "Model archive");
    fs->add_option("--mode", sfs.mode, "model or nearest (default: model when --model is given)");
    fs->add_option("--z", sfs.z, "Slice height")->capture_default_str();
    fs->add_option("--resolution", sfs.slice_resolution, "Lattice points per axis")->capture_default_str();
    fs->add_option("--extent", sfs.extent, "Half width of the slice")->capture_default_str();

    auto* gc = app.add_subcommand("gradcheck", "Compare backprop with central differences");
    Settings& sgc = store.emplace_back();
    add_common(gc, sgc, true);
    add_network_options(gc, sgc);
    gc->add_option("--model", sgc.model, "Model archive (default: a fresh model)");
    gc->add_option("--trials", sgc.trials, "Random inputs")->default_val(10);
    gc->add_option("--epsilon", sgc.epsilon, "Finite-difference step")->capture_default_str();
    gc->add_option("--entries", sgc.entries, "Probed entries per tensor")->capture_default_str();
    gc->add_option("--threshold", sgc.threshold, "Failure threshold")->capture_default_str();

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = merge_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app.help() : subs.front()->help());
        return 1;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(s, *gen);
        if (tr->parsed()) return cmd_train(st, *tr);
        if (ev->parsed()) return cmd_eval(se, *ev);
        if (bt->parsed()) return cmd_detect(sbt, *bt, false);
        if (br->parsed()) return cmd_detect(sbr, *br, true);
        if (bi->parsed()) return cmd_identify(sbi, *bi);
        if (rg->parsed()) return cmd_register(srg, *rg);
        if (fs->parsed()) return cmd_field_slice(sfs, *fs);
        if (gc->parsed()) return cmd_gradcheck(sgc, *gc);
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace dpdist::cli

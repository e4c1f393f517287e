#include "adjopinf_cli/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "adjopinf/error.hpp"
#include "adjopinf/harness.hpp"
#include "adjopinf/snapshot_io.hpp"

namespace adjopinf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

fs::path resolve(const std::string& out_dir, const std::string& file) {
    const fs::path p(file);
    if (p.is_absolute() || out_dir.empty()) return p;
    return fs::path(out_dir) / p;
}

ExperimentConfig load_config(const std::string& path) {
    return path.empty() ? ExperimentConfig{} : parse_experiment_config(read_text(path));
}

std::string snapshot_sidecar(const SnapshotMatrix& snap, const std::string& pde) {
    json j;
    j["kind"] = "snapshots";
    j["pde"] = pde;
    j["rows"] = snap.rows();
    j["count"] = snap.count();
    j["t_start"] = snap.times()[0];
    j["t_end"] = snap.times()[snap.count() - 1];
    return j.dump(2);
}

struct Options {
    std::string config;
    std::string out_dir;
    std::string out;
    std::string pde;
    std::string snapshots;
    std::string theta;
    std::string basis;
    std::string method = "adjoint";
    std::optional<std::uint64_t> seed;
    std::optional<int> r;
    std::optional<double> noise;
    std::optional<int> workers;
    // Scoring should not be limited by the integrator, hence tighter than the library default.
    double rtol = 1e-10;
    double atol = 1e-12;
    bool pod_on_noisy = false;
    bool no_wall_time = false;
};

int cmd_generate(const Options& o, std::ostream& out) {
    ExperimentConfig cfg = load_config(o.config);
    if (!o.pde.empty()) cfg.pde = parse_pde(o.pde);
    if (o.seed) cfg.synthetic.seed = *o.seed;
    cfg.snapshot_file.reset();
    const fs::path path = resolve(o.out_dir, o.out.empty() ? "snapshots.bin" : o.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const SnapshotMatrix snap = generate_fom(cfg);
    write_snapshots(path, snap);
    write_sidecar(path, snapshot_sidecar(snap, to_string(cfg.pde)));
    out << "wrote " << snap.rows() << " x " << snap.count() << " snapshots to " << path.string()
        << '\n';
    return kOk;
}

int cmd_train(const Options& o, std::ostream& out) {
    ExperimentConfig cfg = load_config(o.config);
    if (!o.pde.empty()) cfg.pde = parse_pde(o.pde);
    if (!o.snapshots.empty()) cfg.snapshot_file = o.snapshots;
    if (o.seed) cfg.seed = *o.seed;
    if (o.noise) cfg.noise_pct = *o.noise;
    if (o.pod_on_noisy) cfg.pod_on_noisy = true;
    cfg.validate();
    const int r = o.r ? *o.r : cfg.r_values.front();
    const Method method = parse_method(o.method);

    const SnapshotMatrix fom = generate_fom(cfg);
    const CellModel model = run_model(cfg, fom, method, r);
    const ResultRecord& rec = model.record;

    const fs::path dir = o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir);
    fs::create_directories(dir);
    json theta = json::parse(rec.theta->to_json());
    theta["hyperparams"] = {{"method", to_string(method)},
                            {"r", r},
                            {"noise_pct", cfg.noise_pct},
                            {"seed", cfg.seed},
                            {"selection", rec.hyperparams},
                            {"val_rse", std::isfinite(rec.val_rse) ? json(rec.val_rse) : json()},
                            {"test_rse", std::isfinite(rec.test_rse) ? json(rec.test_rse) : json()}};
    write_text(dir / "theta.json", theta.dump(2) + "\n");

    write_pod_basis(dir / "basis.bin", model.basis);
    json basis_meta{{"kind", "pod_basis"},
                    {"n", model.basis.n()},
                    {"r", model.basis.r()},
                    {"energy_captured", model.basis.energy_captured()}};
    write_sidecar(dir / "basis.bin", basis_meta.dump(2));

    std::ostringstream log;
    for (const IterationRecord& it : model.log) log << it.to_json() << '\n';
    write_text(dir / "train_log.jsonl", log.str());
    write_text(dir / "opinf_grid.csv", model.grid_report);

    out << results_csv({rec});
    return rec.diverged ? kNumericalError : kOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    SweepSpec spec = parse_sweep_config(read_text(o.config));
    if (!o.pde.empty()) spec.base.pde = parse_pde(o.pde);
    if (!o.snapshots.empty()) spec.base.snapshot_file = o.snapshots;
    if (o.seed) spec.seeds = {*o.seed};
    if (o.workers) spec.workers = *o.workers;
    if (spec.workers < 1) throw ConfigError("workers must be >= 1");
    const std::vector<ResultRecord> records = run_sweep(spec);
    const std::string csv = results_csv(records, !o.no_wall_time);
    const fs::path path = resolve(o.out_dir, o.out.empty() ? "results.csv" : o.out);
    write_text(path, csv);
    out << "wrote " << records.size() << " records to " << path.string() << '\n';
    return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
    const RomParams theta = RomParams::from_json(read_text(o.theta));
    SnapshotMatrix snap = read_snapshots(o.snapshots);
    if (!o.basis.empty()) snap = project(read_pod_basis(o.basis), snap);
    if (snap.rows() != theta.r()) {
        throw DimensionError("snapshot dimension " + std::to_string(snap.rows()) +
                             " does not match ROM dimension " + std::to_string(theta.r()) +
                             " (pass --basis for full-order snapshots)");
    }
    IntegratorOptions opts;
    opts.rtol = o.rtol;
    opts.atol = o.atol;
    const double value = rollout_rse(theta, snap, opts);
    json j{{"rse", std::isfinite(value) ? json(value) : json()},
           {"diverged", !std::isfinite(value)},
           {"snapshots", snap.count()}};
    out << j.dump() << '\n';
    return std::isfinite(value) ? kOk : kNumericalError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quadratic reduced-order model learning: operator inference and adjoint training"};
    app.require_subcommand(1);
    Options o;

    auto* gen = app.add_subcommand("generate-fom", "Simulate a full-order model and write snapshots");
    gen->add_option("--pde", o.pde, "burgers, fkpp, ade or synthetic");
    gen->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
    gen->add_option("--out", o.out, "Snapshot container path (default snapshots.bin)");
    gen->add_option("--out-dir", o.out_dir, "Directory for relative output paths");
    gen->add_option("--seed", o.seed, "Seed for the synthetic system");

    auto* train = app.add_subcommand("train", "Fit one ROM and write theta, basis and logs");
    train->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
    train->add_option("--snapshots", o.snapshots, "Snapshot container (default: simulate)")
        ->check(CLI::ExistingFile);
    train->add_option("--pde", o.pde, "Override the config's pde");
    train->add_option("--method", o.method, "opinf-ord2, opinf-ord6 or adjoint");
    train->add_option("--r", o.r, "Reduced dimension (default: first of r_values)");
    train->add_option("--noise", o.noise, "Noise level in percent");
    train->add_option("--seed", o.seed, "Noise seed");
    train->add_option("--out-dir", o.out_dir, "Output directory (default .)");
    train->add_flag("--pod-on-noisy", o.pod_on_noisy, "Build the POD basis from noisy snapshots");

    auto* sweep = app.add_subcommand("sweep", "Run a sweep and write the results CSV");
    sweep->add_option("--config", o.config, "JSON sweep config")->required()->check(CLI::ExistingFile);
    sweep->add_option("--snapshots", o.snapshots, "Snapshot container (default: simulate)")
        ->check(CLI::ExistingFile);
    sweep->add_option("--pde", o.pde, "Override the config's pde");
    sweep->add_option("--out", o.out, "Results CSV path (default results.csv)");
    sweep->add_option("--out-dir", o.out_dir, "Directory for relative output paths");
    sweep->add_option("--seed", o.seed, "Run a single seed instead of the config's list");
    sweep->add_option("--workers", o.workers, "Worker threads");
    sweep->add_flag("--no-wall-time", o.no_wall_time, "Leave the wall_ms column empty");

    auto* eval = app.add_subcommand("evaluate", "Roll out a ROM over a snapshot file and report RSE");
    eval->add_option("--theta", o.theta, "ROM parameter JSON")->required()->check(CLI::ExistingFile);
    eval->add_option("--snapshots", o.snapshots, "Snapshot container")->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--basis", o.basis, "POD basis for full-order snapshots")
        ->check(CLI::ExistingFile);
    eval->add_option("--rtol", o.rtol, "Roll-out relative tolerance (default 1e-10)")
        ->check(CLI::PositiveNumber);
    eval->add_option("--atol", o.atol, "Roll-out absolute tolerance (default 1e-12)")
        ->check(CLI::PositiveNumber);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        if (!rev.empty()) rev.pop_back();  // program name
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*gen) return cmd_generate(o, out);
        if (*train) return cmd_train(o, out);
        if (*sweep) return cmd_sweep(o, out);
        if (*eval) return cmd_evaluate(o, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DimensionError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const fs::filesystem_error& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
    err << app.help();
    return kConfigError;
}

}  // namespace adjopinf::cli

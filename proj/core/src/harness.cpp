#include "adjopinf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/QR>
#include <json.hpp>

#include "adjopinf/error.hpp"
#include "adjopinf/pod.hpp"
#include "adjopinf/snapshot_io.hpp"

namespace adjopinf {

using nlohmann::json;

std::string to_string(Pde pde) {
    switch (pde) {
        case Pde::Burgers: return "burgers";
        case Pde::Fkpp: return "fkpp";
        case Pde::Ade: return "ade";
        case Pde::Synthetic: return "synthetic";
    }
    return "unknown";
}

std::string to_string(Method method) {
    switch (method) {
        case Method::OpinfOrd2: return "opinf-ord2";
        case Method::OpinfOrd6: return "opinf-ord6";
        case Method::Adjoint: return "adjoint";
    }
    return "unknown";
}

Pde parse_pde(const std::string& name) {
    for (Pde p : {Pde::Burgers, Pde::Fkpp, Pde::Ade, Pde::Synthetic}) {
        if (to_string(p) == name) return p;
    }
    throw ConfigError("unknown pde '" + name + "' (expected burgers, fkpp, ade or synthetic)");
}

Method parse_method(const std::string& name) {
    for (Method m : {Method::OpinfOrd2, Method::OpinfOrd6, Method::Adjoint}) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("unknown method '" + name + "' (expected opinf-ord2, opinf-ord6 or adjoint)");
}

SplitFractions default_split(Pde pde) {
    switch (pde) {
        case Pde::Burgers: return {0.5, 0.1, 0.4};
        case Pde::Fkpp:
        case Pde::Ade: return {0.75, 0.1, 0.15};
        case Pde::Synthetic: return {0.6, 0.2, 0.2};
    }
    return {};
}

void ExperimentConfig::validate() const {
    if (!(split.train > 0 && split.val > 0 && split.test > 0)) {
        throw ConfigError("split fractions must be positive");
    }
    if (split.train + split.val + split.test > 1.0 + 1e-12) {
        throw ConfigError("split fractions must sum to at most 1");
    }
    if (!(noise_pct >= 0)) throw ConfigError("noise level must be non-negative");
    if (r_values.empty()) throw ConfigError("r_values is empty");
    for (int r : r_values) {
        if (r < 1) throw ConfigError("r values must be >= 1");
    }
    if (methods.empty()) throw ConfigError("methods list is empty");
    if (snapshot_count == 1 || snapshot_count < 0) {
        throw ConfigError("snapshot_count must be 0 (keep all) or >= 2");
    }
    train.validate();
}

SyntheticSystem make_synthetic_system(const SyntheticConfig& cfg) {
    if (cfg.r < 1 || cfg.n < cfg.r) throw ConfigError("synthetic system needs 1 <= r <= n");
    if (!(cfg.horizon > 0) || cfg.n_snapshots < 2) {
        throw ConfigError("synthetic system needs a positive horizon and >= 2 snapshots");
    }
    const Eigen::Index n = cfg.n, r = cfg.r;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto randn = [&](Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd M(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
        }
        return M;
    };

    SyntheticSystem sys;
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(randn(n, r));
    sys.V = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);

    // Damped rotations, one 2x2 block per pair of coordinates. Distinct decay
    // rates keep the quadratic features of a single trajectory separable.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(r, r);
    for (Eigen::Index b = 0; 2 * b < r; ++b) {
        const Eigen::Index i = 2 * b;
        const double damping = 0.02 + 0.03 * static_cast<double>(b);
        if (i + 1 < r) {
            const double omega = 2.0 + 1.3 * static_cast<double>(b);
            A(i, i) = -damping;
            A(i + 1, i + 1) = -damping;
            A(i, i + 1) = omega;
            A(i + 1, i) = -omega;
        } else {
            A(i, i) = -damping;
        }
    }
    const Eigen::VectorXd c = 0.02 * randn(r, 1);
    const Eigen::MatrixXd H = 0.01 * randn(r, r * r);
    sys.latent = RomParams(c, A, H, Eigen::MatrixXd::Zero(r, 0));
    sys.q0 = randn(r, 1);
    sys.q0 *= 1.5 / sys.q0.norm();
    sys.u0 = sys.V * sys.q0;

    const Eigen::MatrixXd& V = sys.V;
    sys.fom.C = V * sys.latent.c();
    sys.fom.A = V * sys.latent.A() * V.transpose() -
                (Eigen::MatrixXd::Identity(n, n) - V * V.transpose());
    // H_fom (u kron u) = V H (V^T u kron V^T u)
    Eigen::MatrixXd Vt_kron(r * r, n * n);
    const Eigen::MatrixXd Vt = V.transpose();
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index k = 0; k < r; ++k) {
            const Eigen::Index row = j * r + k;
            for (Eigen::Index a = 0; a < n; ++a) {
                Vt_kron.row(row).segment(a * n, n) = Vt(j, a) * Vt.row(k);
            }
        }
    }
    sys.fom.H = V * sys.latent.H() * Vt_kron;
    sys.fom.B = Eigen::MatrixXd::Zero(n, 0);
    return sys;
}

SnapshotMatrix subsample(const SnapshotMatrix& snap, Eigen::Index target_count) {
    const Eigen::Index k = snap.count();
    if (target_count < 2 || target_count > k) {
        std::ostringstream msg;
        msg << "subsample target " << target_count << " must lie in [2, " << k << "]";
        throw ConfigError(msg.str());
    }
    Eigen::MatrixXd states(snap.rows(), target_count);
    Eigen::VectorXd times(target_count);
    for (Eigen::Index j = 0; j < target_count; ++j) {
        const auto idx = static_cast<Eigen::Index>(std::llround(
            static_cast<double>(j) * static_cast<double>(k - 1) /
            static_cast<double>(target_count - 1)));
        states.col(j) = snap.states().col(idx);
        times[j] = snap.times()[idx];
    }
    return SnapshotMatrix(std::move(states), std::move(times));
}

NoisyPartitions add_noise(const SnapshotMatrix& train, const SnapshotMatrix& val,
                          double noise_pct, std::uint64_t seed) {
    if (!(noise_pct >= 0)) throw ConfigError("noise level must be non-negative");
    NoisyPartitions out{train, val, 0.0};
    const Eigen::ArrayXXd entries = train.states().array();
    out.sigma_q = std::sqrt((entries - entries.mean()).square().mean());
    if (noise_pct == 0.0) return out;

    const double std_dev = noise_pct / 100.0 * out.sigma_q;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std_dev);
    const auto perturb = [&](const SnapshotMatrix& s) {
        Eigen::MatrixXd X = s.states();
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, j) += normal(rng);
        }
        return SnapshotMatrix(std::move(X), s.times());
    };
    out.train = perturb(train);
    out.val = perturb(val);
    return out;
}

SplitIndices split(const Eigen::VectorXd& times, const SplitFractions& f) {
    if (!(f.train >= 0 && f.val >= 0 && f.test >= 0) ||
        f.train + f.val + f.test > 1.0 + 1e-12) {
        throw ConfigError("split fractions must be non-negative and sum to at most 1");
    }
    const Eigen::Index k = times.size();
    if (k < 1) throw ConfigError("cannot split an empty time grid");
    const double t0 = times[0];
    const double span = times[k - 1] - t0;
    const double tol = 1e-12 * std::max(span, 1e-300);
    const auto count_upto = [&](double fraction) {
        const double limit = t0 + fraction * span + tol;
        Eigen::Index n = 0;
        while (n < k && times[n] <= limit) ++n;
        return n;
    };
    const Eigen::Index e1 = count_upto(f.train);
    const Eigen::Index e2 = std::max(e1, count_upto(f.train + f.val));
    const Eigen::Index e3 = std::max(e2, count_upto(f.train + f.val + f.test));
    SplitIndices idx;
    idx.train_begin = 0;
    idx.train_count = e1;
    idx.val_begin = e1;
    idx.val_count = e2 - e1;
    idx.test_begin = e2;
    idx.test_count = e3 - e2;
    if (idx.train_count == 0 || idx.val_count == 0 || idx.test_count == 0) {
        std::ostringstream msg;
        msg << "split produced an empty partition (train " << idx.train_count << ", val "
            << idx.val_count << ", test " << idx.test_count << ")";
        throw ConfigError(msg.str());
    }
    return idx;
}

double rse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
        throw DimensionError("rse: prediction and truth shapes differ");
    }
    const double denom = truth.norm();
    if (denom == 0.0) throw ConfigError("rse: truth is identically zero");
    return (truth - pred).norm() / denom;
}

SnapshotMatrix generate_fom(const ExperimentConfig& cfg) {
    if (cfg.snapshot_file) return read_snapshots(*cfg.snapshot_file);
    switch (cfg.pde) {
        case Pde::Burgers: return solve_burgers(cfg.burgers);
        case Pde::Fkpp: return solve_fisher_kpp(cfg.fkpp);
        case Pde::Ade: return solve_ade(cfg.ade);
        case Pde::Synthetic: {
            const SyntheticSystem sys = make_synthetic_system(cfg.synthetic);
            const Eigen::VectorXd times =
                Eigen::VectorXd::LinSpaced(cfg.synthetic.n_snapshots, 0.0, cfg.synthetic.horizon);
            return simulate_synthetic_fom(sys.fom, sys.u0, {}, times, 1e-11, 1e-13);
        }
    }
    throw ConfigError("unknown pde");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}

// Data shared by every method at a given r.
struct PreparedCell {
    PodBasis basis;
    SnapshotMatrix train;  // possibly noisy
    SnapshotMatrix val;    // possibly noisy
    SnapshotMatrix test;   // clean
    int samples = 0;
};

PreparedCell prepare(const ExperimentConfig& cfg, const SnapshotMatrix& fom, int r) {
    const SnapshotMatrix data =
        cfg.snapshot_count > 0 && cfg.snapshot_count != fom.count()
            ? subsample(fom, cfg.snapshot_count)
            : fom;
    const SplitIndices idx = split(data.times(), cfg.split);
    const SnapshotMatrix full_train = data.slice(idx.train_begin, idx.train_count);

    PreparedCell cell;
    cell.samples = static_cast<int>(data.count());
    if (cfg.pod_on_noisy && cfg.noise_pct > 0) {
        // Noise in full space at the same relative level, for the POD only.
        const Eigen::ArrayXXd entries = full_train.states().array();
        const double sigma_u = std::sqrt((entries - entries.mean()).square().mean());
        std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> normal(0.0, cfg.noise_pct / 100.0 * sigma_u);
        Eigen::MatrixXd X = full_train.states();
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, j) += normal(rng);
        }
        cell.basis = compute_pod(SnapshotMatrix(std::move(X), full_train.times()), FixedRank{r});
    } else {
        cell.basis = compute_pod(full_train, FixedRank{r});
    }

    const SnapshotMatrix Q = project(cell.basis, data);
    const NoisyPartitions noisy =
        add_noise(Q.slice(idx.train_begin, idx.train_count), Q.slice(idx.val_begin, idx.val_count),
                  cfg.noise_pct, cfg.seed);
    cell.train = noisy.train;
    cell.val = noisy.val;
    cell.test = Q.slice(idx.test_begin, idx.test_count);
    return cell;
}

OpinfGrid restrict_orders(OpinfGrid grid, std::vector<int> orders) {
    grid.stencil_orders = std::move(orders);
    return grid;
}

double test_rse(const ExperimentConfig& cfg, const RomParams& theta, const SnapshotMatrix& test) {
    if (test.count() < 2) {
        // A single test snapshot has no dynamics to predict beyond the initial state.
        return 0.0;
    }
    return rollout_rse(theta, test, cfg.rollout);
}

class CellRunner {
public:
    CellRunner(const ExperimentConfig& cfg, const PreparedCell& cell) : cfg_(cfg), cell_(cell) {}

    const GridSearchResult& opinf(int order) {
        auto& slot = order == 2 ? ord2_ : ord6_;
        if (!slot) {
            slot = grid_search(cell_.train, cell_.val, restrict_orders(cfg_.opinf_grid, {order}),
                               cfg_.rollout);
        }
        return *slot;
    }

    void fit(Method method, ResultRecord& rec, CellModel* model) {
        std::ostringstream hp;
        if (method == Method::Adjoint) {
            // Initialize from the better of the two OpInf fits.
            const GridSearchResult* init = nullptr;
            for (int order : cfg_.opinf_grid.stencil_orders) {
                try {
                    const GridSearchResult& g = opinf(order);
                    if (!init || g.val_rse < init->val_rse) init = &g;
                } catch (const Error&) {
                }
            }
            if (!init) throw Error("no OpInf initialization available for adjoint training");
            const ModeWeights w =
                estimate_mode_weights(cell_.train.states(), cell_.basis.singular_values);
            std::vector<IterationRecord>* sink = model ? &model->log : nullptr;
            const IterationLog log = sink ? IterationLog([sink](const IterationRecord& it) {
                sink->push_back(it);
            })
                                          : IterationLog{};
            const RidgeSearchResult res =
                ridge_grid_search(init->theta, ObservedTrajectory(cell_.train),
                                  ObservedTrajectory(cell_.val), w.diag, cfg_.train, {}, log);
            rec.theta = res.theta;
            rec.val_rse = res.val_rse;
            hp << "init_" << init->hp.describe() << ";theta_ridge=" << res.theta_ridge
               << ";sg_window=" << w.window;
            if (model) model->grid_report = grid_report_csv(*init);
        } else {
            const GridSearchResult& g = opinf(method == Method::OpinfOrd2 ? 2 : 6);
            rec.theta = g.theta;
            rec.val_rse = g.val_rse;
            hp << g.hp.describe();
            if (model) model->grid_report = grid_report_csv(g);
        }
        hp << ";seed=" << cfg_.seed;
        rec.hyperparams = hp.str();
        rec.test_rse = test_rse(cfg_, *rec.theta, cell_.test);
        rec.diverged = !std::isfinite(rec.test_rse);
    }

private:
    const ExperimentConfig& cfg_;
    const PreparedCell& cell_;
    std::optional<GridSearchResult> ord2_;
    std::optional<GridSearchResult> ord6_;
};

ResultRecord base_record(const ExperimentConfig& cfg, Method method, int r) {
    ResultRecord rec;
    rec.pde = cfg.pde;
    rec.method = method;
    rec.r = r;
    rec.noise_pct = cfg.noise_pct;
    rec.seed = cfg.seed;
    rec.samples = cfg.snapshot_count;
    return rec;
}

std::string failure_note(const std::exception& e) {
    std::string what = e.what();
    std::replace(what.begin(), what.end(), ',', ';');
    std::replace(what.begin(), what.end(), '\n', ' ');
    return "error=" + what;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
        .count();
}

}  // namespace

std::vector<ResultRecord> run_cell(const ExperimentConfig& cfg, const SnapshotMatrix& fom) {
    cfg.validate();
    std::vector<ResultRecord> records;
    for (int r : cfg.r_values) {
        std::optional<PreparedCell> cell;
        std::string prep_error;
        try {
            cell = prepare(cfg, fom, r);
        } catch (const std::exception& e) {
            prep_error = failure_note(e);
        }
        std::optional<CellRunner> runner;
        if (cell) runner.emplace(cfg, *cell);
        for (Method method : cfg.methods) {
            ResultRecord rec = base_record(cfg, method, r);
            const auto start = std::chrono::steady_clock::now();
            if (!cell) {
                rec.hyperparams = prep_error;
            } else {
                rec.samples = cell->samples;
                try {
                    runner->fit(method, rec, nullptr);
                } catch (const std::exception& e) {
                    rec.diverged = true;
                    rec.test_rse = kInf;
                    rec.hyperparams = failure_note(e);
                }
            }
            rec.wall_ms = elapsed_ms(start);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::vector<ResultRecord> run_cell(const ExperimentConfig& cfg) {
    cfg.validate();
    return run_cell(cfg, generate_fom(cfg));
}

CellModel run_model(const ExperimentConfig& cfg, const SnapshotMatrix& fom, Method method, int r) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const PreparedCell cell = prepare(cfg, fom, r);
    CellModel model;
    model.basis = cell.basis;
    model.record = base_record(cfg, method, r);
    model.record.samples = cell.samples;
    CellRunner runner(cfg, cell);
    runner.fit(method, model.record, &model);
    model.record.wall_ms = elapsed_ms(start);
    return model;
}

std::vector<ExperimentConfig> expand(const SweepSpec& spec) {
    const std::vector<int> counts =
        spec.snapshot_counts.empty() ? std::vector<int>{spec.base.snapshot_count}
                                     : spec.snapshot_counts;
    const std::vector<double> noise =
        spec.noise_levels.empty() ? std::vector<double>{spec.base.noise_pct} : spec.noise_levels;
    const std::vector<std::uint64_t> seeds =
        spec.seeds.empty() ? std::vector<std::uint64_t>{spec.base.seed} : spec.seeds;
    std::vector<ExperimentConfig> cells;
    for (int count : counts) {
        for (double delta : noise) {
            for (std::uint64_t seed : seeds) {
                ExperimentConfig cfg = spec.base;
                cfg.snapshot_count = count;
                cfg.noise_pct = delta;
                cfg.seed = seed;
                cfg.validate();
                cells.push_back(std::move(cfg));
            }
        }
    }
    return cells;
}

std::vector<ResultRecord> run_sweep(const SweepSpec& spec) {
    if (spec.workers < 1) throw ConfigError("worker count must be >= 1");
    const std::vector<ExperimentConfig> cells = expand(spec);
    const SnapshotMatrix fom = generate_fom(spec.base);

    std::vector<std::vector<ResultRecord>> results(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr failure;
    const auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                results[i] = run_cell(cells[i], fom);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(spec.workers), cells.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<ResultRecord> records;
    for (auto& cell : results) {
        for (auto& rec : cell) records.push_back(std::move(rec));
    }
    return records;
}

std::string results_csv(const std::vector<ResultRecord>& records, bool include_wall_time) {
    std::ostringstream os;
    os << kResultsHeader << '\n';
    for (const ResultRecord& rec : records) {
        os << to_string(rec.pde) << ',' << to_string(rec.method) << ',' << rec.r << ','
           << format_double(rec.noise_pct) << ',' << rec.samples << ','
           << format_double(rec.val_rse) << ',' << format_double(rec.test_rse) << ','
           << (rec.diverged ? 1 : 0) << ',';
        if (include_wall_time) os << std::fixed << std::setprecision(1) << rec.wall_ms
                                  << std::defaultfloat;
        os << ',' << rec.hyperparams << '\n';
    }
    return os.str();
}

namespace {

// Reads keys out of a JSON object and rejects whatever is left over.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
    }

    template <class T>
    void get(const char* key, T& out) {
        const auto it = obj_.find(key);
        if (it == obj_.end()) return;
        seen_.insert(key);
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    const json* sub(const char* key) {
        const auto it = obj_.find(key);
        if (it == obj_.end()) return nullptr;
        seen_.insert(key);
        return &*it;
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
            }
        }
    }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

void read_integrator(const json& j, const std::string& where, IntegratorOptions& opts) {
    ObjectReader rd(j, where);
    rd.get("rtol", opts.rtol);
    rd.get("atol", opts.atol);
    rd.get("max_steps", opts.max_steps);
    rd.get("max_norm", opts.max_norm);
    rd.finish();
}

void read_experiment(ObjectReader& rd, ExperimentConfig& cfg) {
    std::string pde_name = to_string(cfg.pde);
    rd.get("pde", pde_name);
    cfg.pde = parse_pde(pde_name);
    cfg.split = default_split(cfg.pde);

    if (const json* j = rd.sub("burgers")) {
        ObjectReader b(*j, "burgers");
        b.get("n_interior", cfg.burgers.n_interior);
        b.get("viscosity", cfg.burgers.viscosity);
        b.get("horizon", cfg.burgers.horizon);
        b.get("n_steps", cfg.burgers.n_steps);
        b.finish();
    }
    if (const json* j = rd.sub("fkpp")) {
        ObjectReader f(*j, "fkpp");
        f.get("nx", cfg.fkpp.nx);
        f.get("ny", cfg.fkpp.ny);
        f.get("lx", cfg.fkpp.lx);
        f.get("ly", cfg.fkpp.ly);
        f.get("diffusivity", cfg.fkpp.diffusivity);
        f.get("growth", cfg.fkpp.growth);
        f.get("horizon", cfg.fkpp.horizon);
        f.get("dt", cfg.fkpp.dt);
        f.finish();
    }
    if (const json* j = rd.sub("ade")) {
        ObjectReader a(*j, "ade");
        a.get("nx", cfg.ade.nx);
        a.get("ny", cfg.ade.ny);
        a.get("cx", cfg.ade.cx);
        a.get("cy", cfg.ade.cy);
        a.get("viscosity", cfg.ade.viscosity);
        a.get("horizon", cfg.ade.horizon);
        a.get("dt", cfg.ade.dt);
        a.get("x0", cfg.ade.x0);
        a.get("y0", cfg.ade.y0);
        a.get("width", cfg.ade.width);
        a.finish();
    }
    if (const json* j = rd.sub("synthetic")) {
        ObjectReader s(*j, "synthetic");
        s.get("n", cfg.synthetic.n);
        s.get("r", cfg.synthetic.r);
        s.get("horizon", cfg.synthetic.horizon);
        s.get("n_snapshots", cfg.synthetic.n_snapshots);
        s.get("seed", cfg.synthetic.seed);
        s.finish();
    }
    std::string file;
    rd.get("snapshot_file", file);
    if (!file.empty()) cfg.snapshot_file = file;
    rd.get("snapshot_count", cfg.snapshot_count);
    if (const json* j = rd.sub("split")) {
        ObjectReader s(*j, "split");
        s.get("train", cfg.split.train);
        s.get("val", cfg.split.val);
        s.get("test", cfg.split.test);
        s.finish();
    }
    rd.get("noise_pct", cfg.noise_pct);
    rd.get("r_values", cfg.r_values);
    std::vector<std::string> methods;
    rd.get("methods", methods);
    if (!methods.empty()) {
        cfg.methods.clear();
        for (const auto& m : methods) cfg.methods.push_back(parse_method(m));
    }
    rd.get("seed", cfg.seed);
    rd.get("pod_on_noisy", cfg.pod_on_noisy);
    if (const json* j = rd.sub("opinf_grid")) {
        ObjectReader g(*j, "opinf_grid");
        g.get("ridge_weights", cfg.opinf_grid.ridge_weights);
        g.get("tsvd_discards", cfg.opinf_grid.tsvd_discards);
        g.get("stencil_orders", cfg.opinf_grid.stencil_orders);
        g.finish();
    }
    if (const json* j = rd.sub("train")) {
        ObjectReader t(*j, "train");
        TrainConfig& tc = cfg.train;
        t.get("alpha", tc.alpha);
        t.get("beta", tc.beta);
        t.get("gamma", tc.gamma);
        t.get("eta0", tc.eta0);
        t.get("max_backtracks", tc.max_backtracks);
        t.get("grad_tol", tc.grad_tol);
        t.get("iterations_per_segment", tc.iterations_per_segment);
        t.get("segment_count", tc.segment_count);
        t.get("cycles", tc.cycles);
        t.get("ridge_grid", tc.ridge_grid);
        if (const json* ij = t.sub("integrator")) read_integrator(*ij, "train.integrator", tc.integrator);
        t.finish();
    }
    if (const json* j = rd.sub("rollout")) read_integrator(*j, "rollout", cfg.rollout);
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    const json j = parse_json(json_text);
    ExperimentConfig cfg;
    ObjectReader rd(j, "config");
    read_experiment(rd, cfg);
    rd.finish();
    cfg.validate();
    return cfg;
}

SweepSpec parse_sweep_config(const std::string& json_text) {
    const json j = parse_json(json_text);
    SweepSpec spec;
    ObjectReader rd(j, "config");
    read_experiment(rd, spec.base);
    rd.get("snapshot_counts", spec.snapshot_counts);
    rd.get("noise_levels", spec.noise_levels);
    rd.get("seeds", spec.seeds);
    rd.get("workers", spec.workers);
    rd.finish();
    spec.base.validate();
    if (spec.workers < 1) throw ConfigError("workers must be >= 1");
    return spec;
}

}  // namespace adjopinf

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "adjopinf/adjoint.hpp"
#include "adjopinf/fom_solvers.hpp"
#include "adjopinf/opinf.hpp"
#include "adjopinf/pod.hpp"
#include "adjopinf/snapshot.hpp"

namespace adjopinf {

enum class Pde { Burgers, Fkpp, Ade, Synthetic };
enum class Method { OpinfOrd2, OpinfOrd6, Adjoint };

std::string to_string(Pde pde);
std::string to_string(Method method);
Pde parse_pde(const std::string& name);
Method parse_method(const std::string& name);

struct SplitFractions {
    double train = 0.5;
    double val = 0.1;
    double test = 0.4;
};

SplitFractions default_split(Pde pde);

/// Latent-span synthetic FOM used for end-to-end checks.
struct SyntheticConfig {
    int n = 20;
    int r = 4;
    double horizon = 20.0;  // several periods of every latent rotation
    int n_snapshots = 4001;
    std::uint64_t seed = 7;
};

/// Exact latent quadratic system lifted to n dimensions. The FOM contracts the
/// orthogonal complement of span(V) at rate mu = 1, so trajectories started in
/// span(V) stay there.
struct SyntheticSystem {
    QuadraticFomOperators fom;
    Eigen::MatrixXd V;  // n x r, orthonormal
    RomParams latent;
    Eigen::VectorXd q0;
    Eigen::VectorXd u0;
};

SyntheticSystem make_synthetic_system(const SyntheticConfig& cfg);

struct ExperimentConfig {
    Pde pde = Pde::Burgers;
    BurgersConfig burgers{};
    FkppConfig fkpp{};
    AdeConfig ade{};
    SyntheticConfig synthetic{};
    std::optional<std::filesystem::path> snapshot_file;

    int snapshot_count = 0;  // 0 keeps every FOM snapshot
    SplitFractions split = default_split(Pde::Burgers);
    double noise_pct = 0.0;
    std::vector<int> r_values{1, 2, 3, 4, 5};
    std::vector<Method> methods{Method::OpinfOrd2, Method::OpinfOrd6, Method::Adjoint};
    std::uint64_t seed = 0;
    bool pod_on_noisy = false;

    OpinfGrid opinf_grid{};
    TrainConfig train{};
    IntegratorOptions rollout{};

    void validate() const;
};

struct ResultRecord {
    Pde pde = Pde::Burgers;
    Method method = Method::OpinfOrd2;
    int r = 0;
    double noise_pct = 0.0;
    int samples = 0;
    std::uint64_t seed = 0;
    double val_rse = std::numeric_limits<double>::infinity();
    double test_rse = std::numeric_limits<double>::infinity();
    bool diverged = true;
    double wall_ms = 0.0;
    std::string hyperparams;
    std::optional<RomParams> theta;
};

/// Keeps columns round(j (k-1) / (target-1)), j = 0..target-1.
SnapshotMatrix subsample(const SnapshotMatrix& snap, Eigen::Index target_count);

/// Adds N(0, (noise_pct/100 * sigma_q)^2) to every entry of train and val.
/// sigma_q is the standard deviation of all clean training entries.
struct NoisyPartitions {
    SnapshotMatrix train;
    SnapshotMatrix val;
    double sigma_q = 0.0;
};
NoisyPartitions add_noise(const SnapshotMatrix& train, const SnapshotMatrix& val,
                          double noise_pct, std::uint64_t seed);

struct SplitIndices {
    Eigen::Index train_begin = 0, train_count = 0;
    Eigen::Index val_begin = 0, val_count = 0;
    Eigen::Index test_begin = 0, test_count = 0;
};

/// Chronological split; a snapshot on a boundary goes to the earlier part.
SplitIndices split(const Eigen::VectorXd& times, const SplitFractions& fractions);

/// ||truth - pred||_F / ||truth||_F
double rse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

/// Full-order snapshots for the configured PDE (generated or loaded).
SnapshotMatrix generate_fom(const ExperimentConfig& cfg);

/// Trained artefacts of one (method, r) pair, for callers that need more
/// than the summary record.
struct CellModel {
    ResultRecord record;
    PodBasis basis;
    std::vector<IterationRecord> log;
    std::string grid_report;
};

std::vector<ResultRecord> run_cell(const ExperimentConfig& cfg, const SnapshotMatrix& fom);
std::vector<ResultRecord> run_cell(const ExperimentConfig& cfg);

/// Single method at a single r, keeping the basis and logs.
CellModel run_model(const ExperimentConfig& cfg, const SnapshotMatrix& fom, Method method, int r);

struct SweepSpec {
    ExperimentConfig base;
    std::vector<int> snapshot_counts;
    std::vector<double> noise_levels;
    std::vector<std::uint64_t> seeds;
    int workers = 1;
};

std::vector<ExperimentConfig> expand(const SweepSpec& spec);

/// Runs every expanded cell on a bounded worker pool. Records come back in
/// cell order regardless of completion order.
std::vector<ResultRecord> run_sweep(const SweepSpec& spec);

inline constexpr const char* kResultsHeader =
    "pde,method,r,noise_pct,samples,val_rse,test_rse,diverged,wall_ms,hyperparams";

std::string results_csv(const std::vector<ResultRecord>& records, bool include_wall_time = true);

/// JSON config parsing. Unknown keys are rejected with ConfigError.
ExperimentConfig parse_experiment_config(const std::string& json_text);
SweepSpec parse_sweep_config(const std::string& json_text);

}  // namespace adjopinf

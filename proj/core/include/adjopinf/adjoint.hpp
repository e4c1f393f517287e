#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "adjopinf/integrator.hpp"
#include "adjopinf/rom.hpp"
#include "adjopinf/snapshot.hpp"

namespace adjopinf {

/// Reduced observations with piecewise-linear interpolation in time.
class ObservedTrajectory {
public:
    ObservedTrajectory() = default;
    explicit ObservedTrajectory(SnapshotMatrix data);

    const SnapshotMatrix& data() const noexcept { return data_; }
    const Eigen::VectorXd& times() const noexcept { return data_.times(); }
    Eigen::Index dim() const noexcept { return data_.rows(); }
    Eigen::Index count() const noexcept { return data_.count(); }
    double t_start() const { return times()[0]; }
    double t_end() const { return times()[count() - 1]; }

    Eigen::VectorXd operator()(double t) const;
    void evaluate(double t, Eigen::Ref<Eigen::VectorXd> out) const;
    Eigen::VectorXd state(Eigen::Index i) const { return data_.states().col(i); }

    /// Observations i0..i1 inclusive.
    ObservedTrajectory window(Eigen::Index i0, Eigen::Index i1) const;

private:
    SnapshotMatrix data_;
};

/// Trace-normalized diagonal weights sigma_i^p / (nu_i^2 + tau).
struct ModeWeights {
    Eigen::VectorXd diag;       // normalized, sums to 1
    Eigen::VectorXd raw;        // omega_i
    Eigen::VectorXd noise_var;  // nu_i^2
    double p = 1.0;
    double tau = 1e-8;
    int window = 0;             // Savitzky-Golay window; 0 when uniform fallback

    static ModeWeights uniform(Eigen::Index r);
};

/// Savitzky-Golay (cubic, adaptive window) residual variance per reduced
/// coordinate, turned into trace-normalized weights. Falls back to I/r when
/// there are fewer than 7 samples.
ModeWeights estimate_mode_weights(const Eigen::MatrixXd& Q_train,
                                  const Eigen::VectorXd& singular_values,
                                  double p = 1.0, double tau = 1e-8);

struct LossSettings {
    double theta_ridge = 0.0;
    IntegratorOptions integrator{};
};

struct LossEvaluation {
    double value = std::numeric_limits<double>::infinity();
    std::optional<ReducedTrajectory> forward;  // empty when the roll-out diverged
};

/// int_span || sqrt(W) (q(t; theta) - q_obs(t)) ||^2 dt + ridge ||theta||^2.
/// Quadrature is exact for the piecewise-polynomial dense interpolants on the
/// merged forward/observation grid. A divergent roll-out gives +inf.
LossEvaluation evaluate_loss(const RomParams& theta, const Eigen::VectorXd& q0,
                             const ObservedTrajectory& obs, const Eigen::VectorXd& weights,
                             const InputSignal& input, TimeSpan span,
                             const LossSettings& settings);

double trajectory_loss(const RomParams& theta, const Eigen::VectorXd& q0,
                       const ObservedTrajectory& obs, const Eigen::VectorXd& weights,
                       const InputSignal& input, TimeSpan span, const LossSettings& settings);

using AdjointTrajectory = Trajectory;

/// Backward solve of d(lambda)/dt = -(J^T lambda + 2 W (q - q_obs)),
/// lambda(t_end) = 0. Throws DivergenceError if the linearized dynamics blow up.
AdjointTrajectory solve_adjoint(const ReducedTrajectory& forward, const ObservedTrajectory& obs,
                                const Eigen::VectorXd& weights, const RomParams& theta,
                                TimeSpan span, const IntegratorOptions& opts = {});

/// Blocks int lambda, int lambda q^T, int lambda (q kron q)^T, int lambda s^T,
/// plus 2 ridge theta. Returned in RomParams layout (H block symmetric).
RomParams assemble_gradient(const ReducedTrajectory& forward, const AdjointTrajectory& adjoint,
                            const InputSignal& input, const RomParams& theta,
                            double theta_ridge, TimeSpan span);

struct LossAndGradient {
    double loss = std::numeric_limits<double>::infinity();
    std::optional<RomParams> gradient;  // empty when the forward solve diverged
};

/// Forward solve, adjoint solve and gradient assembly in one call.
LossAndGradient loss_and_gradient(const RomParams& theta, const Eigen::VectorXd& q0,
                                  const ObservedTrajectory& obs, const Eigen::VectorXd& weights,
                                  const InputSignal& input, TimeSpan span,
                                  const LossSettings& settings);

struct TrainConfig {
    double alpha = 1e-4;
    double beta = 0.5;
    double gamma = 0.5;
    double eta0 = 1e-3;
    int max_backtracks = 20;
    double grad_tol = 1e-8;
    int iterations_per_segment = 30;
    int segment_count = 3;
    int cycles = 5;
    double theta_ridge = 0.0;
    std::vector<double> ridge_grid{0.0, 1e-2, 1e-1, 1.0, 10.0};
    IntegratorOptions integrator{};

    void validate() const;
};

struct ArmijoResult {
    Eigen::VectorXd theta;
    double eta_accepted = 0.0;
    double eta0 = 0.0;  // seed for the next call
    double loss_before = 0.0;
    double loss_after = 0.0;
    int trials = 0;
    bool accepted = false;
};

using VectorLoss = std::function<double(const Eigen::VectorXd&)>;

/// One steepest-descent step with Armijo backtracking. On exhaustion theta is
/// returned unchanged, eta_accepted = 0 and the seed shrinks by gamma.
ArmijoResult armijo_step(const Eigen::VectorXd& theta, const Eigen::VectorXd& grad,
                         const VectorLoss& loss, const TrainConfig& cfg, double eta0,
                         std::optional<double> current_loss = std::nullopt);

struct IterationRecord {
    int cycle = 0;
    int segment = 0;
    int iteration = 0;
    double loss = 0.0;
    double loss_next = 0.0;
    double grad_norm = 0.0;
    double eta = 0.0;
    bool accepted = false;

    std::string to_json() const;
};

using IterationLog = std::function<void(const IterationRecord&)>;

struct TrainResult {
    RomParams theta;
    double initial_loss = std::numeric_limits<double>::infinity();
    double best_loss = std::numeric_limits<double>::infinity();
    int accepted_steps = 0;
    int gradient_evaluations = 0;
};

/// Multiple-shooting adjoint training: the window is split into
/// `segment_count` pieces, each integrated from its observed start state.
/// Returns the iterate with the lowest full-window loss.
TrainResult train(const RomParams& theta0, const ObservedTrajectory& obs_train,
                  const Eigen::VectorXd& weights, const TrainConfig& cfg,
                  const InputSignal& input = {}, const IterationLog& log = {});

struct RidgeCandidate {
    double theta_ridge = 0.0;
    double val_rse = std::numeric_limits<double>::infinity();
    TrainResult result;
};

struct RidgeSearchResult {
    RomParams theta;
    double theta_ridge = 0.0;
    double val_rse = std::numeric_limits<double>::infinity();
    std::vector<RidgeCandidate> candidates;
};

/// Trains once per cfg.ridge_grid entry and keeps the lowest validation RSE.
RidgeSearchResult ridge_grid_search(const RomParams& theta0, const ObservedTrajectory& obs_train,
                                    const ObservedTrajectory& obs_val,
                                    const Eigen::VectorXd& weights, const TrainConfig& cfg,
                                    const InputSignal& input = {}, const IterationLog& log = {});

}  // namespace adjopinf

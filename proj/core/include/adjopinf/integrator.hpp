#pragma once

#include <functional>
#include <span>

#include <Eigen/Core>

namespace adjopinf {

using VectorField = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& y)>;

struct IntegratorOptions {
    double rtol = 1e-6;
    double atol = 1e-9;
    double initial_step = 0.0;  // 0 -> automatic
    double max_step = 0.0;      // 0 -> unbounded
    long max_steps = 200000;
    double max_norm = 1e12;     // state magnitude treated as blow-up
};

struct IntegratorStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

/// Node states and derivatives of an integrated trajectory, stored in
/// increasing time order regardless of the integration direction.
///
/// Evaluation between nodes uses the cubic Hermite interpolant of the
/// stored (state, derivative) pairs and is exact at node times.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(Eigen::VectorXd times, Eigen::MatrixXd states,
               Eigen::MatrixXd derivatives, IntegratorStats stats = {});

    const Eigen::VectorXd& times() const noexcept { return times_; }
    const Eigen::MatrixXd& states() const noexcept { return states_; }
    const Eigen::MatrixXd& derivatives() const noexcept { return derivs_; }
    const IntegratorStats& stats() const noexcept { return stats_; }

    Eigen::Index dim() const noexcept { return states_.rows(); }
    Eigen::Index size() const noexcept { return times_.size(); }
    double t_start() const { return times_[0]; }
    double t_end() const { return times_[times_.size() - 1]; }

    /// Throws ConfigError if t lies outside [t_start, t_end].
    Eigen::VectorXd operator()(double t) const;
    void evaluate(double t, Eigen::Ref<Eigen::VectorXd> out) const;

    /// Samples the trajectory at each time (columns of the result).
    Eigen::MatrixXd sample(const Eigen::VectorXd& times) const;

private:
    Eigen::VectorXd times_;
    Eigen::MatrixXd states_;
    Eigen::MatrixXd derivs_;
    IntegratorStats stats_;
};

using ReducedTrajectory = Trajectory;

/// Adaptive Dormand-Prince 5(4) integration from t_start to t_end (either
/// direction). Steps are clipped to land exactly on every `stop` inside the
/// span. Throws DivergenceError on non-finite or exploding state, step-size
/// underflow or step-count exhaustion.
Trajectory integrate(const VectorField& f, double t_start, double t_end,
                     const Eigen::VectorXd& y0, const IntegratorOptions& opts = {},
                     std::span<const double> stops = {});

}  // namespace adjopinf

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "adjopinf/adjoint.hpp"
#include "adjopinf/error.hpp"
#include "adjopinf/savitzky_golay.hpp"

using namespace adjopinf;

namespace {

IntegratorOptions tight() {
    IntegratorOptions o;
    o.rtol = 1e-11;
    o.atol = 1e-13;
    return o;
}

RomParams scalar_rom(double c, double a, double h) {
    return RomParams(Eigen::VectorXd::Constant(1, c), Eigen::MatrixXd::Constant(1, 1, a),
                     Eigen::MatrixXd::Constant(1, 1, h), Eigen::MatrixXd::Zero(1, 0));
}

ObservedTrajectory constant_obs(const Eigen::VectorXd& value, double t1, int k) {
    return ObservedTrajectory(SnapshotMatrix(value.replicate(1, k), Eigen::VectorXd::LinSpaced(k, 0.0, t1)));
}

ObservedTrajectory sampled(const RomParams& th, const Eigen::VectorXd& q0, double t1, int k) {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(k, 0.0, t1);
    const ReducedTrajectory tr = integrate_forward(th, q0, {}, {0.0, t1}, tight());
    return ObservedTrajectory(SnapshotMatrix(tr.sample(t), t));
}

RomParams damped_rotation() {
    Eigen::MatrixXd A(2, 2);
    A << -0.2, 1.0, -1.0, -0.2;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 4);
    H(0, 1) = H(0, 2) = 0.05;
    H(1, 0) = -0.1;
    return RomParams(Eigen::Vector2d(0.1, -0.05), A, H, Eigen::MatrixXd::Zero(2, 0));
}

}  // namespace

TEST(Observed, PiecewiseLinearInterpolation) {
    Eigen::MatrixXd q(1, 3);
    q << 0.0, 2.0, 1.0;
    const ObservedTrajectory obs(SnapshotMatrix(q, Eigen::Vector3d(0.0, 1.0, 3.0)));
    EXPECT_DOUBLE_EQ(obs(0.5)[0], 1.0);
    EXPECT_DOUBLE_EQ(obs(2.0)[0], 1.5);
    EXPECT_DOUBLE_EQ(obs(3.0)[0], 1.0);
    const ObservedTrajectory w = obs.window(1, 2);
    EXPECT_EQ(w.count(), 2);
    EXPECT_DOUBLE_EQ(w.t_start(), 1.0);
}

TEST(Loss, ConstantOffset) {
    // theta = 0 keeps q at q0; observations sit at q0 + d.
    const Eigen::Vector2d q0(1.0, -1.0), d(0.5, -0.25);
    const ObservedTrajectory obs = constant_obs(q0 + d, 2.0, 5);
    const Eigen::Vector2d w(0.3, 0.7);
    const double value = trajectory_loss(RomParams::zeros(2), q0, obs, w, {}, {0.0, 2.0}, {});
    EXPECT_NEAR(value, 2.0 * (0.3 * 0.25 + 0.7 * 0.0625), 1e-13);
    const double ridged = trajectory_loss(damped_rotation(), q0, obs, w, {}, {0.0, 0.0 + 2.0},
                                          {0.5, tight()});
    const double plain = trajectory_loss(damped_rotation(), q0, obs, w, {}, {0.0, 2.0}, {0.0, tight()});
    EXPECT_NEAR(ridged - plain, 0.5 * damped_rotation().squared_norm(), 1e-10);
}

TEST(Loss, DivergentRolloutIsInfinite) {
    const ObservedTrajectory obs = constant_obs(Eigen::VectorXd::Ones(1), 3.0, 4);
    const LossEvaluation ev = evaluate_loss(scalar_rom(0.0, 0.0, 1.0), Eigen::VectorXd::Ones(1), obs,
                                            Eigen::VectorXd::Ones(1), {}, {0.0, 3.0}, {});
    EXPECT_TRUE(std::isinf(ev.value));
    EXPECT_FALSE(ev.forward.has_value());
}

TEST(Adjoint, ZeroMisfitGivesZeroAdjoint) {
    // A constant-drift model moves linearly, which the piecewise-linear
    // observations reproduce exactly between samples.
    const RomParams th(Eigen::Vector2d(0.3, -0.2), Eigen::Matrix2d::Zero(), Eigen::MatrixXd::Zero(2, 4),
                       Eigen::MatrixXd::Zero(2, 0));
    const Eigen::Vector2d q0(1.0, 0.0);
    const ObservedTrajectory obs = sampled(th, q0, 2.0, 201);
    const ReducedTrajectory fwd = integrate_forward(th, q0, {}, {0.0, 2.0}, tight(),
                          std::span<const double>(obs.times().data(), obs.times().size()));
    const AdjointTrajectory lam = solve_adjoint(fwd, obs, Eigen::Vector2d(0.5, 0.5), th, {0.0, 2.0}, tight());
    EXPECT_LE(lam.states().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Adjoint, ScalarLinearClosedForm) {
    // q' = a q, observations 0, w = 1: lambda(t) = q0 (e^{a(2T - t)} - e^{a t}) / a.
    const double a = -0.7, q0 = 1.3, T = 2.0;
    const RomParams th = scalar_rom(0.0, a, 0.0);
    const ObservedTrajectory obs = constant_obs(Eigen::VectorXd::Zero(1), T, 11);
    const ReducedTrajectory fwd =
        integrate_forward(th, Eigen::VectorXd::Constant(1, q0), {}, {0.0, T}, tight(),
                          std::span<const double>(obs.times().data(), obs.times().size()));
    const AdjointTrajectory lam = solve_adjoint(fwd, obs, Eigen::VectorXd::Ones(1), th, {0.0, T}, tight());
    EXPECT_EQ(lam(T)[0], 0.0);
    for (double t : {0.0, 0.4, 1.0, 1.8}) {
        const double exact = q0 * (std::exp(a * (2 * T - t)) - std::exp(a * t)) / a;
        EXPECT_NEAR(lam(t)[0], exact, 1e-7 * std::abs(exact)) << t;
    }
}

TEST(Gradient, ScalarLinearMatchesAnalyticDerivative) {
    // J(a) = q0^2 (e^{2aT} - 1) / (2a) for zero observations.
    const double a = -0.7, q0 = 1.3, T = 2.0;
    const ObservedTrajectory obs = constant_obs(Eigen::VectorXd::Zero(1), T, 11);
    const LossAndGradient lg = loss_and_gradient(scalar_rom(0.0, a, 0.0), Eigen::VectorXd::Constant(1, q0),
                                                 obs, Eigen::VectorXd::Ones(1), {}, {0.0, T}, {0.0, tight()});
    const double e = std::exp(2 * a * T);
    EXPECT_NEAR(lg.loss, q0 * q0 * (e - 1) / (2 * a), 1e-9);
    const double dJda = q0 * q0 * (2 * T * e / (2 * a) - (e - 1) / (2 * a * a));
    ASSERT_TRUE(lg.gradient.has_value());
    EXPECT_NEAR(lg.gradient->A()(0, 0), dJda, 1e-7 * std::abs(dJda));
}

TEST(Gradient, EquilibriumGivesPureRidgeTerm) {
    // c chosen so q0 is an equilibrium matching the observations: lambda = 0.
    const RomParams base = damped_rotation();
    const Eigen::Vector2d q0(0.4, -0.3);
    const Eigen::VectorXd c = -(base.A() * q0 + quadratic_term(base.H(), q0));
    const RomParams th(c, base.A(), base.H(), base.B());
    const ObservedTrajectory obs = constant_obs(q0, 1.5, 7);
    const double gamma = 0.25;
    const LossAndGradient lg =
        loss_and_gradient(th, q0, obs, Eigen::Vector2d(0.5, 0.5), {}, {0.0, 1.5}, {gamma, tight()});
    ASSERT_TRUE(lg.gradient.has_value());
    EXPECT_LE((lg.gradient->to_vector() - 2 * gamma * th.to_vector()).norm(), 1e-9);
}

TEST(Gradient, MatchesCentralDifferences) {
    const RomParams truth = damped_rotation();
    const Eigen::Vector2d q0(1.0, 0.0);
    const ObservedTrajectory obs = sampled(truth, q0, 3.0, 31);
    Eigen::VectorXd x = truth.to_vector();
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] *= 1.0 + u(rng);
    const RomParams th = RomParams::from_vector(x, 2);
    const Eigen::Vector2d w(0.6, 0.4);
    const LossSettings settings{1e-3, tight()};
    const LossAndGradient lg = loss_and_gradient(th, q0, obs, w, {}, {0.0, 3.0}, settings);
    ASSERT_TRUE(lg.gradient.has_value());
    const Eigen::VectorXd g = lg.gradient->to_vector();
    const Eigen::VectorXd xs = th.to_vector();
    // Symmetric pairs of H move together, so perturb vec(theta) through from_vector.
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
        Eigen::VectorXd p = xs, m = xs;
        p[i] += h;
        m[i] -= h;
        const double fd = (trajectory_loss(RomParams::from_vector(p, 2), q0, obs, w, {}, {0.0, 3.0}, settings) -
                           trajectory_loss(RomParams::from_vector(m, 2), q0, obs, w, {}, {0.0, 3.0}, settings)) /
                          (2 * h);
        // The H block of g is already symmetric, matching the symmetrized perturbation.
        const double expected = g[i];
        EXPECT_NEAR(fd, expected, 1e-5 * (1.0 + std::abs(expected))) << "component " << i;
    }
}

TEST(Gradient, RandomInstancesMatchCentralDifferences) {
    // r = 1, 2, 3 on T = 1 with random stable-ish parameters.
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 1.0);
    IntegratorOptions opts;
    opts.rtol = 1e-9;
    opts.atol = 1e-12;
    for (int r = 1; r <= 3; ++r) {
        Eigen::VectorXd x(parameter_count(r, 0));
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 0.3 * n(rng);
        RomParams th = RomParams::from_vector(x, r);
        th = RomParams(th.c(), th.A() - Eigen::MatrixXd::Identity(r, r), th.H(), th.B());
        Eigen::MatrixXd q(r, 11);
        for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = n(rng);
        const ObservedTrajectory obs(SnapshotMatrix(q, Eigen::VectorXd::LinSpaced(11, 0.0, 1.0)));
        const Eigen::VectorXd q0 = Eigen::VectorXd::Constant(r, 0.5);
        const Eigen::VectorXd w = Eigen::VectorXd::Constant(r, 1.0 / r);
        const LossSettings settings{0.0, opts};
        const LossAndGradient lg = loss_and_gradient(th, q0, obs, w, {}, {0.0, 1.0}, settings);
        ASSERT_TRUE(lg.gradient.has_value());
        const Eigen::VectorXd g = lg.gradient->to_vector(), xs = th.to_vector();
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < xs.size(); ++i) {
            Eigen::VectorXd p = xs, m = xs;
            p[i] += h;
            m[i] -= h;
            const double fd =
                (trajectory_loss(RomParams::from_vector(p, r), q0, obs, w, {}, {0.0, 1.0}, settings) -
                 trajectory_loss(RomParams::from_vector(m, r), q0, obs, w, {}, {0.0, 1.0}, settings)) /
                (2 * h);
            if (std::abs(g[i]) < 1e-6) {
                EXPECT_NEAR(fd, g[i], 1e-8) << "r=" << r << " component " << i;
            } else {
                EXPECT_NEAR(fd, g[i], 1e-4 * std::abs(g[i])) << "r=" << r << " component " << i;
            }
        }
    }
}

TEST(Adjoint, TerminalValueIsZero) {
    const RomParams th = damped_rotation();
    const ObservedTrajectory obs = constant_obs(Eigen::Vector2d(0.2, 0.1), 2.0, 5);
    const ReducedTrajectory fwd = integrate_forward(th, Eigen::Vector2d(1.0, 0.0), {}, {0.0, 2.0});
    const AdjointTrajectory lam = solve_adjoint(fwd, obs, Eigen::Vector2d(0.5, 0.5), th, {0.0, 2.0});
    EXPECT_EQ(lam(2.0), Eigen::VectorXd::Zero(2));
    EXPECT_GT(lam(0.0).norm(), 0.0);
}

TEST(Armijo, QuadraticBowlHalvesOnce) {
    const VectorLoss bowl = [](const Eigen::VectorXd& v) { return v.squaredNorm(); };
    const Eigen::VectorXd th = Eigen::Vector2d(1.0, 1.0);
    TrainConfig cfg;
    const ArmijoResult res = armijo_step(th, 2 * th, bowl, cfg, 1.0);
    EXPECT_TRUE(res.accepted);
    EXPECT_EQ(res.trials, 2);
    EXPECT_DOUBLE_EQ(res.eta_accepted, 0.5);
    EXPECT_EQ(res.theta, Eigen::VectorXd::Zero(2));
    EXPECT_DOUBLE_EQ(res.loss_before, 2.0);
    EXPECT_DOUBLE_EQ(res.loss_after, 0.0);
    EXPECT_DOUBLE_EQ(res.eta0, 1.0);
}

TEST(Armijo, SmallSeedAcceptedAtOnce) {
    const VectorLoss bowl = [](const Eigen::VectorXd& v) { return v.squaredNorm(); };
    const Eigen::VectorXd th = Eigen::Vector3d(1.0, 0.0, 0.0);
    const ArmijoResult res = armijo_step(th, 2 * th, bowl, {}, 1e-3);
    EXPECT_TRUE(res.accepted);
    EXPECT_EQ(res.trials, 1);
    EXPECT_DOUBLE_EQ(res.eta_accepted, 1e-3);
    EXPECT_NEAR(res.loss_after, std::pow(1 - 2e-3, 2), 1e-15);
}

TEST(Armijo, ZeroGradientAcceptsFirstTrial) {
    const VectorLoss flat = [](const Eigen::VectorXd&) { return 3.0; };
    const ArmijoResult res = armijo_step(Eigen::Vector2d(1, 2), Eigen::Vector2d::Zero(), flat, {}, 0.1);
    EXPECT_TRUE(res.accepted);
    EXPECT_EQ(res.trials, 1);
    EXPECT_EQ(res.theta, Eigen::VectorXd(Eigen::Vector2d(1, 2)));
}

TEST(Armijo, TwoBacktracksOnSteepValley) {
    // L = 10 x^2 from x = 1: eta 0.2 overshoots to -3, eta 0.1 lands on -1
    // (no decrease), eta 0.05 hits the minimum.
    const VectorLoss valley = [](const Eigen::VectorXd& v) { return 10 * v.squaredNorm(); };
    const Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
    const ArmijoResult res = armijo_step(x, 20 * x, valley, {}, 0.2);
    EXPECT_TRUE(res.accepted);
    EXPECT_EQ(res.trials, 3);
    EXPECT_DOUBLE_EQ(res.eta_accepted, 0.05);
}

TEST(Armijo, ExhaustionShrinksSeed) {
    const VectorLoss wall = [](const Eigen::VectorXd& v) {
        return v[0] == 1.0 ? 1.0 : std::numeric_limits<double>::infinity();
    };
    TrainConfig cfg;
    cfg.max_backtracks = 4;
    const ArmijoResult res = armijo_step(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), wall, cfg, 0.8);
    EXPECT_FALSE(res.accepted);
    EXPECT_EQ(res.trials, 4);
    EXPECT_EQ(res.eta_accepted, 0.0);
    EXPECT_DOUBLE_EQ(res.eta0, 0.4);
    EXPECT_EQ(res.theta, Eigen::VectorXd::Ones(1));
}

TEST(Armijo, NonFiniteGradientRejected) {
    const VectorLoss bowl = [](const Eigen::VectorXd& v) { return v.squaredNorm(); };
    Eigen::VectorXd g = Eigen::VectorXd::Ones(1);
    g[0] = std::nan("");
    EXPECT_THROW(armijo_step(Eigen::VectorXd::Ones(1), g, bowl, {}, 1.0), ConfigError);
}

TEST(SavitzkyGolay, ReproducesCubicsAndClampsWindow) {
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) y[i] = 0.01 * i * i * i - 0.3 * i + 2.0;
    EXPECT_LE((savitzky_golay(y, 7, 3) - y).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(adaptive_window(10), 7);
    EXPECT_EQ(adaptive_window(300), 15);
    EXPECT_EQ(adaptive_window(100000), 51);
    EXPECT_EQ(adaptive_window(200) % 2, 1);
}

TEST(ModeWeights, NoiseFreeDataHitsTheFloor) {
    Eigen::MatrixXd Q(2, 50);
    for (int j = 0; j < 50; ++j) {
        const double t = 0.1 * j;
        Q(0, j) = t * t * t;
        Q(1, j) = 1.0 - t;
    }
    const ModeWeights w = estimate_mode_weights(Q, Eigen::Vector2d(4.0, 1.0));
    EXPECT_LE(w.noise_var.maxCoeff(), 1e-16);
    EXPECT_NEAR(w.diag[0], 0.8, 1e-6);
    EXPECT_NEAR(w.diag.sum(), 1.0, 1e-14);
    EXPECT_EQ(w.window, 7);
}

TEST(ModeWeights, EqualNoiseGivesNearUniformWeights) {
    const int r = 3, k = 2000;
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n(0.0, 0.1);
    Eigen::MatrixXd Q(r, k);
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < r; ++i) Q(i, j) = std::sin(0.01 * j + i) + n(rng);
    }
    const ModeWeights w = estimate_mode_weights(Q, Eigen::Vector3d::Ones());
    for (int i = 0; i < r; ++i) EXPECT_NEAR(w.diag[i], 1.0 / r, 0.1 / r);
}

TEST(ModeWeights, PowerZeroIgnoresSingularValues) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Random(2, 40);
    const ModeWeights a = estimate_mode_weights(Q, Eigen::Vector2d(100.0, 1.0), 0.0);
    const ModeWeights b = estimate_mode_weights(Q, Eigen::Vector2d(1.0, 1.0), 0.0);
    EXPECT_LE((a.diag - b.diag).norm(), 1e-15);
}

TEST(ModeWeights, FewSamplesFallBackToUniform) {
    const ModeWeights w = estimate_mode_weights(Eigen::MatrixXd::Random(4, 6), Eigen::Vector4d::Ones());
    EXPECT_EQ(w.diag, Eigen::VectorXd::Constant(4, 0.25));
    EXPECT_EQ(w.window, 0);
    EXPECT_THROW(estimate_mode_weights(Eigen::MatrixXd::Random(4, 10), Eigen::Vector2d::Ones()),
                 DimensionError);
}

TEST(Train, ExactStartIsKept) {
    const RomParams truth(Eigen::Vector2d(0.3, -0.2), Eigen::Matrix2d::Zero(), Eigen::MatrixXd::Zero(2, 4),
                          Eigen::MatrixXd::Zero(2, 0));
    const ObservedTrajectory obs = sampled(truth, Eigen::Vector2d(1.0, 0.0), 3.0, 31);
    TrainConfig cfg;
    cfg.cycles = 1;
    cfg.iterations_per_segment = 3;
    cfg.integrator = tight();
    const TrainResult res = train(truth, obs, Eigen::Vector2d(0.5, 0.5), cfg);
    EXPECT_LE(res.initial_loss, 1e-20);
    EXPECT_EQ(res.theta.to_vector(), truth.to_vector());
    EXPECT_EQ(res.accepted_steps, 0);
    EXPECT_EQ(res.gradient_evaluations, cfg.segment_count);
}

TEST(Train, ScalarDecayRateRecovered) {
    // c, a and h are all trained; a long decay keeps them distinguishable.
    const RomParams truth = scalar_rom(0.0, -1.0, 0.0);
    const ObservedTrajectory obs = sampled(truth, Eigen::VectorXd::Ones(1), 6.0, 201);
    TrainConfig cfg;
    cfg.eta0 = 1.0;
    cfg.cycles = 120;
    cfg.segment_count = 1;
    cfg.integrator.rtol = 1e-9;
    cfg.integrator.atol = 1e-11;
    cfg.grad_tol = 1e-12;
    const TrainResult res = train(scalar_rom(0.0, -0.5, 0.0), obs, Eigen::VectorXd::Ones(1), cfg);
    EXPECT_NEAR(res.theta.A()(0, 0), -1.0, 1e-3);
    EXPECT_LT(res.best_loss, 1e-3 * res.initial_loss);
}

TEST(Train, LogRecordsEveryStep) {
    const ObservedTrajectory obs = sampled(scalar_rom(0.0, -1.0, 0.0), Eigen::VectorXd::Ones(1), 1.0, 11);
    TrainConfig cfg;
    cfg.cycles = 2;
    cfg.iterations_per_segment = 2;
    std::vector<IterationRecord> log;
    const TrainResult res = train(scalar_rom(0.0, -0.5, 0.0), obs, Eigen::VectorXd::Ones(1), cfg, {},
                                  [&](const IterationRecord& r) { log.push_back(r); });
    int accepted = 0;
    for (const auto& r : log) {
        accepted += r.accepted;
        if (r.accepted) {
            EXPECT_LT(r.loss_next, r.loss);
        }
    }
    EXPECT_EQ(accepted, res.accepted_steps);
    EXPECT_FALSE(log.empty());
    EXPECT_NE(log.front().to_json().find("\"accepted\""), std::string::npos);
}

TEST(Train, DivergentStartEverywhereThrows) {
    const ObservedTrajectory obs = constant_obs(Eigen::VectorXd::Ones(1), 4.0, 9);
    TrainConfig cfg;
    cfg.cycles = 1;
    cfg.segment_count = 1;
    EXPECT_THROW(train(scalar_rom(0.0, 0.0, 5.0), obs, Eigen::VectorXd::Ones(1), cfg), DivergenceError);
}

TEST(TrainConfig, ValidationRejectsBadValues) {
    TrainConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.ridge_grid, (std::vector<double>{0.0, 1e-2, 1e-1, 1.0, 10.0}));
    cfg.beta = 1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.segment_count = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.ridge_grid = {-1.0};
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(RidgeSearch, SingleElementGrid) {
    const RomParams truth = scalar_rom(0.0, -1.0, 0.0);
    const ObservedTrajectory all = sampled(truth, Eigen::VectorXd::Ones(1), 2.0, 21);
    TrainConfig cfg;
    cfg.cycles = 1;
    cfg.iterations_per_segment = 2;
    cfg.ridge_grid = {0.1};
    const RidgeSearchResult res =
        ridge_grid_search(scalar_rom(0.0, -0.8, 0.0), all.window(0, 14), all.window(14, 20),
                          Eigen::VectorXd::Ones(1), cfg);
    ASSERT_EQ(res.candidates.size(), 1u);
    EXPECT_EQ(res.theta_ridge, 0.1);
    EXPECT_EQ(res.val_rse, res.candidates[0].val_rse);
}

TEST(RidgeSearch, PicksLowestValidationError) {
    const RomParams truth = scalar_rom(0.0, -1.0, 0.0);
    const ObservedTrajectory all = sampled(truth, Eigen::VectorXd::Ones(1), 2.0, 21);
    TrainConfig cfg;
    cfg.cycles = 1;
    cfg.iterations_per_segment = 3;
    const RidgeSearchResult res =
        ridge_grid_search(scalar_rom(0.0, -0.8, 0.0), all.window(0, 14), all.window(14, 20),
                          Eigen::VectorXd::Ones(1), cfg);
    ASSERT_EQ(res.candidates.size(), cfg.ridge_grid.size());
    for (const auto& c : res.candidates) EXPECT_LE(res.val_rse, c.val_rse);
    EXPECT_EQ(res.theta.to_vector(),
              std::find_if(res.candidates.begin(), res.candidates.end(), [&](const RidgeCandidate& c) {
                  return c.theta_ridge == res.theta_ridge;
              })->result.theta.to_vector());
}

#include "adjopinf/adjoint.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "adjopinf/error.hpp"
#include "adjopinf/opinf.hpp"
#include "adjopinf/savitzky_golay.hpp"

namespace adjopinf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 5-point Gauss-Legendre on [-1, 1]; exact through degree 9.
constexpr std::array<double, 5> kGaussX{-0.9061798459386640, -0.5384693101056831, 0.0,
                                        0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussW{0.2369268850561891, 0.4786286704993665,
                                        0.5688888888888889, 0.4786286704993665,
                                        0.2369268850561891};

void check_span(TimeSpan span, const ObservedTrajectory& obs) {
    const double slack = 1e-12 * std::max(1.0, std::abs(obs.t_end()));
    if (!(span.end > span.start) || span.start < obs.t_start() - slack ||
        span.end > obs.t_end() + slack) {
        std::ostringstream msg;
        msg << "loss window [" << span.start << ", " << span.end
            << "] is not inside the observation span [" << obs.t_start() << ", " << obs.t_end()
            << "]";
        throw ConfigError(msg.str());
    }
}

std::vector<double> times_in(const Eigen::VectorXd& t, TimeSpan span) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        if (t[i] > span.start && t[i] < span.end) out.push_back(t[i]);
    }
    return out;
}

// Sorted union of the span endpoints and every grid time strictly inside it.
std::vector<double> merged_grid(TimeSpan span, std::initializer_list<const Eigen::VectorXd*> grids) {
    std::vector<double> out{span.start, span.end};
    for (const Eigen::VectorXd* g : grids) {
        const auto inner = times_in(*g, span);
        out.insert(out.end(), inner.begin(), inner.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

ObservedTrajectory::ObservedTrajectory(SnapshotMatrix data) : data_(std::move(data)) {
    if (data_.count() < 2) throw ConfigError("observed trajectory needs at least two snapshots");
}

void ObservedTrajectory::evaluate(double t, Eigen::Ref<Eigen::VectorXd> out) const {
    const Eigen::VectorXd& ts = times();
    const Eigen::Index k = ts.size();
    const double slack = 1e-12 * std::max(1.0, std::abs(ts[k - 1]));
    if (t < ts[0] - slack || t > ts[k - 1] + slack) {
        std::ostringstream msg;
        msg << "time " << t << " outside observation span [" << ts[0] << ", " << ts[k - 1] << "]";
        throw ConfigError(msg.str());
    }
    t = std::clamp(t, ts[0], ts[k - 1]);
    const double* begin = ts.data();
    Eigen::Index i = std::upper_bound(begin, begin + k, t) - begin;  // ts[i-1] <= t < ts[i]
    if (i >= k) {
        out = data_.states().col(k - 1);
        return;
    }
    i -= 1;
    if (ts[i] == t) {
        out = data_.states().col(i);
        return;
    }
    const double s = (t - ts[i]) / (ts[i + 1] - ts[i]);
    out = (1.0 - s) * data_.states().col(i) + s * data_.states().col(i + 1);
}

Eigen::VectorXd ObservedTrajectory::operator()(double t) const {
    Eigen::VectorXd out(dim());
    evaluate(t, out);
    return out;
}

ObservedTrajectory ObservedTrajectory::window(Eigen::Index i0, Eigen::Index i1) const {
    if (i0 < 0 || i1 >= count() || i1 <= i0) throw ConfigError("invalid observation window");
    return ObservedTrajectory(data_.slice(i0, i1 - i0 + 1));
}

ModeWeights ModeWeights::uniform(Eigen::Index r) {
    ModeWeights w;
    w.diag = Eigen::VectorXd::Constant(r, 1.0 / static_cast<double>(r));
    w.raw = Eigen::VectorXd::Ones(r);
    w.noise_var = Eigen::VectorXd::Zero(r);
    return w;
}

ModeWeights estimate_mode_weights(const Eigen::MatrixXd& Q_train,
                                  const Eigen::VectorXd& singular_values, double p, double tau) {
    const Eigen::Index r = Q_train.rows(), k = Q_train.cols();
    if (r < 1) throw DimensionError("mode weights need at least one reduced coordinate");
    if (singular_values.size() < r) {
        throw DimensionError("need at least r singular values for mode weighting");
    }
    if (!(tau > 0)) throw ConfigError("weight floor tau must be positive");
    if (k < 7) {
        std::clog << "adjopinf: only " << k
                  << " training samples; using uniform mode weights\n";
        ModeWeights w = ModeWeights::uniform(r);
        w.p = p;
        w.tau = tau;
        return w;
    }
    ModeWeights w;
    w.p = p;
    w.tau = tau;
    w.window = adaptive_window(k);
    w.noise_var.resize(r);
    w.raw.resize(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        const Eigen::VectorXd series = Q_train.row(i).transpose();
        const Eigen::VectorXd resid = series - savitzky_golay(series, w.window, 3);
        const double mean = resid.mean();
        w.noise_var[i] = (resid.array() - mean).square().mean();
        w.raw[i] = std::pow(singular_values[i], p) / (w.noise_var[i] + tau);
    }
    w.diag = w.raw / w.raw.sum();
    return w;
}

LossEvaluation evaluate_loss(const RomParams& theta, const Eigen::VectorXd& q0,
                             const ObservedTrajectory& obs, const Eigen::VectorXd& weights,
                             const InputSignal& input, TimeSpan span,
                             const LossSettings& settings) {
    check_span(span, obs);
    if (weights.size() != theta.r() || obs.dim() != theta.r()) {
        throw DimensionError("weights, observations and ROM disagree on r");
    }
    LossEvaluation result;
    const std::vector<double> stops = times_in(obs.times(), span);
    try {
        result.forward = integrate_forward(theta, q0, input, span, settings.integrator, stops);
    } catch (const DivergenceError&) {
        return result;
    }
    const ReducedTrajectory& fwd = *result.forward;
    const std::vector<double> grid = merged_grid(span, {&fwd.times(), &obs.times()});

    const Eigen::Index r = theta.r();
    Eigen::VectorXd q(r), y(r);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double a = grid[i], b = grid[i + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double acc = 0.0;
        for (std::size_t g = 0; g < kGaussX.size(); ++g) {
            const double t = mid + half * kGaussX[g];
            fwd.evaluate(t, q);
            obs.evaluate(t, y);
            acc += kGaussW[g] * (weights.array() * (q - y).array().square()).sum();
        }
        total += half * acc;
    }
    total += settings.theta_ridge * theta.squared_norm();
    result.value = std::isfinite(total) ? total : kInf;
    if (!std::isfinite(total)) result.forward.reset();
    return result;
}

double trajectory_loss(const RomParams& theta, const Eigen::VectorXd& q0,
                       const ObservedTrajectory& obs, const Eigen::VectorXd& weights,
                       const InputSignal& input, TimeSpan span, const LossSettings& settings) {
    return evaluate_loss(theta, q0, obs, weights, input, span, settings).value;
}

AdjointTrajectory solve_adjoint(const ReducedTrajectory& forward, const ObservedTrajectory& obs,
                                const Eigen::VectorXd& weights, const RomParams& theta,
                                TimeSpan span, const IntegratorOptions& opts) {
    check_span(span, obs);
    const double slack = 1e-12 * std::max(1.0, std::abs(span.end));
    if (forward.t_start() > span.start + slack || forward.t_end() < span.end - slack) {
        throw ConfigError("forward trajectory does not cover the adjoint span");
    }
    const Eigen::Index r = theta.r();
    if (forward.dim() != r || weights.size() != r) {
        throw DimensionError("forward trajectory, weights and ROM disagree on r");
    }
    const Eigen::ArrayXd w2 = 2.0 * weights.array();
    Eigen::VectorXd q(r), y(r);
    VectorField f = [&](double t, const Eigen::VectorXd& lambda) -> Eigen::VectorXd {
        forward.evaluate(t, q);
        obs.evaluate(t, y);
        Eigen::VectorXd out(r);
        jac_state_transpose_apply(theta, q, lambda, out);
        out.array() = -out.array() - w2 * (q - y).array();
        return out;
    };
    std::vector<double> stops = times_in(obs.times(), span);
    const std::vector<double> fwd = times_in(forward.times(), span);
    stops.insert(stops.end(), fwd.begin(), fwd.end());
    try {
        return integrate(f, span.end, span.start, Eigen::VectorXd::Zero(r), opts, stops);
    } catch (const DivergenceError& e) {
        throw DivergenceError(std::string("adjoint solve diverged (unstable linearized "
                                          "dynamics): ") + e.what(),
                              e.time());
    }
}

RomParams assemble_gradient(const ReducedTrajectory& forward, const AdjointTrajectory& adjoint,
                            const InputSignal& input, const RomParams& theta,
                            double theta_ridge, TimeSpan span) {
    const double slack = 1e-12 * std::max(1.0, std::abs(span.end));
    const auto covers = [&](const Trajectory& tr) {
        return tr.t_start() <= span.start + slack && tr.t_end() >= span.end - slack;
    };
    if (!covers(forward) || !covers(adjoint)) {
        throw ConfigError("forward and adjoint trajectories must both cover the gradient span");
    }
    const Eigen::Index r = theta.r(), m = theta.m();
    if (forward.dim() != r || adjoint.dim() != r) {
        throw DimensionError("trajectories and ROM disagree on r");
    }
    Eigen::VectorXd gc = Eigen::VectorXd::Zero(r);
    Eigen::MatrixXd gA = Eigen::MatrixXd::Zero(r, r);
    Eigen::MatrixXd gH = Eigen::MatrixXd::Zero(r, r * r);
    Eigen::MatrixXd gB = Eigen::MatrixXd::Zero(r, m);

    const std::vector<double> grid = merged_grid(span, {&forward.times(), &adjoint.times()});
    Eigen::VectorXd q(r), lambda(r), qq(r * r);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double a = grid[i], b = grid[i + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t g = 0; g < kGaussX.size(); ++g) {
            const double t = mid + half * kGaussX[g];
            const double wt = half * kGaussW[g];
            forward.evaluate(t, q);
            adjoint.evaluate(t, lambda);
            for (Eigen::Index j = 0; j < r; ++j) qq.segment(j * r, r) = q[j] * q;
            gc.noalias() += wt * lambda;
            gA.noalias() += (wt * lambda) * q.transpose();
            gH.noalias() += (wt * lambda) * qq.transpose();
            if (m > 0) gB.noalias() += (wt * lambda) * input(t).transpose();
        }
    }
    if (theta_ridge != 0.0) {
        gc += 2.0 * theta_ridge * theta.c();
        gA += 2.0 * theta_ridge * theta.A();
        gH += 2.0 * theta_ridge * theta.H();
        gB += 2.0 * theta_ridge * theta.B();
    }
    return RomParams(std::move(gc), std::move(gA), std::move(gH), std::move(gB));
}

LossAndGradient loss_and_gradient(const RomParams& theta, const Eigen::VectorXd& q0,
                                  const ObservedTrajectory& obs, const Eigen::VectorXd& weights,
                                  const InputSignal& input, TimeSpan span,
                                  const LossSettings& settings) {
    LossAndGradient out;
    LossEvaluation eval = evaluate_loss(theta, q0, obs, weights, input, span, settings);
    out.loss = eval.value;
    if (!eval.forward) return out;
    try {
        const AdjointTrajectory adj =
            solve_adjoint(*eval.forward, obs, weights, theta, span, settings.integrator);
        RomParams g = assemble_gradient(*eval.forward, adj, input, theta, settings.theta_ridge, span);
        if (g.to_vector().allFinite()) out.gradient = std::move(g);
    } catch (const DivergenceError&) {
    } catch (const ConfigError&) {
        // non-finite gradient entries are rejected by the RomParams constructor
    }
    return out;
}

void TrainConfig::validate() const {
    const auto unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!unit(alpha) || !unit(beta) || !unit(gamma)) {
        throw ConfigError("Armijo parameters alpha, beta, gamma must lie in (0, 1)");
    }
    if (!(eta0 > 0)) throw ConfigError("initial step eta0 must be positive");
    if (max_backtracks < 1) throw ConfigError("max_backtracks must be >= 1");
    if (iterations_per_segment < 1 || segment_count < 1 || cycles < 1) {
        throw ConfigError("iteration, segment and cycle counts must be >= 1");
    }
    if (!(theta_ridge >= 0)) throw ConfigError("theta ridge must be non-negative");
    for (double v : ridge_grid) {
        if (!(v >= 0)) throw ConfigError("ridge grid values must be non-negative");
    }
}

ArmijoResult armijo_step(const Eigen::VectorXd& theta, const Eigen::VectorXd& grad,
                         const VectorLoss& loss, const TrainConfig& cfg, double eta0,
                         std::optional<double> current_loss) {
    if (!grad.allFinite()) throw ConfigError("Armijo step needs a finite gradient");
    ArmijoResult res;
    res.loss_before = current_loss ? *current_loss : loss(theta);
    res.eta0 = eta0;
    const double g2 = grad.squaredNorm();
    double eta = eta0;
    for (int i = 0; i < cfg.max_backtracks; ++i) {
        Eigen::VectorXd trial = theta - eta * grad;
        const double value = loss(trial);
        ++res.trials;
        if (value <= res.loss_before - cfg.alpha * eta * g2) {
            res.theta = std::move(trial);
            res.eta_accepted = eta;
            res.loss_after = value;
            res.accepted = true;
            return res;
        }
        eta *= cfg.beta;
    }
    res.theta = theta;
    res.eta_accepted = 0.0;
    res.eta0 = cfg.gamma * eta0;
    res.loss_after = res.loss_before;
    return res;
}

std::string IterationRecord::to_json() const {
    nlohmann::json j;
    j["cycle"] = cycle;
    j["segment"] = segment;
    j["iteration"] = iteration;
    j["loss"] = std::isfinite(loss) ? nlohmann::json(loss) : nlohmann::json(nullptr);
    j["loss_next"] = std::isfinite(loss_next) ? nlohmann::json(loss_next) : nlohmann::json(nullptr);
    j["grad_norm"] = grad_norm;
    j["eta"] = eta;
    j["accepted"] = accepted;
    return j.dump();
}

namespace {

struct Segment {
    Eigen::Index first = 0;
    Eigen::Index last = 0;
};

std::vector<Segment> make_segments(Eigen::Index k, int count) {
    const Eigen::Index n = std::min<Eigen::Index>(count, k - 1);
    std::vector<Segment> segs;
    Eigen::Index prev = 0;
    for (Eigen::Index s = 1; s <= n; ++s) {
        const auto b = static_cast<Eigen::Index>(
            std::llround(static_cast<double>(s) * static_cast<double>(k - 1) / static_cast<double>(n)));
        if (b > prev) {
            segs.push_back({prev, b});
            prev = b;
        }
    }
    return segs;
}

}  // namespace

TrainResult train(const RomParams& theta0, const ObservedTrajectory& obs_train,
                  const Eigen::VectorXd& weights, const TrainConfig& cfg, const InputSignal& input,
                  const IterationLog& log) {
    cfg.validate();
    const Eigen::Index r = theta0.r(), m = theta0.m();
    if (obs_train.dim() != r) throw DimensionError("training data and ROM disagree on r");
    const LossSettings settings{cfg.theta_ridge, cfg.integrator};
    const std::vector<Segment> segments = make_segments(obs_train.count(), cfg.segment_count);
    const TimeSpan full{obs_train.t_start(), obs_train.t_end()};
    const Eigen::VectorXd q_start = obs_train.state(0);

    const auto full_loss = [&](const RomParams& th) {
        return trajectory_loss(th, q_start, obs_train, weights, input, full, settings);
    };

    TrainResult result;
    result.theta = theta0;
    result.initial_loss = full_loss(theta0);
    result.best_loss = result.initial_loss;

    RomParams theta = theta0;
    // One Armijo seed per segment: each segment is its own objective, and a
    // badly conditioned segment must not shrink the step for the others.
    std::vector<double> eta0(segments.size(), cfg.eta0);
    bool any_finite = std::isfinite(result.initial_loss);

    for (int cycle = 0; cycle < cfg.cycles; ++cycle) {
        bool moved = false;
        for (std::size_t s = 0; s < segments.size(); ++s) {
            const Segment seg = segments[s];
            const TimeSpan span{obs_train.times()[seg.first], obs_train.times()[seg.last]};
            const Eigen::VectorXd q0 = obs_train.state(seg.first);
            const VectorLoss seg_loss = [&](const Eigen::VectorXd& v) {
                return trajectory_loss(RomParams::from_vector(v, r, m), q0, obs_train, weights,
                                       input, span, settings);
            };

            LossAndGradient lg =
                loss_and_gradient(theta, q0, obs_train, weights, input, span, settings);
            ++result.gradient_evaluations;
            if (!lg.gradient) {
                if (log) {
                    IterationRecord rec{cycle, static_cast<int>(s), 0, kInf, kInf, 0.0, 0.0, false};
                    log(rec);
                }
                continue;
            }
            any_finite = true;

            int accepted = 0, rejected = 0, iteration = 0;
            while (accepted < cfg.iterations_per_segment && rejected < cfg.iterations_per_segment) {
                const Eigen::VectorXd g = lg.gradient->to_vector();
                const double gnorm = g.norm();
                if (gnorm <= cfg.grad_tol) break;
                const ArmijoResult step =
                    armijo_step(theta.to_vector(), g, seg_loss, cfg, eta0[s], lg.loss);
                eta0[s] = step.eta0;
                if (log) {
                    log(IterationRecord{cycle, static_cast<int>(s), iteration, step.loss_before,
                                        step.loss_after, gnorm, step.eta_accepted, step.accepted});
                }
                ++iteration;
                if (!step.accepted) {
                    ++rejected;
                    continue;
                }
                ++accepted;
                ++result.accepted_steps;
                moved = true;
                theta = RomParams::from_vector(step.theta, r, m);
                lg = loss_and_gradient(theta, q0, obs_train, weights, input, span, settings);
                ++result.gradient_evaluations;
                if (!lg.gradient) break;
            }

            const double value = full_loss(theta);
            if (value < result.best_loss) {
                result.best_loss = value;
                result.theta = theta;
            }
        }
        if (!moved) break;
    }
    if (!any_finite) {
        throw DivergenceError("initial ROM parameters diverge on every training segment",
                              obs_train.t_start());
    }
    return result;
}

RidgeSearchResult ridge_grid_search(const RomParams& theta0, const ObservedTrajectory& obs_train,
                                    const ObservedTrajectory& obs_val,
                                    const Eigen::VectorXd& weights, const TrainConfig& cfg,
                                    const InputSignal& input, const IterationLog& log) {
    if (cfg.ridge_grid.empty()) throw ConfigError("ridge grid is empty");
    RidgeSearchResult out;
    bool found = false;
    for (double ridge : cfg.ridge_grid) {
        TrainConfig local = cfg;
        local.theta_ridge = ridge;
        RidgeCandidate cand;
        cand.theta_ridge = ridge;
        try {
            cand.result = train(theta0, obs_train, weights, local, input, log);
            cand.val_rse = rollout_rse(cand.result.theta, obs_val.data(), cfg.integrator);
        } catch (const DivergenceError&) {
            cand.val_rse = kInf;
        }
        if (std::isfinite(cand.val_rse) && (!found || cand.val_rse < out.val_rse)) {
            out.theta = cand.result.theta;
            out.theta_ridge = ridge;
            out.val_rse = cand.val_rse;
            found = true;
        }
        out.candidates.push_back(std::move(cand));
    }
    if (!found) throw Error("every ridge candidate diverged on the validation window");
    return out;
}

}  // namespace adjopinf

#include "adjopinf/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "adjopinf/error.hpp"

namespace adjopinf {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat (error weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                  const Eigen::VectorXd& y1, double rtol, double atol) {
    if (err.size() == 0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double v = err[i] / scale;
        acc += v * v;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

double rms(const Eigen::VectorXd& v, const Eigen::VectorXd& y, double rtol, double atol) {
    if (v.size() == 0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double s = v[i] / (atol + rtol * std::abs(y[i]));
        acc += s * s;
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
}

// Hairer-Wanner starting step heuristic.
double initial_step(const VectorField& f, double t0, const Eigen::VectorXd& y0,
                    const Eigen::VectorXd& f0, double direction, double rtol, double atol,
                    double span) {
    const double d0 = rms(y0, y0, rtol, atol);
    const double d1 = rms(f0, y0, rtol, atol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const Eigen::VectorXd y1 = y0 + direction * h0 * f0;
    const Eigen::VectorXd f1 = f(t0 + direction * h0, y1);
    const double d2 = rms(f1 - f0, y0, rtol, atol) / h0;
    double h1;
    if (std::max(d1, d2) <= 1e-15) {
        h1 = std::max(1e-6, h0 * 1e-3);
    } else {
        h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    }
    return std::min({100 * h0, h1, span});
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

Trajectory::Trajectory(Eigen::VectorXd times, Eigen::MatrixXd states, Eigen::MatrixXd derivatives,
                       IntegratorStats stats)
    : times_(std::move(times)),
      states_(std::move(states)),
      derivs_(std::move(derivatives)),
      stats_(stats) {
    if (times_.size() == 0 || states_.cols() != times_.size() ||
        derivs_.cols() != times_.size() || derivs_.rows() != states_.rows()) {
        throw DimensionError("trajectory nodes, states and derivatives disagree in size");
    }
    for (Eigen::Index i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw ConfigError("trajectory node times must be strictly increasing");
        }
    }
}

void Trajectory::evaluate(double t, Eigen::Ref<Eigen::VectorXd> out) const {
    const Eigen::Index n = times_.size();
    if (!(t >= times_[0] && t <= times_[n - 1])) {
        std::ostringstream msg;
        msg << "time " << t << " outside trajectory span [" << times_[0] << ", "
            << times_[n - 1] << "]";
        throw ConfigError(msg.str());
    }
    const double* begin = times_.data();
    const double* it = std::lower_bound(begin, begin + n, t);
    Eigen::Index i = it - begin;
    if (i < n && times_[i] == t) {
        out = states_.col(i);
        return;
    }
    i -= 1;  // t in (times_[i], times_[i+1])
    const double h = times_[i + 1] - times_[i];
    const double s = (t - times_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    out = h00 * states_.col(i) + (h10 * h) * derivs_.col(i) + h01 * states_.col(i + 1) +
          (h11 * h) * derivs_.col(i + 1);
}

Eigen::VectorXd Trajectory::operator()(double t) const {
    Eigen::VectorXd out(dim());
    evaluate(t, out);
    return out;
}

Eigen::MatrixXd Trajectory::sample(const Eigen::VectorXd& times) const {
    Eigen::MatrixXd out(dim(), times.size());
    for (Eigen::Index j = 0; j < times.size(); ++j) {
        evaluate(times[j], out.col(j));
    }
    return out;
}

Trajectory integrate(const VectorField& f, double t_start, double t_end, const Eigen::VectorXd& y0,
                     const IntegratorOptions& opts, std::span<const double> stops) {
    if (!(t_end != t_start) || !std::isfinite(t_start) || !std::isfinite(t_end)) {
        throw ConfigError("integration span must be finite and nondegenerate");
    }
    if (!all_finite(y0)) {
        throw DivergenceError("initial state is not finite", t_start);
    }
    if (!(opts.rtol > 0) || !(opts.atol >= 0)) {
        throw ConfigError("integrator tolerances must be positive");
    }
    const double dir = t_end > t_start ? 1.0 : -1.0;
    const double span = std::abs(t_end - t_start);

    // Interior stop times, ordered along the integration direction.
    std::vector<double> tstops;
    for (double s : stops) {
        if (dir * (s - t_start) > 0 && dir * (t_end - s) > 0) tstops.push_back(s);
    }
    std::sort(tstops.begin(), tstops.end(),
              [dir](double a, double b) { return dir * a < dir * b; });
    tstops.erase(std::unique(tstops.begin(), tstops.end()), tstops.end());
    tstops.push_back(t_end);
    std::size_t next_stop = 0;

    IntegratorStats stats;
    std::vector<double> ts{t_start};
    // Nodes are appended column by column into flat buffers.
    std::vector<double> ys(y0.data(), y0.data() + y0.size());
    Eigen::VectorXd k1 = f(t_start, y0);
    ++stats.rhs_evals;
    if (!all_finite(k1)) throw DivergenceError("non-finite derivative at start", t_start);
    std::vector<double> fs(k1.data(), k1.data() + k1.size());

    double h = opts.initial_step > 0
                   ? std::min(opts.initial_step, span)
                   : initial_step(f, t_start, y0, k1, dir, opts.rtol, opts.atol, span);
    stats.rhs_evals += opts.initial_step > 0 ? 0 : 1;
    if (opts.max_step > 0) h = std::min(h, opts.max_step);

    double t = t_start;
    Eigen::VectorXd y = y0;
    Eigen::VectorXd stage(y0.size()), y_new(y0.size()), e(y0.size());
    constexpr double safety = 0.9, min_factor = 0.2, max_factor = 10.0;
    bool last_rejected = false;

    while (true) {
        const double target = tstops[next_stop];
        const double remaining = dir * (target - t);
        bool hits_stop = false;
        double step = h;
        if (step >= remaining * (1.0 - 1e-12)) {
            step = remaining;
            hits_stop = true;
        }
        const double min_step = 16.0 * std::numeric_limits<double>::epsilon() *
                                std::max(std::abs(t), 1.0);
        if (step < min_step) {
            std::ostringstream msg;
            msg << "step size underflow at t = " << t;
            throw DivergenceError(msg.str(), t);
        }
        if (stats.accepted + stats.rejected >= opts.max_steps) {
            std::ostringstream msg;
            msg << "step budget of " << opts.max_steps << " exhausted at t = " << t;
            throw DivergenceError(msg.str(), t);
        }

        const double hs = dir * step;
        stage = y + hs * (a21 * k1);
        const Eigen::VectorXd k2 = f(t + c2 * hs, stage);
        stage = y + hs * (a31 * k1 + a32 * k2);
        const Eigen::VectorXd k3 = f(t + c3 * hs, stage);
        stage = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        const Eigen::VectorXd k4 = f(t + c4 * hs, stage);
        stage = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        const Eigen::VectorXd k5 = f(t + c5 * hs, stage);
        stage = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        const Eigen::VectorXd k6 = f(t + hs, stage);
        const double t_new = hits_stop ? target : t + hs;
        y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Eigen::VectorXd k7 = f(t_new, y_new);
        stats.rhs_evals += 6;

        const bool finite = all_finite(y_new) && all_finite(k7);
        double err = std::numeric_limits<double>::infinity();
        if (finite) {
            e = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            err = error_norm(e, y, y_new, opts.rtol, opts.atol);
        }

        if (finite && err <= 1.0) {
            ++stats.accepted;
            if (y_new.size() > 0 && y_new.lpNorm<Eigen::Infinity>() > opts.max_norm) {
                std::ostringstream msg;
                msg << "state magnitude exceeded " << opts.max_norm << " at t = " << t_new;
                throw DivergenceError(msg.str(), t_new);
            }
            t = t_new;
            y.swap(y_new);
            k1 = k7;
            ts.push_back(t);
            ys.insert(ys.end(), y.data(), y.data() + y.size());
            fs.insert(fs.end(), k1.data(), k1.data() + k1.size());

            double factor = err == 0.0 ? max_factor
                                       : std::min(max_factor, safety * std::pow(err, -0.2));
            if (last_rejected) factor = std::min(factor, 1.0);
            last_rejected = false;
            const double proposed = step * std::max(min_factor, factor);
            // A step clipped to a stop says little about the natural step size.
            h = hits_stop ? std::max(proposed, h) : proposed;
            if (opts.max_step > 0) h = std::min(h, opts.max_step);
            if (hits_stop) {
                if (++next_stop == tstops.size()) break;
            }
        } else {
            ++stats.rejected;
            last_rejected = true;
            const double factor =
                finite ? std::max(min_factor, safety * std::pow(err, -0.2)) : min_factor;
            h = step * factor;
        }
    }

    const auto n = static_cast<Eigen::Index>(ts.size());
    const Eigen::Index dim = y0.size();
    Eigen::VectorXd times(n);
    Eigen::MatrixXd states(dim, n), derivs(dim, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = dir > 0 ? i : n - 1 - i;
        times[i] = ts[static_cast<std::size_t>(src)];
        const auto off = static_cast<std::size_t>(src * dim);
        states.col(i) = Eigen::Map<const Eigen::VectorXd>(ys.data() + off, dim);
        derivs.col(i) = Eigen::Map<const Eigen::VectorXd>(fs.data() + off, dim);
    }
    return Trajectory(std::move(times), std::move(states), std::move(derivs), stats);
}

}  // namespace adjopinf

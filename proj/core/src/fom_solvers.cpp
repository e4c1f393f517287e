#include "adjopinf/fom_solvers.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "adjopinf/error.hpp"
#include "adjopinf/integrator.hpp"

namespace adjopinf {

namespace {

int steps_for(double horizon, double dt, const char* who) {
    if (!(dt > 0) || !(horizon > 0)) {
        throw ConfigError(std::string(who) + ": horizon and dt must be positive");
    }
    const double ratio = horizon / dt;
    const long n = std::lround(ratio);
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-8 * ratio) {
        std::ostringstream msg;
        msg << who << ": horizon " << horizon << " is not an integer multiple of dt " << dt;
        throw ConfigError(msg.str());
    }
    return static_cast<int>(n);
}

void check_finite_step(const Eigen::VectorXd& u, int step, const char* who) {
    if (!u.allFinite()) {
        std::ostringstream msg;
        msg << who << " diverged: non-finite state at step " << step;
        throw DivergenceError(msg.str(), static_cast<double>(step));
    }
}

Eigen::VectorXd uniform_times(int n_steps, double dt) {
    Eigen::VectorXd t(n_steps + 1);
    for (int m = 0; m <= n_steps; ++m) t[m] = m * dt;
    return t;
}

// 1D second difference with mirrored-point zero-flux rows.
std::vector<Eigen::Triplet<double>> neumann_1d(int n, double h) {
    std::vector<Eigen::Triplet<double>> trip;
    const double s = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
        trip.emplace_back(i, i, -2.0 * s);
        if (i == 0) {
            trip.emplace_back(0, 1, 2.0 * s);
        } else if (i == n - 1) {
            trip.emplace_back(n - 1, n - 2, 2.0 * s);
        } else {
            trip.emplace_back(i, i - 1, s);
            trip.emplace_back(i, i + 1, s);
        }
    }
    return trip;
}

Eigen::SparseMatrix<double> neumann_laplacian(int nx, int ny, double dx, double dy) {
    const int n = nx * ny;
    std::vector<Eigen::Triplet<double>> trip;
    // I_ny kron Lx
    for (const auto& t : neumann_1d(nx, dx)) {
        for (int j = 0; j < ny; ++j) {
            trip.emplace_back(t.row() + nx * j, t.col() + nx * j, t.value());
        }
    }
    // Ly kron I_nx
    for (const auto& t : neumann_1d(ny, dy)) {
        for (int i = 0; i < nx; ++i) {
            trip.emplace_back(i + nx * t.row(), i + nx * t.col(), t.value());
        }
    }
    Eigen::SparseMatrix<double> L(n, n);
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

}  // namespace

void BurgersConfig::validate() const {
    if (n_interior < 2) throw ConfigError("burgers: n_interior must be >= 2");
    if (n_steps < 1) throw ConfigError("burgers: n_steps must be >= 1");
    if (!(viscosity > 0)) throw ConfigError("burgers: viscosity must be positive");
    if (!(horizon > 0)) throw ConfigError("burgers: horizon must be positive");
}

int FkppConfig::n_steps() const { return steps_for(horizon, dt, "fisher-kpp"); }

void FkppConfig::validate() const {
    if (nx < 3 || ny < 3) throw ConfigError("fisher-kpp: nx and ny must be >= 3");
    if (!(lx > 0) || !(ly > 0)) throw ConfigError("fisher-kpp: domain lengths must be positive");
    if (!(diffusivity >= 0)) throw ConfigError("fisher-kpp: diffusivity must be non-negative");
    (void)n_steps();
}

int AdeConfig::n_steps() const { return steps_for(horizon, dt, "advection-diffusion"); }

double AdeConfig::advective_cfl() const {
    return std::abs(cx) * dt / dx() + std::abs(cy) * dt / dy();
}

double AdeConfig::diffusive_cfl() const {
    return dt * viscosity * (1.0 / (dx() * dx()) + 1.0 / (dy() * dy()));
}

void AdeConfig::validate() const {
    if (nx < 3 || ny < 3) throw ConfigError("advection-diffusion: nx and ny must be >= 3");
    if (!(viscosity >= 0)) throw ConfigError("advection-diffusion: viscosity must be >= 0");
    (void)n_steps();
    const double adv = advective_cfl();
    const double dif = diffusive_cfl();
    if (adv > 1.0 || dif > 0.5) {
        std::ostringstream msg;
        msg << "advection-diffusion: CFL violated: |cx|dt/dx + |cy|dt/dy = " << adv
            << " (must be <= 1), dt*nu*(1/dx^2 + 1/dy^2) = " << dif << " (must be <= 0.5)";
        throw ConfigError(msg.str());
    }
}

void QuadraticFomOperators::validate() const {
    const Eigen::Index n = C.size();
    if (A.rows() != n || A.cols() != n || H.rows() != n || H.cols() != n * n || B.rows() != n) {
        throw DimensionError("quadratic FOM operators have inconsistent shapes");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = j + 1; k < n; ++k) {
            const double diff = (H.col(j * n + k) - H.col(k * n + j)).lpNorm<Eigen::Infinity>();
            const double scale = std::max(1.0, H.col(j * n + k).lpNorm<Eigen::Infinity>());
            if (diff > 1e-12 * scale) {
                throw ConfigError("quadratic FOM tensor H must be symmetric in its last two modes");
            }
        }
    }
}

Eigen::VectorXd QuadraticFomOperators::operator()(const Eigen::VectorXd& u,
                                                  const Eigen::VectorXd& s) const {
    const Eigen::Index n = u.size();
    Eigen::VectorXd uu(n * n);
    for (Eigen::Index j = 0; j < n; ++j) uu.segment(j * n, n) = u[j] * u;
    Eigen::VectorXd out = C + A * u + H * uu;
    if (B.cols() > 0) out.noalias() += B * s;
    return out;
}

SnapshotMatrix solve_burgers(const BurgersConfig& cfg) {
    cfg.validate();
    const int N = cfg.n_interior;
    const int M = cfg.n_steps;
    const double dx = cfg.dx();
    const double dt = cfg.dt();
    const double nu = cfg.viscosity;
    const Profile1D u0 = cfg.initial_profile
                             ? cfg.initial_profile
                             : Profile1D([](double x) { return std::sin(2 * std::numbers::pi * x); });

    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(N + 2, M + 1);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(N + 2);
    for (int j = 1; j <= N; ++j) u[j] = u0(j * dx);
    U.col(0) = u;

    // Thomas factorization of (I - nu dt/2 T) on interior nodes; constant in time.
    const double kappa = 0.5 * nu * dt / (dx * dx);
    const double diag = 1.0 + 2.0 * kappa;
    const double off = -kappa;
    std::vector<double> cprime(static_cast<std::size_t>(N)), denom(static_cast<std::size_t>(N));
    denom[0] = diag;
    cprime[0] = off / diag;
    for (int i = 1; i < N; ++i) {
        denom[i] = diag - off * cprime[i - 1];
        cprime[i] = off / denom[i];
    }

    const double lw1 = dt / (2.0 * dx);
    const double lw2 = dt * dt / (2.0 * dx * dx);
    Eigen::VectorXd rhs(N), d(N);
    for (int m = 0; m < M; ++m) {
        for (int j = 1; j <= N; ++j) {
            const double um = u[j - 1], uc = u[j], up = u[j + 1];
            const double w = uc - lw1 * uc * (up - um) +
                             lw2 * uc * (0.5 * (up - um) * (up - um) + uc * (up - 2 * uc + um));
            rhs[j - 1] = w + kappa * (up - 2 * uc + um);
        }
        // forward sweep / back substitution
        d[0] = rhs[0] / denom[0];
        for (int i = 1; i < N; ++i) d[i] = (rhs[i] - off * d[i - 1]) / denom[i];
        for (int i = N - 2; i >= 0; --i) d[i] -= cprime[i] * d[i + 1];
        u.segment(1, N) = d;
        u[0] = 0.0;
        u[N + 1] = 0.0;
        check_finite_step(u, m + 1, "burgers");
        U.col(m + 1) = u;
    }
    return SnapshotMatrix(std::move(U), uniform_times(M, dt));
}

Eigen::VectorXd fkpp_mass_weights(int nx, int ny) {
    Eigen::VectorXd wx = Eigen::VectorXd::Ones(nx), wy = Eigen::VectorXd::Ones(ny);
    wx[0] = wx[nx - 1] = 0.5;
    wy[0] = wy[ny - 1] = 0.5;
    Eigen::VectorXd w(nx * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) w[i + nx * j] = wx[i] * wy[j];
    return w;
}

Eigen::VectorXd fkpp_apply_laplacian(const FkppConfig& cfg, const Eigen::VectorXd& u) {
    if (u.size() != static_cast<Eigen::Index>(cfg.nx) * cfg.ny) {
        throw DimensionError("fisher-kpp: grid vector has the wrong length");
    }
    return neumann_laplacian(cfg.nx, cfg.ny, cfg.dx(), cfg.dy()) * u;
}

SnapshotMatrix solve_fisher_kpp(const FkppConfig& cfg) {
    cfg.validate();
    const int nx = cfg.nx, ny = cfg.ny, n = nx * ny;
    const int steps = cfg.n_steps();
    const double dx = cfg.dx(), dy = cfg.dy();
    const double alpha = 0.5 * cfg.diffusivity * cfg.dt;

    const Eigen::SparseMatrix<double> L = neumann_laplacian(nx, ny, dx, dy);
    Eigen::SparseMatrix<double> I(n, n);
    I.setIdentity();
    const Eigen::SparseMatrix<double> lhs = I - alpha * L;
    const Eigen::SparseMatrix<double> explicit_part = I + alpha * L;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(lhs);
    lu.factorize(lhs);
    if (lu.info() != Eigen::Success) {
        throw SolverError("fisher-kpp: factorization of (I - alpha L) failed: " +
                          lu.lastErrorMessage());
    }

    const double cxm = 0.5 * cfg.lx, cym = 0.5 * cfg.ly;
    const Profile2D u0 =
        cfg.initial_profile
            ? cfg.initial_profile
            : Profile2D([cxm, cym](double x, double y) {
                  return std::exp(-10.0 * ((x - cxm) * (x - cxm) + (y - cym) * (y - cym)));
              });

    Eigen::MatrixXd U(n, steps + 1);
    Eigen::VectorXd u(n);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) u[i + nx * j] = u0(i * dx, j * dy);
    U.col(0) = u;

    const double growth_dt = cfg.dt * cfg.growth;
    Eigen::VectorXd rhs(n);
    for (int m = 0; m < steps; ++m) {
        rhs = explicit_part * u;
        rhs.array() += growth_dt * u.array() * (1.0 - u.array());
        u = lu.solve(rhs);
        if (lu.info() != Eigen::Success) {
            std::ostringstream msg;
            msg << "fisher-kpp: linear solve failed at step " << m + 1;
            throw SolverError(msg.str());
        }
        check_finite_step(u, m + 1, "fisher-kpp");
        U.col(m + 1) = u;
    }
    return SnapshotMatrix(std::move(U), uniform_times(steps, cfg.dt));
}

SnapshotMatrix solve_ade(const AdeConfig& cfg) {
    cfg.validate();
    const int nx = cfg.nx, ny = cfg.ny, n = nx * ny;
    const int steps = cfg.n_steps();
    const double dx = cfg.dx(), dy = cfg.dy(), dt = cfg.dt;

    const double x0 = cfg.x0, y0 = cfg.y0, two_s2 = 2.0 * cfg.width * cfg.width;
    const Profile2D u0 = cfg.initial_profile
                             ? cfg.initial_profile
                             : Profile2D([x0, y0, two_s2](double x, double y) {
                                   return std::exp(-((x - x0) * (x - x0) + (y - y0) * (y - y0)) /
                                                   two_s2);
                               });

    Eigen::MatrixXd U(n, steps + 1);
    Eigen::VectorXd u(n), next(n);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) u[i + nx * j] = u0(-1.0 + i * dx, -1.0 + j * dy);
    U.col(0) = u;

    const double ax = cfg.cx / (2.0 * dx), ay = cfg.cy / (2.0 * dy);
    const double dxx = cfg.viscosity / (dx * dx), dyy = cfg.viscosity / (dy * dy);
    for (int m = 0; m < steps; ++m) {
        for (int j = 0; j < ny; ++j) {
            const int jm = (j + ny - 1) % ny, jp = (j + 1) % ny;
            for (int i = 0; i < nx; ++i) {
                const int im = (i + nx - 1) % nx, ip = (i + 1) % nx;
                const double c = u[i + nx * j];
                const double e = u[ip + nx * j], w = u[im + nx * j];
                const double no = u[i + nx * jp], so = u[i + nx * jm];
                next[i + nx * j] = c + dt * (-ax * (e - w) - ay * (no - so) +
                                             dxx * (e - 2 * c + w) + dyy * (no - 2 * c + so));
            }
        }
        u.swap(next);
        check_finite_step(u, m + 1, "advection-diffusion");
        U.col(m + 1) = u;
    }
    return SnapshotMatrix(std::move(U), uniform_times(steps, dt));
}

SnapshotMatrix simulate_synthetic_fom(const QuadraticFomOperators& ops, const Eigen::VectorXd& u0,
                                      const InputFunction& input, const Eigen::VectorXd& times,
                                      double rtol, double atol) {
    ops.validate();
    if (u0.size() != ops.n()) throw DimensionError("synthetic FOM: initial state has wrong size");
    if (times.size() < 2) throw ConfigError("synthetic FOM: need at least two sample times");
    if (ops.m() > 0 && !input) throw ConfigError("synthetic FOM: input operator without signal");
    const Eigen::VectorXd no_input;
    VectorField f = [&](double t, const Eigen::VectorXd& u) -> Eigen::VectorXd {
        return ops.m() > 0 ? ops(u, input(t)) : ops(u, no_input);
    };
    IntegratorOptions opts;
    opts.rtol = rtol;
    opts.atol = atol;
    const std::span<const double> stops(times.data(), static_cast<std::size_t>(times.size()));
    const Trajectory traj = integrate(f, times[0], times[times.size() - 1], u0, opts, stops);
    return SnapshotMatrix(traj.sample(times), times);
}

}  // namespace adjopinf

#pragma once

#include <functional>

#include <Eigen/Core>

#include "adjopinf/snapshot.hpp"

namespace adjopinf {

using Profile1D = std::function<double(double x)>;
using Profile2D = std::function<double(double x, double y)>;
using InputFunction = std::function<Eigen::VectorXd(double t)>;

/// 1D viscous Burgers on [0,1] with homogeneous Dirichlet data.
struct BurgersConfig {
    int n_interior = 998;
    double viscosity = 0.01;
    double horizon = 1.0;
    int n_steps = 9999;
    Profile1D initial_profile;  // empty -> sin(2 pi x)

    double dx() const { return 1.0 / (n_interior + 1); }
    double dt() const { return horizon / n_steps; }
    void validate() const;
};

/// 2D Fisher-KPP on [0,Lx]x[0,Ly] with zero-flux boundaries.
struct FkppConfig {
    int nx = 125;
    int ny = 125;
    double lx = 10.0;
    double ly = 10.0;
    double diffusivity = 0.1;
    double growth = 1.0;
    double horizon = 5.0;
    double dt = 0.0025;
    Profile2D initial_profile;  // empty -> exp(-10 |x - center|^2)

    int n_steps() const;
    double dx() const { return lx / (nx - 1); }
    double dy() const { return ly / (ny - 1); }
    void validate() const;
};

/// 2D linear advection-diffusion on [-1,1]^2 with periodic boundaries.
struct AdeConfig {
    int nx = 201;
    int ny = 201;
    double cx = 1.0;
    double cy = 1.5;
    double viscosity = 0.005;
    double horizon = 0.5;
    double dt = 2.5e-4;
    double x0 = -0.5;
    double y0 = -0.5;
    double width = 0.1;
    Profile2D initial_profile;  // empty -> Gaussian at (x0, y0)

    int n_steps() const;
    double dx() const { return 2.0 / (nx - 1); }
    double dy() const { return 2.0 / (ny - 1); }
    double advective_cfl() const;
    double diffusive_cfl() const;
    void validate() const;
};

/// Operators of du/dt = C + A u + H (u kron u) + B s(t).
struct QuadraticFomOperators {
    Eigen::VectorXd C;
    Eigen::MatrixXd A;
    Eigen::MatrixXd H;  // n x n^2, H(i, j*n+k) == H(i, k*n+j)
    Eigen::MatrixXd B;  // n x m

    Eigen::Index n() const { return C.size(); }
    Eigen::Index m() const { return B.cols(); }
    void validate() const;
    Eigen::VectorXd operator()(const Eigen::VectorXd& u, const Eigen::VectorXd& s) const;
};

/// Lax-Wendroff convection followed by a Crank-Nicolson diffusion solve.
/// Returns (n_interior+2) x (n_steps+1) including the zero boundary rows.
SnapshotMatrix solve_burgers(const BurgersConfig& cfg);

/// IMEX Crank-Nicolson (diffusion) / explicit Euler (reaction) stepping.
/// The node (i, j) is stored at row i + nx*j.
SnapshotMatrix solve_fisher_kpp(const FkppConfig& cfg);

/// Explicit Euler with periodic centered differences. Refuses to run if
/// either CFL bound is violated.
SnapshotMatrix solve_ade(const AdeConfig& cfg);

/// Integrates a synthetic quadratic FOM with the adaptive RK5(4) integrator
/// and samples it at `times` (times[0] is the initial time).
SnapshotMatrix simulate_synthetic_fom(const QuadraticFomOperators& ops,
                                      const Eigen::VectorXd& u0,
                                      const InputFunction& input,
                                      const Eigen::VectorXd& times,
                                      double rtol = 1e-8,
                                      double atol = 1e-10);

/// Weights w with w^T L = 0 for the zero-flux Laplacian: the conserved
/// "mass" functional of pure diffusion on the grid (trapezoid weights).
Eigen::VectorXd fkpp_mass_weights(int nx, int ny);

/// The zero-flux Kronecker-sum Laplacian applied to a grid vector.
Eigen::VectorXd fkpp_apply_laplacian(const FkppConfig& cfg, const Eigen::VectorXd& u);

}  // namespace adjopinf

#pragma once

#include <string>

#include <Eigen/Core>

#include "adjopinf/integrator.hpp"

namespace adjopinf {

/// Parameter bundle (c, A, H, B) of the quadratic reduced model
///   dq/dt = c + A q + H (q kron q) + B s(t).
///
/// H is r x r^2 with column j*r + k multiplying q_j q_k. The constructor
/// symmetrizes H in its last two modes, so every instance satisfies
/// H(i, j*r+k) == H(i, k*r+j).
class RomParams {
public:
    RomParams() = default;
    RomParams(Eigen::VectorXd c, Eigen::MatrixXd A, Eigen::MatrixXd H, Eigen::MatrixXd B);

    static RomParams zeros(Eigen::Index r, Eigen::Index m = 0);
    /// Unpacks vec(theta) = [c; vec(A); vec(H); vec(B)] with column-major vec().
    static RomParams from_vector(const Eigen::VectorXd& theta, Eigen::Index r, Eigen::Index m = 0);

    Eigen::Index r() const noexcept { return c_.size(); }
    Eigen::Index m() const noexcept { return B_.cols(); }
    Eigen::Index dimension() const noexcept;

    const Eigen::VectorXd& c() const noexcept { return c_; }
    const Eigen::MatrixXd& A() const noexcept { return A_; }
    const Eigen::MatrixXd& H() const noexcept { return H_; }
    const Eigen::MatrixXd& B() const noexcept { return B_; }

    Eigen::VectorXd to_vector() const;
    double squared_norm() const;

    std::string to_json(int indent = -1) const;
    static RomParams from_json(const std::string& text);

private:
    Eigen::VectorXd c_;
    Eigen::MatrixXd A_;
    Eigen::MatrixXd H_;
    Eigen::MatrixXd B_;
};

/// d = r + r^2 + r^3 + r m
constexpr Eigen::Index parameter_count(Eigen::Index r, Eigen::Index m) {
    return r + r * r + r * r * r + r * m;
}

/// Signal t -> s(t) in R^m. An empty function means m = 0.
struct InputSignal {
    std::function<Eigen::VectorXd(double)> fn;
    Eigen::Index m = 0;

    Eigen::VectorXd operator()(double t) const {
        if (fn) return fn(t);
        return Eigen::VectorXd::Zero(m);
    }
};

/// H (q kron q) without materializing the Kronecker product.
Eigen::VectorXd quadratic_term(const Eigen::MatrixXd& H, const Eigen::VectorXd& q);

Eigen::VectorXd rhs(const Eigen::VectorXd& q, const Eigen::VectorXd& s, const RomParams& theta);

/// A + 2 H (I_r kron q); requires symmetric H, which RomParams guarantees.
Eigen::MatrixXd jac_state(const Eigen::VectorXd& q, const RomParams& theta);

/// out = c + A q + H (q kron q). Plain loops: for the small r used in practice
/// this beats the BLAS-style kernels and never allocates once out is sized.
void autonomous_rhs_into(const RomParams& theta, const Eigen::VectorXd& q, Eigen::VectorXd& out);

/// out = J(q)^T v without forming J.
void jac_state_transpose_apply(const RomParams& theta, const Eigen::VectorXd& q,
                               const Eigen::VectorXd& v, Eigen::VectorXd& out);

/// (H(i, jk) + H(i, kj)) / 2
Eigen::MatrixXd symmetrize_H(const Eigen::MatrixXd& H_raw);

struct TimeSpan {
    double start = 0.0;
    double end = 0.0;
};

/// Rolls the ROM out from q0 over `span`. DivergenceError signals an
/// unstable parameter set.
ReducedTrajectory integrate_forward(const RomParams& theta, const Eigen::VectorXd& q0,
                                    const InputSignal& input, TimeSpan span,
                                    const IntegratorOptions& opts = {},
                                    std::span<const double> stops = {});

Eigen::VectorXd eval_trajectory(const ReducedTrajectory& traj, double t);

}  // namespace adjopinf

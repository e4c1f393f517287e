#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "adjopinf/rom.hpp"
#include "adjopinf/snapshot.hpp"

namespace adjopinf {

struct DerivativeEstimate {
    Eigen::MatrixXd qdot;  // r x k
    int stencil_order = 2;
};

struct OpinfHyperparams {
    double ridge_weight = 0.0;
    int tsvd_discard = 0;
    int stencil_order = 2;

    std::string describe() const;
};

/// Finite-difference weights for d/dt at `at` from samples at `offsets`
/// (in units of the grid spacing). Fornberg's recursion.
std::vector<double> fd_weights(std::span<const double> offsets, double at);

/// Largest tolerated max/min ratio of consecutive sample spacings.
inline constexpr double kMaxSpacingRatio = 1.5;

/// Central stencils of the given order (2 or 6) in the interior, one-sided
/// stencils of the same order on the boundary nodes. Weights come from the
/// actual sample offsets, so the stencils stay exact on polynomials of degree
/// <= order on thinned grids whose spacing jitters by one source step.
/// Requires k >= order + 1 and a spacing ratio <= kMaxSpacingRatio.
DerivativeEstimate estimate_derivatives(const SnapshotMatrix& Q, int order);

/// Rows [1, q^T, (q kron q)^T, s^T], one per snapshot. `S` may have zero rows.
Eigen::MatrixXd assemble_data_matrix(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& S);

/// Regularized least squares: SVD of D, drop the `tsvd_discard` smallest
/// numerically nonzero singular directions, filter the rest with
/// sigma / (sigma^2 + ridge). Rank-deficient problems get the minimum-norm
/// solution.
RomParams solve_opinf(const Eigen::MatrixXd& D, const Eigen::MatrixXd& qdot,
                      const OpinfHyperparams& hp, Eigen::Index r, Eigen::Index m = 0);

/// Derivative estimate + assembly + solve on one reduced data set.
RomParams fit_opinf(const SnapshotMatrix& Q_train, const OpinfHyperparams& hp);

struct OpinfGrid {
    std::vector<double> ridge_weights{0.0, 1e-2, 1e-1, 1.0};
    std::vector<int> tsvd_discards{0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<int> stencil_orders{2, 6};
};

struct GridPointResult {
    OpinfHyperparams hp;
    double val_rse = std::numeric_limits<double>::infinity();
    bool diverged = true;
};

struct GridSearchResult {
    RomParams theta;
    OpinfHyperparams hp;
    double val_rse = std::numeric_limits<double>::infinity();
    std::vector<GridPointResult> table;
};

/// Fits every grid point on `train`, rolls each out from the first
/// validation state over the validation window and keeps the lowest RSE.
/// Throws Error if every grid point diverges.
GridSearchResult grid_search(const SnapshotMatrix& train, const SnapshotMatrix& val,
                             const OpinfGrid& grid, const IntegratorOptions& opts = {});

/// CSV report: ridge,discard,order,val_rse,diverged
std::string grid_report_csv(const GridSearchResult& result);

/// Validation roll-out score shared by both model-selection loops; +inf when
/// the roll-out diverges.
double rollout_rse(const RomParams& theta, const SnapshotMatrix& window,
                   const IntegratorOptions& opts = {});

}  // namespace adjopinf

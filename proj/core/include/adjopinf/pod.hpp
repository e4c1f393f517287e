#pragma once

#include <variant>

#include <Eigen/Core>

#include "adjopinf/snapshot.hpp"

namespace adjopinf {

struct FixedRank {
    Eigen::Index r;
};

/// Smallest r whose cumulative energy reaches 1 - tolerance.
struct EnergyTolerance {
    double tolerance;
};

using RankRule = std::variant<FixedRank, EnergyTolerance>;

/// Orthonormal POD basis plus the full singular spectrum of the snapshots.
struct PodBasis {
    Eigen::MatrixXd modes;            // n x r, orthonormal columns
    Eigen::VectorXd singular_values;  // all of them, non-increasing
    Eigen::Index numerical_rank = 0;  // count of sigma_i > 1e-12 sigma_1

    Eigen::Index r() const noexcept { return modes.cols(); }
    Eigen::Index n() const noexcept { return modes.rows(); }
    double energy_captured() const { return energy_fraction(r()); }
    double energy_fraction(Eigen::Index r) const;
    /// sum_{i > r} sigma_i^2
    double tail_energy(Eigen::Index r) const;

    /// Same spectrum, leading `r` modes only.
    PodBasis truncated(Eigen::Index r) const;
};

/// Thin SVD of the raw (uncentered) snapshot matrix. Each mode is signed so
/// that its largest-magnitude entry is positive.
PodBasis compute_pod(const SnapshotMatrix& U, const RankRule& rule);

/// Q = V_r^T U, keeping the time stamps.
SnapshotMatrix project(const PodBasis& basis, const SnapshotMatrix& U);
Eigen::MatrixXd project(const PodBasis& basis, const Eigen::MatrixXd& U);

/// V_r Q
SnapshotMatrix lift(const PodBasis& basis, const SnapshotMatrix& Q);
Eigen::MatrixXd lift(const PodBasis& basis, const Eigen::MatrixXd& Q);

}  // namespace adjopinf

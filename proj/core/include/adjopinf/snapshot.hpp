#pragma once

#include <Eigen/Core>

namespace adjopinf {

/// States stacked column-wise over a strictly increasing time grid.
///
/// Column i of `states()` is the state at `times()[i]`. Immutable after
/// construction; the constructor validates shape, ordering and finiteness.
class SnapshotMatrix {
public:
    SnapshotMatrix() = default;
    SnapshotMatrix(Eigen::MatrixXd states, Eigen::VectorXd times);

    const Eigen::MatrixXd& states() const noexcept { return states_; }
    const Eigen::VectorXd& times() const noexcept { return times_; }

    Eigen::Index rows() const noexcept { return states_.rows(); }
    Eigen::Index count() const noexcept { return states_.cols(); }

    /// Columns `first .. first+len-1` with their time stamps.
    SnapshotMatrix slice(Eigen::Index first, Eigen::Index len) const;

private:
    Eigen::MatrixXd states_;
    Eigen::VectorXd times_;
};

}  // namespace adjopinf

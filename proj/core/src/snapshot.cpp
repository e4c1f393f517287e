#include "adjopinf/snapshot.hpp"

#include <sstream>

#include "adjopinf/error.hpp"

namespace adjopinf {

SnapshotMatrix::SnapshotMatrix(Eigen::MatrixXd states, Eigen::VectorXd times)
    : states_(std::move(states)), times_(std::move(times)) {
    if (states_.cols() != times_.size()) {
        std::ostringstream msg;
        msg << "snapshot matrix has " << states_.cols() << " columns but " << times_.size()
            << " time stamps";
        throw DimensionError(msg.str());
    }
    for (Eigen::Index i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw ConfigError("snapshot times must be strictly increasing");
        }
    }
    if (!states_.allFinite() || !times_.allFinite()) {
        throw ConfigError("snapshot matrix contains non-finite entries");
    }
}

SnapshotMatrix SnapshotMatrix::slice(Eigen::Index first, Eigen::Index len) const {
    if (first < 0 || len < 0 || first + len > count()) {
        throw DimensionError("snapshot slice out of range");
    }
    return SnapshotMatrix(states_.middleCols(first, len), times_.segment(first, len));
}

}  // namespace adjopinf

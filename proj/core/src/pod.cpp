#include "adjopinf/pod.hpp"

#include <sstream>

#include <Eigen/SVD>

#include "adjopinf/error.hpp"

namespace adjopinf {

double PodBasis::energy_fraction(Eigen::Index r) const {
    const double total = singular_values.squaredNorm();
    if (total == 0.0) return 0.0;
    return singular_values.head(r).squaredNorm() / total;
}

double PodBasis::tail_energy(Eigen::Index r) const {
    const Eigen::Index k = singular_values.size();
    return r >= k ? 0.0 : singular_values.tail(k - r).squaredNorm();
}

PodBasis PodBasis::truncated(Eigen::Index r) const {
    if (r < 1 || r > this->r()) throw ConfigError("cannot truncate POD basis to that rank");
    PodBasis out;
    out.modes = modes.leftCols(r);
    out.singular_values = singular_values;
    out.numerical_rank = numerical_rank;
    return out;
}

PodBasis compute_pod(const SnapshotMatrix& U, const RankRule& rule) {
    const Eigen::MatrixXd& X = U.states();
    if (X.size() == 0 || X.cwiseAbs().maxCoeff() == 0.0) {
        throw ConfigError("POD needs at least one nonzero snapshot");
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double cutoff = 1e-12 * sigma[0];
    Eigen::Index rank = 0;
    while (rank < sigma.size() && sigma[rank] > cutoff) ++rank;

    Eigen::Index r = 0;
    if (const auto* fixed = std::get_if<FixedRank>(&rule)) {
        if (fixed->r < 1 || fixed->r > rank) {
            std::ostringstream msg;
            msg << "requested POD rank " << fixed->r << " exceeds numerical rank " << rank;
            throw ConfigError(msg.str());
        }
        r = fixed->r;
    } else {
        const double eps = std::get<EnergyTolerance>(rule).tolerance;
        if (!(eps >= 0 && eps < 1)) throw ConfigError("energy tolerance must lie in [0, 1)");
        const double total = sigma.squaredNorm();
        double acc = 0.0;
        while (r < rank) {
            acc += sigma[r] * sigma[r];
            ++r;
            if (acc / total >= 1.0 - eps) break;
        }
    }

    PodBasis basis;
    basis.modes = svd.matrixU().leftCols(r);
    for (Eigen::Index j = 0; j < r; ++j) {
        Eigen::Index imax = 0;
        basis.modes.col(j).cwiseAbs().maxCoeff(&imax);
        if (basis.modes(imax, j) < 0) basis.modes.col(j) *= -1.0;
    }
    basis.singular_values = sigma;
    basis.numerical_rank = rank;
    return basis;
}

Eigen::MatrixXd project(const PodBasis& basis, const Eigen::MatrixXd& U) {
    if (U.rows() != basis.n()) {
        std::ostringstream msg;
        msg << "cannot project " << U.rows() << "-row snapshots onto a basis with " << basis.n()
            << " rows";
        throw DimensionError(msg.str());
    }
    return basis.modes.transpose() * U;
}

SnapshotMatrix project(const PodBasis& basis, const SnapshotMatrix& U) {
    return SnapshotMatrix(project(basis, U.states()), U.times());
}

Eigen::MatrixXd lift(const PodBasis& basis, const Eigen::MatrixXd& Q) {
    if (Q.rows() != basis.r()) {
        std::ostringstream msg;
        msg << "cannot lift " << Q.rows() << "-row reduced states with an r=" << basis.r()
            << " basis";
        throw DimensionError(msg.str());
    }
    return basis.modes * Q;
}

SnapshotMatrix lift(const PodBasis& basis, const SnapshotMatrix& Q) {
    return SnapshotMatrix(lift(basis, Q.states()), Q.times());
}

}  // namespace adjopinf

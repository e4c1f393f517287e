#include "adjopinf/opinf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

#include "adjopinf/error.hpp"

namespace adjopinf {

namespace {

using Svd = Eigen::BDCSVD<Eigen::MatrixXd>;

Svd decompose(const Eigen::MatrixXd& D) {
    return Svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

Eigen::Index numerical_rank(const Eigen::VectorXd& sigma, Eigen::Index rows, Eigen::Index cols) {
    if (sigma.size() == 0 || sigma[0] == 0.0) return 0;
    const double cutoff = static_cast<double>(std::max(rows, cols)) *
                          std::numeric_limits<double>::epsilon() * sigma[0];
    Eigen::Index rank = 0;
    while (rank < sigma.size() && sigma[rank] > cutoff) ++rank;
    return rank;
}

RomParams unpack(const Eigen::MatrixXd& X, Eigen::Index r, Eigen::Index m) {
    // X is (1 + r + r^2 + m) x r, one column per reduced equation.
    Eigen::VectorXd c = X.row(0).transpose();
    Eigen::MatrixXd A = X.middleRows(1, r).transpose();
    Eigen::MatrixXd H = X.middleRows(1 + r, r * r).transpose();
    Eigen::MatrixXd B = X.middleRows(1 + r + r * r, m).transpose();
    return RomParams(std::move(c), std::move(A), std::move(H), std::move(B));
}

RomParams solve_with(const Svd& svd, const Eigen::MatrixXd& Y, const OpinfHyperparams& hp,
                     Eigen::Index rows, Eigen::Index cols, Eigen::Index r, Eigen::Index m) {
    const Eigen::VectorXd& sigma = svd.singularValues();
    const Eigen::Index rank = numerical_rank(sigma, rows, cols);
    Eigen::Index keep = rank - hp.tsvd_discard;
    if (rank > 0) keep = std::max<Eigen::Index>(keep, 1);
    else keep = 0;
    Eigen::VectorXd filt = Eigen::VectorXd::Zero(sigma.size());
    for (Eigen::Index i = 0; i < keep; ++i) {
        filt[i] = sigma[i] / (sigma[i] * sigma[i] + hp.ridge_weight);
    }
    const Eigen::MatrixXd X =
        svd.matrixV() * filt.asDiagonal() * (svd.matrixU().transpose() * Y);
    return unpack(X, r, m);
}

void validate(const OpinfHyperparams& hp, Eigen::Index cols) {
    if (!(hp.ridge_weight >= 0)) throw ConfigError("ridge weight must be non-negative");
    if (hp.tsvd_discard < 0 || hp.tsvd_discard >= cols) {
        throw ConfigError("tsvd_discard must be in [0, column count)");
    }
    if (hp.stencil_order != 2 && hp.stencil_order != 6) {
        throw ConfigError("stencil order must be 2 or 6");
    }
}

}  // namespace

std::string OpinfHyperparams::describe() const {
    std::ostringstream os;
    os << "order=" << stencil_order << ";ridge=" << ridge_weight << ";discard=" << tsvd_discard;
    return os.str();
}

std::vector<double> fd_weights(std::span<const double> x, double z) {
    // Fornberg (1988), first derivative only.
    const std::size_t n = x.size();
    std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) {
                    c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) {
                c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = c[i][1];
    return w;
}

DerivativeEstimate estimate_derivatives(const SnapshotMatrix& Q, int order) {
    if (order != 2 && order != 6) throw ConfigError("stencil order must be 2 or 6");
    const Eigen::Index k = Q.count();
    if (k < order + 1) {
        std::ostringstream msg;
        msg << "order-" << order << " stencils need at least " << order + 1 << " samples, got "
            << k;
        throw ConfigError(msg.str());
    }
    const Eigen::VectorXd& t = Q.times();
    // Uniform thinning (index round(j (k-1)/(n-1))) leaves spacings that differ
    // by one source step, so weights are built from the actual offsets. Only
    // grossly irregular grids are refused.
    const double dt = (t[k - 1] - t[0]) / static_cast<double>(k - 1);
    double h_min = std::numeric_limits<double>::infinity(), h_max = 0.0;
    for (Eigen::Index i = 1; i < k; ++i) {
        h_min = std::min(h_min, t[i] - t[i - 1]);
        h_max = std::max(h_max, t[i] - t[i - 1]);
    }
    if (h_max > kMaxSpacingRatio * h_min) {
        std::ostringstream msg;
        msg << "finite-difference derivatives require a (near-)uniform time grid; spacing ratio "
            << h_max / h_min << " exceeds " << kMaxSpacingRatio;
        throw ConfigError(msg.str());
    }

    const int half = order / 2;
    DerivativeEstimate est;
    est.stencil_order = order;
    est.qdot.resize(Q.rows(), k);
    std::vector<double> offsets(static_cast<std::size_t>(order + 1));
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::Index first = std::clamp<Eigen::Index>(i - half, 0, k - 1 - order);
        for (int j = 0; j <= order; ++j) {
            offsets[static_cast<std::size_t>(j)] = (t[first + j] - t[i]) / dt;
        }
        const std::vector<double> w = fd_weights(offsets, 0.0);
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(Q.rows());
        for (int j = 0; j <= order; ++j) {
            acc += w[static_cast<std::size_t>(j)] * Q.states().col(first + j);
        }
        est.qdot.col(i) = acc / dt;
    }
    return est;
}

Eigen::MatrixXd assemble_data_matrix(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& S) {
    const Eigen::Index r = Q.rows(), k = Q.cols(), m = S.rows();
    if (m > 0 && S.cols() != k) {
        throw DimensionError("input samples and reduced states have different column counts");
    }
    Eigen::MatrixXd D(k, 1 + r + r * r + m);
    D.col(0).setOnes();
    D.middleCols(1, r) = Q.transpose();
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index l = 0; l < r; ++l) {
            D.col(1 + r + j * r + l) = (Q.row(j).array() * Q.row(l).array()).transpose();
        }
    }
    if (m > 0) D.rightCols(m) = S.transpose();
    return D;
}

RomParams solve_opinf(const Eigen::MatrixXd& D, const Eigen::MatrixXd& qdot,
                      const OpinfHyperparams& hp, Eigen::Index r, Eigen::Index m) {
    if (D.cols() != 1 + r + r * r + m) {
        throw DimensionError("data matrix column count does not match (r, m)");
    }
    if (qdot.rows() != r || qdot.cols() != D.rows()) {
        throw DimensionError("derivative matrix must be r x k with k = data matrix rows");
    }
    validate(hp, D.cols());
    return solve_with(decompose(D), qdot.transpose(), hp, D.rows(), D.cols(), r, m);
}

RomParams fit_opinf(const SnapshotMatrix& Q_train, const OpinfHyperparams& hp) {
    const DerivativeEstimate est = estimate_derivatives(Q_train, hp.stencil_order);
    const Eigen::MatrixXd D = assemble_data_matrix(Q_train.states(), Eigen::MatrixXd());
    return solve_opinf(D, est.qdot, hp, Q_train.rows(), 0);
}

double rollout_rse(const RomParams& theta, const SnapshotMatrix& window,
                   const IntegratorOptions& opts) {
    if (window.count() < 2) throw ConfigError("roll-out window needs at least two snapshots");
    const Eigen::VectorXd& t = window.times();
    try {
        const ReducedTrajectory traj = integrate_forward(
            theta, window.states().col(0), InputSignal{}, {t[0], t[t.size() - 1]}, opts);
        const Eigen::MatrixXd pred = traj.sample(t);
        const double denom = window.states().norm();
        if (denom == 0.0) throw ConfigError("roll-out reference is identically zero");
        const double value = (window.states() - pred).norm() / denom;
        return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
    } catch (const DivergenceError&) {
        return std::numeric_limits<double>::infinity();
    }
}

GridSearchResult grid_search(const SnapshotMatrix& train, const SnapshotMatrix& val,
                             const OpinfGrid& grid, const IntegratorOptions& opts) {
    if (train.count() == 0 || val.count() < 2) {
        throw ConfigError("grid search needs training data and at least two validation snapshots");
    }
    if (train.rows() != val.rows()) throw DimensionError("train/validation dimension mismatch");
    const Eigen::Index r = train.rows();
    const Eigen::MatrixXd D = assemble_data_matrix(train.states(), Eigen::MatrixXd());

    GridSearchResult best;
    bool found = false;
    const Svd svd = decompose(D);
    for (int order : grid.stencil_orders) {
        if (train.count() < order + 1) continue;
        const DerivativeEstimate est = estimate_derivatives(train, order);
        const Eigen::MatrixXd Y = est.qdot.transpose();
        for (double ridge : grid.ridge_weights) {
            for (int discard : grid.tsvd_discards) {
                OpinfHyperparams hp{ridge, discard, order};
                if (discard >= D.cols()) continue;
                validate(hp, D.cols());
                GridPointResult point{hp};
                RomParams theta = solve_with(svd, Y, hp, D.rows(), D.cols(), r, 0);
                point.val_rse = rollout_rse(theta, val, opts);
                point.diverged = !std::isfinite(point.val_rse);
                best.table.push_back(point);
                if (!point.diverged && (!found || point.val_rse < best.val_rse)) {
                    best.theta = std::move(theta);
                    best.hp = hp;
                    best.val_rse = point.val_rse;
                    found = true;
                }
            }
        }
    }
    if (!found) {
        throw Error("every OpInf grid point diverged on the validation window; "
                    "try stronger ridge regularization or more TSVD truncation");
    }
    return best;
}

std::string grid_report_csv(const GridSearchResult& result) {
    std::ostringstream os;
    os << "ridge,discard,order,val_rse,diverged\n" << std::setprecision(17);
    for (const auto& p : result.table) {
        os << p.hp.ridge_weight << ',' << p.hp.tsvd_discard << ',' << p.hp.stencil_order << ','
           << p.val_rse << ',' << (p.diverged ? 1 : 0) << '\n';
    }
    return os.str();
}

}  // namespace adjopinf

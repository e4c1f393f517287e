#include "adjopinf/rom.hpp"

#include <sstream>

#include <json.hpp>

#include "adjopinf/error.hpp"

namespace adjopinf {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DimensionError(what);
}

std::vector<double> row_major(const Eigen::MatrixXd& M) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(M.size()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) out.push_back(M(i, j));
    return out;
}

Eigen::MatrixXd from_row_major(const nlohmann::json& arr, Eigen::Index rows, Eigen::Index cols,
                               const char* name) {
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols) {
        std::ostringstream msg;
        msg << "field '" << name << "' must hold " << rows * cols << " numbers";
        throw ConfigError(msg.str());
    }
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            M(i, j) = arr[static_cast<std::size_t>(i * cols + j)].get<double>();
    return M;
}

}  // namespace

RomParams::RomParams(Eigen::VectorXd c, Eigen::MatrixXd A, Eigen::MatrixXd H, Eigen::MatrixXd B)
    : c_(std::move(c)), A_(std::move(A)), H_(std::move(H)), B_(std::move(B)) {
    const Eigen::Index r = c_.size();
    require(A_.rows() == r && A_.cols() == r, "A must be r x r");
    require(H_.rows() == r && H_.cols() == r * r, "H must be r x r^2");
    require(B_.rows() == r, "B must have r rows");
    if (!c_.allFinite() || !A_.allFinite() || !H_.allFinite() || !B_.allFinite()) {
        throw ConfigError("ROM parameters must be finite");
    }
    H_ = symmetrize_H(H_);
}

RomParams RomParams::zeros(Eigen::Index r, Eigen::Index m) {
    return RomParams(Eigen::VectorXd::Zero(r), Eigen::MatrixXd::Zero(r, r),
                     Eigen::MatrixXd::Zero(r, r * r), Eigen::MatrixXd::Zero(r, m));
}

Eigen::Index RomParams::dimension() const noexcept { return parameter_count(r(), m()); }

RomParams RomParams::from_vector(const Eigen::VectorXd& theta, Eigen::Index r, Eigen::Index m) {
    if (theta.size() != parameter_count(r, m)) {
        std::ostringstream msg;
        msg << "parameter vector has length " << theta.size() << ", expected "
            << parameter_count(r, m) << " for r=" << r << ", m=" << m;
        throw DimensionError(msg.str());
    }
    Eigen::Index off = 0;
    Eigen::VectorXd c = theta.segment(off, r);
    off += r;
    Eigen::MatrixXd A = Eigen::Map<const Eigen::MatrixXd>(theta.data() + off, r, r);
    off += r * r;
    Eigen::MatrixXd H = Eigen::Map<const Eigen::MatrixXd>(theta.data() + off, r, r * r);
    off += r * r * r;
    Eigen::MatrixXd B = Eigen::Map<const Eigen::MatrixXd>(theta.data() + off, r, m);
    return RomParams(std::move(c), std::move(A), std::move(H), std::move(B));
}

Eigen::VectorXd RomParams::to_vector() const {
    const Eigen::Index r = this->r(), m = this->m();
    Eigen::VectorXd out(dimension());
    Eigen::Index off = 0;
    out.segment(off, r) = c_;
    off += r;
    out.segment(off, r * r) = A_.reshaped();
    off += r * r;
    out.segment(off, r * r * r) = H_.reshaped();
    off += r * r * r;
    out.segment(off, r * m) = B_.reshaped();
    return out;
}

double RomParams::squared_norm() const {
    return c_.squaredNorm() + A_.squaredNorm() + H_.squaredNorm() + B_.squaredNorm();
}

std::string RomParams::to_json(int indent) const {
    nlohmann::json j;
    j["r"] = r();
    j["m"] = m();
    j["c"] = std::vector<double>(c_.data(), c_.data() + c_.size());
    j["A"] = row_major(A_);
    j["H"] = row_major(H_);
    j["B"] = row_major(B_);
    return j.dump(indent);
}

RomParams RomParams::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid ROM parameter JSON: ") + e.what());
    }
    try {
        const auto r = j.at("r").get<Eigen::Index>();
        const auto m = j.at("m").get<Eigen::Index>();
        if (r < 1 || m < 0) throw ConfigError("ROM JSON needs r >= 1 and m >= 0");
        Eigen::MatrixXd c = from_row_major(j.at("c"), r, 1, "c");
        return RomParams(c.col(0), from_row_major(j.at("A"), r, r, "A"),
                         from_row_major(j.at("H"), r, r * r, "H"),
                         from_row_major(j.at("B"), r, m, "B"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed ROM parameter JSON: ") + e.what());
    }
}

Eigen::VectorXd quadratic_term(const Eigen::MatrixXd& H, const Eigen::VectorXd& q) {
    const Eigen::Index r = q.size();
    require(H.cols() == r * r, "H column count must be r^2");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(H.rows());
    const double* h = H.data();
    const Eigen::Index rows = H.rows();
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index k = 0; k < r; ++k) {
            const double qjk = q[j] * q[k];
            const double* col = h + (j * r + k) * rows;
            for (Eigen::Index i = 0; i < rows; ++i) out[i] += col[i] * qjk;
        }
    }
    return out;
}

void autonomous_rhs_into(const RomParams& theta, const Eigen::VectorXd& q, Eigen::VectorXd& out) {
    const Eigen::Index r = theta.r();
    out.resize(r);
    const double* c = theta.c().data();
    const double* a = theta.A().data();
    const double* h = theta.H().data();
    for (Eigen::Index i = 0; i < r; ++i) out[i] = c[i];
    for (Eigen::Index l = 0; l < r; ++l) {
        const double ql = q[l];
        const double* col = a + l * r;
        for (Eigen::Index i = 0; i < r; ++i) out[i] += col[i] * ql;
    }
    // H is symmetric in (j, k): visit k >= j and double the off-diagonal pairs.
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index k = j; k < r; ++k) {
            const double qjk = (k == j ? 1.0 : 2.0) * q[j] * q[k];
            const double* col = h + (j * r + k) * r;
            for (Eigen::Index i = 0; i < r; ++i) out[i] += col[i] * qjk;
        }
    }
}

void jac_state_transpose_apply(const RomParams& theta, const Eigen::VectorXd& q,
                               const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    // [J^T v]_l = sum_i A(i,l) v_i + 2 sum_k q_k sum_i H(i, l r + k) v_i
    const Eigen::Index r = theta.r();
    out.resize(r);
    const double* a = theta.A().data();
    const double* h = theta.H().data();
    for (Eigen::Index l = 0; l < r; ++l) {
        double acc = 0.0;
        const double* col = a + l * r;
        for (Eigen::Index i = 0; i < r; ++i) acc += col[i] * v[i];
        double quad = 0.0;
        for (Eigen::Index k = 0; k < r; ++k) {
            const double* hc = h + (l * r + k) * r;
            double dot = 0.0;
            for (Eigen::Index i = 0; i < r; ++i) dot += hc[i] * v[i];
            quad += q[k] * dot;
        }
        out[l] = acc + 2.0 * quad;
    }
}

Eigen::VectorXd rhs(const Eigen::VectorXd& q, const Eigen::VectorXd& s, const RomParams& theta) {
    require(q.size() == theta.r(), "state dimension does not match the ROM");
    require(s.size() == theta.m(), "input dimension does not match the ROM");
    Eigen::VectorXd out(theta.r());
    autonomous_rhs_into(theta, q, out);
    if (theta.m() > 0) out.noalias() += theta.B() * s;
    return out;
}

Eigen::MatrixXd jac_state(const Eigen::VectorXd& q, const RomParams& theta) {
    const Eigen::Index r = theta.r();
    require(q.size() == r, "state dimension does not match the ROM");
    Eigen::MatrixXd J = theta.A();
    for (Eigen::Index l = 0; l < r; ++l) {
        J.col(l).noalias() += 2.0 * theta.H().middleCols(l * r, r) * q;
    }
    return J;
}

Eigen::MatrixXd symmetrize_H(const Eigen::MatrixXd& H_raw) {
    const Eigen::Index r = H_raw.rows();
    require(H_raw.cols() == r * r, "H must be r x r^2");
    Eigen::MatrixXd H(r, r * r);
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index k = 0; k < r; ++k) {
            H.col(j * r + k) = 0.5 * (H_raw.col(j * r + k) + H_raw.col(k * r + j));
        }
    }
    return H;
}

ReducedTrajectory integrate_forward(const RomParams& theta, const Eigen::VectorXd& q0,
                                    const InputSignal& input, TimeSpan span,
                                    const IntegratorOptions& opts, std::span<const double> stops) {
    require(q0.size() == theta.r(), "initial state dimension does not match the ROM");
    if (theta.m() > 0 && !input.fn) {
        throw ConfigError("ROM has an input operator but no input signal was given");
    }
    VectorField f;
    if (theta.m() == 0) {
        f = [&theta](double, const Eigen::VectorXd& q) -> Eigen::VectorXd {
            Eigen::VectorXd out(q.size());
            autonomous_rhs_into(theta, q, out);
            return out;
        };
    } else {
        f = [&theta, &input](double t, const Eigen::VectorXd& q) -> Eigen::VectorXd {
            return rhs(q, input(t), theta);
        };
    }
    return integrate(f, span.start, span.end, q0, opts, stops);
}

Eigen::VectorXd eval_trajectory(const ReducedTrajectory& traj, double t) { return traj(t); }

}  // namespace adjopinf

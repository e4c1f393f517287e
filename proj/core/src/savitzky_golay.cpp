#include "adjopinf/savitzky_golay.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "adjopinf/error.hpp"

namespace adjopinf {

namespace {

// Vandermonde of offsets (-half..half) or (0..window-1), columns x^0..x^order.
Eigen::MatrixXd vandermonde(const Eigen::VectorXd& x, int order) {
    Eigen::MatrixXd V(x.size(), order + 1);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double p = 1.0;
        for (int j = 0; j <= order; ++j) {
            V(i, j) = p;
            p *= x[i];
        }
    }
    return V;
}

}  // namespace

int adaptive_window(Eigen::Index k) {
    int w = static_cast<int>(std::lround(static_cast<double>(k) / 20.0));
    if (w % 2 == 0) ++w;
    return std::clamp(w, 7, 51);
}

Eigen::VectorXd savitzky_golay(const Eigen::VectorXd& y, int window, int polyorder) {
    const Eigen::Index k = y.size();
    if (window % 2 == 0 || window < 3) throw ConfigError("Savitzky-Golay window must be odd and >= 3");
    if (polyorder >= window) throw ConfigError("Savitzky-Golay order must be below the window");
    if (k < window) throw ConfigError("series shorter than the Savitzky-Golay window");
    const int half = window / 2;

    Eigen::VectorXd x(window);
    for (int i = 0; i < window; ++i) x[i] = i - half;
    const Eigen::MatrixXd V = vandermonde(x, polyorder);
    // Least-squares projector onto polynomials over the window.
    const Eigen::MatrixXd P = V * V.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));

    Eigen::VectorXd out(k);
    const Eigen::RowVectorXd center = P.row(half);
    for (Eigen::Index i = half; i < k - half; ++i) {
        out[i] = center.dot(y.segment(i - half, window));
    }
    // Edges: evaluate the fit of the first/last full window.
    const Eigen::VectorXd head = P * y.head(window);
    const Eigen::VectorXd tail = P * y.tail(window);
    out.head(half) = head.head(half);
    out.tail(half) = tail.tail(half);
    return out;
}

}  // namespace adjopinf

#pragma once

#include <Eigen/Core>

namespace adjopinf {

/// Least-squares polynomial smoothing over a sliding odd window. Interior
/// points use the centered convolution; the first and last half-windows are
/// evaluated from the polynomial fitted to the first/last full window.
Eigen::VectorXd savitzky_golay(const Eigen::VectorXd& y, int window, int polyorder);

/// clamp(odd(round(k/20)), 7, 51)
int adaptive_window(Eigen::Index k);

}  // namespace adjopinf

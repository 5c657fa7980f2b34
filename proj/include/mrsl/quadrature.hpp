#pragma once

#include <functional>

namespace mrsl {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
/// Subdivides until the summed error estimate is below
/// max(abs_tol, rel_tol * |value|). Throws NumericFailure carrying the
/// residual estimate when max_intervals is exhausted.
QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                                double rel_tol = 1e-12, double abs_tol = 0.0,
                                int max_intervals = 2000);

}  // namespace mrsl

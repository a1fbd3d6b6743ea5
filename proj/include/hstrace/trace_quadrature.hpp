#pragma once

#include <span>
#include <vector>

namespace hstrace {

struct PowerIntegral {
  double value = 0.0;
  /// d value / d vals[j]; empty unless requested.
  std::vector<double> gradient;
};

/// int_{x_0}^{x_n} x^a g(x) |v(x)|^t dx where v and g are the piecewise linear
/// interpolants of `vals` and `smooth` (g = 1 when `smooth` is empty) on
/// `nodes`, with nodes[0] >= 0 and a > -1. Each segment uses Gauss-Legendre
/// quadrature; a segment starting at 0 is integrated after x = h u^2 so the
/// algebraic endpoint behaviour of x^a is smoothed out.
PowerIntegral weighted_power_integral(std::span<const double> nodes, std::span<const double> vals,
                                      double a, double t, std::span<const double> smooth = {},
                                      bool with_gradient = false);

}  // namespace hstrace

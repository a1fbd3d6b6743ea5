#include "hstrace/trace_quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace hstrace {

namespace {

constexpr int kPoints = 12;

// Gauss-Legendre nodes/weights mapped to [0, 1].
struct UnitRule {
  std::array<double, kPoints> x{}, w{};
  UnitRule() {
    using G = boost::math::quadrature::gauss<double, kPoints>;
    const auto& ab = G::abscissa();
    const auto& wt = G::weights();
    int k = 0;
    for (std::size_t i = 0; i < ab.size(); ++i) {
      if (ab[i] == 0.0) {
        x[k] = 0.5;
        w[k++] = 0.5 * wt[i];
        continue;
      }
      x[k] = 0.5 * (1.0 - ab[i]);
      w[k++] = 0.5 * wt[i];
      x[k] = 0.5 * (1.0 + ab[i]);
      w[k++] = 0.5 * wt[i];
    }
  }
};

const UnitRule& unit_rule() {
  static const UnitRule rule;
  return rule;
}

}  // namespace

PowerIntegral weighted_power_integral(std::span<const double> nodes, std::span<const double> vals, double a,
                                      double t, std::span<const double> smooth, bool with_gradient) {
  if (nodes.size() != vals.size()) throw std::invalid_argument("nodes and values differ in size");
  if (!smooth.empty() && smooth.size() != nodes.size())
    throw std::invalid_argument("smooth factor size does not match nodes");
  if (!(a > -1.0)) throw std::invalid_argument("weight exponent must exceed -1");
  if (!(t >= 1.0)) throw std::invalid_argument("power must be >= 1");

  const UnitRule& rule = unit_rule();
  PowerIntegral out;
  if (with_gradient) out.gradient.assign(vals.size(), 0.0);

  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double x0 = nodes[k], x1 = nodes[k + 1], h = x1 - x0;
    const double g0 = smooth.empty() ? 1.0 : smooth[k];
    const double g1 = smooth.empty() ? 1.0 : smooth[k + 1];
    double seg = 0.0, d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      double x, jac;
      if (x0 == 0.0) {
        const double u = rule.x[i];
        x = h * u * u;
        jac = 2.0 * h * u;
      } else {
        x = x0 + h * rule.x[i];
        jac = h;
      }
      const double lam = (x - x0) / h;
      const double v = (1.0 - lam) * vals[k] + lam * vals[k + 1];
      const double g = (1.0 - lam) * g0 + lam * g1;
      const double base = rule.w[i] * jac * std::pow(x, a) * g;
      const double av = std::abs(v);
      seg += base * std::pow(av, t);
      if (with_gradient && av > 0.0) {
        const double dv = base * t * std::pow(av, t - 1.0) * (v > 0.0 ? 1.0 : -1.0);
        d0 += dv * (1.0 - lam);
        d1 += dv * lam;
      }
    }
    out.value += seg;
    if (with_gradient) {
      out.gradient[k] += d0;
      out.gradient[k + 1] += d1;
    }
  }
  return out;
}

}  // namespace hstrace

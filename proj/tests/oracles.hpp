#pragma once

// Reference values computed independently of the library: adaptive quadrature
// of closed-form fields and a self-contained log-gamma.

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace oracle {

inline double sphere_area(int N) { return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N); }

// Far-field products of overflowing and vanishing powers count as 0.
inline double finite_or_zero(double x) { return std::isfinite(x) ? x : 0.0; }

// int_0^inf int_0^inf f(z, r) dr dz
template <class F>
double quarter_plane(F f) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(
      [&](double z) {
        return finite_or_zero(q.integrate([&](double r) { return finite_or_zero(f(z, r)); }, 1e-13));
      },
      1e-12);
}

template <class F>
double half_line(F f) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate([&](double r) { return finite_or_zero(f(r)); }, 1e-14);
}

// Quantities of U = ((1 + z)^2 + r^2)^{-(N-1)/2} on the half-space over R^N.
struct BubbleIntegrals {
  double energy, trace_q, A, B, quotient, c;
};

inline BubbleIntegrals bubble_integrals(int N) {
  const double sigma = sphere_area(N);
  const double m = N - 1.0;
  const double q = 2.0 * N / (N - 1.0);
  auto rho2 = [](double z, double r) { return (1.0 + z) * (1.0 + z) + r * r; };
  BubbleIntegrals b{};
  b.energy = sigma * quarter_plane([&](double z, double r) {
               return m * m * std::pow(rho2(z, r), -static_cast<double>(N)) * std::pow(r, m);
             });
  b.A = sigma * quarter_plane([&](double z, double r) {
          return z * m * m * std::pow(rho2(z, r), -static_cast<double>(N)) * std::pow(r, m);
        });
  b.B = sigma * quarter_plane([&](double z, double r) {
          const double dz = m * (1.0 + z) * std::pow(rho2(z, r), -0.5 * (N + 1));
          return z * dz * dz * std::pow(r, m);
        });
  b.trace_q = sigma * half_line([&](double r) { return std::pow(1.0 + r * r, -0.5 * m * q) * std::pow(r, m); });
  b.quotient = b.energy / std::pow(b.trace_q, 2.0 / q);
  b.c = (N - 2.0) / (2.0 * N) + b.B / (N * b.A);
  return b;
}

// log Gamma(x) for x > 0: shift to x + 16, then the Stirling series.
inline double log_gamma(double x) {
  double shift = 0.0;
  while (x < 16.0) {
    shift -= std::log(x);
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12 - inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 * (1.0 / 1680 - inv2 / 1188))));
  return shift + (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

}  // namespace oracle

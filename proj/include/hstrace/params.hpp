#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hstrace {

/// Thrown when an iterative method stops without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_value, double last_residual)
      : std::runtime_error(what), last_value_(last_value), last_residual_(last_residual) {}

  double last_value() const noexcept { return last_value_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_value_;
  double last_residual_;
};

/// Boundary dimension N, singularity exponent s and the critical trace exponent
/// q = 2(N - s)/(N - 1). The ambient space is R^{N+1}.
class ProblemParams {
 public:
  /// Solver-grade parameters: requires N >= 2 and 0 <= s < 1.
  ProblemParams(int N, double s, double h0 = 0.0) : N_(N), s_(s), h0_(h0) {
    if (N < 2) throw std::invalid_argument("N must be >= 2");
    if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in [0,1)");
    if (!std::isfinite(h0)) throw std::invalid_argument("h0 must be finite");
  }

  int N() const noexcept { return N_; }
  double s() const noexcept { return s_; }
  double h0() const noexcept { return h0_; }
  double q() const noexcept { return critical_exponent(N_, s_); }

  static double critical_exponent(int N, double s) { return 2.0 * (N - s) / (N - 1); }

 private:
  int N_;
  double s_;
  double h0_;
};

/// Surface area of the unit sphere S^{N-1} in R^N.
inline double sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

}  // namespace hstrace

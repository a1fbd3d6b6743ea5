#pragma once

#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "hstrace/axi_grid.hpp"
#include "hstrace/params.hpp"

namespace hstrace {

struct IterationRecord {
  int iter = 0;
  double quotient = 0.0;
  double el_residual = 0.0;
  double norm_residual = 0.0;
};

struct GroundStateOptions {
  int max_iterations = 20000;
  /// Terminate once the quotient changed by less than this (relative) over `stall_window` iterations.
  double stall_tolerance = 1e-9;
  int stall_window = 20;
  /// Relative Euler-Lagrange residual target.
  double el_tolerance = 1e-4;
  /// Line search acceptance slack on the quotient.
  double descent_slack = 1e-12;
  std::function<void(const IterationRecord&)> on_iteration;
};

/// Discrete half-space minimizer, normalized so that the weighted trace
/// functional with the critical exponent equals one.
struct GroundState {
  ProblemParams params;
  AxiGrid grid;
  std::vector<double> w;
  double S_value = 0.0;
  /// int z_1 |grad w|^2 and int z_1 |d_{z_1} w|^2 over the half-space.
  double A = 0.0;
  double B = 0.0;
  double norm_residual = 0.0;
  double lambda = 0.0;
  double el_residual = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> history;
};

struct CriterionCoefficient {
  double c_value = 0.0;
  int N = 0;
  double s = 0.0;
  double A = 0.0;
  double B = 0.0;
};

struct MonotonicityReport {
  bool monotone = true;
  double worst_increment = 0.0;
};

/// Graded grid on [0, R]^2 used by default: 144 cells per direction with ratio
/// 2^{1/12}; each refinement level doubles the cells and takes the square root
/// of the ratio, so level k nodes contain level k - 1 nodes.
AxiGrid default_axi_grid(const ProblemParams& params, double R = 40.0, int refinement = 0);

/// The s = 0 extremal ((1 + z)^2 + r^2)^{-(N-1)/2}.
double bubble_profile(int N, double z, double r);

/// E(v) / (int r^{-s} |v|^q)^{2/q} on the grid; invariant under v -> t v.
double discrete_quotient(const AxiGrid& grid, const ProblemParams& params, const SparseForm& energy,
                         std::span<const double> v);

/// Minimizes the discrete trace quotient by Sobolev-preconditioned projected
/// gradient descent with backtracking, started from the s = 0 extremal.
/// Throws ConvergenceError on non-convergence and std::runtime_error when the
/// iterate collapses to zero.
GroundState compute_ground_state(const ProblemParams& params, const AxiGrid& grid,
                                 const GroundStateOptions& opts = {});

/// (int z_1 |grad v|^2, int z_1 |d_{z_1} v|^2) with the cell rule of the
/// energy form and z_1 taken at cell centres.
std::pair<double, double> weighted_energies(const AxiGrid& grid, std::span<const double> v);

/// |A - (1/2) int_{z=0} w^2| / A.
double pohozaev_residual(const AxiGrid& grid, std::span<const double> v);
double pohozaev_residual(const GroundState& gs);

CriterionCoefficient curvature_coefficient(const GroundState& gs);
CriterionCoefficient curvature_coefficient(int N, double s, double A, double B);

/// Checks that v(z, .) is non-increasing in r on every z row, up to `tol`.
MonotonicityReport radial_monotonicity_check(const AxiGrid& grid, std::span<const double> v,
                                             double tol = 1e-8);
MonotonicityReport radial_monotonicity_check(const GroundState& gs);

/// Least-squares slope of log v(0, r) against log r for r in [R/4, R/2].
/// Throws std::invalid_argument if the window holds fewer than 10 nodes.
double decay_fit(const AxiGrid& grid, std::span<const double> v);
double decay_fit(const GroundState& gs);

/// The s = 1 constant 2 Gamma((N+1)/4)^2 / Gamma((N-1)/4)^2.
double evaluate_SN1(int N);

/// Radius holding half of int |x|^{-s} w^q over the boundary trace of w.
double ground_state_half_mass_radius(const GroundState& gs);

/// Removes an error term c R^{-order} from two truncated values.
double extrapolate_truncation(double R1, double v1, double R2, double v2, double order);

/// Iteration history as CSV (iter, quotient, el_residual, norm_residual)
/// followed by a summary header and record.
void write_ground_state_csv(const GroundState& gs, std::ostream& out);

}  // namespace hstrace

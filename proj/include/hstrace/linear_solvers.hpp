#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hstrace/axi_grid.hpp"

namespace hstrace {

struct CgOptions {
  int max_iterations = 20000;
  /// Iterations between recomputations of the true residual.
  int restart = 500;
  /// Nodes held at zero (constraint elimination); empty means none.
  std::vector<bool> fixed;
  /// Optional initial guess; zero when empty.
  Eigen::VectorXd x0;
};

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
  /// Relative true residual at each restart, first entry at the start.
  std::vector<double> restart_residuals;
};

/// Jacobi-preconditioned conjugate gradients on the free nodes of `form`.
/// Reductions run in index order, so results are reproducible bit for bit.
/// Throws ConvergenceError when the tolerance is not reached and
/// std::domain_error when a non-positive curvature direction shows up.
CgResult solve_spd(const SparseForm& form, const Eigen::VectorXd& rhs, double tol,
                   const CgOptions& opts = {});

/// Direct solver for the Dirichlet energy on a tensor AxiGrid with the
/// truncation nodes eliminated, by simultaneous diagonalization of the 1D
/// stiffness/mass pencils.
class TensorDirichletSolver {
 public:
  explicit TensorDirichletSolver(const AxiGrid& grid);

  /// Returns x with x = 0 on Dirichlet nodes and (K x)_i = b_i on free nodes.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  /// Dense map from a load on the free boundary row z = 0 to the solution on that
  /// row: T(j, k) = (K^{-1} e_k)_j for j, k < nr.
  Eigen::MatrixXd boundary_operator() const;

 private:
  int nzf_, nrf_, nrn_;
  double sigma_;
  Eigen::MatrixXd vz_, vr_;
  Eigen::MatrixXd inv_denominator_;
};

}  // namespace hstrace

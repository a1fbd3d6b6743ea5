#include "hstrace/linear_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace hstrace {

namespace {

double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

void apply(const SparseMatrix& Q, const std::vector<bool>& fixed, const Eigen::VectorXd& x,
           Eigen::VectorXd& y) {
  for (Eigen::Index row = 0; row < Q.outerSize(); ++row) {
    if (!fixed.empty() && fixed[row]) {
      y[row] = 0.0;
      continue;
    }
    double acc = 0.0;
    for (SparseMatrix::InnerIterator it(Q, row); it; ++it)
      if (fixed.empty() || !fixed[it.col()]) acc += it.value() * x[it.col()];
    y[row] = acc;
  }
}

Eigen::MatrixXd dense(const Tridiagonal& t, int n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    m(k, k) = t.diag[k];
    if (k + 1 < n) m(k, k + 1) = m(k + 1, k) = t.off[k];
  }
  return m;
}

}  // namespace

CgResult solve_spd(const SparseForm& form, const Eigen::VectorXd& rhs, double tol, const CgOptions& opts) {
  const SparseMatrix& Q = form.Q;
  const Eigen::Index n = Q.rows();
  if (rhs.size() != n) throw std::invalid_argument("rhs size does not match form");
  const std::vector<bool>& fixed = opts.fixed;
  if (!fixed.empty() && static_cast<Eigen::Index>(fixed.size()) != n)
    throw std::invalid_argument("constraint mask size does not match form");

  Eigen::VectorXd b = rhs;
  for (Eigen::Index k = 0; k < n; ++k)
    if (!fixed.empty() && fixed[k]) b[k] = 0.0;

  Eigen::VectorXd inv_diag(n);
  double scale = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double d = Q.coeff(k, k);
    scale = std::max(scale, std::abs(d));
    inv_diag[k] = (d > 0.0 && (fixed.empty() || !fixed[k])) ? 1.0 / d : 0.0;
  }

  CgResult res;
  res.x = opts.x0.size() == n ? opts.x0 : Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k)
    if (!fixed.empty() && fixed[k]) res.x[k] = 0.0;

  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    res.x.setZero();
    return res;
  }

  Eigen::VectorXd r(n), z(n), p(n), Ap(n);
  int it = 0;
  double rel = 0.0;
  while (true) {
    apply(Q, fixed, res.x, Ap);
    r = b - Ap;
    rel = std::sqrt(dot(r, r)) / bnorm;
    res.restart_residuals.push_back(rel);
    if (rel <= tol) break;
    if (it >= opts.max_iterations) break;

    z = inv_diag.cwiseProduct(r);
    p = z;
    double rz = dot(r, z);
    for (int inner = 0; inner < opts.restart && it < opts.max_iterations; ++inner, ++it) {
      apply(Q, fixed, p, Ap);
      const double curvature = dot(p, Ap);
      if (curvature < 0.0)
        throw std::domain_error("solve_spd: negative curvature direction encountered");
      if (!(curvature > 1e-14 * dot(p, p) * scale))
        throw ConvergenceError("solve_spd: stagnation along a null direction", 0.0, rel);
      const double alpha = rz / curvature;
      res.x += alpha * p;
      r -= alpha * Ap;
      rel = std::sqrt(dot(r, r)) / bnorm;
      if (rel <= tol) {
        ++it;
        break;
      }
      z = inv_diag.cwiseProduct(r);
      const double rz_new = dot(r, z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
  }
  res.iterations = it;
  res.relative_residual = rel;
  if (rel > tol)
    throw ConvergenceError("solve_spd: no convergence within iteration limit", 0.0, rel);
  return res;
}

TensorDirichletSolver::TensorDirichletSolver(const AxiGrid& grid)
    : nzf_(grid.nz()), nrf_(grid.nr()), nrn_(grid.nr() + 1), sigma_(sphere_area(grid.N)) {
  // The last node in each direction is Dirichlet; the leading blocks are the free pencils.
  const Eigen::MatrixXd kz = dense(weighted_stiffness_1d(grid.z_nodes, 0.0), nzf_);
  const Eigen::MatrixXd mz = dense(weighted_mass_1d(grid.z_nodes, 0.0), nzf_);
  const Eigen::MatrixXd kr = dense(weighted_stiffness_1d(grid.r_nodes, grid.N - 1.0), nrf_);
  const Eigen::MatrixXd mr = dense(weighted_mass_1d(grid.r_nodes, grid.N - 1.0), nrf_);

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ez(kz, mz);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> er(kr, mr);
  if (ez.info() != Eigen::Success || er.info() != Eigen::Success)
    throw std::runtime_error("TensorDirichletSolver: pencil diagonalization failed");
  vz_ = ez.eigenvectors();
  vr_ = er.eigenvectors();
  inv_denominator_.resize(nzf_, nrf_);
  for (int a = 0; a < nzf_; ++a)
    for (int b = 0; b < nrf_; ++b)
      inv_denominator_(a, b) = 1.0 / (sigma_ * (ez.eigenvalues()[a] + er.eigenvalues()[b]));
}

Eigen::VectorXd TensorDirichletSolver::solve(const Eigen::VectorXd& b) const {
  Eigen::MatrixXd B(nzf_, nrf_);
  for (int i = 0; i < nzf_; ++i)
    for (int j = 0; j < nrf_; ++j) B(i, j) = b[static_cast<Eigen::Index>(i) * nrn_ + j];
  const Eigen::MatrixXd C = (vz_.transpose() * B * vr_).cwiseProduct(inv_denominator_);
  const Eigen::MatrixXd X = vz_ * C * vr_.transpose();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nzf_ + 1) * nrn_);
  for (int i = 0; i < nzf_; ++i)
    for (int j = 0; j < nrf_; ++j) x[static_cast<Eigen::Index>(i) * nrn_ + j] = X(i, j);
  return x;
}

Eigen::MatrixXd TensorDirichletSolver::boundary_operator() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(nrf_);
  for (int a = 0; a < nzf_; ++a) d += vz_(0, a) * vz_(0, a) * inv_denominator_.row(a).transpose();
  return vr_ * d.asDiagonal() * vr_.transpose();
}

}  // namespace hstrace

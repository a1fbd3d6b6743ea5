#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "hstrace/params.hpp"
#include "hstrace/trace_quadrature.hpp"

namespace hstrace {

/// Nodes 0 = x_0 < ... < x_n = R whose spacing grows by `ratio` per cell.
/// ratio == 1 gives a uniform grid.
std::vector<double> graded_nodes(double R, int cells, double ratio);

/// Tensor grid on the quarter plane {z >= 0, r >= 0} truncated at R, carrying
/// the measure sigma_{N-1} r^{N-1} dr dz of cylindrically symmetric fields in
/// R^{N+1}_+. Fields are stored node-wise, index i*(nr+1)+j with i along z and
/// j along r; row i = 0 is the boundary {z = 0}. Nodes at z = R or r = R carry
/// the homogeneous Dirichlet condition of the truncation.
struct AxiGrid {
  int N = 0;
  double s = 0.0;
  double R_trunc = 0.0;
  std::vector<double> z_nodes;
  std::vector<double> r_nodes;
  /// Per cell (i, j), exact sigma * dz * int r^{N-1} dr; size nz*nr.
  std::vector<double> vol_weights;
  /// Per boundary node j: sigma * int r^{N-1-s} phi_j(r) dr with phi_j the hat function.
  std::vector<double> trace_weights;
  /// Per boundary cell j: sigma * int_{r_j}^{r_{j+1}} r^{N-1-s} dr (closed form).
  std::vector<double> trace_cell_weights;

  int nz() const { return static_cast<int>(z_nodes.size()) - 1; }
  int nr() const { return static_cast<int>(r_nodes.size()) - 1; }
  std::size_t size() const { return z_nodes.size() * r_nodes.size(); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * r_nodes.size() + static_cast<std::size_t>(j);
  }
  bool is_dirichlet(int i, int j) const { return i == nz() || j == nr(); }
  /// Mask of Dirichlet nodes, usable with solve_spd.
  std::vector<bool> dirichlet_mask() const;
};

AxiGrid build_axi_grid(const ProblemParams& params, double R, int nz, int nr, double grading);

/// Three-diagonal 1D finite element matrix; lower == upper by symmetry.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[k] couples nodes k and k+1
};

/// int x^p phi_a' phi_b' dx on the given nodes.
Tridiagonal weighted_stiffness_1d(std::span<const double> nodes, double p);
/// int x^p phi_a phi_b dx on the given nodes.
Tridiagonal weighted_mass_1d(std::span<const double> nodes, double p);

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A symmetric quadratic form over grid nodes, with a tag naming what it represents.
struct SparseForm {
  SparseMatrix Q;
  std::string descriptor;
};

/// Q1 discretization of sigma * int r^{N-1} (|d_z v|^2 + |d_r v|^2) over the
/// whole grid (no constraints applied).
SparseForm assemble_dirichlet_energy(const AxiGrid& grid, const ProblemParams& params);

/// sigma * int r^{N-1-s} |v(0, r)|^t dr, integrating the piecewise linear
/// trace exactly against the singular weight (per-cell product quadrature).
double trace_functional(const AxiGrid& grid, const ProblemParams& params,
                        std::span<const double> v, double t);

/// Values of v on the boundary row z = 0.
std::vector<double> boundary_trace(const AxiGrid& grid, std::span<const double> v);

/// trace_functional together with its gradient with respect to the boundary row values.
PowerIntegral trace_power(const AxiGrid& grid, std::span<const double> v, double t, bool with_gradient);

/// sigma * int r^{N-1} v(0, r)^2 dr with the consistent (exact for piecewise
/// linear traces) weighted mass matrix.
double boundary_mass(const AxiGrid& grid, std::span<const double> v);

/// Samples f(z, r) at every grid node.
template <typename F>
std::vector<double> sample(const AxiGrid& grid, F&& f) {
  std::vector<double> v(grid.size());
  for (int i = 0; i <= grid.nz(); ++i)
    for (int j = 0; j <= grid.nr(); ++j) v[grid.index(i, j)] = f(grid.z_nodes[i], grid.r_nodes[j]);
  return v;
}

}  // namespace hstrace

#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hstrace/axi_grid.hpp"
#include "hstrace/geometry.hpp"
#include "hstrace/halfspace.hpp"
#include "hstrace/params.hpp"

namespace hstrace {

/// Boundary potential h(d) = h0 + slope * d on Gamma_2, d the geodesic distance to 0.
struct Potential {
  double h0 = 0.0;
  double slope = 0.0;
  double operator()(double d) const { return h0 + slope * d; }
};

struct DomainResolution {
  /// Geometric rings between the innermost radius and R_Omega.
  int radial = 240;
  /// Angular cells between the boundary patch and the symmetry axis.
  int angular = 24;
  /// Ratio of consecutive ring radii.
  double grading = 1.0594630943592953;  // 2^{1/12}
};

/// Axisymmetric domain {F(y) : |y| < R_Omega, y^1 > 0} in Fermi coordinates of the
/// boundary patch, meshed in its meridian half-plane. Nodes sit on rings
/// |y| = radii[k] at angles theta_l from the patch (theta = 0) to the axis
/// (theta = pi/2); node 0 is the origin. Gamma_2 is the patch {y^1 = 0},
/// Gamma_1 the outer ring |y| = R_Omega, which also owns the interface node.
struct DomainMesh {
  int N = 0;
  BoundarySurface surface = BoundarySurface::flat(3, 1.0);
  double R_omega = 0.0;
  Potential potential;
  int n_radial = 0;
  int n_angular = 0;
  std::vector<double> radii;   // k = 0..n_radial, radii[0] = 0
  std::vector<double> angles;  // l = 0..n_angular
  std::vector<double> z, rho;  // meridian-plane node positions
  std::vector<double> y1, t;   // Fermi coordinates of the nodes
  std::vector<std::array<int, 3>> triangles;
  /// Nodes on {y^1 = 0} ordered by distance, ending with the interface node.
  std::vector<int> patch_nodes;
  std::vector<int> gamma2;  // patch_nodes without the interface node
  std::vector<int> gamma1;
  std::vector<double> d_values;  // geodesic distance at gamma2 nodes
  std::vector<double> h_values;  // potential at gamma2 nodes
  /// Radial coordinate r(d) on the patch at every patch node.
  std::vector<double> patch_rho;

  std::size_t size() const { return z.size(); }
  int node(int k, int l) const { return k == 0 ? 0 : 1 + (k - 1) * (n_angular + 1) + l; }
};

/// Throws std::invalid_argument when the patch is shorter than R_Omega or the
/// normal coordinate leaves the injectivity range (R_Omega * max curvature >= 1),
/// and std::runtime_error for degenerate or inverted cells.
DomainMesh build_domain_mesh(const BoundarySurface& surface, double R_omega, const DomainResolution& res,
                             const Potential& h);

/// Discrete forms on a mesh: Dirichlet energy sigma int |grad u|^2 rho^{N-1}, the
/// Gamma_2 potential term sigma int h u^2 r^{N-1} dd, the volume mass and the
/// weighted Gamma_2 functional int d^{-s} |u|^t.
class DomainForms {
 public:
  explicit DomainForms(const DomainMesh& mesh);

  const DomainMesh& mesh() const { return *mesh_; }
  const SparseMatrix& stiffness() const { return K_; }
  const SparseMatrix& potential_mass() const { return Mh_; }
  const SparseMatrix& volume_mass() const { return M_; }

  double energy(std::span<const double> u) const;
  /// sigma int_{Gamma_2} d^{-s} |u|^t dS, exact for the piecewise linear trace
  /// and the linearly interpolated factor (r/d)^{N-1}.
  PowerIntegral gamma2_power(std::span<const double> u, double s, double t, bool with_gradient = false) const;
  /// energy / (Gamma_2 functional with exponent q)^{2/q}
  double quotient(std::span<const double> u, const ProblemParams& params) const;

 private:
  const DomainMesh* mesh_;
  SparseMatrix K_, Mh_, M_;
  std::vector<double> smooth_;  // (r/d)^{N-1} at patch nodes
  std::vector<double> patch_d_;
};

/// Smallest generalized eigenvalue of (K + M_h, K + M), over functions vanishing on
/// Gamma_1 when `use_dirichlet_subspace` is set. Throws ConvergenceError when the
/// eigen-iteration fails.
double coercivity_margin(const DomainMesh& mesh, bool use_dirichlet_subspace);

struct ElResiduals {
  /// |(K u)_interior| / |(K u)_{Gamma_2}|
  double interior = 0.0;
  /// |(K + M_h) u - mu b(u)| / |mu b(u)| on Gamma_2, b the q-functional gradient over q
  double flux = 0.0;
  /// max |u| on Gamma_1
  double gamma1 = 0.0;
};

struct MixedMinimizer {
  std::vector<double> u;
  double mu_value = 0.0;
  ElResiduals el_residuals;
  double norm_residual = 0.0;
  std::vector<IterationRecord> iterations;
};

struct DomainSolveOptions {
  bool use_dirichlet_subspace = true;
  int max_iterations = 20000;
  double el_tolerance = 1e-4;
  double stall_tolerance = 1e-10;
  int stall_window = 50;
  double descent_slack = 1e-12;
  /// Width of the initial profile (1 + (d / width)^2)^{-(N-1)/2}, relative to R_Omega.
  double initial_width = 0.1;
};

/// Minimizes the mixed quotient over the Gamma_1-vanishing subspace (or all of
/// H^1 when the flag is off) by Sobolev-gradient descent on the Gamma_2 trace,
/// with the interior eliminated by the discrete harmonic extension. Throws
/// std::domain_error when the form is not coercive and ConvergenceError when the
/// EL residual stays above 10x the tolerance.
MixedMinimizer compute_mu(const DomainMesh& mesh, const ProblemParams& params, const DomainSolveOptions& opts = {});

/// Residuals of the mixed Euler-Lagrange system for any field on the mesh, with
/// mu the quotient multiplier energy / functional.
ElResiduals el_residual(const DomainMesh& mesh, const ProblemParams& params, std::span<const double> u);

/// Geodesic radius r with int_{Gamma_2 cap {d < r}} d^{-s}|u|^q = half the total.
double half_mass_radius(const DomainMesh& mesh, const ProblemParams& params, std::span<const double> u);

struct BlowupField {
  double r_n = 0.0;
  AxiGrid grid;
  std::vector<double> w;
  /// sigma int_0^1 r^{N-1-s} w(0, r)^q dr
  double unit_ball_mass = 0.0;
};

/// w_n(z) = r_n^{(N-1)/2} u(F(r_n z)) on a reference half-space grid of radius
/// `reference_radius`; points outside the domain read 0. Throws
/// std::out_of_range when r_n * reference grid leaves the chart.
BlowupField blowup_rescale(const DomainMesh& mesh, const ProblemParams& params, std::span<const double> u,
                           double r_n, double reference_radius = 4.0, int cells = 64);

/// Relative L^2 distance (boundary trace, weight r^{N-1}) between a blow-up field
/// and the half-space ground state dilated to the same half-mass radius.
double distance_to_bubble(const BlowupField& blowup, const GroundState& gs);

struct CriterionReport {
  double c_value = 0.0;
  double H0 = 0.0;
  double h0 = 0.0;
  double lhs = 0.0;
  bool satisfied = false;
  double mu_value = 0.0;
  double S_value = 0.0;
  double gap = 0.0;
};

CriterionReport criterion_report(const CriterionCoefficient& c, double H0, double h0, double mu_value,
                                 double S_value);

/// Value of u at Fermi coordinates (t, y1) by linear interpolation on the
/// logical (radius, angle) cells; 0 outside the domain.
double interpolate_field(const DomainMesh& mesh, std::span<const double> u, double t, double y1);

}  // namespace hstrace

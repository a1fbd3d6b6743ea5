#pragma once

#include <array>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hstrace/domain.hpp"
#include "hstrace/halfspace.hpp"

namespace hstrace {

/// Continuous extension of a discrete ground state, dilated to unit half-mass
/// radius: w(z) = l^{(N-1)/2} w_h(l z) with l the half-mass radius of the grid
/// field w_h. The grid field is interpolated bilinearly up to half the truncation
/// radius; beyond it w(rho, theta) = w(anchor, theta) (anchor / rho)^p along each
/// ray, with p the negated boundary decay exponent (N - 1 when the fit fails).
class HalfSpaceField {
 public:
  explicit HalfSpaceField(const GroundState& gs);

  double operator()(double z, double r) const;
  /// (d/dz, d/dr)
  std::array<double, 2> gradient(double z, double r) const;

  double anchor_radius() const { return anchor_ / scale_; }
  double tail_exponent() const { return p_; }
  /// Half-mass radius l of the grid field.
  double dilation() const { return scale_; }
  /// int z_1 |grad w|^2 and int z_1 |d_{z_1} w|^2 for the dilated field.
  double A() const { return gs_->A / scale_; }
  double B() const { return gs_->B / scale_; }
  const GroundState& ground_state() const { return *gs_; }

 private:
  double bilinear(double z, double r) const;
  std::array<double, 2> bilinear_gradient(double z, double r) const;
  const GroundState* gs_;
  double scale_;
  double anchor_;  // in grid units
  double p_;
};

/// Smooth cutoff equal to 1 for |y| <= inner and 0 for |y| >= outer, with the
/// quintic ramp 1 - (10 x^3 - 15 x^4 + 6 x^5) in between.
struct Cutoff {
  double inner = 0.5;
  double outer = 1.0;
  double operator()(double radius) const;
};

struct TestFunctionField {
  double epsilon = 0.0;
  Cutoff eta;
  /// u_eps(F(y)) = eta(|y|) eps^{-(N-1)/2} w(y / eps) at every mesh node.
  std::vector<double> field;
};

/// Throws std::invalid_argument when the cutoff leaves the mesh (outer > R_Omega),
/// when the mesh and ground state dimensions differ, or when eps (the bubble
/// half-mass radius) does not fit inside the inner cutoff radius.
TestFunctionField build_test_function(const HalfSpaceField& w, const DomainMesh& mesh, double epsilon,
                                      const Cutoff& eta);

inline constexpr int kRhoTerms = 7;

/// Terms of the expansion remainder at (eps, r), in order:
///  eps^2 int_{B_{r/eps}} |x|^2 |grad_x w|^2,  eps^3 int_{|x|<r/eps} |x|^2 w^2,
///  eps int_{r/2eps<|x|<r/eps} w^2,  eps^2 int_{B_{r/eps} \ B_{r/2eps}} w^2,
///  int_{|x|>r/eps} |x|^{-s} w^q,  eps^2 int_{|x|<r/eps} |x|^{2-s} w^q,
///  int_{R^{N+1}_+ \ B_{r/2eps}} |grad w|^2.
std::array<double, kRhoTerms> rho_terms(const HalfSpaceField& w, double epsilon, double r);

struct ExpansionReport {
  int N = 0;
  double s = 0.0;
  double H0 = 0.0;
  double h0 = 0.0;
  double A = 0.0;
  double B = 0.0;
  double S_value = 0.0;
  std::vector<double> eps_list;
  std::vector<double> J_values;
  std::vector<std::array<double, kRhoTerms>> rho_components;
  double fit_intercept = 0.0;
  double fit_slope = 0.0;
  double theory_slope = 0.0;
  /// |fit_slope - theory_slope| / |theory_slope|; NaN when theory_slope == 0.
  double slope_rel_error = 0.0;
  std::vector<std::string> warnings;
};

/// ((N - 2)/N H0 + 2 h0) A + (2/N) H0 B
double theory_slope(int N, double H0, double h0, double A, double B);

/// Epsilon is measured in bubble half-mass radii, and the sweeps are multiplied by
/// this factor: the O(eps^2) cutoff terms have a large constant for N = 3 and only
/// fall an order of magnitude below the first-order term at this scale.
inline constexpr double kEpsScale = 1.0 / 256.0;

/// {0.2, 0.141, 0.1, 0.071, 0.05} * r0 * kEpsScale
std::vector<double> default_eps_list(double r0);
/// {0.2, 0.1, 0.05, 0.025} * r0 * kEpsScale
std::vector<double> dyadic_eps_list(double r0);

/// J(u_eps) for every eps (strictly decreasing, at least 4 values spanning a
/// factor 4), with a least-squares line J = a + b eps through the smaller half of
/// the list. Non-monotone J values are reported in `warnings`.
ExpansionReport sweep_J(const HalfSpaceField& w, const DomainMesh& mesh, std::span<const double> eps_list,
                        const Cutoff& eta);

/// (int z_1 |grad w|^2, 1/2 int_{boundary} w^2)
std::pair<double, double> pohozaev_boundary_mass(const GroundState& gs);

/// Rows (eps, J, rho_1..rho_7) followed by the fit summary.
void write_expansion_csv(const ExpansionReport& rep, std::ostream& out);

}  // namespace hstrace

#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hstrace {

enum class ProfileKind { flat, paraboloid, sphere };

/// Axisymmetric boundary patch z_1 = phi(|x|) in R^{N+1} = {(z_1, x) : x in R^N},
/// with phi(0) = phi'(0) = 0. The interior unit normal is
/// orientation * (1, -phi'(|x|) x/|x|) / sqrt(1 + phi'^2); orientation +1 puts the
/// domain above the graph.
class BoundarySurface {
 public:
  static BoundarySurface flat(int N, double patch_radius, int orientation = 1);
  /// phi(rho) = kappa rho^2 / 2.
  static BoundarySurface paraboloid(int N, double kappa, double patch_radius, int orientation = 1);
  /// phi(rho) = a - sqrt(a^2 - rho^2) for a sphere of radius a; patch_radius <= a.
  static BoundarySurface sphere(int N, double radius, double patch_radius, int orientation = 1);

  int N() const { return N_; }
  ProfileKind kind() const { return kind_; }
  /// kappa for a paraboloid, the radius for a sphere, 0 for the plane.
  double shape_parameter() const { return param_; }
  double patch_radius() const { return patch_; }
  int normal_orientation() const { return orientation_; }
  /// Sum of the principal curvatures at 0 for the interior normal: -orientation * N * phi''(0).
  double H0() const { return H0_; }
  /// Largest principal curvature magnitude over the patch.
  double max_principal_curvature() const;

  double phi(double rho) const;
  double dphi(double rho) const;
  double d2phi(double rho) const;
  /// cos and sin of the meridian tangent angle, atan(phi'(rho)), in closed form.
  double cos_tilt(double rho) const;
  double sin_tilt(double rho) const;
  /// Signed curvature of the meridian curve phi''/(1 + phi'^2)^{3/2}.
  double meridian_curvature(double rho) const;

  /// Same profile with the normal flipped.
  BoundarySurface flipped() const;

 private:
  BoundarySurface(int N, ProfileKind kind, double param, double patch, int orientation);
  int N_;
  ProfileKind kind_;
  double param_;
  double patch_;
  int orientation_;
  double H0_;
};

/// Closed-form H0, cross-checked against the finite-difference shape operator;
/// throws std::logic_error when the two differ by more than 1e-6.
double mean_curvature_at_origin(const BoundarySurface& surface);

/// N x N matrix <dN[E_i], E_j> at the origin by fourth-order central differences
/// of the interior normal field, with E_i the coordinate directions of x.
Eigen::MatrixXd shape_operator_fd(const BoundarySurface& surface, double step = 1e-3);

/// Meridian arclength int_0^rho sqrt(1 + phi'(t)^2) dt.
double boundary_geodesic_distance(const BoundarySurface& surface, double rho);

/// Position of a point of the meridian half-plane (z_1, rho).
struct MeridianPoint {
  double z = 0.0;
  double rho = 0.0;
};

/// Fermi chart F(y) = f(y~) + y^1 N(f(y~)), where f is the boundary exponential
/// map at 0. The meridian (rho, z, tangent angle) is integrated with RK4 in
/// arclength with step patch_radius / 2048 and tabulated.
class FermiChart {
 public:
  explicit FermiChart(const BoundarySurface& surface);

  const BoundarySurface& surface() const { return surface_; }
  /// Arclength of the meridian from 0 to the patch edge.
  double meridian_length() const { return length_; }

  /// Boundary point at arclength t along a meridian: (z, rho) and tangent angle.
  std::array<double, 3> meridian(double t) const;

  /// Meridian-plane image of geodesic distance t and normal coordinate y1.
  /// Requires 0 <= t <= meridian_length() and |y1| * max principal curvature < 1
  /// (before the first focal point).
  MeridianPoint point(double t, double y1) const;

  /// Ambient image of y = (y^1, y~) in R^{N+1}; y has N + 1 entries.
  /// Rejects |y~| > meridian_length() and |y^1| * |H0| >= 1/2.
  Eigen::VectorXd operator()(std::span<const double> y) const;

  /// Same map without the chart-size checks (derivatives near the edge).
  Eigen::VectorXd map_unchecked(std::span<const double> y) const;

 private:
  BoundarySurface surface_;
  double step_;
  double length_;
  std::vector<std::array<double, 3>> table_;  // (rho, z, psi) at t = k * step_
};

/// Convenience wrapper around FermiChart.
Eigen::VectorXd fermi_chart(const BoundarySurface& surface, std::span<const double> y);

/// Chart metric g_ij = <dF/dy_i, dF/dy_j> by fourth-order central differences.
struct MetricSample {
  std::vector<double> y;
  Eigen::MatrixXd g;
};
MetricSample metric_at(const FermiChart& chart, std::span<const double> y, double step = 1e-3);

struct MetricTaylorReport {
  std::vector<double> scales;
  /// max over samples at each scale of |g_ij - delta_ij - 2 <H(E_i), E_j> y^1|, i, j tangential
  std::vector<double> tangential_residual;
  /// log-log slope of tangential_residual against scale; +infinity when every
  /// residual is at rounding level (flat chart).
  double slope = 0.0;
  /// max |g_11 - 1| and |g_1i| over all samples
  double max_normal_residual = 0.0;
  /// least-squares coefficient of y^1 in the averaged tangential diagonal at the smallest scale
  double first_order_coefficient = 0.0;
};

/// Samples the metric on spheres |y| = t for each scale. Throws
/// std::invalid_argument with fewer than 3 scales.
MetricTaylorReport metric_taylor_check(const BoundarySurface& surface, std::span<const double> scales);

}  // namespace hstrace

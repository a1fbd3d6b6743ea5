#include "hstrace/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace hstrace {

BoundarySurface::BoundarySurface(int N, ProfileKind kind, double param, double patch, int orientation)
    : N_(N), kind_(kind), param_(param), patch_(patch), orientation_(orientation), H0_(0.0) {
  if (N < 2) throw std::invalid_argument("N must be >= 2");
  if (!(patch > 0.0)) throw std::invalid_argument("patch radius must be positive");
  if (orientation != 1 && orientation != -1) throw std::invalid_argument("orientation must be +1 or -1");
  H0_ = -orientation_ * N_ * d2phi(0.0);
}

BoundarySurface BoundarySurface::flat(int N, double patch_radius, int orientation) {
  return {N, ProfileKind::flat, 0.0, patch_radius, orientation};
}

BoundarySurface BoundarySurface::paraboloid(int N, double kappa, double patch_radius, int orientation) {
  if (!std::isfinite(kappa)) throw std::invalid_argument("paraboloid curvature must be finite");
  return {N, ProfileKind::paraboloid, kappa, patch_radius, orientation};
}

BoundarySurface BoundarySurface::sphere(int N, double radius, double patch_radius, int orientation) {
  if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  if (patch_radius > radius) throw std::invalid_argument("sphere patch radius cannot exceed the sphere radius");
  return {N, ProfileKind::sphere, radius, patch_radius, orientation};
}

BoundarySurface BoundarySurface::flipped() const { return {N_, kind_, param_, patch_, -orientation_}; }

double BoundarySurface::phi(double rho) const {
  switch (kind_) {
    case ProfileKind::flat: return 0.0;
    case ProfileKind::paraboloid: return 0.5 * param_ * rho * rho;
    case ProfileKind::sphere: return rho * rho / (param_ + std::sqrt(param_ * param_ - rho * rho));
  }
  return 0.0;
}

double BoundarySurface::dphi(double rho) const {
  switch (kind_) {
    case ProfileKind::flat: return 0.0;
    case ProfileKind::paraboloid: return param_ * rho;
    case ProfileKind::sphere: return rho / std::sqrt(param_ * param_ - rho * rho);
  }
  return 0.0;
}

double BoundarySurface::d2phi(double rho) const {
  switch (kind_) {
    case ProfileKind::flat: return 0.0;
    case ProfileKind::paraboloid: return param_;
    case ProfileKind::sphere: return param_ * param_ / std::pow(param_ * param_ - rho * rho, 1.5);
  }
  return 0.0;
}

double BoundarySurface::cos_tilt(double rho) const {
  switch (kind_) {
    case ProfileKind::flat: return 1.0;
    case ProfileKind::paraboloid: return 1.0 / std::sqrt(1.0 + param_ * param_ * rho * rho);
    case ProfileKind::sphere: return std::sqrt(std::max(0.0, param_ * param_ - rho * rho)) / param_;
  }
  return 1.0;
}

double BoundarySurface::sin_tilt(double rho) const {
  switch (kind_) {
    case ProfileKind::flat: return 0.0;
    case ProfileKind::paraboloid: return param_ * rho / std::sqrt(1.0 + param_ * param_ * rho * rho);
    case ProfileKind::sphere: return rho / param_;
  }
  return 0.0;
}

double BoundarySurface::meridian_curvature(double rho) const {
  switch (kind_) {
    case ProfileKind::flat: return 0.0;
    case ProfileKind::paraboloid: return param_ / std::pow(1.0 + param_ * param_ * rho * rho, 1.5);
    case ProfileKind::sphere: return 1.0 / param_;
  }
  return 0.0;
}

double BoundarySurface::max_principal_curvature() const { return std::abs(d2phi(0.0)); }

Eigen::MatrixXd shape_operator_fd(const BoundarySurface& surface, double step) {
  const int N = surface.N();
  const int o = surface.normal_orientation();
  auto normal = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd n(N + 1);
    const double rho = x.norm();
    n[0] = o * surface.cos_tilt(rho);
    n.tail(N) = rho > 0.0 ? Eigen::VectorXd(-o * surface.sin_tilt(rho) * x / rho) : Eigen::VectorXd::Zero(N);
    return n;
  };
  Eigen::MatrixXd S(N, N);
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(N, i) * step;
    const Eigen::VectorXd dn = (-normal(2 * e) + 8.0 * normal(e) - 8.0 * normal(-e) + normal(-2 * e)) / (12.0 * step);
    for (int j = 0; j < N; ++j) S(i, j) = dn[j + 1];
  }
  return S;
}

double mean_curvature_at_origin(const BoundarySurface& surface) {
  const double fd = shape_operator_fd(surface).trace();
  if (std::abs(fd - surface.H0()) > 1e-6)
    throw std::logic_error("closed-form mean curvature disagrees with the finite-difference shape operator");
  return surface.H0();
}

double boundary_geodesic_distance(const BoundarySurface& surface, double rho) {
  if (rho < 0.0 || rho > surface.patch_radius()) throw std::invalid_argument("rho outside the surface patch");
  if (rho == 0.0) return 0.0;
  if (surface.kind() == ProfileKind::flat) return rho;
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate([&](double t) { return 1.0 / surface.cos_tilt(t); }, 0.0, rho);
}

namespace {

using State = std::array<double, 3>;  // rho, z, psi

State rk4_step(const BoundarySurface& s, const State& y, double h) {
  auto f = [&](const State& u) { return State{std::cos(u[2]), std::sin(u[2]), s.meridian_curvature(u[0])}; };
  auto axpy = [](const State& a, double c, const State& b) {
    return State{a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]};
  };
  const State k1 = f(y);
  const State k2 = f(axpy(y, 0.5 * h, k1));
  const State k3 = f(axpy(y, 0.5 * h, k2));
  const State k4 = f(axpy(y, h, k3));
  State out;
  for (int i = 0; i < 3; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace

FermiChart::FermiChart(const BoundarySurface& surface)
    : surface_(surface),
      step_(surface.patch_radius() / 2048.0),
      length_(boundary_geodesic_distance(surface, surface.patch_radius())) {
  const auto steps = static_cast<std::size_t>(std::ceil(length_ / step_)) + 1;
  table_.reserve(steps + 1);
  table_.push_back({0.0, 0.0, 0.0});
  for (std::size_t k = 0; k < steps; ++k) table_.push_back(rk4_step(surface_, table_.back(), step_));
}

std::array<double, 3> FermiChart::meridian(double t) const {
  if (t < 0.0 || t > length_ * (1.0 + 1e-12)) throw std::out_of_range("arclength outside the surface patch");
  const auto k = std::min(static_cast<std::size_t>(t / step_), table_.size() - 2);
  const double rest = t - static_cast<double>(k) * step_;
  const State st = rest == 0.0 ? table_[k] : rk4_step(surface_, table_[k], rest);
  return {st[1], st[0], st[2]};
}

MeridianPoint FermiChart::point(double t, double y1) const {
  if (std::abs(y1) * surface_.max_principal_curvature() >= 1.0)
    throw std::out_of_range("normal coordinate outside the chart");
  const auto m = meridian(t);
  const int o = surface_.normal_orientation();
  return {m[0] + y1 * o * std::cos(m[2]), m[1] - y1 * o * std::sin(m[2])};
}

Eigen::VectorXd FermiChart::map_unchecked(std::span<const double> y) const {
  const int N = surface_.N();
  if (static_cast<int>(y.size()) != N + 1) throw std::invalid_argument("chart coordinates need N + 1 entries");
  Eigen::Map<const Eigen::VectorXd> tangential(y.data() + 1, N);
  const double t = tangential.norm();
  const auto m = meridian(t);
  const int o = surface_.normal_orientation();
  Eigen::VectorXd out(N + 1);
  out[0] = m[0] + y[0] * o * std::cos(m[2]);
  const double rho = m[1] - y[0] * o * std::sin(m[2]);
  out.tail(N) = t > 0.0 ? Eigen::VectorXd(rho * tangential / t) : Eigen::VectorXd::Zero(N);
  return out;
}

Eigen::VectorXd FermiChart::operator()(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != surface_.N() + 1)
    throw std::invalid_argument("chart coordinates need N + 1 entries");
  double tt = 0.0;
  for (std::size_t i = 1; i < y.size(); ++i) tt += y[i] * y[i];
  if (std::sqrt(tt) > length_) throw std::out_of_range("tangential coordinate outside the surface patch");
  if (std::abs(y[0]) * std::abs(surface_.H0()) >= 0.5) throw std::out_of_range("normal coordinate outside the chart");
  return map_unchecked(y);
}

Eigen::VectorXd fermi_chart(const BoundarySurface& surface, std::span<const double> y) {
  return FermiChart(surface)(y);
}

MetricSample metric_at(const FermiChart& chart, std::span<const double> y, double step) {
  const int n = static_cast<int>(y.size());
  Eigen::MatrixXd J(n, n);
  std::vector<double> p(y.begin(), y.end());
  for (int i = 0; i < n; ++i) {
    auto at = [&](double d) {
      p[i] = y[i] + d;
      Eigen::VectorXd v = chart.map_unchecked(p);
      p[i] = y[i];
      return v;
    };
    J.col(i) = (-at(2 * step) + 8.0 * at(step) - 8.0 * at(-step) + at(-2 * step)) / (12.0 * step);
  }
  return {std::vector<double>(y.begin(), y.end()), J.transpose() * J};
}

MetricTaylorReport metric_taylor_check(const BoundarySurface& surface, std::span<const double> scales) {
  if (scales.size() < 3) throw std::invalid_argument("metric slope fit needs at least 3 scales");
  const int N = surface.N();
  const FermiChart chart(surface);
  const double first_order = 2.0 * surface.H0() / N;  // 2 <H(E_i), E_i>, shape operator is (H0/N) I

  std::vector<Eigen::VectorXd> directions;
  directions.push_back(Eigen::VectorXd::Unit(N, 0));
  directions.push_back(Eigen::VectorXd::Ones(N).normalized());
  Eigen::VectorXd mixed(N);
  for (int i = 0; i < N; ++i) mixed[i] = std::pow(-0.5, i);
  directions.push_back(mixed.normalized());
  const double pi = std::numbers::pi;
  const std::array<double, 7> angles{-pi / 2, -pi / 3, -pi / 6, 0.0, pi / 6, pi / 3, pi / 2};

  MetricTaylorReport rep;
  double smallest = std::numeric_limits<double>::infinity();
  for (double t : scales) {
    if (!(t > 0.0)) throw std::invalid_argument("scales must be positive");
    smallest = std::min(smallest, t);
  }
  double fit_num = 0.0, fit_den = 0.0;
  for (double t : scales) {
    double worst = 0.0;
    for (const Eigen::VectorXd& dir : directions)
      for (double a : angles) {
        std::vector<double> y(N + 1);
        y[0] = t * std::sin(a);
        for (int i = 0; i < N; ++i) y[i + 1] = t * std::cos(a) * dir[i];
        (void)chart(y);  // chart-size checks
        const Eigen::MatrixXd g = metric_at(chart, y).g;
        for (int i = 1; i <= N; ++i) {
          rep.max_normal_residual = std::max(rep.max_normal_residual, std::abs(g(0, i)));
          for (int j = 1; j <= N; ++j) {
            const double expected = (i == j ? 1.0 + first_order * y[0] : 0.0);
            worst = std::max(worst, std::abs(g(i, j) - expected));
          }
        }
        rep.max_normal_residual = std::max(rep.max_normal_residual, std::abs(g(0, 0) - 1.0));
        if (t == smallest) {
          const double diag = (g.diagonal().tail(N).sum() / N) - 1.0;
          fit_num += y[0] * diag;
          fit_den += y[0] * y[0];
        }
      }
    rep.scales.push_back(t);
    rep.tangential_residual.push_back(worst);
  }
  rep.first_order_coefficient = fit_num / fit_den;

  double peak = 0.0;
  for (double r : rep.tangential_residual) peak = std::max(peak, r);
  if (peak < 1e-11) {
    rep.slope = std::numeric_limits<double>::infinity();
    return rep;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(scales.size());
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const double x = std::log(rep.scales[k]), yv = std::log(rep.tangential_residual[k]);
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
  }
  rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return rep;
}

}  // namespace hstrace

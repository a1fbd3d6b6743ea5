#include "hstrace/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace hstrace {

namespace {

using Gauss8 = boost::math::quadrature::gauss<double, 8>;

// Gauss-Legendre nodes and weights on [a, b].
template <typename F>
double gauss8(double a, double b, F&& f) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const auto& x = Gauss8::abscissa();
  const auto& w = Gauss8::weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += w[k] * (f(c - h * x[k]) + f(c + h * x[k]));
  return h * acc;
}

// Geometric panel breakpoints on [lo, hi], hi possibly infinite, with extra kinks.
std::vector<double> panels(double lo, double hi, std::initializer_list<double> kinks) {
  constexpr double first = 1e-2, ratio = 1.189207115002721;  // 2^{1/4}
  const double stop = std::isfinite(hi) ? hi : 1e6;
  std::vector<double> pts{lo};
  double x = std::max(lo, first);
  if (x > lo) pts.push_back(x);
  while (x * ratio < stop) {
    x *= ratio;
    pts.push_back(x);
  }
  pts.push_back(stop);
  for (double k : kinks)
    if (k > lo && k < stop) pts.push_back(k);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

std::pair<int, double> locate(const std::vector<double>& nodes, double x) {
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  int i = static_cast<int>(it - nodes.begin()) - 1;
  i = std::clamp(i, 0, static_cast<int>(nodes.size()) - 2);
  return {i, (x - nodes[i]) / (nodes[i + 1] - nodes[i])};
}

}  // namespace

HalfSpaceField::HalfSpaceField(const GroundState& gs)
    : gs_(&gs), scale_(ground_state_half_mass_radius(gs)), anchor_(0.5 * gs.grid.R_trunc) {
  p_ = gs.params.N() - 1.0;
  try {
    p_ = -decay_fit(gs);
  } catch (const std::invalid_argument&) {
  }
}

double HalfSpaceField::bilinear(double z, double r) const {
  const AxiGrid& g = gs_->grid;
  const auto [i, a] = locate(g.z_nodes, z);
  const auto [j, b] = locate(g.r_nodes, r);
  const auto& w = gs_->w;
  return (1 - a) * ((1 - b) * w[g.index(i, j)] + b * w[g.index(i, j + 1)]) +
         a * ((1 - b) * w[g.index(i + 1, j)] + b * w[g.index(i + 1, j + 1)]);
}

std::array<double, 2> HalfSpaceField::bilinear_gradient(double z, double r) const {
  const AxiGrid& g = gs_->grid;
  const auto [i, a] = locate(g.z_nodes, z);
  const auto [j, b] = locate(g.r_nodes, r);
  const auto& w = gs_->w;
  const double v00 = w[g.index(i, j)], v01 = w[g.index(i, j + 1)];
  const double v10 = w[g.index(i + 1, j)], v11 = w[g.index(i + 1, j + 1)];
  const double hz = g.z_nodes[i + 1] - g.z_nodes[i], hr = g.r_nodes[j + 1] - g.r_nodes[j];
  return {((1 - b) * (v10 - v00) + b * (v11 - v01)) / hz, ((1 - a) * (v01 - v00) + a * (v11 - v10)) / hr};
}

double HalfSpaceField::operator()(double z, double r) const {
  z *= scale_;
  r *= scale_;
  const double amp = std::pow(scale_, 0.5 * (gs_->params.N() - 1));
  const double rho = std::hypot(z, r);
  if (rho <= anchor_) return amp * bilinear(z, r);
  const double ratio = anchor_ / rho;
  return amp * bilinear(z * ratio, r * ratio) * std::pow(ratio, p_);
}

std::array<double, 2> HalfSpaceField::gradient(double z, double r) const {
  z *= scale_;
  r *= scale_;
  const double amp = std::pow(scale_, 0.5 * (gs_->params.N() + 1));
  const double rho = std::hypot(z, r);
  if (rho <= anchor_) {
    const auto g = bilinear_gradient(z, r);
    return {amp * g[0], amp * g[1]};
  }
  const double st = z / rho, ct = r / rho;
  const double za = anchor_ * st, ra = anchor_ * ct;
  const double decay = std::pow(anchor_ / rho, p_);
  const auto ga = bilinear_gradient(za, ra);
  const double d_rho = -p_ * bilinear(za, ra) * decay / rho;
  // d/dtheta of the anchored profile, theta measured from the boundary.
  const double d_theta = decay * (ga[0] * anchor_ * ct - ga[1] * anchor_ * st) / rho;
  return {amp * (d_rho * st + d_theta * ct), amp * (d_rho * ct - d_theta * st)};
}

double Cutoff::operator()(double radius) const {
  if (radius <= inner) return 1.0;
  if (radius >= outer) return 0.0;
  const double x = (radius - inner) / (outer - inner);
  return 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

TestFunctionField build_test_function(const HalfSpaceField& w, const DomainMesh& mesh, double epsilon,
                                      const Cutoff& eta) {
  const GroundState& gs = w.ground_state();
  if (mesh.N != gs.params.N()) throw std::invalid_argument("mesh and ground state dimensions differ");
  if (!(eta.inner > 0.0 && eta.inner < eta.outer)) throw std::invalid_argument("cutoff radii must satisfy 0 < inner < outer");
  if (eta.outer > mesh.R_omega * (1.0 + 1e-12)) throw std::invalid_argument("cutoff support leaves the domain mesh");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (epsilon >= eta.inner)
    throw std::invalid_argument("epsilon too large: the rescaled bubble does not fit inside the inner cutoff");

  TestFunctionField out;
  out.epsilon = epsilon;
  out.eta = eta;
  out.field.assign(mesh.size(), 0.0);
  const double factor = std::pow(epsilon, -0.5 * (mesh.N - 1));
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    const double e = eta(std::hypot(mesh.t[k], mesh.y1[k]));
    if (e > 0.0) out.field[k] = e * factor * w(mesh.y1[k] / epsilon, mesh.t[k] / epsilon);
  }
  return out;
}

std::array<double, kRhoTerms> rho_terms(const HalfSpaceField& w, double epsilon, double r) {
  if (!(epsilon > 0.0 && r > 0.0)) throw std::invalid_argument("epsilon and r must be positive");
  const GroundState& gs = w.ground_state();
  const int N = gs.params.N();
  const double s = gs.params.s(), q = gs.params.q();
  const double sigma = sphere_area(N);
  const double R1 = r / epsilon, R2 = 0.5 * r / epsilon, inf = std::numeric_limits<double>::infinity();
  const double anchor = w.anchor_radius();

  // sigma int_{lo < |z| < hi} f(z, r) r^{N-1} dz dr over the quarter plane.
  auto bulk = [&](double lo, double hi, const std::function<double(double, double)>& f) {
    const std::vector<double> pts = panels(lo, hi, {anchor});
    constexpr int angular = 16;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
      acc += gauss8(pts[k], pts[k + 1], [&](double rho) {
        double ring = 0.0;
        for (int m = 0; m < angular; ++m) {
          const double t0 = 0.5 * std::numbers::pi * m / angular, t1 = 0.5 * std::numbers::pi * (m + 1) / angular;
          ring += gauss8(t0, t1, [&](double theta) {
            const double z = rho * std::sin(theta), x = rho * std::cos(theta);
            return f(z, x) * std::pow(x, N - 1);
          });
        }
        return ring * rho;
      });
    return sigma * acc;
  };
  // sigma int_{lo < |x| < hi} f(x) x^{N-1} dx on the boundary.
  auto boundary = [&](double lo, double hi, const std::function<double(double)>& f) {
    const std::vector<double> pts = panels(lo, hi, {anchor});
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
      acc += gauss8(pts[k], pts[k + 1], [&](double x) { return f(x) * std::pow(x, N - 1); });
    return sigma * acc;
  };

  std::array<double, kRhoTerms> t{};
  t[0] = epsilon * epsilon * bulk(0.0, R1, [&](double z, double x) {
    const double gr = w.gradient(z, x)[1];
    return x * x * gr * gr;
  });
  t[1] = std::pow(epsilon, 3) * boundary(0.0, R1, [&](double x) {
    const double v = w(0.0, x);
    return x * x * v * v;
  });
  t[2] = epsilon * boundary(R2, R1, [&](double x) {
    const double v = w(0.0, x);
    return v * v;
  });
  t[3] = epsilon * epsilon * bulk(R2, R1, [&](double z, double x) {
    const double v = w(z, x);
    return v * v;
  });
  t[4] = boundary(R1, inf, [&](double x) { return std::pow(x, -s) * std::pow(std::max(w(0.0, x), 0.0), q); });
  t[5] = epsilon * epsilon *
         boundary(0.0, R1, [&](double x) { return std::pow(x, 2.0 - s) * std::pow(std::max(w(0.0, x), 0.0), q); });
  t[6] = bulk(R2, inf, [&](double z, double x) {
    const auto g = w.gradient(z, x);
    return g[0] * g[0] + g[1] * g[1];
  });
  return t;
}

double theory_slope(int N, double H0, double h0, double A, double B) {
  return ((N - 2.0) / N * H0 + 2.0 * h0) * A + (2.0 / N) * H0 * B;
}

std::vector<double> default_eps_list(double r0) {
  std::vector<double> out;
  for (double e : {0.2, 0.141, 0.1, 0.071, 0.05}) out.push_back(e * r0 * kEpsScale);
  return out;
}

std::vector<double> dyadic_eps_list(double r0) {
  std::vector<double> out;
  for (double e : {0.2, 0.1, 0.05, 0.025}) out.push_back(e * r0 * kEpsScale);
  return out;
}

ExpansionReport sweep_J(const HalfSpaceField& w, const DomainMesh& mesh, std::span<const double> eps_list,
                        const Cutoff& eta) {
  const std::size_t n = eps_list.size();
  if (n < 4) throw std::invalid_argument("the sweep needs at least 4 epsilon values");
  for (std::size_t k = 1; k < n; ++k)
    if (!(eps_list[k] < eps_list[k - 1])) throw std::invalid_argument("epsilon list must be strictly decreasing");
  if (eps_list.front() < 4.0 * eps_list.back() * (1.0 - 1e-12))
    throw std::invalid_argument("epsilon list must span at least a factor 4");

  const GroundState& gs = w.ground_state();
  const DomainForms forms(mesh);
  ExpansionReport rep;
  rep.N = mesh.N;
  rep.s = gs.params.s();
  rep.H0 = mesh.surface.H0();
  rep.h0 = mesh.potential.h0;
  rep.A = w.A();
  rep.B = w.B();
  rep.S_value = gs.S_value;
  rep.eps_list.assign(eps_list.begin(), eps_list.end());
  for (double eps : eps_list) {
    const TestFunctionField u = build_test_function(w, mesh, eps, eta);
    const double J = forms.quotient(u.field, gs.params);
    if (!std::isfinite(J)) throw std::runtime_error("non-finite quotient in the epsilon sweep");
    rep.J_values.push_back(J);
    rep.rho_components.push_back(rho_terms(w, eps, eta.outer));
  }
  bool up = false, down = false;
  for (std::size_t k = 1; k < n; ++k) (rep.J_values[k] > rep.J_values[k - 1] ? up : down) = true;
  if (up && down) rep.warnings.push_back("J values are not monotone in epsilon (quadrature noise)");

  const std::size_t first = n / 2;
  const double m = static_cast<double>(n - first);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = first; k < n; ++k) {
    sx += rep.eps_list[k];
    sy += rep.J_values[k];
    sxx += rep.eps_list[k] * rep.eps_list[k];
    sxy += rep.eps_list[k] * rep.J_values[k];
  }
  const double det = m * sxx - sx * sx;
  if (!(det > 1e-14 * m * sxx)) throw std::runtime_error("degenerate epsilon fit");
  rep.fit_slope = (m * sxy - sx * sy) / det;
  rep.fit_intercept = (sy - rep.fit_slope * sx) / m;
  rep.theory_slope = theory_slope(rep.N, rep.H0, rep.h0, rep.A, rep.B);
  rep.slope_rel_error = rep.theory_slope == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                                 : std::abs(rep.fit_slope - rep.theory_slope) /
                                                       std::abs(rep.theory_slope);
  return rep;
}

std::pair<double, double> pohozaev_boundary_mass(const GroundState& gs) {
  return {weighted_energies(gs.grid, gs.w).first, 0.5 * boundary_mass(gs.grid, gs.w)};
}

void write_expansion_csv(const ExpansionReport& rep, std::ostream& out) {
  const auto old_precision = out.precision(12);
  out << "eps,J";
  for (int k = 1; k <= kRhoTerms; ++k) out << ",rho" << k;
  out << '\n';
  for (std::size_t i = 0; i < rep.eps_list.size(); ++i) {
    out << rep.eps_list[i] << ',' << rep.J_values[i];
    for (double t : rep.rho_components[i]) out << ',' << t;
    out << '\n';
  }
  out << "N,s,H0,h0,A,B,S_value,fit_intercept,fit_slope,theory_slope,slope_rel_error\n";
  out << rep.N << ',' << rep.s << ',' << rep.H0 << ',' << rep.h0 << ',' << rep.A << ',' << rep.B << ','
      << rep.S_value << ',' << rep.fit_intercept << ',' << rep.fit_slope << ',' << rep.theory_slope << ','
      << rep.slope_rel_error << '\n';
  out.precision(old_precision);
}

}  // namespace hstrace

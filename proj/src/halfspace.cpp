#include "hstrace/halfspace.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "hstrace/linear_solvers.hpp"
#include "hstrace/trace_quadrature.hpp"

namespace hstrace {

namespace {

using Vec = Eigen::VectorXd;
using Gauss = boost::math::quadrature::gauss<double, 10>;

Eigen::Map<const Vec> as_vec(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

struct CellMass {
  std::vector<double> ll, lr, rr, total;
};

CellMass r_cell_mass(const std::vector<double>& r, double p) {
  CellMass m;
  const std::size_t n = r.size() - 1;
  m.ll.resize(n);
  m.lr.resize(n);
  m.rr.resize(n);
  m.total.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = r[j], b = r[j + 1], h = b - a;
    auto w = [p](double x) { return std::pow(x, p); };
    m.ll[j] = Gauss::integrate([&](double x) { return w(x) * (b - x) * (b - x) / (h * h); }, a, b);
    m.lr[j] = Gauss::integrate([&](double x) { return w(x) * (b - x) * (x - a) / (h * h); }, a, b);
    m.rr[j] = Gauss::integrate([&](double x) { return w(x) * (x - a) * (x - a) / (h * h); }, a, b);
    m.total[j] = m.ll[j] + 2.0 * m.lr[j] + m.rr[j];
  }
  return m;
}

}  // namespace

double bubble_profile(int N, double z, double r) {
  return std::pow((1.0 + z) * (1.0 + z) + r * r, -0.5 * (N - 1));
}

double discrete_quotient(const AxiGrid& grid, const ProblemParams& params, const SparseForm& energy,
                         std::span<const double> v) {
  const auto x = as_vec(v);
  const double E = x.dot(energy.Q * x);
  const double G = trace_functional(grid, params, v, params.q());
  if (!(G > 0.0)) throw std::runtime_error("quotient undefined for a field with zero trace");
  return E / std::pow(G, 2.0 / params.q());
}

GroundState compute_ground_state(const ProblemParams& params, const AxiGrid& grid,
                                 const GroundStateOptions& opts) {
  if (grid.N != params.N() || grid.s != params.s())
    throw std::invalid_argument("grid was built for different parameters");
  const double q = params.q();
  const double a = grid.N - 1.0 - grid.s;
  const int nb = grid.nr();  // free boundary nodes; r = R is Dirichlet
  const TensorDirichletSolver solver(grid);

  // Every descent iterate is the discrete harmonic extension of its trace, so the
  // iteration runs on the boundary row: trace u = T g with g the nodal flux
  // (K v = g on the boundary row, 0 elsewhere) and energy E = g . u.
  const Eigen::MatrixXd T = solver.boundary_operator();
  const Eigen::LLT<Eigen::MatrixXd> T_llt(T);
  if (T_llt.info() != Eigen::Success) throw std::runtime_error("boundary operator is not positive definite");

  std::vector<double> r_nodes(grid.r_nodes.begin(), grid.r_nodes.end());
  const double sigma = sphere_area(grid.N);
  auto full = [&](const Vec& u) {
    std::vector<double> out(nb + 1, 0.0);
    for (int j = 0; j < nb; ++j) out[j] = u[j];
    return out;
  };
  auto trace = [&](const Vec& u) { return sigma * weighted_power_integral(r_nodes, full(u), a, q).value; };
  auto flux_target = [&](const Vec& u) {
    const PowerIntegral p = weighted_power_integral(r_nodes, full(u), a, q, {}, true);
    Vec b(nb);
    for (int j = 0; j < nb; ++j) b[j] = sigma * p.gradient[j] / q;
    return b;
  };
  auto normalize = [&](Vec& u, Vec& g) {
    const double G = trace(u);
    if (!(G > 0.0) || !std::isfinite(G)) throw std::runtime_error("ground state iterate collapsed to zero");
    const double t = std::pow(G, -1.0 / q);
    u *= t;
    g *= t;
  };
  auto residual = [&](const Vec& g, const Vec& u, double lambda) {
    const Vec b = lambda * flux_target(u);
    const double bb = b.squaredNorm();
    return bb > 0.0 ? std::sqrt((g - b).squaredNorm() / bb) : (g - b).norm();
  };

  Vec u(nb);
  for (int j = 0; j < nb; ++j) u[j] = bubble_profile(params.N(), 0.0, grid.r_nodes[j]);
  Vec g = T_llt.solve(u);
  normalize(u, g);

  GroundState gs{params, grid, {}, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0, {}};
  double E = g.dot(u);
  double quotient = E;  // trace functional is 1
  std::deque<double> window{quotient};
  double el = residual(g, u, E);

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const IterationRecord rec{iter, quotient, el, std::abs(trace(u) - 1.0)};
    gs.history.push_back(rec);
    if (opts.on_iteration) opts.on_iteration(rec);
    if (el < opts.el_tolerance) break;
    if (static_cast<int>(window.size()) > opts.stall_window &&
        std::abs(window.front() - quotient) <= opts.stall_tolerance * quotient)
      break;

    // Sobolev gradient of the quotient: flux step E b(u) - g with G = 1.
    const Vec du = T * (E * flux_target(u) - g);
    double alpha = 1.0;
    Vec tu, tg;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      tu = (u + alpha * du).cwiseMax(0.0);
      const double G = trace(tu);
      if (!(G > 0.0)) continue;
      tg = T_llt.solve(tu);
      const double trial_quotient = tg.dot(tu) / std::pow(G, 2.0 / q);
      if (trial_quotient <= quotient + opts.descent_slack * std::abs(quotient)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    normalize(tu, tg);
    u = tu;
    g = tg;
    E = g.dot(u);
    quotient = E;
    el = residual(g, u, E);
    window.push_back(quotient);
    if (static_cast<int>(window.size()) > opts.stall_window + 1) window.pop_front();
  }

  Vec load = Vec::Zero(static_cast<Eigen::Index>(grid.size()));
  for (int j = 0; j < nb; ++j) load[static_cast<Eigen::Index>(grid.index(0, j))] = g[j];
  const Vec v = solver.solve(load);
  gs.w.assign(v.data(), v.data() + v.size());
  gs.iterations = iter;
  gs.S_value = E;
  gs.norm_residual = std::abs(trace(u) - 1.0);
  // Multiplier of the discrete system K w = lambda b(w): energy over the q-trace functional.
  gs.lambda = E / trace(u);
  gs.el_residual = el;
  std::tie(gs.A, gs.B) = weighted_energies(grid, gs.w);

  if (gs.el_residual > 10.0 * opts.el_tolerance)
    throw ConvergenceError("ground state did not converge", gs.S_value, gs.el_residual);
  return gs;
}

std::pair<double, double> weighted_energies(const AxiGrid& grid, std::span<const double> v) {
  if (v.size() != grid.size()) throw std::invalid_argument("field size does not match grid");
  const double sigma = sphere_area(grid.N);
  const CellMass m = r_cell_mass(grid.r_nodes, grid.N - 1.0);
  double A = 0.0, B = 0.0;
  for (int i = 0; i < grid.nz(); ++i) {
    const double hz = grid.z_nodes[i + 1] - grid.z_nodes[i];
    const double zc = 0.5 * (grid.z_nodes[i] + grid.z_nodes[i + 1]);
    for (int j = 0; j < grid.nr(); ++j) {
      const double hr = grid.r_nodes[j + 1] - grid.r_nodes[j];
      const double v00 = v[grid.index(i, j)], v01 = v[grid.index(i, j + 1)];
      const double v10 = v[grid.index(i + 1, j)], v11 = v[grid.index(i + 1, j + 1)];
      const double a0 = (v10 - v00) / hz, a1 = (v11 - v01) / hz;
      const double b0 = (v01 - v00) / hr, b1 = (v11 - v10) / hr;
      const double ez = hz * (a0 * a0 * m.ll[j] + 2.0 * a0 * a1 * m.lr[j] + a1 * a1 * m.rr[j]);
      const double er = m.total[j] * hz * (b0 * b0 + b0 * b1 + b1 * b1) / 3.0;
      A += zc * (ez + er);
      B += zc * ez;
    }
  }
  return {sigma * A, sigma * B};
}

double pohozaev_residual(const AxiGrid& grid, std::span<const double> v) {
  const double A = weighted_energies(grid, v).first;
  return std::abs(A - 0.5 * boundary_mass(grid, v)) / A;
}

double pohozaev_residual(const GroundState& gs) { return pohozaev_residual(gs.grid, gs.w); }

CriterionCoefficient curvature_coefficient(int N, double s, double A, double B) {
  if (!(A > 0.0)) throw std::invalid_argument("A must be positive");
  return {(N - 2.0) / (2.0 * N) + B / (N * A), N, s, A, B};
}

CriterionCoefficient curvature_coefficient(const GroundState& gs) {
  return curvature_coefficient(gs.params.N(), gs.params.s(), gs.A, gs.B);
}

MonotonicityReport radial_monotonicity_check(const AxiGrid& grid, std::span<const double> v, double tol) {
  MonotonicityReport rep;
  for (int i = 0; i <= grid.nz(); ++i)
    for (int j = 0; j < grid.nr(); ++j) {
      const double inc = v[grid.index(i, j + 1)] - v[grid.index(i, j)];
      rep.worst_increment = std::max(rep.worst_increment, inc);
    }
  rep.monotone = rep.worst_increment <= tol;
  return rep;
}

MonotonicityReport radial_monotonicity_check(const GroundState& gs) {
  return radial_monotonicity_check(gs.grid, gs.w);
}

double decay_fit(const AxiGrid& grid, std::span<const double> v) {
  const double lo = 0.25 * grid.R_trunc, hi = 0.5 * grid.R_trunc;
  std::vector<double> x, y;
  for (int j = 0; j <= grid.nr(); ++j) {
    const double r = grid.r_nodes[j];
    if (r < lo || r > hi) continue;
    const double val = v[grid.index(0, j)];
    if (!(val > 0.0)) throw std::invalid_argument("decay fit needs a positive trace in the window");
    x.push_back(std::log(r));
    y.push_back(std::log(val));
  }
  if (x.size() < 10) throw std::invalid_argument("decay fit window holds fewer than 10 nodes");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double decay_fit(const GroundState& gs) { return decay_fit(gs.grid, gs.w); }

double ground_state_half_mass_radius(const GroundState& gs) {
  const double q = gs.params.q(), a = gs.params.N() - 1.0 - gs.params.s();
  const std::vector<double> wb = boundary_trace(gs.grid, gs.w);
  const auto& rn = gs.grid.r_nodes;
  const double total = weighted_power_integral(rn, wb, a, q).value;
  double lo = 0.0, hi = rn.back();
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    std::vector<double> nodes, vals;
    std::size_t j = 0;
    for (; j < rn.size() && rn[j] < mid; ++j) {
      nodes.push_back(rn[j]);
      vals.push_back(wb[j]);
    }
    const double lam = (mid - rn[j - 1]) / (rn[j] - rn[j - 1]);
    nodes.push_back(mid);
    vals.push_back((1.0 - lam) * wb[j - 1] + lam * wb[j]);
    (weighted_power_integral(nodes, vals, a, q).value < 0.5 * total ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double evaluate_SN1(int N) {
  if (N < 2) throw std::invalid_argument("N must be >= 2");
  const double ratio = std::tgamma(0.25 * (N + 1)) / std::tgamma(0.25 * (N - 1));
  return 2.0 * ratio * ratio;
}

double extrapolate_truncation(double R1, double v1, double R2, double v2, double order) {
  const double w1 = std::pow(R1, order), w2 = std::pow(R2, order);
  return (w2 * v2 - w1 * v1) / (w2 - w1);
}

AxiGrid default_axi_grid(const ProblemParams& params, double R, int refinement) {
  if (refinement < 0 || refinement > 4) throw std::invalid_argument("refinement level must lie in [0, 4]");
  const int cells = 144 << refinement;
  const double ratio = std::pow(2.0, 1.0 / (12.0 * (1 << refinement)));
  return build_axi_grid(params, R, cells, cells, ratio);
}

void write_ground_state_csv(const GroundState& gs, std::ostream& out) {
  const auto old_precision = out.precision(12);
  out << "iter,quotient,el_residual,norm_residual\n";
  for (const IterationRecord& r : gs.history)
    out << r.iter << ',' << r.quotient << ',' << r.el_residual << ',' << r.norm_residual << '\n';
  const CriterionCoefficient c = curvature_coefficient(gs);
  double decay = std::numeric_limits<double>::quiet_NaN();
  try {
    decay = decay_fit(gs);
  } catch (const std::invalid_argument&) {
  }
  out << "N,s,R,S_value,A,B,c_value,pohozaev_residual,decay_exponent\n";
  out << gs.params.N() << ',' << gs.params.s() << ',' << gs.grid.R_trunc << ',' << gs.S_value << ',' << gs.A
      << ',' << gs.B << ',' << c.c_value << ',' << pohozaev_residual(gs) << ',' << decay << '\n';
  out.precision(old_precision);
}

}  // namespace hstrace

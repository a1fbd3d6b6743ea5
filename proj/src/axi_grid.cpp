#include "hstrace/axi_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace hstrace {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 10>;

// int_a^b x^p dx, valid for p > -1 and 0 <= a < b.
double power_integral(double a, double b, double p) {
  return (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / (p + 1.0);
}

// int_a^b x^p L(x) dx and int_a^b x^p R(x) dx for the two hat pieces on [a, b].
// The first cell touches 0 and uses the closed form because x^p is not smooth there.
std::pair<double, double> hat_moments(double a, double b, double p) {
  const double h = b - a;
  if (a == 0.0) {
    const double right = std::pow(b, p + 1.0) / (p + 2.0);
    const double total = std::pow(b, p + 1.0) / (p + 1.0);
    return {total - right, right};
  }
  const double left = Gauss::integrate([&](double x) { return std::pow(x, p) * (b - x) / h; }, a, b);
  const double right = Gauss::integrate([&](double x) { return std::pow(x, p) * (x - a) / h; }, a, b);
  return {left, right};
}

void check_nodes(std::span<const double> nodes) {
  if (nodes.size() < 2) throw std::invalid_argument("at least two nodes required");
  for (std::size_t k = 1; k < nodes.size(); ++k)
    if (!(nodes[k] > nodes[k - 1])) throw std::invalid_argument("nodes must be strictly increasing");
}

}  // namespace

std::vector<double> graded_nodes(double R, int cells, double ratio) {
  if (!(R > 0.0)) throw std::invalid_argument("truncation radius must be positive");
  if (cells < 1) throw std::invalid_argument("need at least one cell");
  if (!(ratio >= 1.0)) throw std::invalid_argument("grading ratio must be >= 1");
  std::vector<double> x(cells + 1, 0.0);
  double h = ratio == 1.0 ? R / cells : R * (ratio - 1.0) / (std::pow(ratio, cells) - 1.0);
  for (int k = 1; k <= cells; ++k) {
    x[k] = x[k - 1] + h;
    h *= ratio;
  }
  x[cells] = R;
  return x;
}

std::vector<bool> AxiGrid::dirichlet_mask() const {
  std::vector<bool> mask(size(), false);
  for (int i = 0; i <= nz(); ++i)
    for (int j = 0; j <= nr(); ++j) mask[index(i, j)] = is_dirichlet(i, j);
  return mask;
}

AxiGrid build_axi_grid(const ProblemParams& params, double R, int nz, int nr, double grading) {
  if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
  if (nz < 8 || nr < 8) throw std::invalid_argument("nz and nr must be >= 8");
  if (!(grading >= 1.0)) throw std::invalid_argument("grading must be >= 1");

  AxiGrid g;
  g.N = params.N();
  g.s = params.s();
  g.R_trunc = R;
  g.z_nodes = graded_nodes(R, nz, grading);
  g.r_nodes = graded_nodes(R, nr, grading);

  const double sigma = sphere_area(g.N);
  const double p_vol = g.N - 1.0;
  const double p_trace = g.N - 1.0 - g.s;

  g.vol_weights.resize(static_cast<std::size_t>(nz) * nr);
  for (int i = 0; i < nz; ++i) {
    const double dz = g.z_nodes[i + 1] - g.z_nodes[i];
    for (int j = 0; j < nr; ++j)
      g.vol_weights[static_cast<std::size_t>(i) * nr + j] =
          sigma * dz * power_integral(g.r_nodes[j], g.r_nodes[j + 1], p_vol);
  }

  g.trace_weights.assign(nr + 1, 0.0);
  g.trace_cell_weights.resize(nr);
  for (int j = 0; j < nr; ++j) {
    const auto [left, right] = hat_moments(g.r_nodes[j], g.r_nodes[j + 1], p_trace);
    g.trace_weights[j] += sigma * left;
    g.trace_weights[j + 1] += sigma * right;
    g.trace_cell_weights[j] = sigma * power_integral(g.r_nodes[j], g.r_nodes[j + 1], p_trace);
  }
  return g;
}

Tridiagonal weighted_stiffness_1d(std::span<const double> nodes, double p) {
  check_nodes(nodes);
  const std::size_t n = nodes.size();
  Tridiagonal t{std::vector<double>(n, 0.0), std::vector<double>(n - 1, 0.0)};
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double h = nodes[k + 1] - nodes[k];
    const double w = power_integral(nodes[k], nodes[k + 1], p) / (h * h);
    t.diag[k] += w;
    t.diag[k + 1] += w;
    t.off[k] -= w;
  }
  return t;
}

Tridiagonal weighted_mass_1d(std::span<const double> nodes, double p) {
  check_nodes(nodes);
  const std::size_t n = nodes.size();
  Tridiagonal t{std::vector<double>(n, 0.0), std::vector<double>(n - 1, 0.0)};
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = nodes[k], b = nodes[k + 1], h = b - a;
    auto L = [&](double x) { return (b - x) / h; };
    auto Rr = [&](double x) { return (x - a) / h; };
    t.diag[k] += Gauss::integrate([&](double x) { return std::pow(x, p) * L(x) * L(x); }, a, b);
    t.diag[k + 1] += Gauss::integrate([&](double x) { return std::pow(x, p) * Rr(x) * Rr(x); }, a, b);
    t.off[k] += Gauss::integrate([&](double x) { return std::pow(x, p) * L(x) * Rr(x); }, a, b);
  }
  return t;
}

SparseForm assemble_dirichlet_energy(const AxiGrid& grid, const ProblemParams& params) {
  if (grid.N != params.N()) throw std::invalid_argument("grid and params disagree on N");
  const double sigma = sphere_area(grid.N);
  const Tridiagonal kz = weighted_stiffness_1d(grid.z_nodes, 0.0);
  const Tridiagonal mz = weighted_mass_1d(grid.z_nodes, 0.0);
  const Tridiagonal kr = weighted_stiffness_1d(grid.r_nodes, grid.N - 1.0);
  const Tridiagonal mr = weighted_mass_1d(grid.r_nodes, grid.N - 1.0);

  auto entry = [](const Tridiagonal& t, int a, int b) {
    if (a == b) return t.diag[a];
    return t.off[std::min(a, b)];
  };

  const int nzn = grid.nz() + 1, nrn = grid.nr() + 1;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(grid.size() * 9);
  for (int i = 0; i < nzn; ++i)
    for (int j = 0; j < nrn; ++j)
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const int k = i + di, l = j + dj;
          if (k < 0 || k >= nzn || l < 0 || l >= nrn) continue;
          const double v = entry(kz, i, k) * entry(mr, j, l) + entry(mz, i, k) * entry(kr, j, l);
          trips.emplace_back(static_cast<int>(grid.index(i, j)), static_cast<int>(grid.index(k, l)),
                             sigma * v);
        }
  SparseForm form;
  form.Q.resize(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(grid.size()));
  form.Q.setFromTriplets(trips.begin(), trips.end());
  form.descriptor = "dirichlet-energy";
  return form;
}

std::vector<double> boundary_trace(const AxiGrid& grid, std::span<const double> v) {
  if (v.size() != grid.size()) throw std::invalid_argument("field size does not match grid");
  std::vector<double> b(grid.r_nodes.size());
  for (int j = 0; j <= grid.nr(); ++j) b[j] = v[grid.index(0, j)];
  return b;
}

PowerIntegral trace_power(const AxiGrid& grid, std::span<const double> v, double t, bool with_gradient) {
  const std::vector<double> b = boundary_trace(grid, v);
  PowerIntegral p = weighted_power_integral(grid.r_nodes, b, grid.N - 1.0 - grid.s, t, {}, with_gradient);
  const double sigma = sphere_area(grid.N);
  p.value *= sigma;
  for (double& g : p.gradient) g *= sigma;
  return p;
}

double trace_functional(const AxiGrid& grid, const ProblemParams& params, std::span<const double> v,
                        double t) {
  if (!(t >= 1.0)) throw std::invalid_argument("trace exponent must be >= 1");
  if (grid.N != params.N() || grid.s != params.s())
    throw std::invalid_argument("grid was built for different parameters");
  return trace_power(grid, v, t, false).value;
}

double boundary_mass(const AxiGrid& grid, std::span<const double> v) {
  const Tridiagonal m = weighted_mass_1d(grid.r_nodes, grid.N - 1.0);
  double acc = 0.0;
  for (int j = 0; j <= grid.nr(); ++j) {
    const double vj = v[grid.index(0, j)];
    acc += m.diag[j] * vj * vj;
    if (j < grid.nr()) acc += 2.0 * m.off[j] * vj * v[grid.index(0, j + 1)];
  }
  return sphere_area(grid.N) * acc;
}

}  // namespace hstrace

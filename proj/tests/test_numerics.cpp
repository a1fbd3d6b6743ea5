#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "hstrace/axi_grid.hpp"
#include "hstrace/linear_solvers.hpp"

using namespace hstrace;
using std::numbers::pi;

namespace {

double energy(const SparseForm& f, const std::vector<double>& v) {
  Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
  return x.dot(f.Q * x);
}

}  // namespace

TEST_CASE("trace weights integrate the singular weight exactly") {
  {
    ProblemParams p(3, 0.0);
    auto g = build_axi_grid(p, 1.0, 8, 8, 1.0);
    double total = 0.0;
    for (double w : g.trace_weights) total += w;
    CHECK(total == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-13));
  }
  {
    ProblemParams p(3, 0.5);
    auto g = build_axi_grid(p, 1.0, 8, 16, 1.1);
    double total = 0.0;
    for (double w : g.trace_weights) total += w;
    CHECK(total == doctest::Approx(4.0 * pi / 2.5).epsilon(1e-13));
  }
  {
    ProblemParams p(2, 0.5);
    auto g = build_axi_grid(p, 2.0, 8, 12, 1.2);
    double total = 0.0;
    for (double w : g.trace_weights) total += w;
    CHECK(total == doctest::Approx(2.0 * pi * std::pow(2.0, 1.5) / 1.5).epsilon(1e-13));
  }
}

TEST_CASE("cumulative cell weights are exact at every node") {
  ProblemParams p(4, 0.75);
  auto g = build_axi_grid(p, 7.0, 10, 40, 1.15);
  const double sigma = sphere_area(4);
  double cum = 0.0;
  for (int j = 0; j < g.nr(); ++j) {
    cum += g.trace_cell_weights[j];
    const double rho = g.r_nodes[j + 1];
    const double exact = sigma * std::pow(rho, 4.0 - 0.75) / (4.0 - 0.75);
    CHECK(std::abs(cum - exact) <= 1e-12 * exact);
  }
  for (double w : g.vol_weights) CHECK(w >= 0.0);
  for (double w : g.trace_weights) CHECK(w >= 0.0);
}

TEST_CASE("grid construction rejects bad requests") {
  CHECK_THROWS_AS(ProblemParams(3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ProblemParams(1, 0.0), std::invalid_argument);
  ProblemParams p(3, 0.5);
  CHECK_THROWS_AS(build_axi_grid(p, 1.0, 4, 8, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_axi_grid(p, 1.0, 8, 8, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(build_axi_grid(p, -1.0, 8, 8, 1.0), std::invalid_argument);
  const auto nodes = graded_nodes(3.0, 12, 1.1);
  CHECK(nodes.front() == 0.0);
  CHECK(nodes.back() == 3.0);
  for (std::size_t k = 1; k + 1 < nodes.size(); ++k)
    CHECK((nodes[k + 1] - nodes[k]) / (nodes[k] - nodes[k - 1]) == doctest::Approx(1.1));
}

TEST_CASE("Dirichlet energy on elementary fields") {
  ProblemParams p(3, 0.0);
  auto g = build_axi_grid(p, 1.0, 9, 11, 1.1);
  auto form = assemble_dirichlet_energy(g, p);
  const double sigma = 4.0 * pi;

  CHECK(std::abs(energy(form, sample(g, [](double, double) { return 2.5; }))) < 1e-12);
  CHECK(energy(form, sample(g, [](double z, double) { return z; })) == doctest::Approx(sigma / 3.0).epsilon(1e-12));
  CHECK(energy(form, sample(g, [](double, double r) { return r; })) == doctest::Approx(sigma / 3.0).epsilon(1e-12));
  // z*r is bilinear, so the Q1 form reproduces sigma * int r^2 (r^2 + z^2) exactly.
  const double zr_exact = sigma * (1.0 / 5.0 + 1.0 / 9.0);
  CHECK(energy(form, sample(g, [](double z, double r) { return z * r; })) == doctest::Approx(zr_exact).epsilon(1e-12));

  SparseMatrix diff = form.Q - SparseMatrix(form.Q.transpose());
  CHECK(diff.norm() < 1e-12 * form.Q.norm());
}

TEST_CASE("Dirichlet energy converges at second order on smooth fields") {
  using Gauss = boost::math::quadrature::gauss<double, 20>;
  ProblemParams p(3, 0.0);
  auto v = [](double z, double r) { return std::sin(2.0 * z) * std::cos(1.5 * r); };
  // Oracle: tensor Gauss quadrature of sigma * r^2 |grad v|^2 on [0,1]^2.
  const double exact = 4.0 * pi * Gauss::integrate([](double r) {
    return Gauss::integrate([r](double z) {
      const double vz = 2.0 * std::cos(2.0 * z) * std::cos(1.5 * r);
      const double vr = -1.5 * std::sin(2.0 * z) * std::sin(1.5 * r);
      return r * r * (vz * vz + vr * vr);
    }, 0.0, 1.0);
  }, 0.0, 1.0);

  std::vector<double> h, err;
  for (int n : {8, 16, 32}) {
    auto g = build_axi_grid(p, 1.0, n, n, 1.0);
    auto form = assemble_dirichlet_energy(g, p);
    h.push_back(1.0 / n);
    err.push_back(std::abs(energy(form, sample(g, v)) - exact));
  }
  const double slope1 = std::log(err[0] / err[1]) / std::log(h[0] / h[1]);
  const double slope2 = std::log(err[1] / err[2]) / std::log(h[1] / h[2]);
  CHECK(slope1 >= 1.9);
  CHECK(slope2 >= 1.9);
}

TEST_CASE("trace functional examples") {
  {
    ProblemParams p(3, 0.0);
    auto g = build_axi_grid(p, 1.0, 8, 8, 1.0);
    CHECK(trace_functional(g, p, sample(g, [](double, double) { return 1.0; }), p.q()) ==
          doctest::Approx(4.0 * pi / 3.0).epsilon(1e-13));
    CHECK(trace_functional(g, p, sample(g, [](double, double) { return 0.0; }), p.q()) == 0.0);
  }
  {
    ProblemParams p(3, 0.5);
    auto g = build_axi_grid(p, 1.0, 8, 400, 1.0);
    const double val = trace_functional(g, p, sample(g, [](double, double r) { return r; }), 2.0);
    CHECK(val == doctest::Approx(4.0 * pi / 4.5).epsilon(1e-4));
  }
  ProblemParams p(3, 0.5);
  auto g = build_axi_grid(p, 1.0, 8, 8, 1.0);
  CHECK_THROWS_AS(trace_functional(g, p, sample(g, [](double, double) { return 1.0; }), 0.5),
                  std::invalid_argument);
}

TEST_CASE("boundary mass is exact for linear traces") {
  ProblemParams p(3, 0.25);
  auto g = build_axi_grid(p, 2.0, 8, 13, 1.2);
  const double val = boundary_mass(g, sample(g, [](double, double r) { return 1.0 + r; }));
  // 4 pi int_0^2 r^2 (1 + r)^2 dr = 4 pi (8/3 + 2*16/4 + 32/5)
  CHECK(val == doctest::Approx(4.0 * pi * (8.0 / 3.0 + 8.0 + 32.0 / 5.0)).epsilon(1e-12));
}

TEST_CASE("solve_spd small systems") {
  SparseForm id;
  id.Q.resize(3, 3);
  id.Q.setIdentity();
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(3, 0);
  auto r = solve_spd(id, e1, 1e-14);
  CHECK((r.x - e1).norm() < 1e-14);

  // 1D Laplacian on three nodes with both ends held at zero: 2 x = 1 at the centre.
  SparseForm lap;
  lap.Q.resize(3, 3);
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1}, {0, 1, -1}, {1, 0, -1}, {1, 1, 2},
                                        {1, 2, -1}, {2, 1, -1}, {2, 2, 1}};
  lap.Q.setFromTriplets(t.begin(), t.end());
  CgOptions opts;
  opts.fixed = {true, false, true};
  auto s = solve_spd(lap, Eigen::Vector3d(0, 1, 0), 1e-14, opts);
  CHECK(s.x[1] == doctest::Approx(0.5));
  CHECK(s.x[0] == 0.0);
  CHECK(s.x[2] == 0.0);

  // Pure Neumann Laplacian is singular; a rhs along its null vector cannot be reached.
  CHECK_THROWS_AS(solve_spd(lap, Eigen::Vector3d(1, 1, 1), 1e-10), ConvergenceError);

  SparseForm neg;
  neg.Q.resize(2, 2);
  std::vector<Eigen::Triplet<double>> tn{{0, 0, 1}, {0, 1, 2}, {1, 0, 2}, {1, 1, 1}};
  neg.Q.setFromTriplets(tn.begin(), tn.end());
  CHECK_THROWS_AS(solve_spd(neg, Eigen::Vector2d(1, -1), 1e-12), std::domain_error);
}

TEST_CASE("solve_spd on the grid form: monotone restarts and agreement with the tensor solver") {
  ProblemParams p(3, 0.5);
  auto g = build_axi_grid(p, 10.0, 24, 24, 1.15);
  auto form = assemble_dirichlet_energy(g, p);
  // Add a positive boundary mass so the unconstrained form is definite too.
  for (int j = 0; j <= g.nr(); ++j) form.Q.coeffRef(g.index(0, j), g.index(0, j)) += g.trace_weights[j];

  Eigen::VectorXd b(static_cast<Eigen::Index>(g.size()));
  for (Eigen::Index k = 0; k < b.size(); ++k) b[k] = std::cos(0.37 * static_cast<double>(k));
  CgOptions opts;
  opts.restart = 25;
  auto res = solve_spd(form, b, 1e-10, opts);
  CHECK(res.restart_residuals.size() >= 3);
  for (std::size_t k = 1; k < res.restart_residuals.size(); ++k)
    CHECK(res.restart_residuals[k] < res.restart_residuals[k - 1]);

  // Deterministic: same inputs, same bits.
  auto res2 = solve_spd(form, b, 1e-10, opts);
  CHECK((res.x - res2.x).norm() == 0.0);

  auto plain = assemble_dirichlet_energy(g, p);
  CgOptions masked;
  masked.fixed = g.dirichlet_mask();
  auto cg = solve_spd(plain, b, 1e-12, masked);
  TensorDirichletSolver direct(g);
  Eigen::VectorXd x = direct.solve(b);
  CHECK((x - cg.x).norm() <= 1e-8 * cg.x.norm());
}

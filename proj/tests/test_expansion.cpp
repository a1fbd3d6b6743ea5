#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hstrace/expansion.hpp"
#include "oracles.hpp"

using namespace hstrace;

namespace {

const GroundState& ground_state(double s) {
  static std::map<double, GroundState> cache;
  auto it = cache.find(s);
  if (it == cache.end()) {
    const ProblemParams p(3, s);
    it = cache.emplace(s, compute_ground_state(p, default_axi_grid(p))).first;
  }
  return it->second;
}

BoundarySurface surface_with_curvature(double H0) {
  return H0 == 0.0 ? BoundarySurface::flat(3, 1.5) : BoundarySurface::paraboloid(3, -H0 / 3.0, 1.5);
}

const Cutoff kEta{0.5, 1.0};

}  // namespace

TEST_CASE("cutoff") {
  CHECK(kEta(0.0) == 1.0);
  CHECK(kEta(0.5) == 1.0);
  CHECK(kEta(1.0) == 0.0);
  CHECK(kEta(0.75) == doctest::Approx(0.5).epsilon(1e-14));
  const double h = 1e-4;
  for (double x : {0.5, 1.0}) {
    // First and second derivatives vanish at both ends of the ramp.
    CHECK(std::abs(kEta(x + h) - kEta(x - h)) / (2 * h) < 1e-5);
    CHECK(std::abs(kEta(x + h) - 2 * kEta(x) + kEta(x - h)) / (h * h) < 2e-2);
  }
  for (double x = 0.5; x < 1.0; x += 0.01) CHECK(kEta(x + 0.01) <= kEta(x));
}

TEST_CASE("half-space field") {
  const GroundState& gs = ground_state(0.5);
  const HalfSpaceField w(gs);
  const double l = w.dilation();
  CHECK(l == doctest::Approx(ground_state_half_mass_radius(gs)));
  CHECK(w.A() == doctest::Approx(gs.A / l));
  CHECK(w.tail_exponent() > 1.8);
  CHECK(w.tail_exponent() < 2.6);

  SUBCASE("reproduces grid values") {
    const AxiGrid& g = gs.grid;
    for (int i : {0, 10, 50}) {
      for (int j : {0, 7, 40}) {
        const double expected = std::pow(l, 1.0) * gs.w[g.index(i, j)];
        CHECK(w(g.z_nodes[i] / l, g.r_nodes[j] / l) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }

  SUBCASE("continuous tail with consistent gradient") {
    const double a = w.anchor_radius();
    for (double theta : {0.1, 0.7, 1.3}) {
      const double zi = (a - 1e-9) * std::sin(theta), ri = (a - 1e-9) * std::cos(theta);
      const double zo = (a + 1e-9) * std::sin(theta), ro = (a + 1e-9) * std::cos(theta);
      CHECK(w(zo, ro) == doctest::Approx(w(zi, ri)).epsilon(1e-6));
      for (double rho : {1.5 * a, 4.0 * a}) {
        const double z = rho * std::sin(theta), r = rho * std::cos(theta), h = 1e-5 * rho;
        const auto g = w.gradient(z, r);
        CHECK(g[0] == doctest::Approx((w(z + h, r) - w(z - h, r)) / (2 * h)).epsilon(1e-5));
        CHECK(g[1] == doctest::Approx((w(z, r + h) - w(z, r - h)) / (2 * h)).epsilon(1e-5));
      }
      CHECK(w(4.0 * a * std::sin(theta), 4.0 * a * std::cos(theta)) ==
            doctest::Approx(w(a * std::sin(theta), a * std::cos(theta)) * std::pow(0.25, w.tail_exponent())));
    }
  }

  SUBCASE("normalization and weighted energy by independent quadrature") {
    const ProblemParams& p = gs.params;
    const double sigma = oracle::sphere_area(3);
    const double mass = sigma * oracle::half_line([&](double r) {
      return std::pow(r, 2.0 - p.s()) * std::pow(std::max(w(0.0, r), 0.0), p.q());
    });
    CHECK(mass == doctest::Approx(1.0).epsilon(2e-3));
    const double A = sigma * oracle::quarter_plane([&](double z, double r) {
      const auto g = w.gradient(z, r);
      return z * (g[0] * g[0] + g[1] * g[1]) * r * r;
    });
    CHECK(A == doctest::Approx(w.A()).epsilon(2e-2));
  }
}

TEST_CASE("test function") {
  const GroundState& gs = ground_state(0.5);
  const HalfSpaceField w(gs);
  const DomainMesh flat = build_domain_mesh(BoundarySurface::flat(3, 1.5), 1.0, {}, {});
  const double eps = 1e-3;
  const TestFunctionField u = build_test_function(w, flat, eps, kEta);
  for (std::size_t k = 0; k < flat.size(); ++k) {
    const double radius = std::hypot(flat.t[k], flat.y1[k]);
    if (radius <= 0.5) {
      // Flat chart: Fermi coordinates are the Cartesian ones.
      CHECK(u.field[k] == doctest::Approx(w(flat.z[k] / eps, flat.rho[k] / eps) / eps).epsilon(1e-12));
    } else if (radius >= 1.0) {
      CHECK(u.field[k] == 0.0);
    }
  }
  // The trace functional is 1 up to the cutoff and mesh interpolation.
  const double G = DomainForms(flat).gamma2_power(u.field, 0.5, gs.params.q()).value;
  CHECK(G == doctest::Approx(1.0).epsilon(5e-3));

  const DomainMesh curved = build_domain_mesh(BoundarySurface::paraboloid(3, 0.3, 1.5), 1.0, {}, {});
  const TestFunctionField uc = build_test_function(w, curved, eps, kEta);
  CHECK(DomainForms(curved).gamma2_power(uc.field, 0.5, gs.params.q()).value == doctest::Approx(1.0).epsilon(5e-3));

  CHECK_THROWS_AS(build_test_function(w, flat, 0.6, kEta), std::invalid_argument);
  CHECK_THROWS_AS(build_test_function(w, flat, eps, Cutoff{0.5, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(build_test_function(w, flat, eps, Cutoff{0.8, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(build_test_function(w, build_domain_mesh(BoundarySurface::flat(4, 1.5), 1.0, {}, {}), eps, kEta),
                  std::invalid_argument);
}

TEST_CASE("energy sweep") {
  const ProblemParams p(3, 0.5);
  const GroundState& gs = ground_state(0.5);
  const HalfSpaceField w(gs);
  const std::vector<double> eps = default_eps_list(1.0);

  SUBCASE("first-order slopes") {
    for (auto [H0, h0] : std::vector<std::pair<double, double>>{{0.0, -0.2}, {-1.0, 0.0}, {-1.0, -0.2}}) {
      CAPTURE(H0);
      CAPTURE(h0);
      const DomainMesh m = build_domain_mesh(surface_with_curvature(H0), 1.0, {}, {h0, 0.0});
      const ExpansionReport rep = sweep_J(w, m, eps, kEta);
      CHECK(rep.theory_slope == theory_slope(3, rep.H0, rep.h0, rep.A, rep.B));
      CHECK(rep.theory_slope < 0.0);
      CHECK(rep.fit_intercept == doctest::Approx(gs.S_value).epsilon(0.02));
      CHECK(rep.slope_rel_error <= 0.15);
      CHECK(rep.fit_slope < 0.0);
      CHECK(rep.warnings.empty());
      // The domain minimizer is a lower bound over the same discrete space.
      const double mu = compute_mu(m, p).mu_value;
      for (double J : rep.J_values) CHECK(J >= mu);
    }
  }

  SUBCASE("no first-order term on a flat boundary without potential") {
    const DomainMesh m = build_domain_mesh(BoundarySurface::flat(3, 1.5), 1.0, {}, {});
    const ExpansionReport rep = sweep_J(w, m, eps, kEta);
    CHECK(rep.theory_slope == 0.0);
    CHECK(std::isnan(rep.slope_rel_error));
    CHECK(std::abs(rep.fit_slope) <= 0.05 * gs.S_value);
  }

  SUBCASE("sweep validation") {
    const DomainMesh m = build_domain_mesh(BoundarySurface::flat(3, 1.5), 1.0, {}, {});
    CHECK_THROWS_AS(sweep_J(w, m, std::vector<double>{4e-3, 2e-3, 1e-3}, kEta), std::invalid_argument);
    CHECK_THROWS_AS(sweep_J(w, m, std::vector<double>{1e-3, 2e-3, 3e-3, 4e-3}, kEta), std::invalid_argument);
    CHECK_THROWS_AS(sweep_J(w, m, std::vector<double>{4e-3, 3e-3, 2e-3, 1.5e-3}, kEta), std::invalid_argument);
  }

  SUBCASE("csv") {
    const DomainMesh m = build_domain_mesh(BoundarySurface::flat(3, 1.5), 1.0, {}, {-0.2, 0.0});
    std::ostringstream a, b;
    write_expansion_csv(sweep_J(w, m, eps, kEta), a);
    write_expansion_csv(sweep_J(w, m, eps, kEta), b);
    CHECK(a.str() == b.str());
    std::istringstream in(a.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "eps,J,rho1,rho2,rho3,rho4,rho5,rho6,rho7");
  }
}

TEST_CASE("remainder terms") {
  SUBCASE("each term is o(eps) along the dyadic sweep") {
    for (double s : {0.0, 0.5, 0.75}) {
      CAPTURE(s);
      const HalfSpaceField w(ground_state(s));
      std::array<double, kRhoTerms> prev{};
      bool first = true;
      for (double eps : dyadic_eps_list(1.0)) {
        const auto t = rho_terms(w, eps, 1.0);
        for (int k = 0; k < kRhoTerms; ++k) {
          CAPTURE(k);
          CHECK(t[k] > 0.0);
          if (!first) CHECK(t[k] / eps < prev[k]);
          prev[k] = t[k] / eps;
        }
        // Exterior gradient energy stays within O(eps).
        CHECK(t[6] / eps < 1.0);
        first = false;
      }
    }
  }

  SUBCASE("annular trace term against a closed-form field") {
    // Grid samples of U(z, r) = ((1 + z)^2 + r^2)^{-1}, N = 3, s = 0, as a ground state.
    const ProblemParams p(3, 0.0);
    GroundState gs{p, default_axi_grid(p)};
    gs.w = sample(gs.grid, [](double z, double r) { return bubble_profile(3, z, r); });
    const double norm = std::pow(trace_functional(gs.grid, p, gs.w, p.q()), 1.0 / p.q());
    for (double& v : gs.w) v /= norm;
    std::tie(gs.A, gs.B) = weighted_energies(gs.grid, gs.w);
    const HalfSpaceField w(gs);
    const double l = w.dilation(), eps = 0.05, R1 = 1.0 / eps, R2 = 0.5 / eps;
    const double sigma = oracle::sphere_area(3);
    const auto t = rho_terms(w, eps, 1.0);
    // eps int_{R2 < |x| < R1} (l U(0, l x) / norm)^2 dx
    double annulus = 0.0;
    const int n = 4000;
    for (int k = 0; k < n; ++k) {
      const double x = R2 + (R1 - R2) * (k + 0.5) / n;
      const double v = l / norm / (1.0 + l * l * x * x);
      annulus += v * v * x * x * (R1 - R2) / n;
    }
    CHECK(t[2] == doctest::Approx(eps * sigma * annulus).epsilon(1e-2));
  }
}

TEST_CASE("boundary mass identity and criterion equivalence") {
  for (double s : {0.0, 0.5}) {
    const GroundState& gs = ground_state(s);
    const auto [A, half_mass] = pohozaev_boundary_mass(gs);
    CHECK(A == doctest::Approx(gs.A));
    CHECK(std::abs(A - half_mass) / A < 0.05);

    const CriterionCoefficient c = curvature_coefficient(gs);
    for (double H0 : {-1.0, 0.0, 1.0})
      for (double h0 : {-0.5, -0.2, 0.0, 0.2, 0.5}) {
        const double slope = theory_slope(3, H0, h0, gs.A, gs.B);
        CHECK((slope < 0.0) == (c.c_value * H0 + h0 < 0.0));
      }
    // On the boundary of the criterion the slope vanishes; with the boundary mass
    // in place of 2A it vanishes up to the identity's residual.
    const double H0 = -1.0, h0 = -c.c_value * H0;
    CHECK(std::abs(theory_slope(3, H0, h0, gs.A, gs.B)) < 1e-12 * gs.A);
    const double mass_form = (1.0 / 3.0) * H0 * gs.A + h0 * 2.0 * half_mass + (2.0 / 3.0) * H0 * gs.B;
    CHECK(std::abs(mass_form) <= 2.0 * std::abs(h0) * std::abs(A - half_mass) + 1e-12);
  }
}

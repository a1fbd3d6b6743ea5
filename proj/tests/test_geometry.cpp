#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "hstrace/geometry.hpp"

using namespace hstrace;

namespace {

// Shortest path from the first to the last vertex of a dense polyline sampled on
// the meridian, over a graph joining each vertex to its next few neighbours.
double graph_distance(const std::function<double(double)>& phi, double rho, int samples = 200000) {
  std::vector<double> zs(samples + 1), rs(samples + 1);
  for (int k = 0; k <= samples; ++k) {
    rs[k] = rho * k / samples;
    zs[k] = phi(rs[k]);
  }
  std::vector<double> dist(samples + 1, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[0] = 0.0;
  heap.push({0.0, 0});
  while (!heap.empty()) {
    const auto [d, k] = heap.top();
    heap.pop();
    if (d > dist[k]) continue;
    for (int m = std::max(0, k - 3); m <= std::min(samples, k + 3); ++m) {
      const double nd = d + std::hypot(rs[m] - rs[k], zs[m] - zs[k]);
      if (nd < dist[m]) {
        dist[m] = nd;
        heap.push({nd, m});
      }
    }
  }
  return dist[samples];
}

}  // namespace

TEST_CASE("mean curvature at the origin") {
  CHECK(mean_curvature_at_origin(BoundarySurface::flat(3, 1.0)) == 0.0);

  const auto par = BoundarySurface::paraboloid(3, 1.0, 1.0);
  CHECK(mean_curvature_at_origin(par) == doctest::Approx(-3.0).epsilon(1e-14));
  CHECK(shape_operator_fd(par).trace() == doctest::Approx(-3.0).epsilon(1e-8));
  CHECK(mean_curvature_at_origin(par.flipped()) == doctest::Approx(3.0).epsilon(1e-14));

  for (double a : {1.0, 2.5}) {
    const auto sph = BoundarySurface::sphere(4, a, 0.9 * a);
    CHECK(std::abs(mean_curvature_at_origin(sph)) == doctest::Approx(4.0 / a).epsilon(1e-14));
    const Eigen::MatrixXd S = shape_operator_fd(sph);
    CHECK((S - S(0, 0) * Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-8);
    CHECK(std::abs(S.trace() - sph.H0()) < 1e-6);
  }
}

TEST_CASE("surface validation") {
  CHECK_THROWS_AS(BoundarySurface::flat(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(BoundarySurface::flat(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(BoundarySurface::sphere(3, 1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(BoundarySurface::paraboloid(3, 1.0, 1.0, 0), std::invalid_argument);
  const auto s = BoundarySurface::paraboloid(3, 0.5, 1.0);
  CHECK(s.phi(0.0) == 0.0);
  CHECK(s.dphi(0.0) == 0.0);
}

TEST_CASE("Fermi chart") {
  SUBCASE("flat chart is the identity") {
    const FermiChart chart(BoundarySurface::flat(3, 1.0));
    const std::vector<double> y{0.3, -0.2, 0.5, 0.1};
    const Eigen::VectorXd x = chart(y);
    for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(y[i]).epsilon(1e-14));
  }

  SUBCASE("origin maps to origin") {
    for (const auto& s : {BoundarySurface::paraboloid(3, 1.0, 1.0), BoundarySurface::sphere(3, 1.0, 1.0, -1)}) {
      const Eigen::VectorXd x = fermi_chart(s, std::vector<double>(4, 0.0));
      CHECK(x.norm() == 0.0);
    }
  }

  SUBCASE("sphere meridian at geodesic distance theta") {
    const FermiChart chart(BoundarySurface::sphere(3, 1.0, 1.0));
    for (double theta : {0.1, 0.5, 1.0, 1.4}) {
      const std::vector<double> y{0.0, 0.0, theta, 0.0};
      const Eigen::VectorXd x = chart(y);
      CHECK(x[0] == doctest::Approx(1.0 - std::cos(theta)).epsilon(1e-12));
      CHECK(x[2] == doctest::Approx(std::sin(theta)).epsilon(1e-12));
      CHECK(std::abs(x[1]) + std::abs(x[3]) < 1e-15);
    }
  }

  SUBCASE("normal offset moves along the interior normal") {
    const auto s = BoundarySurface::sphere(3, 2.0, 2.0);
    const FermiChart chart(s);
    const double theta = 0.7, y1 = 0.1;
    const MeridianPoint p = chart.point(2.0 * theta, y1);
    // Interior normal of the bowl points at the centre (z, rho) = (2, 0).
    CHECK(p.z == doctest::Approx(2.0 - (2.0 - y1) * std::cos(theta)).epsilon(1e-12));
    CHECK(p.rho == doctest::Approx((2.0 - y1) * std::sin(theta)).epsilon(1e-12));
  }

  SUBCASE("chart size is enforced") {
    const auto s = BoundarySurface::paraboloid(3, 1.0, 1.0);
    const FermiChart chart(s);
    CHECK_THROWS_AS(chart(std::vector<double>{0.2, 0.0, 0.0, 0.0}), std::out_of_range);
    CHECK_THROWS_AS(chart(std::vector<double>{0.0, 2.0, 0.0, 0.0}), std::out_of_range);
    CHECK_THROWS_AS(chart(std::vector<double>{0.0, 0.0}), std::invalid_argument);
  }
}

TEST_CASE("geodesic distance") {
  CHECK(boundary_geodesic_distance(BoundarySurface::flat(3, 1.0), 0.7) == 0.7);

  const auto sph = BoundarySurface::sphere(3, 1.0, 1.0);
  for (double rho : {0.2, 0.6, 0.95}) {
    CHECK(boundary_geodesic_distance(sph, rho) == doctest::Approx(std::asin(rho)).epsilon(1e-13));
    CHECK(boundary_geodesic_distance(sph, rho) ==
          doctest::Approx(graph_distance([&](double r) { return sph.phi(r); }, rho)).epsilon(1e-8));
  }

  const auto par = BoundarySurface::paraboloid(3, 1.0, 1.0);
  const double d = boundary_geodesic_distance(par, 0.5);
  CHECK(std::abs(d - graph_distance([&](double r) { return par.phi(r); }, 0.5)) < 1e-4);
  CHECK(d == doctest::Approx(0.5 * (0.5 * std::sqrt(1.25) + std::asinh(0.5))).epsilon(1e-13));
  CHECK_THROWS_AS(boundary_geodesic_distance(par, 1.5), std::invalid_argument);
}

TEST_CASE("arclength parameterization is consistent with the distance") {
  for (const auto& s : {BoundarySurface::paraboloid(3, 1.0, 1.0), BoundarySurface::sphere(3, 2.0, 2.0),
                        BoundarySurface::paraboloid(4, -0.5, 1.5)}) {
    const FermiChart chart(s);
    for (double frac : {0.05, 0.3, 0.6, 0.9}) {
      const double t = frac * chart.meridian_length();
      const auto m = chart.meridian(t);
      CHECK(std::abs(boundary_geodesic_distance(s, m[1]) - t) < 1e-10);
      CHECK(std::abs(m[0] - s.phi(m[1])) < 1e-10);
    }
  }
}

TEST_CASE("metric expansion") {
  const std::vector<double> scales{0.1, 0.05, 0.025};

  SUBCASE("flat") {
    const MetricTaylorReport rep = metric_taylor_check(BoundarySurface::flat(3, 1.0), scales);
    for (double r : rep.tangential_residual) CHECK(r < 1e-11);
    CHECK(rep.max_normal_residual < 1e-11);
  }

  SUBCASE("sphere") {
    const auto s = BoundarySurface::sphere(3, 1.0, 1.0);
    const MetricTaylorReport rep = metric_taylor_check(s, scales);
    CHECK(rep.slope >= 2.0 - 1e-3);
    CHECK(rep.max_normal_residual < 1e-8);
    const double expected = 2.0 * shape_operator_fd(s).trace() / 3.0;
    CHECK(std::abs(rep.first_order_coefficient - expected) <= 0.05 * std::abs(expected));
  }

  SUBCASE("paraboloid and orientation") {
    const auto s = BoundarySurface::paraboloid(3, 1.0, 1.0);
    const MetricTaylorReport rep = metric_taylor_check(s, scales);
    CHECK(rep.slope >= 2.0 - 1e-3);
    CHECK(rep.max_normal_residual < 1e-8);
    const double expected = 2.0 * shape_operator_fd(s).trace() / 3.0;
    CHECK(std::abs(rep.first_order_coefficient - expected) <= 0.05 * std::abs(expected));

    const MetricTaylorReport flip = metric_taylor_check(s.flipped(), scales);
    CHECK(flip.first_order_coefficient == doctest::Approx(-rep.first_order_coefficient).epsilon(1e-8));
    CHECK(s.flipped().H0() == -s.H0());
  }

  CHECK_THROWS_AS(metric_taylor_check(BoundarySurface::flat(3, 1.0), std::vector<double>{0.1, 0.05}),
                  std::invalid_argument);
}

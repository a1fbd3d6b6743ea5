#include "hstrace/domain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <boost/math/quadrature/gauss.hpp>

#include "hstrace/trace_quadrature.hpp"

namespace hstrace {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using ColSparse = Eigen::SparseMatrix<double>;
using Gauss8 = boost::math::quadrature::gauss<double, 8>;

Eigen::Map<const Vec> as_vec(std::span<const double> v) { return {v.data(), static_cast<Eigen::Index>(v.size())}; }

// Complete homogeneous symmetric polynomial of degree m in (a, b, c).
double complete_homogeneous(double a, double b, double c, int m) {
  double acc = 0.0;
  for (int i = 0; i <= m; ++i)
    for (int j = 0; i + j <= m; ++j) acc += std::pow(a, i) * std::pow(b, j) * std::pow(c, m - i - j);
  return acc;
}

double signed_double_area(const DomainMesh& m, const std::array<int, 3>& tri) {
  const double z0 = m.z[tri[0]], r0 = m.rho[tri[0]];
  return (m.z[tri[1]] - z0) * (m.rho[tri[2]] - r0) - (m.z[tri[2]] - z0) * (m.rho[tri[1]] - r0);
}

}  // namespace

DomainMesh build_domain_mesh(const BoundarySurface& surface, double R_omega, const DomainResolution& res,
                             const Potential& h) {
  if (!(R_omega > 0.0)) throw std::invalid_argument("R_Omega must be positive");
  if (res.radial < 4 || res.angular < 2) throw std::invalid_argument("domain resolution too small");
  if (!(res.grading >= 1.0)) throw std::invalid_argument("radial grading must be >= 1");
  const FermiChart chart(surface);
  if (chart.meridian_length() < R_omega) throw std::invalid_argument("boundary patch is shorter than R_Omega");
  if (R_omega * surface.max_principal_curvature() >= 1.0)
    throw std::invalid_argument("R_Omega reaches a focal point of the boundary patch");

  DomainMesh m;
  m.N = surface.N();
  m.surface = surface;
  m.R_omega = R_omega;
  m.potential = h;
  m.n_radial = res.radial;
  m.n_angular = res.angular;
  const int n = res.radial, na = res.angular;

  m.radii.resize(n + 1);
  m.radii[0] = 0.0;
  for (int k = 1; k <= n; ++k)
    m.radii[k] = res.grading == 1.0 ? R_omega * k / n : R_omega * std::pow(res.grading, k - n);
  m.radii[n] = R_omega;
  m.angles.resize(na + 1);
  for (int l = 0; l <= na; ++l) m.angles[l] = 0.5 * std::numbers::pi * l / na;

  const std::size_t nodes = 1 + static_cast<std::size_t>(n) * (na + 1);
  m.z.assign(nodes, 0.0);
  m.rho.assign(nodes, 0.0);
  m.y1.assign(nodes, 0.0);
  m.t.assign(nodes, 0.0);
  for (int k = 1; k <= n; ++k)
    for (int l = 0; l <= na; ++l) {
      const int id = m.node(k, l);
      const double r = m.radii[k];
      m.t[id] = l == na ? 0.0 : r * std::cos(m.angles[l]);
      m.y1[id] = l == 0 ? 0.0 : r * std::sin(m.angles[l]);
      const MeridianPoint p = chart.point(m.t[id], m.y1[id]);
      m.z[id] = p.z;
      m.rho[id] = l == na ? 0.0 : p.rho;
    }

  for (int l = 0; l < na; ++l) m.triangles.push_back({0, m.node(1, l + 1), m.node(1, l)});
  for (int k = 1; k < n; ++k)
    for (int l = 0; l < na; ++l) {
      const int a = m.node(k, l), b = m.node(k + 1, l), c = m.node(k + 1, l + 1), d = m.node(k, l + 1);
      m.triangles.push_back({a, c, b});
      m.triangles.push_back({a, d, c});
    }
  for (const auto& tri : m.triangles) {
    const double area2 = signed_double_area(m, tri);
    double scale = 0.0;
    for (int v : tri) scale = std::max(scale, m.t[v] * m.t[v] + m.y1[v] * m.y1[v]);
    if (!(area2 > 1e-12 * scale)) throw std::runtime_error("degenerate or inverted mesh cell");
  }

  for (int k = 0; k <= n; ++k) m.patch_nodes.push_back(m.node(k, 0));
  m.gamma2.assign(m.patch_nodes.begin(), m.patch_nodes.end() - 1);
  for (int l = 0; l <= na; ++l) m.gamma1.push_back(m.node(n, l));
  for (int k = 0; k < n; ++k) {
    m.d_values.push_back(m.radii[k]);
    m.h_values.push_back(h(m.radii[k]));
  }
  for (int k = 0; k <= n; ++k) m.patch_rho.push_back(m.rho[m.node(k, 0)]);
  return m;
}

DomainForms::DomainForms(const DomainMesh& mesh) : mesh_(&mesh) {
  const int N = mesh.N;
  const int deg = N - 1;
  const double sigma = sphere_area(N);
  const auto nodes = static_cast<Eigen::Index>(mesh.size());

  std::vector<Eigen::Triplet<double>> kt, mt;
  for (const auto& tri : mesh.triangles) {
    const double area2 = signed_double_area(mesh, tri);
    const double area = 0.5 * area2;
    double gz[3], gr[3], rv[3];
    for (int a = 0; a < 3; ++a) {
      const int b = tri[(a + 1) % 3], c = tri[(a + 2) % 3];
      gz[a] = (mesh.rho[b] - mesh.rho[c]) / area2;
      gr[a] = (mesh.z[c] - mesh.z[b]) / area2;
      rv[a] = mesh.rho[tri[a]];
    }
    const double weight =
        sigma * area * 2.0 / ((deg + 1.0) * (deg + 2.0)) * complete_homogeneous(rv[0], rv[1], rv[2], deg);
    double mass[3][3] = {};
    // Collapsed-square Gauss rule: lambda = (x, (1-x) y, (1-x)(1-y)), jacobian (1-x) 2|T|.
    auto integrate = [&](auto&& f) {
      return Gauss8::integrate(
          [&](double x) { return Gauss8::integrate([&](double y) { return f(x, y); }, 0.0, 1.0) * (1.0 - x); }, 0.0,
          1.0);
    };
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) {
        const double v = integrate([&](double x, double y) {
          const double l[3] = {x, (1.0 - x) * y, (1.0 - x) * (1.0 - y)};
          const double r = l[0] * rv[0] + l[1] * rv[1] + l[2] * rv[2];
          return l[a] * l[b] * std::pow(r, deg);
        });
        mass[a][b] = mass[b][a] = sigma * 2.0 * area * v;
      }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        kt.emplace_back(tri[a], tri[b], weight * (gz[a] * gz[b] + gr[a] * gr[b]));
        mt.emplace_back(tri[a], tri[b], mass[a][b]);
      }
  }
  K_.resize(nodes, nodes);
  K_.setFromTriplets(kt.begin(), kt.end());
  M_.resize(nodes, nodes);
  M_.setFromTriplets(mt.begin(), mt.end());

  const FermiChart chart(mesh.surface);
  std::vector<Eigen::Triplet<double>> ht;
  const auto& pn = mesh.patch_nodes;
  for (std::size_t k = 0; k + 1 < pn.size(); ++k) {
    const double d0 = mesh.radii[k], d1 = mesh.radii[k + 1], len = d1 - d0;
    double e00 = 0.0, e01 = 0.0, e11 = 0.0;
    for (std::size_t i = 0; i < Gauss8::abscissa().size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const double x = Gauss8::abscissa()[i];
        if (x == 0.0 && sgn > 0.0) continue;
        const double u = 0.5 * (1.0 + sgn * x);
        const double d = d0 + len * u;
        const double w = 0.5 * Gauss8::weights()[i] * len * std::pow(chart.meridian(d)[1], N - 1.0) * mesh.potential(d);
        e00 += w * (1.0 - u) * (1.0 - u);
        e01 += w * (1.0 - u) * u;
        e11 += w * u * u;
      }
    }
    ht.emplace_back(pn[k], pn[k], sigma * e00);
    ht.emplace_back(pn[k], pn[k + 1], sigma * e01);
    ht.emplace_back(pn[k + 1], pn[k], sigma * e01);
    ht.emplace_back(pn[k + 1], pn[k + 1], sigma * e11);
  }
  Mh_.resize(nodes, nodes);
  Mh_.setFromTriplets(ht.begin(), ht.end());

  patch_d_.assign(mesh.radii.begin(), mesh.radii.end());
  smooth_.resize(pn.size());
  smooth_[0] = 1.0;
  for (std::size_t k = 1; k < pn.size(); ++k) smooth_[k] = std::pow(mesh.patch_rho[k] / patch_d_[k], N - 1.0);
}

double DomainForms::energy(std::span<const double> u) const {
  const auto x = as_vec(u);
  return x.dot(K_ * x) + x.dot(Mh_ * x);
}

PowerIntegral DomainForms::gamma2_power(std::span<const double> u, double s, double t, bool with_gradient) const {
  std::vector<double> vals(mesh_->patch_nodes.size());
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = u[mesh_->patch_nodes[k]];
  PowerIntegral p = weighted_power_integral(patch_d_, vals, mesh_->N - 1.0 - s, t, smooth_, with_gradient);
  const double sigma = sphere_area(mesh_->N);
  p.value *= sigma;
  for (double& g : p.gradient) g *= sigma;
  return p;
}

double DomainForms::quotient(std::span<const double> u, const ProblemParams& params) const {
  const double q = params.q();
  return energy(u) / std::pow(gamma2_power(u, params.s(), q).value, 2.0 / q);
}

namespace {

// Sub-matrix of a sparse matrix on the given rows and columns.
ColSparse restrict(const SparseMatrix& A, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> rmap(A.rows(), -1), cmap(A.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) rmap[rows[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < cols.size(); ++i) cmap[cols[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> trips;
  for (int r : rows)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      if (cmap[it.col()] >= 0) trips.emplace_back(rmap[r], cmap[it.col()], it.value());
  ColSparse out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

std::vector<int> free_nodes(const DomainMesh& mesh, bool dirichlet) {
  std::vector<bool> fixed(mesh.size(), false);
  if (dirichlet)
    for (int v : mesh.gamma1) fixed[v] = true;
  std::vector<int> out;
  for (std::size_t v = 0; v < mesh.size(); ++v)
    if (!fixed[v]) out.push_back(static_cast<int>(v));
  return out;
}

// Smallest eigenvalue of the pencil (A, B), B positive definite, by LOBPCG with B^{-1}
// as preconditioner.
double smallest_pencil_eigenvalue(const ColSparse& A, const ColSparse& B) {
  Eigen::SimplicialLDLT<ColSparse> Binv(B);
  if (Binv.info() != Eigen::Success) throw std::runtime_error("Gram form is not positive definite");
  const Eigen::Index n = A.rows();
  std::mt19937 gen(20240607u);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Vec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * dist(gen);
  Vec p;
  double lambda = 0.0, residual = 0.0;
  for (int it = 0; it < 2000; ++it) {
    x /= std::sqrt(x.dot(B * x));
    const Vec Ax = A * x, Bx = B * x;
    lambda = x.dot(Ax);
    const Vec r = Ax - lambda * Bx;
    const Vec w = Binv.solve(r);
    // x is B-normalized and the pencil spectrum is O(1), so the dual norm of the
    // residual is an absolute error scale that stays meaningful when lambda = 0.
    residual = std::sqrt(std::max(r.dot(w), 0.0));
    if (residual < 1e-9) return lambda;
    std::vector<Vec> cols{x, w};
    if (p.size() == n) cols.push_back(p);
    for (;;) {
      const int m = static_cast<int>(cols.size());
      Mat V(n, m);
      for (int c = 0; c < m; ++c) V.col(c) = cols[c] / std::sqrt(cols[c].dot(B * cols[c]));
      const Mat GB = V.transpose() * (B * V);
      const Mat GA = V.transpose() * (A * V);
      Eigen::SelfAdjointEigenSolver<Mat> gb(GB);
      if (gb.eigenvalues().minCoeff() < 1e-12 * gb.eigenvalues().maxCoeff()) {
        if (m == 2) return lambda;  // w already in span{x}: converged to working precision
        cols.pop_back();
        continue;
      }
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ritz(GA, GB);
      const Vec c = ritz.eigenvectors().col(0);
      const Vec xn = V * c;
      Vec pn = Vec::Zero(n);
      for (int k = 1; k < m; ++k) pn += c[k] * V.col(k);
      x = xn;
      p = pn;
      break;
    }
  }
  throw ConvergenceError("coercivity eigen-iteration did not converge", lambda, residual);
}

// Elimination of all free nodes off Gamma_2: boundary form Q = S + M_h with S the
// Schur complement of the stiffness, and the harmonic-extension operator.
struct ReducedProblem {
  std::vector<int> boundary;  // mesh nodes carrying the unknowns (patch order)
  std::vector<int> interior;
  Mat Q;
  Mat extension;  // interior values = extension * boundary values
};

ReducedProblem reduce(const DomainMesh& mesh, const DomainForms& forms, bool dirichlet) {
  ReducedProblem r;
  std::vector<bool> on_patch(mesh.size(), false), fixed(mesh.size(), false);
  if (dirichlet)
    for (int v : mesh.gamma1) fixed[v] = true;
  for (int v : mesh.patch_nodes)
    if (!fixed[v]) {
      on_patch[v] = true;
      r.boundary.push_back(v);
    }
  for (std::size_t v = 0; v < mesh.size(); ++v)
    if (!fixed[v] && !on_patch[v]) r.interior.push_back(static_cast<int>(v));

  const ColSparse Kii = restrict(forms.stiffness(), r.interior, r.interior);
  const ColSparse Kib = restrict(forms.stiffness(), r.interior, r.boundary);
  const Mat Kbb = Mat(restrict(forms.stiffness(), r.boundary, r.boundary));
  const Mat Mbb = Mat(restrict(forms.potential_mass(), r.boundary, r.boundary));
  Eigen::SimplicialLDLT<ColSparse> solver(Kii);
  if (solver.info() != Eigen::Success) throw std::runtime_error("interior stiffness factorization failed");
  const Mat X = solver.solve(Mat(Kib));
  r.extension = -X;
  r.Q = Kbb - Mat(Kib).transpose() * X + Mbb;
  r.Q = 0.5 * (r.Q + r.Q.transpose());
  return r;
}

}  // namespace

double coercivity_margin(const DomainMesh& mesh, bool use_dirichlet_subspace) {
  const DomainForms forms(mesh);
  const std::vector<int> f = free_nodes(mesh, use_dirichlet_subspace);
  const SparseMatrix A = forms.stiffness() + forms.potential_mass();
  const SparseMatrix B = forms.stiffness() + forms.volume_mass();
  return smallest_pencil_eigenvalue(restrict(A, f, f), restrict(B, f, f));
}

ElResiduals el_residual(const DomainMesh& mesh, const ProblemParams& params, std::span<const double> u) {
  if (u.size() != mesh.size()) throw std::invalid_argument("field size does not match mesh");
  const DomainForms forms(mesh);
  const double q = params.q();
  const auto x = as_vec(u);
  const Vec Ku = forms.stiffness() * x;
  const Vec Hu = forms.potential_mass() * x;
  const PowerIntegral p = forms.gamma2_power(u, params.s(), q, true);
  const double mu = p.value > 0.0 ? forms.energy(u) / p.value : 0.0;

  std::vector<bool> boundary(mesh.size(), false);
  for (int v : mesh.patch_nodes) boundary[v] = true;
  for (int v : mesh.gamma1) boundary[v] = true;
  double interior = 0.0, patch = 0.0;
  for (std::size_t v = 0; v < mesh.size(); ++v)
    if (!boundary[v]) interior += Ku[v] * Ku[v];
  double flux = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < mesh.gamma2.size(); ++k) {
    const int v = mesh.gamma2[k];
    patch += Ku[v] * Ku[v];
    const double b = mu * p.gradient[k] / q;
    flux += (Ku[v] + Hu[v] - b) * (Ku[v] + Hu[v] - b);
    scale += b * b;
  }
  ElResiduals r;
  r.interior = patch > 0.0 ? std::sqrt(interior / patch) : std::sqrt(interior);
  r.flux = scale > 0.0 ? std::sqrt(flux / scale) : std::sqrt(flux);
  for (int v : mesh.gamma1) r.gamma1 = std::max(r.gamma1, std::abs(u[v]));
  return r;
}

MixedMinimizer compute_mu(const DomainMesh& mesh, const ProblemParams& params, const DomainSolveOptions& opts) {
  if (params.N() != mesh.N) throw std::invalid_argument("mesh and params disagree on N");
  if (!(coercivity_margin(mesh, opts.use_dirichlet_subspace) > 0.0))
    throw std::domain_error("mixed form is not coercive on the chosen subspace");
  const DomainForms forms(mesh);
  const ReducedProblem red = reduce(mesh, forms, opts.use_dirichlet_subspace);
  const Eigen::LLT<Mat> Q_llt(red.Q);
  if (Q_llt.info() != Eigen::Success) throw std::domain_error("reduced mixed form is not positive definite");

  const double q = params.q();
  const auto nb = static_cast<Eigen::Index>(red.boundary.size());
  std::vector<double> full(mesh.size(), 0.0);
  auto scatter = [&](const Vec& ub) {
    for (Eigen::Index k = 0; k < nb; ++k) full[red.boundary[k]] = ub[k];
  };
  auto functional = [&](const Vec& ub, bool grad) {
    scatter(ub);
    return forms.gamma2_power(full, params.s(), q, grad);
  };
  auto target = [&](const Vec& ub) {
    const PowerIntegral p = functional(ub, true);
    Vec b(nb);
    for (Eigen::Index k = 0; k < nb; ++k) b[k] = p.gradient[k] / q;
    return b;
  };
  auto normalize = [&](Vec& ub) {
    const double G = functional(ub, false).value;
    if (!(G > 0.0) || !std::isfinite(G)) throw std::runtime_error("domain iterate collapsed to zero");
    ub *= std::pow(G, -1.0 / q);
  };

  const double width = opts.initial_width * mesh.R_omega;
  Vec u(nb);
  for (Eigen::Index k = 0; k < nb; ++k) {
    const double d = mesh.radii[k];
    u[k] = std::pow(1.0 + d * d / (width * width), -0.5 * (mesh.N - 1)) * (1.0 - d / mesh.R_omega);
  }
  normalize(u);

  MixedMinimizer out;
  double E = u.dot(red.Q * u);
  double quotient = E;
  auto residual = [&](const Vec& ub, double lambda) {
    const Vec b = lambda * target(ub);
    const double bb = b.squaredNorm();
    const Vec r = red.Q * ub - b;
    return bb > 0.0 ? std::sqrt(r.squaredNorm() / bb) : r.norm();
  };
  double el = residual(u, E);
  std::deque<double> window{quotient};
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    out.iterations.push_back({iter, quotient, el, std::abs(functional(u, false).value - 1.0)});
    if (el < opts.el_tolerance) break;
    if (static_cast<int>(window.size()) > opts.stall_window &&
        std::abs(window.front() - quotient) <= opts.stall_tolerance * quotient)
      break;
    const Vec du = E * Q_llt.solve(target(u)) - u;
    double alpha = 1.0;
    Vec trial;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      trial = (u + alpha * du).cwiseMax(0.0);
      const double G = functional(trial, false).value;
      if (!(G > 0.0)) continue;
      if (trial.dot(red.Q * trial) / std::pow(G, 2.0 / q) <= quotient + opts.descent_slack * std::abs(quotient)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    normalize(trial);
    u = trial;
    E = u.dot(red.Q * u);
    quotient = E;
    el = residual(u, E);
    window.push_back(quotient);
    if (static_cast<int>(window.size()) > opts.stall_window + 1) window.pop_front();
  }

  std::fill(full.begin(), full.end(), 0.0);
  scatter(u);
  const Vec interior = red.extension * u;
  for (std::size_t k = 0; k < red.interior.size(); ++k) full[red.interior[k]] = interior[static_cast<Eigen::Index>(k)];
  out.u = full;
  out.mu_value = forms.quotient(out.u, params);
  out.norm_residual = std::abs(forms.gamma2_power(out.u, params.s(), q).value - 1.0);
  out.el_residuals = el_residual(mesh, params, out.u);
  if (el > 10.0 * opts.el_tolerance)
    throw ConvergenceError("domain minimization did not converge", out.mu_value, el);
  return out;
}

double half_mass_radius(const DomainMesh& mesh, const ProblemParams& params, std::span<const double> u) {
  if (u.size() != mesh.size()) throw std::invalid_argument("field size does not match mesh");
  const DomainForms forms(mesh);
  const double q = params.q(), a = mesh.N - 1.0 - params.s();
  const double total = forms.gamma2_power(u, params.s(), q).value;
  if (!(total > 0.0)) throw std::invalid_argument("half-mass radius of a zero field");
  const double sigma = sphere_area(mesh.N);
  const auto& pn = mesh.patch_nodes;
  auto smooth = [&](std::size_t k) {
    return k == 0 ? 1.0 : std::pow(mesh.patch_rho[k] / mesh.radii[k], mesh.N - 1.0);
  };
  // Mass of segment k from its left end up to x.
  auto partial = [&](std::size_t k, double x) {
    const double x0 = mesh.radii[k], x1 = mesh.radii[k + 1], lam = (x - x0) / (x1 - x0);
    const double v0 = u[pn[k]], v1 = u[pn[k + 1]];
    const std::array<double, 2> nodes{x0, x}, vals{v0, (1.0 - lam) * v0 + lam * v1},
        g{smooth(k), (1.0 - lam) * smooth(k) + lam * smooth(k + 1)};
    return sigma * weighted_power_integral(nodes, vals, a, q, g).value;
  };
  double cumulative = 0.0;
  for (std::size_t k = 0; k + 1 < pn.size(); ++k) {
    const double seg = partial(k, mesh.radii[k + 1]);
    if (cumulative + seg >= 0.5 * total) {
      double lo = mesh.radii[k], hi = mesh.radii[k + 1];
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (cumulative + partial(k, mid) < 0.5 * total ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    cumulative += seg;
  }
  return mesh.R_omega;
}

double interpolate_field(const DomainMesh& mesh, std::span<const double> u, double t, double y1) {
  const double r = std::hypot(t, y1);
  if (r > mesh.R_omega) return 0.0;
  if (t < 0.0 || y1 < 0.0) throw std::out_of_range("point outside the meridian quarter plane");
  const double theta = std::atan2(y1, t);
  const int na = mesh.n_angular;
  double fl = theta / mesh.angles[1];
  int l = std::min(static_cast<int>(fl), na - 1);
  const double b = std::clamp(fl - l, 0.0, 1.0);
  const auto it = std::upper_bound(mesh.radii.begin(), mesh.radii.end(), r);
  const int k = std::min(static_cast<int>(it - mesh.radii.begin()) - 1, mesh.n_radial - 1);
  const double a = (r - mesh.radii[k]) / (mesh.radii[k + 1] - mesh.radii[k]);
  auto ring = [&](int kk) {
    if (kk == 0) return u[0];
    return (1.0 - b) * u[mesh.node(kk, l)] + b * u[mesh.node(kk, l + 1)];
  };
  return (1.0 - a) * ring(k) + a * ring(k + 1);
}

BlowupField blowup_rescale(const DomainMesh& mesh, const ProblemParams& params, std::span<const double> u,
                           double r_n, double reference_radius, int cells) {
  if (!(r_n > 0.0)) throw std::invalid_argument("blow-up scale must be positive");
  const FermiChart chart(mesh.surface);
  if (r_n * reference_radius > chart.meridian_length()) throw std::out_of_range("blow-up grid leaves the chart");
  BlowupField out;
  out.r_n = r_n;
  out.grid = build_axi_grid(params, reference_radius, cells, cells, 1.0);
  out.w.assign(out.grid.size(), 0.0);
  const double factor = std::pow(r_n, 0.5 * (mesh.N - 1));
  for (int i = 0; i <= out.grid.nz(); ++i)
    for (int j = 0; j <= out.grid.nr(); ++j)
      out.w[out.grid.index(i, j)] =
          factor * interpolate_field(mesh, u, r_n * out.grid.r_nodes[j], r_n * out.grid.z_nodes[i]);

  std::vector<double> nodes, vals;
  const std::vector<double> trace = boundary_trace(out.grid, out.w);
  for (int j = 0; j <= out.grid.nr() && out.grid.r_nodes[j] < 1.0; ++j) {
    nodes.push_back(out.grid.r_nodes[j]);
    vals.push_back(trace[j]);
  }
  const auto it = std::upper_bound(out.grid.r_nodes.begin(), out.grid.r_nodes.end(), 1.0);
  const auto j = static_cast<std::size_t>(it - out.grid.r_nodes.begin());
  if (j < out.grid.r_nodes.size()) {
    const double x0 = out.grid.r_nodes[j - 1], x1 = out.grid.r_nodes[j];
    const double lam = (1.0 - x0) / (x1 - x0);
    nodes.push_back(1.0);
    vals.push_back((1.0 - lam) * trace[j - 1] + lam * trace[j]);
  }
  out.unit_ball_mass =
      sphere_area(mesh.N) * weighted_power_integral(nodes, vals, mesh.N - 1.0 - params.s(), params.q()).value;
  return out;
}

double distance_to_bubble(const BlowupField& blowup, const GroundState& gs) {
  const int N = gs.params.N();
  const std::vector<double> wb = boundary_trace(gs.grid, gs.w);
  const auto& rn = gs.grid.r_nodes;
  auto trace_at = [&](double r) {
    if (r >= rn.back()) return 0.0;
    const auto it = std::upper_bound(rn.begin(), rn.end(), r);
    const auto j = static_cast<std::size_t>(it - rn.begin());
    const double lam = (r - rn[j - 1]) / (rn[j] - rn[j - 1]);
    return (1.0 - lam) * wb[j - 1] + lam * wb[j];
  };
  const double scale = ground_state_half_mass_radius(gs);
  const double factor = std::pow(scale, 0.5 * (N - 1));

  const std::vector<double> tb = boundary_trace(blowup.grid, blowup.w);
  const auto& r = blowup.grid.r_nodes;
  double diff = 0.0, ref = 0.0;
  for (std::size_t j = 0; j + 1 < r.size(); ++j) {
    // Trapezoid rule with weight r^{N-1} on each segment.
    for (std::size_t e : {j, j + 1}) {
      const double wgt = 0.5 * (r[j + 1] - r[j]) * std::pow(r[e], N - 1.0);
      const double bubble = factor * trace_at(scale * r[e]);
      diff += wgt * (tb[e] - bubble) * (tb[e] - bubble);
      ref += wgt * bubble * bubble;
    }
  }
  return std::sqrt(diff / ref);
}

CriterionReport criterion_report(const CriterionCoefficient& c, double H0, double h0, double mu_value,
                                 double S_value) {
  CriterionReport r;
  r.c_value = c.c_value;
  r.H0 = H0;
  r.h0 = h0;
  r.lhs = c.c_value * H0 + h0;
  r.satisfied = r.lhs < 0.0;
  r.mu_value = mu_value;
  r.S_value = S_value;
  r.gap = S_value - mu_value;
  return r;
}

}  // namespace hstrace

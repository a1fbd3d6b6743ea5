#include "hstrace/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>
#include <tuple>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "hstrace/domain.hpp"
#include "hstrace/expansion.hpp"
#include "hstrace/geometry.hpp"
#include "hstrace/halfspace.hpp"

namespace hstrace {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
struct Outcome {
  std::optional<T> value;
  std::string error;
  bool non_convergence = false;

  bool ok() const { return value.has_value(); }
};

template <typename F>
auto attempt(F&& f) -> Outcome<decltype(f())> {
  Outcome<decltype(f())> out;
  try {
    out.value.emplace(f());
  } catch (const ConvergenceError& e) {
    out.error = e.what();
    out.non_convergence = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

// Runs every task once; each task owns its output slot, so collection order does
// not depend on scheduling.
void run_parallel(const std::vector<std::function<void()>>& tasks, int jobs) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) tasks[i]();
  };
  const int n = std::clamp<int>(jobs, 1, std::max<int>(1, static_cast<int>(tasks.size())));
  std::vector<std::jthread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(12);
  return out;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + '"';
}

BoundarySurface suite_surface(int N, double H0, double patch_radius) {
  if (H0 == 0.0) return BoundarySurface::flat(N, patch_radius);
  return BoundarySurface::paraboloid(N, -H0 / N, patch_radius);
}

DomainResolution coarser(const DomainResolution& r) {
  return {std::max(4, r.radial / 2), std::max(2, r.angular / 2), r.grading * r.grading};
}

DomainResolution finer(const DomainResolution& r) { return {2 * r.radial, 2 * r.angular, std::sqrt(r.grading)}; }

// The s = 0 extremal U = ((1 + z)^2 + r^2)^{-(N-1)/2} is harmonic with
// -d_z U = (N - 1)(1 + r^2)^{-(N+1)/2} and U^q = (1 + r^2)^{-N} on {z = 0}, so both
// sides of its quotient reduce to I = int_0^inf r^{N-1} (1 + r^2)^{-N} dr.
double extremal_quotient(int N) {
  boost::math::quadrature::exp_sinh<double> integrator;
  const double I = integrator.integrate([N](double r) { return std::pow(r, N - 1) * std::pow(1.0 + r * r, -N); });
  return (N - 1) * std::pow(sphere_area(N) * I, 1.0 / N);
}

struct DomainRun {
  double mu = 0.0;
  ElResiduals el;
  double half_mass = 0.0;
  double min_gamma2 = 0.0;
};

DomainRun solve_domain(const RunConfig& cfg, const BoundarySurface& surface, const Potential& h, double s,
                       const DomainResolution& res, std::vector<double>* field = nullptr,
                       DomainMesh* mesh_out = nullptr) {
  const ProblemParams params(surface.N(), s, h.h0);
  DomainMesh mesh = build_domain_mesh(surface, cfg.R_omega, res, h);
  const MixedMinimizer m = compute_mu(mesh, params, cfg.domain_options());
  DomainRun run;
  run.mu = m.mu_value;
  run.el = m.el_residuals;
  run.half_mass = half_mass_radius(mesh, params, m.u);
  run.min_gamma2 = std::numeric_limits<double>::infinity();
  for (int i : mesh.gamma2) run.min_gamma2 = std::min(run.min_gamma2, m.u[i]);
  if (field) *field = m.u;
  if (mesh_out) *mesh_out = std::move(mesh);
  return run;
}

CheckResult make_check(int id, std::string description, double measured, double threshold, bool pass) {
  return {id, std::move(description), measured, threshold, pass, {}, false};
}

template <typename T>
CheckResult failed_check(int id, std::string description, double threshold, const Outcome<T>& o) {
  return {id, std::move(description), kNaN, threshold, false, o.error, o.non_convergence};
}

// First failing outcome among the inputs of a check, if any.
struct Failure {
  std::string error;
  bool non_convergence = false;
};

template <typename T>
void note_failure(std::optional<Failure>& f, const Outcome<T>& o) {
  if (!f && !o.ok()) f = Failure{o.error, o.non_convergence};
}

CheckResult failure_check(int id, std::string description, double threshold, const Failure& f) {
  return {id, std::move(description), kNaN, threshold, false, f.error, f.non_convergence};
}

using GsKey = std::tuple<int, double, int>;  // N, s, refinement

struct ExpansionCase {
  double H0, h0;
};

struct CriterionCase {
  double H0, h0, s;
  bool control = false;
};

}  // namespace

bool SuiteReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

bool SuiteReport::non_convergence() const {
  return std::any_of(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.pass && c.non_convergence; });
}

void write_report_csv(const SuiteReport& rep, std::ostream& out) {
  const auto old = out.precision(12);
  out << "id,description,measured,threshold,pass,error\n";
  for (const CheckResult& c : rep.checks)
    out << c.id << ',' << csv_quote(c.description) << ',' << c.measured << ',' << c.threshold << ','
        << (c.pass ? "PASS" : "FAIL") << ',' << csv_quote(c.error) << '\n';
  out << "overall,,,," << (rep.pass() ? "PASS" : "FAIL") << ",\n";
  out.precision(old);
}

SuiteReport run_suite(const RunConfig& cfg, const std::filesystem::path& out_dir, int jobs) {
  std::filesystem::create_directories(out_dir);
  const int level = cfg.grid_refinement;

  // Stage 1: half-space ground states.
  std::map<GsKey, Outcome<GroundState>> gs;
  for (int N : {3, 4, 5})
    for (double s : {0.0, 0.25, 0.5, 0.75}) gs[{N, s, level}];
  for (double s : {0.8, 0.9, 0.95}) gs[{3, s, level}];
  for (int N : {3, 4})
    for (double s : {0.25, 0.5, 0.75}) gs[{N, s, level + 1}];
  gs[{3, 0.0, level + 1}];

  std::vector<std::function<void()>> tasks;
  for (auto& [key, slot] : gs)
    tasks.push_back([&cfg, key = key, &slot = slot] {
      slot = attempt([&] {
        const auto [N, s, lev] = key;
        const ProblemParams p(N, s);
        return compute_ground_state(p, default_axi_grid(p, cfg.grid_R, lev), cfg.ground_state_options());
      });
    });
  run_parallel(tasks, jobs);
  auto ground = [&](int N, double s, int lev) -> const Outcome<GroundState>& { return gs.at({N, s, lev}); };

  // Stage 2: domain problems, expansions and the remainder terms.
  const std::vector<CriterionCase> crit_cases = [] {
    std::vector<CriterionCase> v;
    for (double s : {0.0, 0.5})
      for (double H0 : {-1.0, 0.0})
        for (double h0 : {-0.5, -0.2}) v.push_back({H0, h0, s});
    v.push_back({0.0, 1.0, 0.5, true});
    return v;
  }();
  const std::array<DomainResolution, 3> levels{coarser(cfg.mesh), cfg.mesh, finer(cfg.mesh)};
  std::vector<std::array<Outcome<DomainRun>, 3>> domain(crit_cases.size());

  const std::array<ExpansionCase, 3> exp_cases{{{0.0, -0.2}, {-1.0, 0.0}, {-1.0, -0.2}}};
  std::array<Outcome<ExpansionReport>, 3> expansions;

  const std::array<double, 4> rho_s{0.0, 0.25, 0.5, 0.75};
  std::array<Outcome<std::vector<std::array<double, kRhoTerms>>>, 4> rho;
  const std::vector<double> dyadic = dyadic_eps_list(cfg.R_omega);

  tasks.clear();
  for (std::size_t i = 0; i < crit_cases.size(); ++i)
    for (int l = 0; l < 3; ++l)
      tasks.push_back([&, i, l] {
        domain[i][l] = attempt([&] {
          const CriterionCase& c = crit_cases[i];
          return solve_domain(cfg, suite_surface(3, c.H0, cfg.patch_radius), Potential{c.h0, 0.0}, c.s, levels[l]);
        });
      });
  for (std::size_t k = 0; k < exp_cases.size(); ++k)
    tasks.push_back([&, k] {
      const auto& g = ground(3, 0.5, level);
      if (!g.ok()) {
        expansions[k].error = "ground state unavailable: " + g.error;
        expansions[k].non_convergence = g.non_convergence;
        return;
      }
      expansions[k] = attempt([&] {
        const HalfSpaceField w(*g.value);
        const DomainMesh mesh = build_domain_mesh(suite_surface(3, exp_cases[k].H0, cfg.patch_radius), cfg.R_omega,
                                                  cfg.mesh, Potential{exp_cases[k].h0, 0.0});
        return sweep_J(w, mesh, default_eps_list(cfg.R_omega), Cutoff{0.5 * cfg.R_omega, cfg.R_omega});
      });
    });
  for (std::size_t k = 0; k < rho_s.size(); ++k)
    tasks.push_back([&, k] {
      const auto& g = ground(3, rho_s[k], level);
      if (!g.ok()) {
        rho[k].error = "ground state unavailable: " + g.error;
        rho[k].non_convergence = g.non_convergence;
        return;
      }
      rho[k] = attempt([&] {
        const HalfSpaceField w(*g.value);
        std::vector<std::array<double, kRhoTerms>> rows;
        for (double eps : dyadic) rows.push_back(rho_terms(w, eps, cfg.R_omega));
        return rows;
      });
    });
  run_parallel(tasks, jobs);

  SuiteReport rep;
  auto& checks = rep.checks;

  // 1. closed-form s = 1 constant
  {
    const double err = std::max(std::abs(evaluate_SN1(3) - 2.0 / std::numbers::pi),
                                std::abs(evaluate_SN1(5) - std::numbers::pi / 2.0));
    checks.push_back(make_check(1, "S_{N,1} closed form for N = 3 and N = 5 (max abs error)", err, 1e-12, err <= 1e-12));
  }

  // 2. s = 0 against the explicit extremal
  {
    const std::string d = "S_{3,0} against the quotient of the explicit extremal (rel error)";
    const auto& g = ground(3, 0.0, level);
    if (!g.ok()) {
      checks.push_back(failed_check(2, d, 0.02, g));
    } else {
      const double ref = extremal_quotient(3);
      const double err = std::abs(g.value->S_value - ref) / ref;
      checks.push_back(make_check(2, d, err, 0.02, err <= 0.02));
    }
  }

  // 3. approach to the s = 1 constant
  {
    const std::string d = "S_{3,0.95} against 2/pi (rel error) with S_{3,s} decreasing over s = 0.8 0.9 0.95";
    std::optional<Failure> f;
    for (double s : {0.8, 0.9, 0.95}) note_failure(f, ground(3, s, level));
    if (f) {
      checks.push_back(failure_check(3, d, 0.1, *f));
    } else {
      const double a = ground(3, 0.8, level).value->S_value;
      const double b = ground(3, 0.9, level).value->S_value;
      const double c = ground(3, 0.95, level).value->S_value;
      const double target = evaluate_SN1(3);
      const double err = std::abs(c - target) / target;
      checks.push_back(make_check(3, d, err, 0.1, err <= 0.1 && a > b && b > c));
    }
  }

  // 4. Pohozaev identity
  {
    const std::string d = "Pohozaev residual (max) for N = 3 4 and s = 0.25 0.5 0.75; decreasing under refinement";
    std::optional<Failure> f;
    double worst = 0.0;
    bool decreasing = true;
    for (int N : {3, 4})
      for (double s : {0.25, 0.5, 0.75}) {
        note_failure(f, ground(N, s, level));
        note_failure(f, ground(N, s, level + 1));
        if (f) continue;
        const double r0 = pohozaev_residual(*ground(N, s, level).value);
        const double r1 = pohozaev_residual(*ground(N, s, level + 1).value);
        worst = std::max(worst, r0);
        decreasing = decreasing && r1 < r0;
      }
    checks.push_back(f ? failure_check(4, d, 0.05, *f) : make_check(4, d, worst, 0.05, worst < 0.05 && decreasing));
  }

  // 5. monotonicity and decay
  {
    const std::string d =
        "decay exponent rel error against -(N-1) (max) for N = 3 4; radial increments at most 1e-8";
    std::optional<Failure> f;
    double worst_decay = 0.0;
    double worst_inc = 0.0;
    for (int N : {3, 4})
      for (double s : {0.0, 0.25, 0.5, 0.75}) {
        const auto& g = ground(N, s, level);
        note_failure(f, g);
        if (!g.ok()) continue;
        try {
          worst_decay = std::max(worst_decay, std::abs(decay_fit(*g.value) + (N - 1)) / (N - 1));
        } catch (const std::exception& e) {
          if (!f) f = Failure{e.what(), false};
        }
        worst_inc = std::max(worst_inc, radial_monotonicity_check(*g.value).worst_increment);
      }
    checks.push_back(f ? failure_check(5, d, 0.15, *f)
                       : make_check(5, d, worst_decay, 0.15, worst_decay <= 0.15 && worst_inc <= 1e-8));
  }

  // 6. coefficient bounds
  {
    const std::string d = "distance of c to the ends of ((N-2)/(2N) 1/2) (min) over N = 3 4 5 and s = 0 0.25 0.5 0.75";
    std::optional<Failure> f;
    double margin = std::numeric_limits<double>::infinity();
    for (int N : {3, 4, 5})
      for (double s : {0.0, 0.25, 0.5, 0.75}) {
        const auto& g = ground(N, s, level);
        note_failure(f, g);
        if (!g.ok()) continue;
        const double c = curvature_coefficient(*g.value).c_value;
        margin = std::min({margin, c - (N - 2.0) / (2.0 * N), 0.5 - c});
      }
    checks.push_back(f ? failure_check(6, d, 0.0, *f) : make_check(6, d, margin, 0.0, margin > 0.0));
  }

  // 7. metric expansion
  std::vector<std::pair<std::string, MetricTaylorReport>> metric;
  {
    const std::string d = "tangential metric residual log-log slope (min) on sphere and paraboloid; normal block below 1e-8";
    const std::vector<double> scales{0.1, 0.05, 0.025};
    auto o = attempt([&] {
      metric.emplace_back("sphere", metric_taylor_check(BoundarySurface::sphere(3, 1.0, 1.0), scales));
      metric.emplace_back("paraboloid", metric_taylor_check(BoundarySurface::paraboloid(3, 1.0, 1.0), scales));
      return 0;
    });
    if (!o.ok()) {
      checks.push_back(failed_check(7, d, 2.0, o));
    } else {
      double slope = std::numeric_limits<double>::infinity();
      double normal = 0.0;
      for (const auto& [name, m] : metric) {
        slope = std::min(slope, m.slope);
        normal = std::max(normal, m.max_normal_residual);
      }
      checks.push_back(make_check(7, d, slope, 2.0, slope >= 2.0 && normal < 1e-8));
    }
  }

  // 8. expansion slope
  {
    const std::string d = "expansion slope rel error (max) for (H0 h0) = (0 -0.2) (-1 0) (-1 -0.2); intercept within 2% of S; "
                          "slope signs agree";
    std::optional<Failure> f;
    for (const auto& e : expansions) note_failure(f, e);
    if (f) {
      checks.push_back(failure_check(8, d, 0.15, *f));
    } else {
      double worst = 0.0;
      bool ok = true;
      for (const auto& e : expansions) {
        const ExpansionReport& r = *e.value;
        worst = std::max(worst, r.slope_rel_error);
        ok = ok && std::abs(r.fit_intercept - r.S_value) <= 0.02 * r.S_value && r.slope_rel_error <= 0.15 &&
             (r.fit_slope < 0.0) == (r.theory_slope < 0.0);
      }
      checks.push_back(make_check(8, d, worst, 0.15, ok));
    }
  }

  // 9. remainder terms
  {
    const std::string d = "remainder terms over eps not decreasing along the dyadic sweep (count) for N = 3";
    std::optional<Failure> f;
    for (const auto& r : rho) note_failure(f, r);
    if (f) {
      checks.push_back(failure_check(9, d, 0.0, *f));
    } else {
      int violations = 0;
      for (const auto& r : rho) {
        const auto& rows = *r.value;
        for (int t = 0; t < kRhoTerms; ++t)
          for (std::size_t k = 1; k < rows.size(); ++k)
            if (!(rows[k][t] / dyadic[k] < rows[k - 1][t] / dyadic[k - 1])) ++violations;
      }
      checks.push_back(make_check(9, d, violations, 0.0, violations == 0));
    }
  }

  // 10 and 11. domain problems at three mesh levels
  struct CaseSummary {
    double S = kNaN, delta_S = kNaN, delta_mu = kNaN, order = kNaN, gap = kNaN, c = kNaN;
  };
  std::vector<CaseSummary> summaries(crit_cases.size());
  {
    const std::string d10 = "gap S - mu over the discretization error (min over criterion cases); control mu >= S - delta";
    const std::string d11 = "EL residual (max over criterion cases); u > 0 on Gamma_2; half-mass radius change below 5%";
    std::optional<Failure> f;
    double ratio = std::numeric_limits<double>::infinity();
    bool control_ok = true;
    double worst_el = 0.0;
    bool positive = true, stable = true;
    for (std::size_t i = 0; i < crit_cases.size(); ++i) {
      const CriterionCase& cc = crit_cases[i];
      const auto& g0 = ground(3, cc.s, level);
      const auto& g1 = ground(3, cc.s, level + 1);
      note_failure(f, g0);
      note_failure(f, g1);
      for (const auto& o : domain[i]) note_failure(f, o);
      if (f) continue;
      const double m0 = domain[i][0].value->mu, m1 = domain[i][1].value->mu, m2 = domain[i][2].value->mu;
      CaseSummary& sm = summaries[i];
      sm.S = g1.value->S_value;
      sm.delta_S = std::abs(g1.value->S_value - g0.value->S_value);
      const double d01 = std::abs(m0 - m1), d12 = std::abs(m1 - m2);
      sm.order = d12 > 0.0 && d01 > 0.0 ? std::clamp(std::log2(d01 / d12), 1.0, 2.0) : 1.0;
      sm.delta_mu = d12 / (std::pow(2.0, sm.order) - 1.0);
      sm.gap = sm.S - m2;
      sm.c = curvature_coefficient(*g1.value).c_value;
      const double delta = sm.delta_mu + sm.delta_S;
      if (cc.control) {
        control_ok = m2 >= sm.S - delta;
        continue;
      }
      ratio = std::min(ratio, sm.gap / delta);
      for (int l : {1, 2}) {
        const DomainRun& run = *domain[i][l].value;
        worst_el = std::max({worst_el, run.el.interior, run.el.flux});
        positive = positive && run.min_gamma2 > 0.0;
      }
      const double h1 = domain[i][1].value->half_mass, h2 = domain[i][2].value->half_mass;
      stable = stable && std::abs(h2 - h1) / h2 < 0.05;
    }
    if (f) {
      checks.push_back(failure_check(10, d10, 3.0, *f));
      checks.push_back(failure_check(11, d11, 1e-3, *f));
    } else {
      checks.push_back(make_check(10, d10, ratio, 3.0, ratio > 3.0 && control_ok));
      checks.push_back(make_check(11, d11, worst_el, 1e-3, worst_el < 1e-3 && positive && stable));
    }
  }

  // 12. criterion equivalence
  {
    const std::string d = "mismatches between theory_slope < 0 and c H0 + h0 < 0 over H0 = -1 0 1, "
                          "h0 = -0.5 -0.2 0 0.2 0.5, s = 0 0.5";
    std::optional<Failure> f;
    int mismatches = 0;
    for (double s : {0.0, 0.5}) {
      const auto& g = ground(3, s, level);
      note_failure(f, g);
      if (!g.ok()) continue;
      const double c = curvature_coefficient(*g.value).c_value;
      for (double H0 : {-1.0, 0.0, 1.0})
        for (double h0 : {-0.5, -0.2, 0.0, 0.2, 0.5})
          if ((theory_slope(3, H0, h0, g.value->A, g.value->B) < 0.0) != (c * H0 + h0 < 0.0)) ++mismatches;
    }
    checks.push_back(f ? failure_check(12, d, 0.0, *f) : make_check(12, d, mismatches, 0.0, mismatches == 0));
  }

  // Data files, written by this thread only.
  {
    auto out = open_csv(out_dir / "ground_states.csv");
    out << "N,s,refinement,R,S_value,A,B,c_value,pohozaev_residual,decay_exponent,worst_increment,iterations,error\n";
    for (const auto& [key, o] : gs) {
      const auto [N, s, lev] = key;
      out << N << ',' << s << ',' << lev << ',' << cfg.grid_R << ',';
      if (!o.ok()) {
        out << ",,,,,,,," << csv_quote(o.error) << '\n';
        continue;
      }
      const GroundState& g = *o.value;
      double decay = kNaN;
      try {
        decay = decay_fit(g);
      } catch (const std::exception&) {
      }
      out << g.S_value << ',' << g.A << ',' << g.B << ',' << curvature_coefficient(g).c_value << ','
          << pohozaev_residual(g) << ',' << decay << ',' << radial_monotonicity_check(g).worst_increment << ','
          << g.iterations << ",\n";
    }
  }
  {
    auto out = open_csv(out_dir / "criterion.csv");
    out << "N,s,H0,h0,control,c_value,lhs,mu_L0,mu_L1,mu_L2,half_mass_L1,half_mass_L2,S_value,delta_S,order,"
           "delta_mu,gap,error\n";
    for (std::size_t i = 0; i < crit_cases.size(); ++i) {
      const CriterionCase& cc = crit_cases[i];
      const CaseSummary& sm = summaries[i];
      out << 3 << ',' << cc.s << ',' << cc.H0 << ',' << cc.h0 << ',' << (cc.control ? 1 : 0) << ',' << sm.c << ','
          << sm.c * cc.H0 + cc.h0;
      std::string error;
      for (const auto& o : domain[i]) {
        out << ',' << (o.ok() ? o.value->mu : kNaN);
        if (!o.ok() && error.empty()) error = o.error;
      }
      for (int l : {1, 2}) out << ',' << (domain[i][l].ok() ? domain[i][l].value->half_mass : kNaN);
      out << ',' << sm.S << ',' << sm.delta_S << ',' << sm.order << ',' << sm.delta_mu << ',' << sm.gap << ','
          << csv_quote(error) << '\n';
    }
  }
  for (std::size_t k = 0; k < expansions.size(); ++k) {
    auto out = open_csv(out_dir / ("expansion_" + std::to_string(k + 1) + ".csv"));
    if (expansions[k].ok())
      write_expansion_csv(*expansions[k].value, out);
    else
      out << "error\n" << csv_quote(expansions[k].error) << '\n';
  }
  {
    auto out = open_csv(out_dir / "rho_terms.csv");
    out << "N,s,eps";
    for (int t = 1; t <= kRhoTerms; ++t) out << ",rho" << t;
    out << '\n';
    for (std::size_t k = 0; k < rho.size(); ++k) {
      if (!rho[k].ok()) continue;
      for (std::size_t e = 0; e < dyadic.size(); ++e) {
        out << 3 << ',' << rho_s[k] << ',' << dyadic[e];
        for (double v : (*rho[k].value)[e]) out << ',' << v;
        out << '\n';
      }
    }
  }
  {
    auto out = open_csv(out_dir / "metric.csv");
    out << "surface,scale,tangential_residual,slope,max_normal_residual,first_order_coefficient\n";
    for (const auto& [name, m] : metric)
      for (std::size_t k = 0; k < m.scales.size(); ++k)
        out << name << ',' << m.scales[k] << ',' << m.tangential_residual[k] << ',' << m.slope << ','
            << m.max_normal_residual << ',' << m.first_order_coefficient << '\n';
  }
  {
    auto out = open_csv(out_dir / "suite_report.csv");
    write_report_csv(rep, out);
  }
  return rep;
}

SuiteReport run_mode(const RunConfig& cfg, const std::filesystem::path& out_dir, int jobs) {
  if (cfg.mode == Mode::suite) return run_suite(cfg, out_dir, jobs);
  std::filesystem::create_directories(out_dir);
  SuiteReport rep;
  auto& checks = rep.checks;
  const ProblemParams params = cfg.params();
  const double q_threshold = 1e-3;

  auto g = attempt([&] {
    return compute_ground_state(params, default_axi_grid(params, cfg.grid_R, cfg.grid_refinement),
                                cfg.ground_state_options());
  });
  if (!g.ok()) {
    checks.push_back(failed_check(1, "half-space ground state", 0.0, g));
    auto out = open_csv(out_dir / "report.csv");
    write_report_csv(rep, out);
    return rep;
  }
  const GroundState& gs = *g.value;
  const double c_value = curvature_coefficient(gs).c_value;
  const int N = cfg.N;

  switch (cfg.mode) {
    case Mode::ground_state: {
      auto out = open_csv(out_dir / "ground_state.csv");
      write_ground_state_csv(gs, out);
      const double poh = pohozaev_residual(gs);
      checks.push_back(make_check(1, "Pohozaev residual", poh, 0.05, poh < 0.05));
      const MonotonicityReport mono = radial_monotonicity_check(gs);
      checks.push_back(make_check(2, "radial monotonicity worst increment", mono.worst_increment, 1e-8,
                                  mono.worst_increment <= 1e-8));
      auto decay = attempt([&] { return decay_fit(gs); });
      if (decay.ok()) {
        const double err = std::abs(*decay.value + (N - 1)) / (N - 1);
        checks.push_back(make_check(3, "decay exponent rel error against -(N-1)", err, 0.15, err <= 0.15));
      } else {
        checks.push_back(failed_check(3, "decay exponent rel error against -(N-1)", 0.15, decay));
      }
      const double lo = (N - 2.0) / (2.0 * N);
      const double margin = std::min(c_value - lo, 0.5 - c_value);
      checks.push_back(make_check(4, "distance of c to the ends of ((N-2)/(2N) 1/2)", margin, 0.0, margin > 0.0));
      break;
    }
    case Mode::coercivity: {
      auto o = attempt([&] {
        const DomainMesh mesh = build_domain_mesh(cfg.boundary_surface(), cfg.R_omega, cfg.mesh,
                                                  Potential{cfg.h0, cfg.h_slope});
        return coercivity_margin(mesh, cfg.dirichlet_subspace);
      });
      auto out = open_csv(out_dir / "coercivity.csv");
      out << "N,H0,h0,h_slope,dirichlet_subspace,margin\n"
          << N << ',' << cfg.H0 << ',' << cfg.h0 << ',' << cfg.h_slope << ',' << (cfg.dirichlet_subspace ? 1 : 0)
          << ',' << (o.ok() ? *o.value : kNaN) << '\n';
      checks.push_back(o.ok() ? make_check(1, "coercivity margin", *o.value, 0.0, *o.value > 0.0)
                              : failed_check(1, "coercivity margin", 0.0, o));
      break;
    }
    case Mode::domain:
    case Mode::criterion: {
      std::vector<double> u;
      DomainMesh mesh;
      auto o = attempt([&] {
        return solve_domain(cfg, cfg.boundary_surface(), Potential{cfg.h0, cfg.h_slope}, cfg.s, cfg.mesh, &u, &mesh);
      });
      if (!o.ok()) {
        checks.push_back(failed_check(1, "mixed minimizer", q_threshold, o));
        break;
      }
      const DomainRun& run = *o.value;
      if (cfg.mode == Mode::domain) {
        auto out = open_csv(out_dir / "domain_field.csv");
        out << "z,rho,y1,t,u\n";
        for (std::size_t i = 0; i < mesh.size(); ++i)
          out << mesh.z[i] << ',' << mesh.rho[i] << ',' << mesh.y1[i] << ',' << mesh.t[i] << ',' << u[i] << '\n';
      }
      const CriterionReport cr = criterion_report(curvature_coefficient(gs), cfg.H0, cfg.h0, run.mu, gs.S_value);
      {
        auto out = open_csv(out_dir / (cfg.mode == Mode::domain ? "domain.csv" : "criterion.csv"));
        out << "N,s,H0,h0,c_value,lhs,satisfied,mu_value,S_value,gap,el_interior,el_flux,half_mass_radius\n"
            << N << ',' << cfg.s << ',' << cfg.H0 << ',' << cfg.h0 << ',' << cr.c_value << ',' << cr.lhs << ','
            << (cr.satisfied ? 1 : 0) << ',' << cr.mu_value << ',' << cr.S_value << ',' << cr.gap << ','
            << run.el.interior << ',' << run.el.flux << ',' << run.half_mass << '\n';
      }
      const double el = std::max(run.el.interior, run.el.flux);
      checks.push_back(make_check(1, "EL residual of the mixed minimizer", el, q_threshold, el < q_threshold));
      checks.push_back(make_check(2, "minimum of u on Gamma_2", run.min_gamma2, 0.0, run.min_gamma2 > 0.0));
      if (cfg.mode == Mode::criterion) {
        // Without the sign condition the strict inequality is not predicted.
        checks.push_back(make_check(3, cr.satisfied ? "S - mu (criterion satisfied)" : "S - mu (criterion not satisfied)",
                                    cr.gap, 0.0, !cr.satisfied || cr.gap > 0.0));
      }
      break;
    }
    case Mode::expansion: {
      auto o = attempt([&] {
        const HalfSpaceField w(gs);
        const DomainMesh mesh = build_domain_mesh(cfg.boundary_surface(), cfg.R_omega, cfg.mesh,
                                                  Potential{cfg.h0, cfg.h_slope});
        return sweep_J(w, mesh, default_eps_list(cfg.R_omega), Cutoff{0.5 * cfg.R_omega, cfg.R_omega});
      });
      if (!o.ok()) {
        checks.push_back(failed_check(1, "expansion sweep", 0.15, o));
        break;
      }
      const ExpansionReport& r = *o.value;
      auto out = open_csv(out_dir / "expansion.csv");
      write_expansion_csv(r, out);
      const double ie = std::abs(r.fit_intercept - r.S_value) / r.S_value;
      checks.push_back(make_check(1, "fit intercept rel error against S", ie, 0.02, ie <= 0.02));
      if (r.theory_slope != 0.0) {
        checks.push_back(make_check(2, "slope rel error", r.slope_rel_error, 0.15, r.slope_rel_error <= 0.15));
        const bool agree = (r.fit_slope < 0.0) == (r.theory_slope < 0.0);
        checks.push_back(make_check(3, "slope sign agreement", agree ? 1.0 : 0.0, 1.0, agree));
      } else {
        const double rel = std::abs(r.fit_slope) / r.S_value;
        checks.push_back(make_check(2, "flat slope |b| / S (theory slope 0)", rel, 0.05, rel <= 0.05));
      }
      break;
    }
    case Mode::suite:
      break;
  }
  auto out = open_csv(out_dir / "report.csv");
  write_report_csv(rep, out);
  return rep;
}

}  // namespace hstrace

#include "hstrace/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace hstrace {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_bool(std::string_view text, bool& out) {
  if (text == "true" || text == "1" || text == "yes") {
    out = true;
    return true;
  }
  if (text == "false" || text == "0" || text == "no") {
    out = false;
    return true;
  }
  return false;
}

bool uses_surface(Mode m) {
  return m == Mode::domain || m == Mode::criterion || m == Mode::expansion || m == Mode::coercivity;
}

}  // namespace

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::ground_state: return "ground-state";
    case Mode::domain: return "domain";
    case Mode::criterion: return "criterion";
    case Mode::expansion: return "expansion";
    case Mode::coercivity: return "coercivity";
    case Mode::suite: return "suite";
  }
  return "suite";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::ground_state, Mode::domain, Mode::criterion, Mode::expansion, Mode::coercivity, Mode::suite})
    if (mode_name(m) == name) return m;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

BoundarySurface RunConfig::boundary_surface() const {
  if (surface == "flat") {
    if (H0 != 0.0) throw std::invalid_argument("flat surface requires H0 = 0");
    return BoundarySurface::flat(N, patch_radius);
  }
  if (surface == "paraboloid") return BoundarySurface::paraboloid(N, -H0 / N, patch_radius);
  if (surface == "sphere") {
    if (H0 == 0.0) throw std::invalid_argument("sphere surface requires H0 != 0");
    return BoundarySurface::sphere(N, N / std::abs(H0), patch_radius, H0 < 0.0 ? 1 : -1);
  }
  throw std::invalid_argument("surface must be flat, paraboloid or sphere");
}

GroundStateOptions RunConfig::ground_state_options() const {
  GroundStateOptions o;
  o.el_tolerance = el_tolerance;
  o.max_iterations = max_iterations;
  return o;
}

DomainSolveOptions RunConfig::domain_options() const {
  DomainSolveOptions o;
  o.use_dirichlet_subspace = dirichlet_subspace;
  o.el_tolerance = el_tolerance;
  o.max_iterations = max_iterations;
  return o;
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

RunConfig parse_config(std::string_view text, std::optional<Mode> mode_override) {
  RunConfig cfg;
  std::vector<std::string> errors;
  std::set<std::string> seen;

  auto number = [&](auto& field) {
    return [&field](std::string_view v) { return parse_number(v, field); };
  };
  const std::map<std::string, std::function<bool(std::string_view)>, std::less<>> setters{
      {"mode",
       [&](std::string_view v) {
         try {
           cfg.mode = parse_mode(v);
           return true;
         } catch (const std::invalid_argument&) {
           return false;
         }
       }},
      {"N", number(cfg.N)},
      {"s", number(cfg.s)},
      {"surface",
       [&](std::string_view v) {
         cfg.surface = std::string(v);
         return true;
       }},
      {"H0", number(cfg.H0)},
      {"patch_radius", number(cfg.patch_radius)},
      {"R_omega", number(cfg.R_omega)},
      {"h0", number(cfg.h0)},
      {"h_slope", number(cfg.h_slope)},
      {"grid_R", number(cfg.grid_R)},
      {"grid_refinement", number(cfg.grid_refinement)},
      {"mesh_radial", number(cfg.mesh.radial)},
      {"mesh_angular", number(cfg.mesh.angular)},
      {"mesh_grading", number(cfg.mesh.grading)},
      {"dirichlet_subspace", [&](std::string_view v) { return parse_bool(v, cfg.dirichlet_subspace); }},
      {"el_tolerance", number(cfg.el_tolerance)},
      {"max_iterations", number(cfg.max_iterations)},
      {"output_dir",
       [&](std::string_view v) {
         cfg.output_dir = std::string(v);
         return !v.empty();
       }},
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = " (line " + std::to_string(line_no) + ")";
    if (eq == std::string_view::npos) {
      errors.push_back("expected 'key = value'" + where);
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      errors.push_back("unknown key '" + key + "'" + where);
      continue;
    }
    if (!seen.insert(key).second) {
      errors.push_back("duplicate key '" + key + "'" + where);
      continue;
    }
    if (!it->second(value)) errors.push_back("invalid value '" + std::string(value) + "' for " + key + where);
  }

  if (mode_override) {
    if (seen.count("mode") && cfg.mode != *mode_override)
      errors.push_back("mode '" + mode_name(cfg.mode) + "' conflicts with the requested " + mode_name(*mode_override));
    cfg.mode = *mode_override;
  }
  if (cfg.mode != Mode::suite)
    for (const char* key : {"N", "s"})
      if (!seen.count(key)) errors.push_back(std::string("missing required key '") + key + "'");

  if (seen.count("N") && cfg.N < 2) errors.push_back("N must be ≥ 2");
  if (seen.count("s") && !(cfg.s >= 0.0 && cfg.s < 1.0)) errors.push_back("s must lie in [0,1)");
  if (cfg.mode == Mode::expansion && cfg.N == 2) errors.push_back("expansion mode requires N ≥ 3");
  if (cfg.surface != "flat" && cfg.surface != "paraboloid" && cfg.surface != "sphere")
    errors.push_back("surface must be flat, paraboloid or sphere");
  if (!std::isfinite(cfg.H0)) errors.push_back("H0 must be finite");
  if (!std::isfinite(cfg.h0) || !std::isfinite(cfg.h_slope)) errors.push_back("h0 and h_slope must be finite");
  if (!(cfg.patch_radius > 0.0)) errors.push_back("patch_radius must be positive");
  if (!(cfg.R_omega > 0.0)) errors.push_back("R_omega must be positive");
  if (!(cfg.grid_R >= 8.0)) errors.push_back("grid_R must be at least 8");
  if (cfg.grid_refinement < 0 || cfg.grid_refinement > 3) errors.push_back("grid_refinement must lie in [0, 3]");
  if (cfg.mesh.radial < 4) errors.push_back("mesh_radial must be at least 4");
  if (cfg.mesh.angular < 2) errors.push_back("mesh_angular must be at least 2");
  if (!(cfg.mesh.grading >= 1.0)) errors.push_back("mesh_grading must be >= 1");
  if (!(cfg.el_tolerance > 0.0 && cfg.el_tolerance < 1.0)) errors.push_back("el_tolerance must lie in (0, 1)");
  if (cfg.max_iterations < 1) errors.push_back("max_iterations must be positive");

  // Geometry preconditions of the domain solver, checked before any solver runs.
  if (errors.empty() && uses_surface(cfg.mode)) {
    try {
      const BoundarySurface surf = cfg.boundary_surface();
      if (FermiChart(surf).meridian_length() < cfg.R_omega)
        errors.push_back("boundary patch is shorter than R_omega (increase patch_radius)");
      if (cfg.R_omega * surf.max_principal_curvature() >= 1.0)
        errors.push_back("R_omega times the boundary curvature must stay below 1");
    } catch (const std::invalid_argument& e) {
      errors.push_back(e.what());
    }
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

}  // namespace hstrace

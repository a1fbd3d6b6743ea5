#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hstrace/domain.hpp"
#include "hstrace/geometry.hpp"

namespace hstrace {

enum class Mode { ground_state, domain, criterion, expansion, coercivity, suite };

std::string mode_name(Mode m);
/// Throws std::invalid_argument for unknown names.
Mode parse_mode(std::string_view name);

/// Flat run configuration. Keys (defaults in parentheses):
///   mode (suite), N, s (both required unless mode = suite),
///   surface (flat | paraboloid | sphere), H0 (0), patch_radius (1.5), R_omega (1),
///   h0 (0), h_slope (0), grid_R (40), grid_refinement (0),
///   mesh_radial (240), mesh_angular (24), mesh_grading (2^{1/12}),
///   dirichlet_subspace (true), el_tolerance (1e-4), max_iterations (20000), output_dir (out)
struct RunConfig {
  Mode mode = Mode::suite;
  int N = 3;
  double s = 0.5;
  std::string surface = "flat";
  double H0 = 0.0;
  double patch_radius = 1.5;
  double R_omega = 1.0;
  double h0 = 0.0;
  double h_slope = 0.0;
  double grid_R = 40.0;
  int grid_refinement = 0;
  DomainResolution mesh;
  bool dirichlet_subspace = true;
  double el_tolerance = 1e-4;
  int max_iterations = 20000;
  std::string output_dir = "out";

  double q() const { return ProblemParams::critical_exponent(N, s); }
  ProblemParams params() const { return ProblemParams(N, s, h0); }
  /// Paraboloid with kappa = -H0/N, or sphere of radius N/|H0| with the
  /// orientation giving the requested sign.
  BoundarySurface boundary_surface() const;
  GroundStateOptions ground_state_options() const;
  DomainSolveOptions domain_options() const;
};

/// Every violation found while parsing, in line order followed by range checks.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses `key = value` lines with `#` comments. `mode_override` (the CLI
/// subcommand) replaces the mode key; a conflicting mode key is an error.
/// Throws ConfigError listing all violations.
RunConfig parse_config(std::string_view text, std::optional<Mode> mode_override = std::nullopt);

}  // namespace hstrace

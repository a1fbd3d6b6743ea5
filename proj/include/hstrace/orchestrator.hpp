#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "hstrace/config.hpp"

namespace hstrace {

struct CheckResult {
  int id = 0;
  std::string description;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
  /// Solver or setup error that made the check fail; empty otherwise.
  std::string error;
  bool non_convergence = false;
};

struct SuiteReport {
  std::vector<CheckResult> checks;
  bool pass() const;
  /// True when a failing check was caused by a ConvergenceError.
  bool non_convergence() const;
};

/// Runs the full acceptance matrix (criteria 1 to 12, one check each) with the
/// resolutions and tolerances of `cfg`; the problem keys N, s, H0, h0 are ignored.
/// Independent cases run on `jobs` threads. Writes ground_states.csv,
/// criterion.csv, expansion.csv, rho_terms.csv, metric.csv and suite_report.csv
/// into `out_dir`. Solver errors become failed checks.
SuiteReport run_suite(const RunConfig& cfg, const std::filesystem::path& out_dir, int jobs = 1);

/// Runs the single case described by `cfg` (any mode; suite dispatches to
/// run_suite) and writes its CSVs into `out_dir`.
SuiteReport run_mode(const RunConfig& cfg, const std::filesystem::path& out_dir, int jobs = 1);

/// id,description,measured,threshold,pass,error
void write_report_csv(const SuiteReport& rep, std::ostream& out);

}  // namespace hstrace

// Command line front end: one subcommand per run mode.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
// 3 solver non-convergence.

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hstrace/config.hpp"
#include "hstrace/orchestrator.hpp"

namespace {

enum ExitCode { kPass = 0, kCheckFailure = 1, kConfigError = 2, kNonConvergence = 3 };

void print_report(const hstrace::SuiteReport& rep) {
  for (const auto& c : rep.checks) {
    std::cout << (c.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.description << ": measured " << c.measured
              << " threshold " << c.threshold;
    if (!c.error.empty()) std::cout << " (" << c.error << ")";
    std::cout << '\n';
  }
  std::cout << (rep.pass() ? "overall PASS" : "overall FAIL") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hardy-Sobolev trace constants and the mean curvature criterion"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  for (hstrace::Mode m : {hstrace::Mode::ground_state, hstrace::Mode::domain, hstrace::Mode::criterion,
                          hstrace::Mode::expansion, hstrace::Mode::coercivity, hstrace::Mode::suite}) {
    auto* sub = app.add_subcommand(hstrace::mode_name(m));
    sub->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kConfigError;
  }

  const hstrace::Mode mode = hstrace::parse_mode(app.get_subcommands().front()->get_name());
  std::string text;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }

  hstrace::RunConfig cfg;
  try {
    cfg = hstrace::parse_config(text, mode);
  } catch (const hstrace::ConfigError& e) {
    for (const auto& msg : e.errors()) std::cerr << "config error: " << msg << '\n';
    return kConfigError;
  }
  if (!out_dir.empty()) cfg.output_dir = out_dir;

  hstrace::SuiteReport rep;
  try {
    rep = hstrace::run_mode(cfg, cfg.output_dir, jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailure;
  }
  print_report(rep);
  if (rep.pass()) return kPass;
  return rep.non_convergence() ? kNonConvergence : kCheckFailure;
}

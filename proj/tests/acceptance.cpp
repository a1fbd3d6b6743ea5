// Acceptance run: the full check matrix at default resolution, one PASS/FAIL
// line per criterion. Exits 0 when the set of failing criteria equals the
// --expect-fail list (empty by default), so a known shortfall stays visible in
// the output without hiding a new regression.

#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "hstrace/config.hpp"
#include "hstrace/orchestrator.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria 1-12"};
  std::string out_dir = "acceptance_out";
  std::vector<int> expect_fail;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--expect-fail", expect_fail, "criteria known to fail");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const hstrace::SuiteReport rep = hstrace::run_suite(hstrace::RunConfig{}, out_dir, jobs);

  std::set<int> failing;
  std::cout.precision(6);
  for (const auto& c : rep.checks) {
    std::cout << (c.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.description << " | measured "
              << c.measured << " threshold " << c.threshold;
    if (!c.error.empty()) std::cout << " | error: " << c.error;
    std::cout << '\n';
    if (!c.pass) failing.insert(c.id);
  }
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  std::cout << (rep.pass() ? "overall PASS" : "overall FAIL");
  if (!expected.empty()) {
    std::cout << " (expected failures:";
    for (int id : expected) std::cout << ' ' << id;
    std::cout << ')';
  }
  std::cout << '\n';
  if (failing != expected) {
    std::cout << "failing set differs from the expected one\n";
    return 1;
  }
  return 0;
}

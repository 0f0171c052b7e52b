#include <chrono>
#include <cstdio>
#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "wavegauge/suites.hpp"

using namespace wavegauge;

namespace {

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<suites::SuiteResult()> run;
};

}  // namespace

/// Runs every acceptance criterion (or those named on the command line by
/// number) and prints one PASS/FAIL line each. Exit status 1 if any fails.
int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "frame algebra", 1.0, [] { return suites::frame_suite(1000, 7); }},
      {2, "reduced-equation identity", 1.0, [] { return suites::gauge_suite(100, 7); }},
      {3, "Cauchy data", 30.0, [] { return suites::data_suite(); }},
      {4, "static Schwarzschild evolution", 600.0, [] { return suites::static_evolution_suite(); }},
      {5, "linear-regime wave", 300.0, [] { return suites::linear_wave_suite(); }},
      {6, "asymptotic models", 10.0, [] { return suites::asymptotic_suite(); }},
      {7, "Einstein asymptotic system", 10.0, [] { return suites::einstein_suite(); }},
      {8, "null cone", 1.0, [] { return suites::null_cone_suite(); }},
      {9, "geodesic conservation and causality", 10.0, [] { return suites::geodesic_suite(7, 10000); }},
      {10, "energy-growth scaling", 1800.0, [] { return suites::energy_growth_suite(); }},
      {11, "determinism across thread counts", 120.0, [] { return suites::determinism_suite(1, 3); }},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    suites::SuiteResult r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = sec <= c.budget_s;
    const bool ok = r.pass && in_time;
    if (!ok) ++failed;
    std::printf("%s criterion %d (%s): %s [%.2f s%s]\n", ok ? "PASS" : "FAIL", c.id, c.title, r.detail.c_str(), sec,
                in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

#include <chrono>
#include <cstdio>
#include <cstring>
#include <exception>
#include <string>

#include "criteria.hpp"

namespace {

struct Criterion {
  int id;
  const char* name;
  acceptance::Outcome (*run)();
};

constexpr Criterion kCriteria[] = {
    {1, "reception probability of the Gilbert channel", acceptance::gamma_formula},
    {2, "minimum headway values", acceptance::headway_bound},
    {3, "braking maneuver peak-error ordering", acceptance::figure_reproduction},
    {4, "frequency-domain consistency", acceptance::frequency_consistency},
    {5, "mean-trajectory equivalence", acceptance::mean_trajectory},
    {6, "multi-linearity of system-matrix powers", acceptance::multilinearity},
    {7, "uniform bound dominance", acceptance::theorem1_dominance},
    {8, "H(0) <= ||H||inf <= ||h||1", acceptance::sandwich_inequality},
    {9, "heterogeneous braking safety study", acceptance::safety_study},
    {10, "replay determinism", acceptance::determinism},
};

}  // namespace

// Usage: platoon_acceptance [id ...]; no ids runs everything.
int main(int argc, char** argv) {
  int failed = 0;
  for (const auto& c : kCriteria) {
    if (argc > 1) {
      bool wanted = false;
      for (int a = 1; a < argc; ++a) wanted |= std::stoi(argv[a]) == c.id;
      if (!wanted) continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    acceptance::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d  %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}

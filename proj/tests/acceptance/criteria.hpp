#pragma once

#include <string>

namespace acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome gamma_formula();
Outcome headway_bound();
Outcome figure_reproduction();
Outcome frequency_consistency();
Outcome mean_trajectory();
Outcome multilinearity();
Outcome theorem1_dominance();
Outcome sandwich_inequality();
Outcome safety_study();
Outcome determinism();

}  // namespace acceptance

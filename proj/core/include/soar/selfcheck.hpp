#pragma once

#include <string>
#include <vector>

#include "soar/config.hpp"

namespace soar {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Physics self-checks on the given configuration: mass conservation of the
/// thermal + sink field, the updraft altitude law, the steady-glide
/// equilibrium, and per-episode energy closure.
std::vector<CheckResult> run_selfchecks(const RunConfig& cfg);

}  // namespace soar

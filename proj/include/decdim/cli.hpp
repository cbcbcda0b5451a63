#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "decdim/algorithms.hpp"

namespace decdim::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInputError = 2, kInfinite = 3, kBudget = 4 };

struct AlgorithmParams {
  std::string name = "ucb";  // ucb | uniform | fixed | reduction | exoplus
  int horizon = 1;
  Index fixed_decision = 0;
  double delta_opt = 0.1;    // near-optimality level for reduction / ExO+ prior
  double confidence = 0.1;   // failure probability for reduction
  double gamma = 1.0;        // ExO+ learning rate
};

// Throws InputError for unknown names or out-of-range parameters.
AlgorithmFactory MakeFactory(const ModelClass& cls, const AlgorithmParams& params);

// Full command line entry point; returns the process exit code.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace decdim::cli

#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "decdim/algorithms.hpp"
#include "decdim/model.hpp"

namespace decdim {

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RoundRecord {
  int t = 0;
  Index decision = 0;
  Observation observation;
  double instant_regret = 0.0;
  double cumulative_regret = 0.0;
};

struct Trace {
  std::vector<RoundRecord> rounds;
  Index final_decision = 0;
  bool explicit_output = false;  // false: empirical-best-by-sample-mean rule
  double cumulative_regret = 0.0;
  double risk = 0.0;
};

// Runs T rounds of `algorithm` against `environment`, whose risk table gives
// the exact regret accounting. Environment draws use
// SeedStream(seed, t, kEnvironment); the algorithm is reset with `seed`.
Trace RunEpisode(const ModelClass& cls, const Model& environment, Algorithm& algorithm, int T,
                 std::uint64_t seed);

// Highest sample-mean reward among played decisions, ties to the lower index.
Index EmpiricalBest(const std::vector<RoundRecord>& rounds, Index num_decisions);

void WriteTraceCsv(std::ostream& out, const ModelClass& cls, const Trace& trace);

struct SeedResult {
  std::uint64_t seed = 0;
  double regret = 0.0;
  double risk = 0.0;
  Index final_decision = 0;
};

struct Summary {
  double mean = 0.0;
  double std_err = 0.0;
  double ci_low = 0.0;  // 95% normal approximation
  double ci_high = 0.0;
  double median = 0.0;
  double q90 = 0.0;
};

struct McSummary {
  std::size_t n = 0;
  Summary regret;
  Summary risk;
  std::vector<SeedResult> per_seed;  // sorted by seed
};

Summary Summarize(std::vector<double> values);

// Replicates in parallel; each worker builds its own algorithm from the
// factory. Results are sorted by seed and folded sequentially.
McSummary MonteCarlo(const ModelClass& cls, const Model& environment,
                     const AlgorithmFactory& factory, int T,
                     const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

std::vector<std::uint64_t> SeedList(std::uint64_t master, std::size_t count);

struct OccupancyEstimate {
  FiniteDistribution q_hat;
  FiniteDistribution p_hat;
  std::size_t n_mc = 0;
  Vector q_std_err;
  Vector p_std_err;
};

OccupancyEstimate EstimateOccupancy(const ModelClass& cls, const Model& reference,
                                    const AlgorithmFactory& factory, int T, std::size_t n_mc,
                                    std::uint64_t seed, unsigned threads = 0);

// Sequential kernels: step t maps the flattened history prefix (row, in
// lexicographic order with the earliest step most significant) to a law on
// the step-t outcome (columns). Step 1 has a single row.
using Kernels = std::vector<Matrix>;

struct ChainCheck {
  double lhs = 0.0;  // D_H^2 of the joint laws
  double rhs = 0.0;  // 7 E_P[sum_t D_H^2 of the step kernels]
  bool holds = false;
};

ChainCheck HellingerChainCheck(const Kernels& p, const Kernels& q);

}  // namespace decdim

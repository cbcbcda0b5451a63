#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "decdim/complexity.hpp"
#include "decdim/model.hpp"

namespace decdim {

// One learner. Rounds are numbered from 1. All randomness comes from
// SeedStream(seed, t, kAlgorithm), so a (seed, observation sequence) pair
// fixes every decision.
class Algorithm {
 public:
  virtual ~Algorithm() = default;
  virtual std::string Name() const = 0;
  virtual void Reset(std::uint64_t seed) = 0;
  virtual Index Select(int t) = 0;
  virtual void Observe(int t, Index decision, const Observation& obs) = 0;
  // Explicit output rule; nullopt leaves it to the simulator's default.
  virtual std::optional<Index> Output() const { return std::nullopt; }
};

using AlgorithmFactory = std::function<std::unique_ptr<Algorithm>()>;

class FixedDecision : public Algorithm {
 public:
  explicit FixedDecision(Index decision) : decision_(decision) {}
  std::string Name() const override { return "fixed"; }
  void Reset(std::uint64_t) override {}
  Index Select(int) override { return decision_; }
  void Observe(int, Index, const Observation&) override {}
  std::optional<Index> Output() const override { return decision_; }

 private:
  Index decision_;
};

class UniformRandom : public Algorithm {
 public:
  explicit UniformRandom(Index num_decisions) : n_(num_decisions) {}
  std::string Name() const override { return "uniform"; }
  void Reset(std::uint64_t seed) override { seed_ = seed; }
  Index Select(int t) override;
  void Observe(int, Index, const Observation&) override {}

 private:
  Index n_;
  std::uint64_t seed_ = 0;
};

struct UcbOptions {
  double width = 2.0;
  double delta = 0.1;  // confidence parameter inside log(T / delta)
};

// UCB over a fixed list of arms (decision indices). Unpulled arms go first in
// list order; ties break toward the earlier arm.
class Ucb : public Algorithm {
 public:
  Ucb(std::vector<Index> arms, int horizon, UcbOptions options = {});
  std::string Name() const override { return "ucb"; }
  void Reset(std::uint64_t seed) override;
  Index Select(int t) override;
  void Observe(int t, Index decision, const Observation& obs) override;

  const std::vector<Index>& arms() const { return arms_; }
  const std::vector<int>& counts() const { return counts_; }
  // Index computed for one arm slot; +inf when unpulled.
  double UpperIndex(size_t slot) const;

 private:
  std::vector<Index> arms_;
  int horizon_;
  UcbOptions options_;
  std::vector<int> counts_;
  std::vector<double> sums_;
};

struct ReductionPlan {
  double ddim = 0.0;
  FiniteDistribution p_star;
  Index num_draws = 0;
  std::vector<Index> draws;
  std::vector<Index> subset;  // sorted, deduplicated draws
};

Index ReductionDrawCount(double ddim, double delta);
ReductionPlan ReductionPrepare(const DecReport& ddim_report, double delta, std::uint64_t seed);
ReductionPlan ReductionPrepare(const ModelClass& cls, double delta_opt, double delta,
                               std::uint64_t seed);
// True if some member of the subset is delta_opt-optimal for the model.
bool ReductionCovers(const ReductionPlan& plan, const Model& model, double delta_opt);

// Decision-dimension reduction: draw the subset from p*, then run UCB on it.
class Reduction : public Algorithm {
 public:
  Reduction(const ModelClass& cls, double delta_opt, double delta, int horizon,
            UcbOptions ucb = {});
  std::string Name() const override { return "reduction"; }
  void Reset(std::uint64_t seed) override;
  Index Select(int t) override;
  void Observe(int t, Index decision, const Observation& obs) override;

  const ReductionPlan& plan() const { return plan_; }

 private:
  DecReport ddim_;
  double delta_;
  int horizon_;
  UcbOptions ucb_options_;
  ReductionPlan plan_;
  std::unique_ptr<Ucb> ucb_;
};

// q'(pi) proportional to q(pi) exp(ell(pi)), shifted by max(ell) first.
Vector ExoUpdate(const Vector& q, const Vector& ell);

struct ExoRoundLog {
  int t = 0;
  double value = 0.0;
  double zero_ell_value = 0.0;
  Index decision = 0;
  Vector ell_row;  // ell^t(.; pi^t, o^t)
};

struct ExoPlusOptions {
  ExoOptions first;  // budget for round 1
  ExoOptions warm;   // budget for warm-started rounds
  ExoPlusOptions() { warm.alternations = 4; warm.descent_steps = 25; }
};

class ExoPlus : public Algorithm {
 public:
  ExoPlus(const ModelClass& cls, double gamma, Vector prior, ExoPlusOptions options = {});
  std::string Name() const override { return "exo+"; }
  void Reset(std::uint64_t seed) override;
  Index Select(int t) override;
  void Observe(int t, Index decision, const Observation& obs) override;

  const Vector& q() const { return q_; }
  const Vector& prior() const { return prior_; }
  const ExoSolution& last_solution() const { return last_; }
  const std::vector<ExoRoundLog>& log() const { return log_; }

 private:
  ExoSolver solver_;
  Vector prior_;
  ExoPlusOptions options_;
  ExoSolver warm_solver_;
  std::uint64_t seed_ = 0;
  Vector q_;
  ExoSolution last_;
  std::optional<ExoSolution> first_;
  bool have_last_ = false;
  std::vector<ExoRoundLog> log_;
};

struct FtrlCheck {
  double slack = 0.0;
  double kl = 0.0;
  bool vacuous = false;  // comparator not absolutely continuous w.r.t. prior
};

// KL(q' || q) - sum_t (E_q'[ell^t] - log E_{q^t}[exp ell^t]), with q^t the
// exponential-weights iterates started at q.
FtrlCheck FtrlInequalityCheck(const Vector& prior, const Vector& comparator,
                              const std::vector<Vector>& ell_rows);

struct Telescoping {
  double incremental = 0.0;  // sum_t -log E_{q^t}[exp ell^t]
  double closed_form = 0.0;  // -log E_q[exp sum_t ell^t]
};
Telescoping TelescopingSums(const Vector& prior, const std::vector<Vector>& ell_rows);

}  // namespace decdim

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "decdim/divergence.hpp"
#include "decdim/rng.hpp"
#include "decdim/types.hpp"

namespace decdim {

struct GaussianComponent {
  double weight = 1.0;
  double mean = 0.0;
};

// Law of the observation a decision produces. An observation is a tag (a
// finite outcome, or a context) optionally followed by a unit-variance
// Gaussian reward whose law given the tag is a finite mixture. Finite
// channels leave `reward_mix` empty; Gaussian channels have a single tag.
struct Emission {
  Vector tag_probs;
  std::vector<std::vector<GaussianComponent>> reward_mix;

  bool has_reward_draw() const { return !reward_mix.empty(); }
  bool operator==(const Emission& other) const;
};

Emission FiniteEmission(const Vector& probs);
Emission GaussianEmission(double mean);

enum class ObservationKind { kFinite, kGaussian, kContextGaussian };

struct ObservationSpace {
  ObservationKind kind = ObservationKind::kFinite;
  std::vector<std::string> tags;  // outcomes, contexts, or a single "reward"
  Vector reward;                  // R(o) per outcome, finite spaces only
};

struct Observation {
  Index tag = 0;
  double reward = 0.0;
};

// Exact divergence between two emissions. Single-component Gaussian pieces
// use closed forms; genuine mixtures (only produced by hull references) are
// integrated numerically.
double EmissionDivergence(DivergenceKind kind, const Emission& p, const Emission& q);
double MeanReward(const ObservationSpace& space, const Emission& e);
Observation SampleObservation(const ObservationSpace& space, const Emission& e,
                              SeedStream& stream);
Emission MixEmissions(const std::vector<const Emission*>& parts,
                      const Vector& weights);

enum class RiskMode { kRewardMax, kExplicitRisk, kEstimation };

std::string ToString(RiskMode mode);
RiskMode ParseRiskMode(const std::string& name);

struct Model {
  std::string name;
  std::vector<Emission> channel;  // one emission per decision
  Vector value;                   // f^M; may be empty outside reward-max
  Vector risk;                    // g^M >= 0
  Index optimal_decision = 0;
};

struct ReferenceModel {
  Model model;
  double c_kl = 0.0;
};

// Convex combination of class members, an element of the hull.
struct MixtureSpec {
  Vector weights;
};

struct ContextualLayout {
  Index num_contexts = 0;
  Index num_actions = 0;
  // policies(i, c) is the action policy i plays at context c.
  Eigen::MatrixXi policies;
  bool sampled = false;
};

struct EstimationLayout {
  Index num_explore = 0;       // decisions of the base class
  Index num_estimates = 0;
  std::vector<Index> params;   // parameter index per model
  Matrix distance;             // Dist(theta, theta_hat)
};

struct ModelClass {
  std::vector<std::string> decisions;
  ObservationSpace observations;
  std::vector<Model> models;
  RiskMode risk_mode = RiskMode::kRewardMax;
  double lipschitz_lr = kInf;
  std::optional<ReferenceModel> reference;
  std::optional<ContextualLayout> contextual;
  std::optional<EstimationLayout> estimation;

  Index num_decisions() const { return static_cast<Index>(decisions.size()); }
  Index num_models() const { return static_cast<Index>(models.size()); }
  Index num_tags() const { return static_cast<Index>(observations.tags.size()); }
  bool is_finite() const { return observations.kind == ObservationKind::kFinite; }
};

// Sets value from the channel's expected reward (unless already present),
// then risk = max value - value and the lowest-index optimal decision.
void DeriveRewardMaxRisk(const ObservationSpace& space, Model& model);

// Checks shapes, probability rows, risk consistency; fills derived fields and
// tightens lipschitz_lr to the measured supremum. Throws InputError.
void ValidateClass(ModelClass& cls, double row_tol = 1e-9);

// sup over pairs and decisions of |f^M - f^M'| / D_H(M, M').
double MeasuredLipschitz(const ModelClass& cls);

struct KlWitness {
  double value = 0.0;
  Index model = -1;
  Index decision = -1;
};
KlWitness MaxKlToReference(const ModelClass& cls, const Model& reference);

// Uniform-outcome reference (C_KL = log|O|), zero-mean Gaussian (1/2), or
// uniform contexts with zero means (log|C| + 1). Validated before return.
ReferenceModel ReferenceModelFor(const ModelClass& cls);

Model MixtureModel(const ModelClass& cls, const MixtureSpec& mix);

// Builders. All are deterministic in their inputs.
ModelClass BuildGaussianMab(const std::vector<Vector>& hypotheses);

ModelClass BuildLinearBandit(int d, const std::vector<Vector>& decisions,
                             const std::vector<Vector>& parameters);
std::vector<Vector> CircleDirections(int n);
// Normalized nonzero integer vectors in {-k..k}^d, duplicates removed.
std::vector<Vector> LatticeDirections(int d, int k);

struct ContextualOptions {
  Index policy_cap = 4096;
  Index sampled_policies = 0;  // > 0 enables the sampled-policy mode
  std::uint64_t seed = 0;
};
// value_class[h](c, a) = h(c, a); one model per (h, nu) pair.
ModelClass BuildContextualBandit(const std::vector<Matrix>& value_class,
                                 const std::vector<Vector>& context_distributions,
                                 const ContextualOptions& options = {});

// Decisions become (explore, estimate) pairs; g = Dist(theta_M, estimate).
ModelClass BuildInteractiveEstimation(const ModelClass& base,
                                      const std::vector<Index>& params,
                                      const Matrix& distance);

// Reward-max class from per-model (decisions x outcomes) channel matrices.
ModelClass BuildFiniteRewardClass(const Vector& reward,
                                  const std::vector<Matrix>& channels);
// Explicit-risk class over finite outcomes (reward map R(o) = o index / (|O|-1)).
ModelClass BuildExplicitRiskClass(const std::vector<Matrix>& channels,
                                  const std::vector<Vector>& risks);

// The two-decision, two-model instance used throughout the tests: M1 has
// g = (0, 1), M2 has g = (1, 0); channels agree at decision a and have
// disjoint supports at decision b.
ModelClass WorkedInstance();

}  // namespace decdim

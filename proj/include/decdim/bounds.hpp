#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "decdim/algorithms.hpp"
#include "decdim/complexity.hpp"
#include "decdim/divergence.hpp"
#include "decdim/model.hpp"

namespace decdim {

enum class BoundKind { kGeneral, kFano, kFanoDmso, kMixMix, kQuantileHellinger, kDdimSample, kSandwich };
std::string ToString(BoundKind kind);

struct BoundReport {
  BoundKind kind = BoundKind::kGeneral;
  double value = 0.0;
  nlohmann::json witness = nlohmann::json::object();
  std::string inputs_digest;
  std::vector<std::string> notes;
};

nlohmann::json ToJson(const BoundReport& report);
// Re-evaluates the value from the witness alone.
double RecomputeBound(const BoundReport& report);

std::uint64_t Fnv1a64(const std::string& bytes);
std::string HexDigest(std::uint64_t h);
std::string DigestOf(const nlohmann::json& inputs);

// ------------------------------------------------------------ general

struct GeneralBoundInput {
  FiniteDistribution prior;
  Matrix laws;  // models x outcomes
  Matrix loss;  // models x outcomes
  double delta = 0.5;
  DivergenceKind kind = DivergenceKind::kKL;
  std::vector<Vector> extra_candidates;  // reference laws besides members and the average
  int simplex_grid = 0;                  // > 0 adds the grid {i / n} over outcomes
  std::vector<double> delta_grid;        // loss levels are always included
};

BoundReport GeneralLowerBound(const GeneralBoundInput& in);

// rho_{Delta,Q} = P_{M~mu, X~Q}(L(M, X) < Delta).
double RhoDeltaQ(const FiniteDistribution& prior, const Matrix& loss, const Vector& q, double level);

// ------------------------------------------------------------ Fano

BoundReport GeneralizedFano(const FiniteDistribution& prior, const Matrix& channel,
                            const Matrix& loss, double level);
// Same with the mutual information supplied directly.
BoundReport GeneralizedFanoFromInfo(const FiniteDistribution& prior, const Matrix& loss,
                                    double info, double level);

// sup_pi mu(g^M(pi) <= level).
double SupNearOptimalMass(const FiniteDistribution& prior, const Matrix& risk, double level);

BoundReport FanoDmsoFinite(const ModelClass& cls, const FiniteDistribution& prior, double info_cap);

struct LinearFanoOptions {
  double c0 = 0.125;        // prior radius r = min(c0 d / sqrt(T), 1)
  double norm_floor = 0.05;  // c1: risk >= c1 r * g~ on the event ||theta|| >= c1 r
};
BoundReport FanoDmsoLinear(int d, double horizon, const LinearFanoOptions& options = {});

// Normalized measure of the cap {theta_1 >= sqrt(1 - level)} under the
// theta_1 density of the uniform law on the sphere in R^d.
double SphericalCap(int d, double level);
double SphericalCapDensity(int d, double t);
// P(chi^2_k <= x), by the series of the regularized lower gamma function.
double ChiSquareCdf(double k, double x);

// ------------------------------------------------------------ mixtures

struct MixMixInput {
  std::vector<Index> theta0, theta1;
  Vector nu0, nu1;  // weights over theta0 / theta1
  Matrix loss;      // parameters x actions
  Matrix laws;      // parameters x observations
  double level = 0.0;
};
BoundReport MixVsMix(const MixMixInput& in);

// ------------------------------------------------------------ quantile Hellinger

struct QuantileHellingerInput {
  const ModelClass* cls = nullptr;
  AlgorithmFactory factory;
  int horizon = 1;
  double delta = 0.5;
  std::vector<Model> references;
  std::size_t n_mc = 400;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};
std::size_t RequiredMonteCarlo(double delta);
BoundReport QuantileHellingerBound(const QuantileHellingerInput& in);

// Same bound from known occupancy laws (exact for observation-blind algorithms).
struct OccupancyLaws {
  Vector q;
  Vector p;
  Vector q_std_err;
  Vector p_std_err;
  std::size_t n = 0;  // 0: exact laws
};
BoundReport QuantileHellingerFromOccupancy(const ModelClass& cls, const Model& reference,
                                           const OccupancyLaws& occ, int horizon, double delta);

// ------------------------------------------------------------ decision dimension

BoundReport DdimSampleLower(const ModelClass& cls, double level);

struct SandwichOptions {
  HullOptions hull;
  double tol = 1e-6;
};
BoundReport SandwichReport(const ModelClass& cls, double level, const SandwichOptions& options = {});

}  // namespace decdim

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "decdim/algorithms.hpp"
#include "decdim/simulator.hpp"
#include "test_util.hpp"

using namespace decdim;

namespace {

std::vector<Vector> DistinctOptimumArms(int k) {
  std::vector<Vector> hyps;
  for (int i = 0; i < k; ++i) hyps.push_back(Vector::Unit(k, i));
  return hyps;
}

Observation Reward(double r) {
  Observation o;
  o.reward = r;
  return o;
}

}  // namespace

TEST_CASE("UCB tie-breaking and index") {
  Ucb ucb({0, 1, 2}, 100);
  CHECK(ucb.Select(1) == 0);
  ucb.Observe(1, 0, Reward(0.5));
  CHECK(ucb.Select(2) == 1);

  Ucb two({0, 1}, 100);
  for (int i = 0; i < 10; ++i) {
    two.Observe(i + 1, 0, Reward(0.9));
    two.Observe(i + 1, 1, Reward(0.1));
  }
  CHECK(two.Select(21) == 0);
  CHECK(two.UpperIndex(0) == doctest::Approx(0.9 + 2.0 * std::sqrt(std::log(1000.0) / 10.0)));
  CHECK_THROWS_AS(Ucb({}, 10), InputError);
}

TEST_CASE("UCB trace matches a hand replay") {
  const std::vector<Vector> hyps = {(Vector(3) << 0.2, 0.5, 0.4).finished()};
  const ModelClass cls = BuildGaussianMab(hyps);
  const int T = 20;
  const std::uint64_t seed = 99;
  Ucb ucb({0, 1, 2}, T);
  const Trace tr = RunEpisode(cls, cls.models[0], ucb, T, seed);

  double sums[3] = {0, 0, 0};
  int counts[3] = {0, 0, 0};
  for (int t = 1; t <= T; ++t) {
    int pick = -1;
    double best = -kInf;
    for (int a = 0; a < 3; ++a) {
      const double idx = counts[a] == 0
                             ? kInf
                             : sums[a] / counts[a] + 2.0 * std::sqrt(std::log(T / 0.1) / counts[a]);
      if (idx > best) {
        best = idx;
        pick = a;
      }
    }
    SeedStream env(seed, std::uint64_t(t), SeedStream::kEnvironment);
    env.NextUniform();
    const double r = hyps[0][pick] + env.NextGaussian();
    CHECK(tr.rounds[size_t(t - 1)].decision == pick);
    CHECK(tr.rounds[size_t(t - 1)].observation.reward == r);
    sums[pick] += r;
    ++counts[pick];
  }
}

TEST_CASE("reduction draw count and plan") {
  CHECK(ReductionDrawCount(5.0, 0.1) == 12);
  CHECK(ReductionDrawCount(7.0, std::exp(-1.0)) == 7);
  CHECK_THROWS_AS(ReductionDrawCount(kInf, 0.1), InputError);
  CHECK_THROWS_AS(ReductionDrawCount(3.0, 1.0), InputError);

  const ModelClass mab = BuildGaussianMab(DistinctOptimumArms(6));
  const ReductionPlan a = ReductionPrepare(mab, 0.1, 0.1, 5);
  const ReductionPlan b = ReductionPrepare(mab, 0.1, 0.1, 5);
  CHECK(a.num_draws == 14);
  CHECK(a.draws == b.draws);
  CHECK(std::is_sorted(a.subset.begin(), a.subset.end()));

  ModelClass single = BuildGaussianMab({(Vector(3) << 0.1, 0.9, 0.3).finished()});
  const ReductionPlan s = ReductionPrepare(single, 0.0, 0.5, 1);
  for (Index d : s.draws) CHECK(d == 1);
}

TEST_CASE("reduction coverage failure rate stays below delta") {
  const int k = 8;
  const ModelClass mab = BuildGaussianMab(DistinctOptimumArms(k));
  const double delta = std::exp(-1.0);
  const DecReport ddim = DecisionDimension(mab, 0.1);
  const int trials = 2000;
  int failures = 0;
  for (int i = 0; i < trials; ++i) {
    const ReductionPlan plan = ReductionPrepare(ddim, delta, TaskSeed(7, std::uint64_t(i)));
    CHECK(plan.num_draws == k);
    if (!ReductionCovers(plan, mab.models[size_t(i % k)], 0.1)) ++failures;
  }
  const double rate = double(failures) / trials;
  CHECK(rate <= delta + 3.0 * std::sqrt(delta * (1 - delta) / trials));
}

TEST_CASE("reduction runs are reproducible and restricted to the subset") {
  const ModelClass mab = BuildGaussianMab(DistinctOptimumArms(5));
  Reduction alg(mab, 0.1, 0.1, 200);
  const Trace a = RunEpisode(mab, mab.models[2], alg, 200, 3);
  const auto subset = alg.plan().subset;
  const Trace b = RunEpisode(mab, mab.models[2], alg, 200, 3);
  REQUIRE(a.rounds.size() == b.rounds.size());
  for (size_t i = 0; i < a.rounds.size(); ++i) {
    CHECK(a.rounds[i].decision == b.rounds[i].decision);
    CHECK(a.rounds[i].observation.reward == b.rounds[i].observation.reward);
    CHECK(std::binary_search(subset.begin(), subset.end(), a.rounds[i].decision));
  }
}

TEST_CASE("reduction on a noiseless instance keeps regret below T times delta") {
  const Vector reward = (Vector(2) << 0.0, 1.0).finished();
  Matrix ch(3, 2);
  ch << 1, 0, 0, 1, 1, 0;
  const ModelClass cls = BuildFiniteRewardClass(reward, {ch});
  Reduction alg(cls, 0.05, 0.1, 100);
  const Trace tr = RunEpisode(cls, cls.models[0], alg, 100, 1);
  CHECK(tr.cumulative_regret <= 100 * 0.05 + 1e-12);
}

TEST_CASE("exponential weights update") {
  const Vector q = (Vector(2) << 0.5, 0.5).finished();
  const Vector up = ExoUpdate(q, (Vector(2) << std::log(2.0), 0.0).finished());
  CHECK(up[0] == doctest::Approx(2.0 / 3.0));
  CHECK(up[1] == doctest::Approx(1.0 / 3.0));
  const Vector q3 = (Vector(3) << 0.2, 0.0, 0.8).finished();
  const Vector same = ExoUpdate(q3, Vector::Constant(3, 5.0));
  CHECK((same - q3).norm() < 1e-15);
  const Vector big = ExoUpdate(q3, (Vector(3) << 800.0, 900.0, -700.0).finished());
  CHECK(big[1] == 0.0);
  CHECK(big[0] == doctest::Approx(1.0));
}

TEST_CASE("FTRL inequality and telescoping identity") {
  const Vector q = (Vector(2) << 0.5, 0.5).finished();
  CHECK(FtrlInequalityCheck(q, q, {Vector::Zero(2), Vector::Zero(2)}).slack == doctest::Approx(0.0));
  const FtrlCheck one = FtrlInequalityCheck(q, Vector::Unit(2, 0), {(Vector(2) << 1.0, 0.0).finished()});
  CHECK(one.slack == doctest::Approx(std::log(2.0) - (1.0 - std::log((std::exp(1.0) + 1.0) / 2.0))));
  CHECK(one.slack >= 0.0);
  const FtrlCheck vac = FtrlInequalityCheck(Vector::Unit(2, 0), Vector::Unit(2, 1), {q});
  CHECK(vac.vacuous);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 2 + trial % 5;
    const Vector prior = decdim::testing::RandomSimplex(rng, n);
    const Vector comp = decdim::testing::RandomSimplex(rng, n, 0.3);
    std::vector<Vector> rows;
    for (int t = 0; t < 1 + trial % 30; ++t) {
      Vector l(n);
      for (Index i = 0; i < n; ++i) l[i] = nd(rng);
      rows.push_back(l);
    }
    CHECK(FtrlInequalityCheck(prior, comp, rows).slack >= -1e-9);
    const Telescoping tel = TelescopingSums(prior, rows);
    CHECK(tel.incremental == doctest::Approx(tel.closed_form).epsilon(1e-9));
  }
}

TEST_CASE("ExO+ rounds") {
  const ModelClass worked = WorkedInstance();
  const Vector uniform = Vector::Constant(2, 0.5);
  ExoPlus alg(worked, 2.0, uniform);
  alg.Reset(4);
  alg.Select(1);
  const ExoSolution& sol = alg.last_solution();
  ExoSolver solver(worked, 2.0);
  std::vector<Matrix> zero(2, Matrix::Zero(2, 2));
  CHECK(sol.value <= solver.Objective(uniform, sol.p, zero) + 1e-12);

  const Trace a = RunEpisode(worked, worked.models[1], alg, 30, 8);
  const auto log_a = alg.log();
  const Trace b = RunEpisode(worked, worked.models[1], alg, 30, 8);
  for (size_t i = 0; i < a.rounds.size(); ++i) {
    CHECK(a.rounds[i].decision == b.rounds[i].decision);
    CHECK(log_a[i].value == alg.log()[i].value);
  }
  for (const ExoRoundLog& r : log_a) CHECK(r.value <= r.zero_ell_value + 1e-12);

  std::vector<Vector> rows;
  for (const ExoRoundLog& r : log_a) rows.push_back(r.ell_row);
  for (Index c = 0; c < 2; ++c) {
    CHECK(FtrlInequalityCheck(uniform, Vector::Unit(2, c), rows).slack >= -1e-9);
  }

  const Vector reward = (Vector(2) << 0.0, 1.0).finished();
  Matrix ch(3, 2);
  ch << 0.5, 0.5, 0, 1, 1, 0;
  const ModelClass single = BuildFiniteRewardClass(reward, {ch});
  ExoPlus one(single, 2.0, Vector::Constant(3, 1.0 / 3.0));
  const Trace tr = RunEpisode(single, single.models[0], one, 5, 1);
  for (const ExoRoundLog& r : one.log()) CHECK(r.value <= 1e-9);
  CHECK(tr.cumulative_regret <= 1e-6);
}

TEST_CASE("fixed and uniform algorithms") {
  UniformRandom u(4);
  u.Reset(12);
  const Index first = u.Select(3);
  u.Reset(12);
  CHECK(u.Select(3) == first);
  FixedDecision f(2);
  CHECK(f.Select(1) == 2);
  CHECK(*f.Output() == 2);
}

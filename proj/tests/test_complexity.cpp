#include <doctest.h>

#include <cmath>
#include <random>

#include "decdim/complexity.hpp"
#include "inequalities.hpp"
#include "test_util.hpp"

using namespace decdim;
using decdim::testing::RandomFiniteClass;

namespace {

std::vector<Vector> DistinctOptimumArms(int k) {
  std::vector<Vector> hyps;
  for (int i = 0; i < k; ++i) {
    Vector h = Vector::Zero(k);
    h[i] = 1.0;
    hyps.push_back(h);
  }
  return hyps;
}

Model RefOf(const ModelClass& cls, Index i) { return cls.models[size_t(i)]; }

// Dense scan over p = (1 - x, x) for two-decision tables.
double GridRdec(const DecTables& t, double eps, int n) {
  const double e2 = eps * eps;
  double best = kInf;
  for (int i = 0; i <= n; ++i) {
    Vector p(2);
    p << 1.0 - double(i) / n, double(i) / n;
    double v = t.reference_risk.dot(p);
    for (Index r = 0; r < t.risk.rows(); ++r) {
      if (t.hellinger.row(r).dot(p) <= e2) v = std::max(v, t.risk.row(r).dot(p));
    }
    best = std::min(best, v);
  }
  return best;
}

double GridGame(const DecTables& t, const std::vector<Index>& keep, int n) {
  if (keep.empty()) return 0.0;
  double best = kInf;
  for (int i = 0; i <= n; ++i) {
    Vector p(2);
    p << 1.0 - double(i) / n, double(i) / n;
    double v = -kInf;
    for (Index r : keep) v = std::max(v, t.risk.row(r).dot(p));
    best = std::min(best, v);
  }
  return best;
}

std::vector<Index> FeasibleAt(const DecTables& t, const Vector& q, double e2) {
  std::vector<Index> keep;
  for (Index r = 0; r < t.risk.rows(); ++r)
    if (t.hellinger.row(r).dot(q) <= e2) keep.push_back(r);
  return keep;
}

double GridPdec(const DecTables& t, double eps, int n) {
  double best = kInf;
  for (int i = 0; i <= n; ++i) {
    Vector q(2);
    q << 1.0 - double(i) / n, double(i) / n;
    best = std::min(best, GridGame(t, FeasibleAt(t, q, eps * eps), n));
  }
  return best;
}

double GridQuantilePdec(const DecTables& t, double eps, double delta, int n) {
  double best = kInf;
  for (int i = 0; i <= n; ++i) {
    Vector q(2);
    q << 1.0 - double(i) / n, double(i) / n;
    const auto keep = FeasibleAt(t, q, eps * eps);
    if (keep.empty()) return 0.0;
    double inner = kInf;
    for (int j = 0; j <= n; ++j) {
      Vector p(2);
      p << 1.0 - double(j) / n, double(j) / n;
      const FiniteDistribution pd(p);
      double v = 0.0;
      for (Index r : keep) v = std::max(v, QuantileRisk(pd, t.risk.row(r).transpose(), delta));
      inner = std::min(inner, v);
    }
    best = std::min(best, inner);
  }
  return best;
}

double GridQuantileRdec(const DecTables& t, double eps, double delta, int n) {
  double best = kInf;
  for (int j = 0; j <= n; ++j) {
    Vector p(2);
    p << 1.0 - double(j) / n, double(j) / n;
    const auto keep = FeasibleAt(t, p, eps * eps);
    double v = 0.0;
    if (!keep.empty()) {
      const FiniteDistribution pd(p);
      v = t.reference_risk.dot(p);
      for (Index r : keep) v = std::max(v, QuantileRisk(pd, t.risk.row(r).transpose(), delta));
    }
    best = std::min(best, v);
  }
  return best;
}

}  // namespace

TEST_CASE("decision dimension of distinct-optimum bandits equals the arm count") {
  for (int k = 2; k <= 10; ++k) {
    const ModelClass cls = BuildGaussianMab(DistinctOptimumArms(k));
    const DecReport rep = DecisionDimension(cls, 0.1);
    CHECK(rep.value == doctest::Approx(double(k)).epsilon(1e-9));
    for (Index d = 0; d < k; ++d) CHECK(rep.achieving_p[d] == doctest::Approx(1.0 / k));
  }
}

TEST_CASE("decision dimension small cases") {
  Matrix risk(2, 3);
  risk << 0, 1, 1, 1, 0, 0;
  const DecReport rep = DecisionDimensionFromRisk(risk, 0.1);
  CHECK(rep.value == doctest::Approx(2.0));
  CHECK(rep.achieving_p[0] == doctest::Approx(0.5));
  CHECK(rep.achieving_p[1] + rep.achieving_p[2] == doctest::Approx(0.5));

  Matrix single(1, 3);
  single << 0.4, 0, 0.2;
  CHECK(DecisionDimensionFromRisk(single, 0.0).value == doctest::Approx(1.0));

  Matrix empty(2, 2);
  empty << 0, 1, 0.5, 0.5;
  const DecReport inf = DecisionDimensionFromRisk(empty, 0.1);
  CHECK(std::isinf(inf.value));
  CHECK(*inf.witness_model == 1);
  CHECK_THROWS_AS(DecisionDimensionFromRisk(empty, -0.1), InputError);
}

TEST_CASE("decision dimension is nonincreasing in delta and matches the bandit form") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + Index(trial % 5), m = 2 + Index(trial % 4);
    Matrix values(n, m);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) values(i, j) = std::round(u(rng) * 10) / 10;
    std::vector<Vector> hyps;
    for (Index i = 0; i < n; ++i) hyps.push_back(values.row(i).transpose());
    const ModelClass cls = BuildGaussianMab(hyps);
    double prev = kInf;
    for (double delta : {0.0, 0.05, 0.1, 0.2, 0.35, 0.5, 0.8, 1.0}) {
      const double a = DecisionDimension(cls, delta).value;
      const double b = DecisionDimensionFromValues(values, delta).value;
      CHECK(a == doctest::Approx(b).epsilon(1e-9));
      CHECK(a <= prev + 1e-9);
      CHECK(a >= 1.0 - 1e-9);
      prev = a;
    }
  }
}

TEST_CASE("offset DEC on the worked instance equals 1/(2+gamma)") {
  const ModelClass cls = WorkedInstance();
  for (double gamma : {0.5, 1.0, 2.0, 4.0}) {
    const DecReport rep = OffsetRdec(cls, RefOf(cls, 0), gamma);
    CHECK(rep.value == doctest::Approx(1.0 / (2.0 + gamma)).epsilon(1e-9));
    CHECK(rep.certificate <= 1e-6);
  }
  ModelClass single = cls;
  single.models.resize(1);
  CHECK(OffsetRdec(single, RefOf(cls, 0), 3.0).value == doctest::Approx(0.0));
}

TEST_CASE("offset DEC of Gaussian bandits is at most 8K/gamma") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + trial % 4;
    std::vector<Vector> hyps;
    for (int i = 0; i < 4; ++i) {
      Vector h(k);
      for (int j = 0; j < k; ++j) h[j] = u(rng);
      hyps.push_back(h);
    }
    const ModelClass cls = BuildGaussianMab(hyps);
    for (double gamma : {1.0, 10.0, 100.0}) {
      for (Index r = 0; r < cls.num_models(); ++r) {
        CHECK(OffsetRdec(cls, RefOf(cls, r), gamma, true).value <= 8.0 * k / gamma + 1e-9);
      }
    }
  }
}

TEST_CASE("constrained regret DEC on the worked instance") {
  const ModelClass cls = WorkedInstance();
  for (double eps : {0.05, 0.1, 0.3, 0.5, 0.7}) {
    const DecReport rep = ConstrainedRdec(cls, RefOf(cls, 0), eps);
    CHECK(rep.value == doctest::Approx(std::min(eps * eps, 0.5)).epsilon(1e-9));
  }
  CHECK(ConstrainedRdec(cls, RefOf(cls, 0), 1.0).value == doctest::Approx(0.5));
  CHECK_THROWS_AS(ConstrainedRdec(cls, RefOf(cls, 0), 0.0), InputError);
}

TEST_CASE("constrained DECs at eps = 1 equal the unconstrained game value") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const ModelClass cls = RandomFiniteClass(rng, 2 + trial % 3, 2 + trial % 2, 2 + trial % 4);
    const Model ref = RefOf(cls, 0);
    const DecTables t = MakeTables(cls, ref);
    CHECK(ConstrainedPdec(cls, ref, 1.0).value ==
          doctest::Approx(SolveMatrixGame(t.risk.transpose()).value).epsilon(1e-9));
    Matrix with_ref(t.risk.rows() + 1, t.risk.cols());
    with_ref << t.risk, t.reference_risk.transpose();
    CHECK(ConstrainedRdec(cls, ref, 1.0).value ==
          doctest::Approx(SolveMatrixGame(with_ref.transpose()).value).epsilon(1e-9));
  }
}

TEST_CASE("constrained DECs agree with a dense grid scan on two decisions") {
  std::mt19937_64 rng(3);
  const int n = 4000;
  for (int trial = 0; trial < 40; ++trial) {
    const ModelClass cls = RandomFiniteClass(rng, 2, 2 + trial % 2, 2 + trial % 4, 0.2);
    const Model ref = MixtureModel(cls, MixtureSpec{Vector::Constant(cls.num_models(), 1.0 / double(cls.num_models()))});
    const DecTables t = MakeTables(cls, ref);
    for (double eps : {0.1, 0.3, 0.6}) {
      const double exact_r = ConstrainedRdecTables(t, eps).value;
      const double grid_r = GridRdec(t, eps, n);
      CHECK(exact_r <= grid_r + 1e-9);
      CHECK(grid_r - exact_r <= 2.0 / n);
      const double exact_p = ConstrainedPdecTables(t, eps).value;
      const double grid_p = GridPdec(t, eps, n / 10);
      CHECK(exact_p <= grid_p + 1e-9);
      CHECK(grid_p - exact_p <= 20.0 / n);
    }
  }
}

TEST_CASE("constrained regret DEC is nondecreasing in eps") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const ModelClass cls = RandomFiniteClass(rng, 2 + trial % 3, 3, 2 + trial % 4);
    const Model ref = RefOf(cls, Index(trial) % cls.num_models());
    double prev = 0.0;
    for (double eps = 0.05; eps <= 1.0; eps += 0.05) {
      const double v = ConstrainedRdec(cls, ref, eps).value;
      CHECK(v >= prev - 1e-9);
      prev = v;
    }
  }
}

TEST_CASE("singleton classes have zero DEC") {
  ModelClass cls = WorkedInstance();
  cls.models.resize(1);
  const Model ref = RefOf(cls, 0);
  CHECK(ConstrainedRdec(cls, ref, 0.3).value == doctest::Approx(0.0));
  CHECK(ConstrainedPdec(cls, ref, 0.3).value == doctest::Approx(0.0));
  CHECK(QuantilePdec(cls, ref, 0.3, 0.5).value == doctest::Approx(0.0));
  CHECK(Tdec(cls, {ref}, 0.1).value == doctest::Approx(1.0));
  CHECK(LinConstrainedRdec(cls, {ref}, 0.2, {0.2, 0.5, 1.0}).value == doctest::Approx(0.0));
}

TEST_CASE("quantile risk") {
  const FiniteDistribution p(Vector((Vector(2) << 0.6, 0.4).finished()));
  const Vector g = (Vector(2) << 0.0, 1.0).finished();
  CHECK(QuantileRisk(p, g, 0.5) == 0.0);
  CHECK(QuantileRisk(p, g, 0.3) == 1.0);
  CHECK(QuantileRisk(FiniteDistribution::PointMass(2, 0), g, 0.7) == 0.0);
  CHECK(QuantileRisk(p, g, 1.0) == 0.0);
  CHECK(QuantileRisk(p, g, 0.0) == 1.0);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const FiniteDistribution q(decdim::testing::RandomSimplex(rng, 5, 0.3));
    Vector risk(5);
    for (Index i = 0; i < 5; ++i) risk[i] = double(rng() % 4) / 4.0;
    double prev = kInf;
    for (double delta = 0.0; delta <= 1.0; delta += 0.05) {
      const double v = QuantileRisk(q, risk, delta);
      CHECK(v <= prev);
      bool is_level = v == 0.0;
      for (Index i = 0; i < 5; ++i) is_level = is_level || v == risk[i];
      CHECK(is_level);
      prev = v;
    }
  }
}

TEST_CASE("quantile DECs agree with grid scans on two decisions") {
  std::mt19937_64 rng(12);
  const int n = 400;
  for (int trial = 0; trial < 30; ++trial) {
    const ModelClass cls = RandomFiniteClass(rng, 2, 2 + trial % 2, 2 + trial % 3, 0.2);
    const Model ref = RefOf(cls, 0);
    const DecTables t = MakeTables(cls, ref);
    for (double eps : {0.2, 0.5}) {
      for (double delta : {0.0, 0.3, 0.5}) {
        CHECK(QuantilePdecTables(t, eps, delta).value ==
              doctest::Approx(GridQuantilePdec(t, eps, delta, n)).epsilon(1e-9));
        const double exact = QuantileRdecTables(t, eps, delta).value;
        const double grid = GridQuantileRdec(t, eps, delta, 4 * n);
        CHECK(exact <= grid + 1e-9);
        CHECK(grid - exact <= 0.01);
      }
    }
  }
}

TEST_CASE("quantile regret DEC on the worked instance") {
  const ModelClass cls = WorkedInstance();
  const Model ref = RefOf(cls, 0);
  const double q = QuantileRdec(cls, ref, 0.1, 0.5).value;
  CHECK(q == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(ConstrainedRdec(cls, ref, 0.1).value <= 2.0 * q + 1e-12);
}

TEST_CASE("T^DEC and the linearized DEC on the worked instance") {
  const ModelClass cls = WorkedInstance();
  const std::vector<Model> refs = {RefOf(cls, 0), RefOf(cls, 1)};
  for (double delta : {0.05, 0.1, 0.2, 0.4}) {
    const DecReport rep = Tdec(cls, refs, delta);
    CHECK(std::abs(rep.value - 1.0 / delta) <= 1e-3 * rep.value);
  }
  CHECK(Tdec(cls, refs, 0.6).value == 1.0);

  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(0.1 * i);
  for (double eps : {0.1, 0.3, 0.5}) {
    double ratio = 0.0;
    for (double e : grid) {
      if (e < eps - 1e-12) continue;
      double r = 0.0;
      for (const Model& ref : refs) r = std::max(r, ConstrainedRdec(cls, ref, e).value);
      ratio = std::max(ratio, r / e);
    }
    CHECK(LinConstrainedRdec(cls, refs, eps, grid).value == doctest::Approx(eps * ratio));
    CHECK(LinConstrainedRdec(cls, refs, eps, grid).value ==
          doctest::Approx(eps * std::sqrt(0.5)).epsilon(0.05));
  }
  CHECK_THROWS_AS(LinConstrainedRdec(cls, refs, 0.5, {0.1}), InputError);
}

TEST_CASE("Lagrangian domination of the constrained DEC") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const ModelClass cls = RandomFiniteClass(rng, 2 + trial % 3, 2 + trial % 2, 2 + trial % 4);
    const Model ref = MixtureModel(cls, MixtureSpec{Vector::Constant(cls.num_models(), 1.0 / double(cls.num_models()))});
    const DecTables t = MakeTables(cls, ref);
    for (double eps : {0.1, 0.3, 0.7}) {
      double best = kInf;
      for (double gamma = 0.25; gamma <= 256.0; gamma *= 2.0) {
        const DecReport off = OffsetRdecTables(t, gamma, true);
        best = std::min(best, off.value + gamma * eps * eps + off.certificate);
      }
      CHECK(ConstrainedRdecTables(t, eps).value <= best + 1e-9);
    }
  }
}

TEST_CASE("hull references and proxy class") {
  const ModelClass cls = WorkedInstance();
  const auto refs = HullReferences(cls);
  CHECK(refs.size() == 2 + 7);
  const ModelClass hull = HullProxyClass(cls);
  CHECK(hull.num_models() == 9);
  HullOptions sparse;
  sparse.sparsity = 1;
  CHECK(HullReferences(cls, sparse).size() == 2);
  const DecReport rep = SupOverReferences(refs, [&](const Model& r) { return ConstrainedRdec(cls, r, 0.2); });
  CHECK(rep.lower_certified);
  CHECK(rep.value >= 0.04 - 1e-12);
}

TEST_CASE("exploration by optimization") {
  const ModelClass cls = WorkedInstance();
  const Vector q = Vector::Constant(2, 0.5);
  const DecReport rep = ExoValue(cls, q, 2.0);
  CHECK(rep.certificate >= -1e-12);
  ExoSolver solver(cls, 2.0);
  const ExoSolution sol = solver.Solve(q);
  CHECK(sol.value <= sol.zero_ell_value + 1e-12);
  CHECK(solver.Objective(q, sol.p, sol.ell) == doctest::Approx(sol.value));
  const ExoSolution again = solver.Solve(q);
  CHECK(again.value == sol.value);
  CHECK(again.p == sol.p);

  // A prior on the optimum pins the value at 0; ell = 0 already attains it.
  ModelClass single = cls;
  single.models.resize(1);
  const DecReport pinned = ExoValue(single, Vector::Unit(2, 0), 2.0);
  CHECK(pinned.value == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(pinned.achieving_p[0] == doctest::Approx(1.0));
}

TEST_CASE("exploration by optimization is below the hull offset DEC at gamma/8") {
  std::mt19937_64 rng(41);
  std::vector<ModelClass> classes = {WorkedInstance()};
  for (int i = 0; i < 3; ++i) classes.push_back(RandomFiniteClass(rng, 3, 2, 3, 0.2));
  for (const ModelClass& cls : classes) {
    const ModelClass hull = HullProxyClass(cls);
    const auto refs = HullReferences(cls);
    for (double gamma : {1.0, 4.0}) {
      auto offset = [&](double g) {
        return SupOverReferences(refs, [&](const Model& r) { return OffsetRdec(hull, r, g, true); }).value;
      };
      const double upper = offset(gamma / 8.0);
      const Index m = cls.num_decisions();
      for (int i = 0; i < 12; ++i) {
        Vector q = decdim::testing::RandomSimplex(rng, m);
        if (i < m) q = Vector::Unit(m, i) * 0.9 + Vector::Constant(m, 0.1 / double(m));
        const double v = ExoValue(cls, q, gamma).value;
        CHECK(v <= upper + 1e-6);
      }
    }
  }
}

TEST_CASE("per-context DEC") {
  Matrix h1(2, 2), h2(2, 2), h3(2, 2);
  h1 << 0.5, 0.5, 0.2, 0.2;
  h2 << 0.5, 0.5, 0.2, 0.2;
  CHECK(PerContextRdec({h1, h2}, 0, 0.3).value == doctest::Approx(0.0));

  Matrix a(1, 3), b(1, 3);
  a << 0.9, 0.1, 0.4;
  b << 0.2, 0.8, 0.4;
  const DecReport ctx = PerContextRdec({a, b}, 0, 0.3);
  const ModelClass plain = BuildGaussianMab({a.row(0).transpose(), b.row(0).transpose()});
  const DecReport bandit = SupOverReferences(HullReferences(plain), [&](const Model& r) {
    return ConstrainedRdec(plain, r, 0.3);
  });
  CHECK(ctx.value == doctest::Approx(bandit.value));
  CHECK_THROWS_AS(PerContextRdec({a, b}, 1, 0.3), InputError);
}

TEST_CASE("contextual constrained DEC dominates the per-context DEC") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<Matrix> hs;
    for (int i = 0; i < 3; ++i) {
      Matrix h(2, 2);
      for (Index c = 0; c < 2; ++c)
        for (Index k = 0; k < 2; ++k) h(c, k) = std::round(u(rng) * 4) / 4;
      hs.push_back(h);
    }
    const std::vector<Vector> nus = {Vector::Unit(2, 0), Vector::Unit(2, 1), Vector::Constant(2, 0.5)};
    const ModelClass cls = BuildContextualBandit(hs, nus);
    for (Index c = 0; c < 2; ++c) {
      for (size_t i = 0; i < hs.size(); ++i) {
        const Model ref = BuildContextualBandit({hs[i]}, {Vector::Unit(2, c)}).models[0];
        for (double eps : {0.05, 0.1, 0.2, 0.35}) {
          const double lhs = ConstrainedRdec(cls, ref, eps).value;
          const double rhs = ValueConstrainedRdec(hs, c, hs[i].row(c).transpose(), 2.0 * std::sqrt(2.0) * eps).value;
          CHECK(lhs >= rhs - 1e-9);
        }
      }
    }
  }
}

TEST_CASE("property: DEC inequalities on random classes") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 2 + Index(rng() % 3), o = 2 + Index(rng() % 2), m = 2 + Index(rng() % 3);
    const ModelClass cls = RandomFiniteClass(rng, d, o, m);
    const Model& ref = cls.models[rng() % cls.models.size()];
    const DecTables t = MakeTables(cls, ref);
    for (double eps : {0.1, 0.3}) {
      CHECK(decdim::testing::LagrangianGap(t, eps) <= 1e-9);
      CHECK(decdim::testing::QuantileRecoveryGap(t, eps, 0.5) <= 1e-9);
      CHECK(decdim::testing::ConversionGap(cls, ref, eps) <= 1e-9);
    }
    const ModelClass est = decdim::testing::RandomEstimationClass(rng, 1, 2, 2 + Index(rng() % 2));
    const DecTables te = MakeTables(est, est.models[0]);
    for (double delta : {0.1, 0.4}) CHECK(decdim::testing::EstimationGap(te, 0.2, delta) <= 1e-9);
  }
}

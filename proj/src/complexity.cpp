#include "decdim/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "decdim/lp.hpp"

namespace decdim {

std::string ToString(DecKind kind) {
  switch (kind) {
    case DecKind::kDdim: return "ddim";
    case DecKind::kOffsetR: return "offset-r";
    case DecKind::kConstrainedR: return "constrained-r";
    case DecKind::kConstrainedP: return "constrained-p";
    case DecKind::kQuantileP: return "quantile-p";
    case DecKind::kQuantileR: return "quantile-r";
    case DecKind::kLinConstrainedR: return "lin-constrained-r";
    case DecKind::kExo: return "exo";
    case DecKind::kTdec: return "tdec";
  }
  return "?";
}

namespace {

constexpr double kStrictTol = 1e-12;
constexpr double kLevelTol = 1e-12;

Index ArgMaxLowest(const Vector& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

// LP over (p, extra) with p in the simplex.
LinearProgram SimplexProgram(Index m) {
  LinearProgram lp;
  lp.objective = Vector::Zero(m + 1);
  lp.free_vars.assign(static_cast<size_t>(m + 1), false);
  lp.free_vars[size_t(m)] = true;
  Vector ones = Vector::Zero(m + 1);
  ones.head(m).setOnes();
  lp.AddRow(ones, Sense::kEq, 1.0);
  return lp;
}

Vector WithExtra(const Vector& coeffs, double extra) {
  Vector row(coeffs.size() + 1);
  row.head(coeffs.size()) = coeffs;
  row[coeffs.size()] = extra;
  return row;
}

Vector CleanSimplex(const Vector& x) {
  Vector p = x.cwiseMax(0.0);
  return p / p.sum();
}

Vector Indicator(const Vector& risk, double level) {
  return (risk.array() > level + kLevelTol).cast<double>().matrix();
}

// min t s.t. p.g_r <= t (keep), p.h_r >= e2 (excl).
std::optional<std::pair<double, Vector>> MinMaxLp(const Matrix& g, const Matrix& h,
                                                  const std::vector<Index>& keep,
                                                  const std::vector<Index>& excl, double e2) {
  const Index m = g.cols();
  LinearProgram lp = SimplexProgram(m);
  lp.objective[m] = 1.0;
  for (Index r : keep) lp.AddRow(WithExtra(g.row(r).transpose(), -1.0), Sense::kLe, 0.0);
  for (Index r : excl) lp.AddRow(WithExtra(h.row(r).transpose(), 0.0), Sense::kGe, e2);
  if (keep.empty()) {
    // No objective rows: t is free and unbounded below; pin it at 0.
    lp.AddRow(WithExtra(Vector::Zero(m), 1.0), Sense::kEq, 0.0);
  }
  const LpResult res = SolveLp(lp);
  if (res.status != LpStatus::kOptimal) return std::nullopt;
  return std::make_pair(res.value, CleanSimplex(res.x.head(m)));
}

// max s s.t. p.h_r >= e2 + s (excl), p.b_r <= cap - s (bounded rows), s <= 1.
// Returns (s*, p) or nullopt when even the closure is empty.
std::optional<std::pair<double, Vector>> StrictSlack(const Matrix& h, const std::vector<Index>& excl,
                                                     double e2, const std::vector<Vector>& bounded,
                                                     double cap, bool bounded_strict) {
  const Index m = h.cols();
  LinearProgram lp = SimplexProgram(m);
  lp.objective[m] = -1.0;
  for (Index r : excl) lp.AddRow(WithExtra(h.row(r).transpose(), -1.0), Sense::kGe, e2);
  for (const Vector& b : bounded) {
    lp.AddRow(WithExtra(b, bounded_strict ? 1.0 : 0.0), Sense::kLe, cap);
  }
  lp.AddRow(WithExtra(Vector::Zero(m), 1.0), Sense::kLe, 1.0);
  const LpResult res = SolveLp(lp);
  if (res.status != LpStatus::kOptimal) return std::nullopt;
  return std::make_pair(res.x[m], CleanSimplex(res.x.head(m)));
}

bool StrictlyExcludable(const Matrix& h, const std::vector<Index>& excl, double e2, Vector* q) {
  if (excl.empty()) return true;
  const auto s = StrictSlack(h, excl, e2, {}, 0.0, false);
  if (!s || s->first <= kStrictTol) return false;
  if (q) *q = s->second;
  return true;
}

// Game value min_p max_{r in keep} p.g_r with its row strategy.
std::pair<double, Vector> KeepGame(const Matrix& g, const std::vector<Index>& keep, double* gap) {
  const Index m = g.cols();
  if (keep.empty()) {
    if (gap) *gap = 0.0;
    return {0.0, Vector::Constant(m, 1.0 / double(m))};
  }
  Matrix payoff(m, Index(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) payoff.col(Index(j)) = g.row(keep[j]).transpose();
  const GameSolution s = SolveMatrixGame(payoff);
  if (gap) *gap = s.gap;
  return {s.value, s.row_strategy.weights()};
}

std::vector<double> Levels(const Matrix& g, const std::vector<Index>& rows) {
  std::set<double> levels = {0.0};
  for (Index r : rows)
    for (Index j = 0; j < g.cols(); ++j) levels.insert(g(r, j));
  return {levels.begin(), levels.end()};
}

// Covering-game feasibility of a quantile level: exists p with
// p(g_r > level) < delta for all kept rows (<= 0 when delta = 0).
std::optional<Vector> QuantileFeasible(const Matrix& g, const std::vector<Index>& keep,
                                       double level, double delta) {
  const Index m = g.cols();
  Matrix payoff(m, Index(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) {
    payoff.col(Index(j)) = Indicator(g.row(keep[j]).transpose(), level);
  }
  if (payoff.size() == 0 || payoff.maxCoeff() == 0.0) return Vector::Constant(m, 1.0 / double(m));
  const GameSolution s = SolveMatrixGame(payoff);
  const bool ok = delta > 0.0 ? s.value < delta - kStrictTol : s.value <= kStrictTol;
  if (!ok) return std::nullopt;
  return s.row_strategy.weights();
}

struct Detail {
  Vector p;
  Vector q;
};

using Evaluate = std::function<std::optional<double>(const std::vector<Index>& keep,
                                                     const std::vector<Index>& excl, bool leaf,
                                                     Detail* detail)>;

struct SearchResult {
  double value = kInf;
  std::vector<Index> keep, excl;
  Detail detail;
  long nodes = 0;
};

// Branch and bound over keep/exclude assignments of `free_rows`. `evaluate`
// returns a lower bound at internal nodes (undecided rows ignored) and the
// exact value at leaves; nullopt prunes.
SearchResult SubsetSearch(const std::vector<Index>& forced_keep,
                          const std::vector<Index>& free_rows, const Evaluate& evaluate) {
  SearchResult best;
  std::vector<Index> keep = forced_keep, excl;
  std::function<void(size_t)> recurse = [&](size_t depth) {
    ++best.nodes;
    const bool leaf = depth == free_rows.size();
    Detail detail;
    const auto v = evaluate(keep, excl, leaf, leaf ? &detail : nullptr);
    if (!v || *v >= best.value - 1e-13) return;
    if (leaf) {
      best.value = *v;
      best.keep = keep;
      best.excl = excl;
      best.detail = std::move(detail);
      return;
    }
    const Index r = free_rows[depth];
    excl.push_back(r);
    recurse(depth + 1);
    excl.pop_back();
    keep.push_back(r);
    recurse(depth + 1);
    keep.pop_back();
  };
  recurse(0);
  return best;
}

void CheckEps(double eps) {
  if (!(eps > 0.0)) throw InputError("epsilon must be positive");
}

std::string DescribeTables(const DecTables& t) { return t.reference_name; }

}  // namespace

DecTables MakeTables(const ModelClass& cls, const Model& reference) {
  DecTables t;
  const Index n = cls.num_models(), m = cls.num_decisions();
  if (static_cast<Index>(reference.channel.size()) != m) {
    throw InputError("reference model has the wrong number of decisions");
  }
  t.risk.resize(n, m);
  t.hellinger.resize(n, m);
  for (Index r = 0; r < n; ++r) {
    t.risk.row(r) = cls.models[size_t(r)].risk.transpose();
    for (Index d = 0; d < m; ++d) {
      t.hellinger(r, d) = EmissionDivergence(DivergenceKind::kSquaredHellinger,
                                             cls.models[size_t(r)].channel[size_t(d)],
                                             reference.channel[size_t(d)]);
    }
  }
  t.reference_risk = reference.risk.size() == m ? reference.risk : Vector(Vector::Zero(m));
  t.reference_name = reference.name;
  return t;
}

// ---------------------------------------------------------------- Ddim

DecReport DecisionDimensionFromRisk(const Matrix& risk, double delta) {
  if (!(delta >= 0.0)) throw InputError("decision dimension: delta must be >= 0");
  DecReport rep;
  rep.kind = DecKind::kDdim;
  rep.params["delta"] = delta;
  const Index n = risk.rows(), m = risk.cols();
  Matrix cover(m, n);
  for (Index r = 0; r < n; ++r) {
    for (Index d = 0; d < m; ++d) cover(d, r) = risk(r, d) <= delta + kLevelTol ? 1.0 : 0.0;
    if (cover.col(r).sum() == 0.0) {
      rep.value = kInf;
      rep.witness_model = r;
      rep.achieving_p = FiniteDistribution::Uniform(m);
      rep.notes.push_back("empty near-optimal set");
      return rep;
    }
  }
  const GameSolution s = SolveMatrixGame(-cover);
  const double coverage = -s.value;
  rep.value = 1.0 / coverage;
  rep.achieving_p = s.row_strategy;
  rep.certificate = s.gap;
  rep.certificate_kind = "game-gap";
  rep.converged = s.converged;
  const Vector covered = cover.transpose() * s.row_strategy.weights();
  Index worst = 0;
  for (Index r = 1; r < n; ++r)
    if (covered[r] < covered[worst]) worst = r;
  rep.witness_model = worst;
  return rep;
}

DecReport DecisionDimension(const ModelClass& cls, double delta) {
  Matrix risk(cls.num_models(), cls.num_decisions());
  for (Index r = 0; r < cls.num_models(); ++r) risk.row(r) = cls.models[size_t(r)].risk.transpose();
  DecReport rep = DecisionDimensionFromRisk(risk, delta);
  if (rep.witness_model) rep.witness_name = cls.models[size_t(*rep.witness_model)].name;
  return rep;
}

DecReport DecisionDimensionFromValues(const Matrix& values, double delta) {
  Matrix risk(values.rows(), values.cols());
  for (Index r = 0; r < values.rows(); ++r) {
    risk.row(r) = (Vector::Constant(values.cols(), values.row(r).maxCoeff()) -
                   values.row(r).transpose()).transpose();
  }
  return DecisionDimensionFromRisk(risk, delta);
}

// ---------------------------------------------------------------- offset

DecReport OffsetRdecTables(const DecTables& t, double gamma, bool include_reference) {
  if (!(gamma > 0.0)) throw InputError("offset DEC: gamma must be positive");
  const Index n = t.risk.rows(), m = t.risk.cols();
  const Index cols = n + (include_reference ? 1 : 0);
  Matrix payoff(m, cols);
  for (Index r = 0; r < n; ++r) {
    payoff.col(r) = (t.risk.row(r) - gamma * t.hellinger.row(r)).transpose();
  }
  if (include_reference) payoff.col(n) = t.reference_risk;
  const GameSolution s = SolveMatrixGame(payoff);
  DecReport rep;
  rep.kind = DecKind::kOffsetR;
  rep.params["gamma"] = gamma;
  rep.value = s.value;
  rep.achieving_p = s.row_strategy;
  rep.certificate = s.gap;
  rep.certificate_kind = "game-gap";
  rep.converged = s.converged;
  rep.witness_model = ArgMaxLowest(payoff.transpose() * s.row_strategy.weights());
  rep.reference = DescribeTables(t);
  return rep;
}

DecReport OffsetRdec(const ModelClass& cls, const Model& reference, double gamma,
                     bool include_reference) {
  DecReport rep = OffsetRdecTables(MakeTables(cls, reference), gamma, include_reference);
  if (rep.witness_model && *rep.witness_model < cls.num_models()) {
    rep.witness_name = cls.models[size_t(*rep.witness_model)].name;
  }
  return rep;
}

// ---------------------------------------------------------------- constrained

DecReport ConstrainedRdecTables(const DecTables& t, double eps) {
  CheckEps(eps);
  const double e2 = eps * eps;
  const Index n = t.risk.rows(), m = t.risk.cols();
  // Row n is the reference itself: zero divergence, never excludable.
  Matrix g(n + 1, m), h(n + 1, m);
  g.topRows(n) = t.risk;
  g.row(n) = t.reference_risk.transpose();
  h.topRows(n) = t.hellinger;
  h.row(n).setZero();
  std::vector<Index> forced = {n}, free_rows;
  for (Index r = 0; r < n; ++r) {
    (h.row(r).maxCoeff() > e2 ? free_rows : forced).push_back(r);
  }
  std::stable_sort(free_rows.begin(), free_rows.end(),
                   [&](Index a, Index b) { return g.row(a).maxCoeff() > g.row(b).maxCoeff(); });
  const SearchResult res = SubsetSearch(
      forced, free_rows,
      [&](const std::vector<Index>& keep, const std::vector<Index>& excl, bool leaf,
          Detail* detail) -> std::optional<double> {
        const auto lp = MinMaxLp(g, h, keep, excl, e2);
        if (!lp) return std::nullopt;
        if (!StrictlyExcludable(h, excl, e2, nullptr)) return std::nullopt;
        if (leaf && detail) detail->p = lp->second;
        return lp->first;
      });
  DecReport rep;
  rep.kind = DecKind::kConstrainedR;
  rep.params["eps"] = eps;
  rep.value = std::max(0.0, res.value);
  rep.achieving_p = FiniteDistribution::Normalized(res.detail.p);
  const Vector at_p = g * res.detail.p;
  Index w = res.keep.front();
  for (Index r : res.keep)
    if (at_p[r] > at_p[w] || (at_p[r] == at_p[w] && r < w)) w = r;
  rep.witness_model = w;
  rep.reference = DescribeTables(t);
  if (!res.excl.empty()) {
    rep.notes.push_back("infimum approached from inside the strict exclusion region");
  }
  return rep;
}

DecReport ConstrainedPdecTables(const DecTables& t, double eps) {
  CheckEps(eps);
  const double e2 = eps * eps;
  const Index n = t.risk.rows();
  const Matrix& g = t.risk;
  const Matrix& h = t.hellinger;
  std::vector<Index> forced, free_rows;
  for (Index r = 0; r < n; ++r) (h.row(r).maxCoeff() > e2 ? free_rows : forced).push_back(r);
  std::stable_sort(free_rows.begin(), free_rows.end(),
                   [&](Index a, Index b) { return g.row(a).maxCoeff() > g.row(b).maxCoeff(); });
  double worst_gap = 0.0;
  const SearchResult res = SubsetSearch(
      forced, free_rows,
      [&](const std::vector<Index>& keep, const std::vector<Index>& excl, bool leaf,
          Detail* detail) -> std::optional<double> {
        Vector q;
        if (!StrictlyExcludable(h, excl, e2, &q)) return std::nullopt;
        double gap = 0.0;
        const auto game = KeepGame(g, keep, &gap);
        if (leaf && detail) {
          detail->p = game.second;
          detail->q = excl.empty() ? Vector(Vector::Constant(g.cols(), 1.0 / double(g.cols()))) : q;
          worst_gap = std::max(worst_gap, gap);
        }
        return game.first;
      });
  DecReport rep;
  rep.kind = DecKind::kConstrainedP;
  rep.params["eps"] = eps;
  rep.value = std::max(0.0, res.value);
  rep.achieving_p = FiniteDistribution::Normalized(res.detail.p);
  rep.achieving_q = FiniteDistribution::Normalized(res.detail.q);
  rep.certificate = worst_gap;
  rep.certificate_kind = "game-gap";
  if (!res.keep.empty()) {
    const Vector at_p = g * res.detail.p;
    Index w = res.keep.front();
    for (Index r : res.keep)
      if (at_p[r] > at_p[w] || (at_p[r] == at_p[w] && r < w)) w = r;
    rep.witness_model = w;
  }
  rep.reference = DescribeTables(t);
  return rep;
}

DecReport ConstrainedRdec(const ModelClass& cls, const Model& reference, double eps) {
  DecReport rep = ConstrainedRdecTables(MakeTables(cls, reference), eps);
  if (rep.witness_model) {
    rep.witness_name = *rep.witness_model < cls.num_models()
                           ? cls.models[size_t(*rep.witness_model)].name
                           : reference.name;
  }
  return rep;
}

DecReport ConstrainedPdec(const ModelClass& cls, const Model& reference, double eps) {
  DecReport rep = ConstrainedPdecTables(MakeTables(cls, reference), eps);
  if (rep.witness_model) rep.witness_name = cls.models[size_t(*rep.witness_model)].name;
  return rep;
}

// ---------------------------------------------------------------- quantile

double QuantileRisk(const FiniteDistribution& p, const Vector& risk, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw InputError("quantile risk: delta must lie in [0, 1]");
  if (p.size() != risk.size()) throw InputError("quantile risk: size mismatch");
  std::vector<Index> support = p.Support();
  std::sort(support.begin(), support.end(),
            [&](Index a, Index b) { return risk[a] > risk[b] || (risk[a] == risk[b] && a < b); });
  // Walk levels from the top; tail mass P(g >= level) grows as the level drops.
  double tail = 0.0;
  for (size_t i = 0; i < support.size(); ++i) {
    tail += p[support[i]];
    const bool level_end = i + 1 == support.size() || risk[support[i + 1]] != risk[support[i]];
    if (level_end && tail >= delta - kLevelTol) return std::max(0.0, risk[support[i]]);
  }
  return 0.0;
}

DecReport QuantilePdecTables(const DecTables& t, double eps, double delta) {
  CheckEps(eps);
  if (!(delta >= 0.0 && delta < 1.0)) throw InputError("quantile DEC: delta must lie in [0, 1)");
  const double e2 = eps * eps;
  const Index n = t.risk.rows(), m = t.risk.cols();
  const Matrix& g = t.risk;
  const Matrix& h = t.hellinger;
  std::vector<Index> forced, free_rows;
  for (Index r = 0; r < n; ++r) (h.row(r).maxCoeff() > e2 ? free_rows : forced).push_back(r);
  std::stable_sort(free_rows.begin(), free_rows.end(),
                   [&](Index a, Index b) { return g.row(a).maxCoeff() > g.row(b).maxCoeff(); });
  const SearchResult res = SubsetSearch(
      forced, free_rows,
      [&](const std::vector<Index>& keep, const std::vector<Index>& excl, bool leaf,
          Detail* detail) -> std::optional<double> {
        Vector q;
        if (!StrictlyExcludable(h, excl, e2, &q)) return std::nullopt;
        if (keep.empty()) {
          if (leaf && detail) {
            detail->p = Vector::Constant(m, 1.0 / double(m));
            detail->q = q;
          }
          return 0.0;
        }
        const std::vector<double> levels = Levels(g, keep);
        size_t lo = 0, hi = levels.size() - 1;
        while (lo < hi) {
          const size_t mid = (lo + hi) / 2;
          if (QuantileFeasible(g, keep, levels[mid], delta)) {
            hi = mid;
          } else {
            lo = mid + 1;
          }
        }
        if (leaf && detail) {
          detail->p = *QuantileFeasible(g, keep, levels[lo], delta);
          detail->q = excl.empty() ? Vector(Vector::Constant(m, 1.0 / double(m))) : q;
        }
        return levels[lo];
      });
  DecReport rep;
  rep.kind = DecKind::kQuantileP;
  rep.params["eps"] = eps;
  rep.params["delta"] = delta;
  rep.value = res.value;
  rep.achieving_p = FiniteDistribution::Normalized(res.detail.p);
  rep.achieving_q = FiniteDistribution::Normalized(res.detail.q);
  if (!res.keep.empty()) {
    Index w = res.keep.front();
    double wq = -1.0;
    for (Index r : res.keep) {
      const double qr = QuantileRisk(rep.achieving_p, g.row(r).transpose(), delta);
      if (qr > wq) {
        wq = qr;
        w = r;
      }
    }
    rep.witness_model = w;
  }
  rep.reference = DescribeTables(t);
  return rep;
}

DecReport QuantileRdecTables(const DecTables& t, double eps, double delta) {
  CheckEps(eps);
  if (!(delta >= 0.0 && delta < 1.0)) throw InputError("quantile DEC: delta must lie in [0, 1)");
  const double e2 = eps * eps;
  const Index n = t.risk.rows(), m = t.risk.cols();
  const Matrix& g = t.risk;
  const Matrix& h = t.hellinger;
  const Vector& gref = t.reference_risk;
  std::vector<Index> forced, free_rows;
  for (Index r = 0; r < n; ++r) (h.row(r).maxCoeff() > e2 ? free_rows : forced).push_back(r);
  std::stable_sort(free_rows.begin(), free_rows.end(),
                   [&](Index a, Index b) { return g.row(a).maxCoeff() > g.row(b).maxCoeff(); });
  const SearchResult res = SubsetSearch(
      forced, free_rows,
      [&](const std::vector<Index>& keep, const std::vector<Index>& excl, bool leaf,
          Detail* detail) -> std::optional<double> {
        if (keep.empty()) {
          Vector q;
          if (!StrictlyExcludable(h, excl, e2, &q)) return std::nullopt;
          if (leaf && detail) detail->p = excl.empty() ? Vector(Vector::Constant(m, 1.0 / double(m))) : q;
          return 0.0;
        }
        double best = kInf;
        Vector best_p;
        for (double level : Levels(g, keep)) {
          if (level >= best) break;
          std::vector<Vector> bounded;
          for (Index r : keep) bounded.push_back(Indicator(g.row(r).transpose(), level));
          const auto strict = StrictSlack(h, excl, e2, bounded, delta, delta > 0.0);
          if (!strict || strict->first <= kStrictTol) continue;
          LinearProgram lp = SimplexProgram(m);
          lp.objective.head(m) = gref;
          lp.AddRow(WithExtra(Vector::Zero(m), 1.0), Sense::kEq, 0.0);
          for (Index r : excl) lp.AddRow(WithExtra(h.row(r).transpose(), 0.0), Sense::kGe, e2);
          for (const Vector& b : bounded) lp.AddRow(WithExtra(b, 0.0), Sense::kLe, delta);
          const LpResult sol = SolveLp(lp);
          if (sol.status != LpStatus::kOptimal) continue;
          const double cand = std::max(level, sol.value);
          if (cand < best) {
            best = cand;
            best_p = CleanSimplex(sol.x.head(m));
          }
        }
        if (!std::isfinite(best)) return std::nullopt;
        if (leaf && detail) detail->p = best_p;
        return best;
      });
  DecReport rep;
  rep.kind = DecKind::kQuantileR;
  rep.params["eps"] = eps;
  rep.params["delta"] = delta;
  rep.value = std::max(0.0, res.value);
  rep.achieving_p = FiniteDistribution::Normalized(res.detail.p);
  rep.reference = DescribeTables(t);
  rep.notes.push_back("optimized over distributions on decisions, not T-round mixture policies");
  return rep;
}

DecReport QuantilePdec(const ModelClass& cls, const Model& reference, double eps, double delta) {
  DecReport rep = QuantilePdecTables(MakeTables(cls, reference), eps, delta);
  if (rep.witness_model) rep.witness_name = cls.models[size_t(*rep.witness_model)].name;
  return rep;
}

DecReport QuantileRdec(const ModelClass& cls, const Model& reference, double eps, double delta) {
  return QuantileRdecTables(MakeTables(cls, reference), eps, delta);
}

// ---------------------------------------------------------------- hull

std::vector<Model> HullReferences(const ModelClass& cls, const HullOptions& options) {
  std::vector<Model> refs;
  const Index n = cls.num_models();
  if (options.include_members) {
    for (const Model& m : cls.models) refs.push_back(m);
  }
  const int den = options.denominator;
  std::set<std::vector<int>> seen;
  // Enumerate integer compositions of `den` over at most `sparsity` members.
  std::vector<int> counts(static_cast<size_t>(n), 0);
  std::function<void(Index, int, int)> rec = [&](Index i, int left, int used) {
    if (i == n) {
      if (left != 0 || used < 2) return;
      if (!seen.insert(counts).second) return;
      Vector w(n);
      for (Index k = 0; k < n; ++k) w[k] = double(counts[size_t(k)]) / den;
      refs.push_back(MixtureModel(cls, MixtureSpec{w}));
      return;
    }
    for (int c = left; c >= 0; --c) {
      if (c > 0 && used >= options.sparsity) continue;
      counts[size_t(i)] = c;
      rec(i + 1, left - c, used + (c > 0 ? 1 : 0));
    }
    counts[size_t(i)] = 0;
  };
  if (n >= 2 && options.sparsity >= 2) rec(0, den, 0);
  SeedStream stream(options.seed, 0, SeedStream::kSetup);
  for (int k = 0; k < options.random_restarts; ++k) {
    Vector w(n);
    for (Index i = 0; i < n; ++i) w[i] = -std::log(1.0 - stream.NextUniform());
    refs.push_back(MixtureModel(cls, MixtureSpec{w / w.sum()}));
  }
  return refs;
}

ModelClass HullProxyClass(const ModelClass& cls, const HullOptions& options) {
  ModelClass out = cls;
  HullOptions only_mixtures = options;
  only_mixtures.include_members = false;
  for (Model& m : HullReferences(cls, only_mixtures)) out.models.push_back(std::move(m));
  out.contextual.reset();
  return out;
}

DecReport SupOverReferences(const std::vector<Model>& references, const ReferenceFn& fn) {
  if (references.empty()) throw InputError("no reference models");
  DecReport best;
  bool first = true;
  bool mixture = false;
  for (const Model& ref : references) {
    DecReport rep = fn(ref);
    mixture = mixture || ref.name.rfind("mix[", 0) == 0;
    if (first || rep.value > best.value) {
      best = std::move(rep);
      best.reference = ref.name;
      first = false;
    }
  }
  best.lower_certified = best.lower_certified || mixture;
  return best;
}

// ---------------------------------------------------------------- lin / tdec

namespace {

double RdecOverRefs(const ModelClass& cls, const std::vector<DecTables>& tables, double eps) {
  (void)cls;
  double v = 0.0;
  for (const DecTables& t : tables) v = std::max(v, ConstrainedRdecTables(t, eps).value);
  return v;
}

std::vector<DecTables> AllTables(const ModelClass& cls, const std::vector<Model>& refs) {
  if (refs.empty()) throw InputError("no reference models");
  std::vector<DecTables> out;
  for (const Model& r : refs) out.push_back(MakeTables(cls, r));
  return out;
}

bool AnyMixture(const std::vector<Model>& refs) {
  return std::any_of(refs.begin(), refs.end(),
                     [](const Model& m) { return m.name.rfind("mix[", 0) == 0; });
}

}  // namespace

DecReport LinConstrainedRdec(const ModelClass& cls, const std::vector<Model>& references,
                             double eps, const std::vector<double>& eps_grid) {
  CheckEps(eps);
  if (eps > 1.0) throw InputError("linearized DEC: eps must lie in (0, 1]");
  const auto tables = AllTables(cls, references);
  DecReport rep;
  rep.kind = DecKind::kLinConstrainedR;
  rep.params["eps"] = eps;
  double best_ratio = -1.0;
  for (double e : eps_grid) {
    if (e < eps - 1e-12 || e > 1.0 + 1e-12) continue;
    const double ratio = RdecOverRefs(cls, tables, e) / e;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      rep.params["argmax_eps"] = e;
    }
  }
  if (best_ratio < 0.0) throw InputError("linearized DEC: no grid point in [eps, 1]");
  rep.value = eps * best_ratio;
  rep.certificate_kind = "eps-grid";
  rep.lower_certified = AnyMixture(references);
  rep.achieving_p = FiniteDistribution::Uniform(cls.num_decisions());
  return rep;
}

DecReport Tdec(const ModelClass& cls, const std::vector<Model>& references, double delta,
               double tol) {
  if (!(delta > 0.0)) throw InputError("T^DEC: delta must be positive");
  const auto tables = AllTables(cls, references);
  DecReport rep;
  rep.kind = DecKind::kTdec;
  rep.params["delta"] = delta;
  rep.certificate_kind = "bisection";
  rep.lower_certified = AnyMixture(references);
  rep.achieving_p = FiniteDistribution::Uniform(cls.num_decisions());
  auto ok = [&](double e) { return RdecOverRefs(cls, tables, e) <= delta; };
  // The condition holds on an interval (0, eps_max] by monotonicity.
  if (ok(1.0)) {
    rep.value = 1.0;
    rep.params["eps_max"] = 1.0;
    return rep;
  }
  double lo = 1e-6, hi = 1.0;
  if (!ok(lo)) {
    rep.value = kInf;
    rep.notes.push_back("r-dec^c exceeds delta for every eps >= 1e-6");
    return rep;
  }
  while (hi - lo > tol * lo) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  rep.value = 1.0 / (lo * lo);
  rep.params["eps_max"] = lo;
  rep.certificate = 1.0 / (lo * lo) - 1.0 / (hi * hi);
  return rep;
}

// ---------------------------------------------------------------- exo

ExoSolver::ExoSolver(const ModelClass& cls, double gamma, ExoOptions options)
    : m_(cls.num_decisions()), o_(cls.num_tags()), n_(cls.num_models()), gamma_(gamma),
      options_(options) {
  if (!cls.is_finite()) throw InputError("exploration by optimization needs finite observations");
  if (!(gamma > 0.0)) throw InputError("exploration by optimization: gamma must be positive");
  values_.resize(n_, m_);
  for (Index r = 0; r < n_; ++r) {
    const Model& model = cls.models[size_t(r)];
    if (model.value.size() == m_) {
      values_.row(r) = model.value.transpose();
    } else {
      values_.row(r) = -model.risk.transpose();
    }
    Matrix ch(m_, o_);
    for (Index d = 0; d < m_; ++d) ch.row(d) = model.channel[size_t(d)].tag_probs.transpose();
    channels_.push_back(ch);
  }
}

Matrix ExoSolver::CostTable(const Vector& q, const std::vector<Matrix>& ell) const {
  // z(pi)(o, pi*) = sum_pi' q(pi') exp(l(pi'; pi, o) - l(pi*; pi, o)).
  Matrix cost(m_, n_ * m_);
  for (Index pi = 0; pi < m_; ++pi) {
    const Matrix& l = ell[size_t(pi)];
    Matrix z(o_, m_);
    for (Index o = 0; o < o_; ++o) {
      const double top = l.row(o).maxCoeff();
      double s = 0.0;
      for (Index k = 0; k < m_; ++k) s += q[k] * std::exp(l(o, k) - top);
      for (Index ps = 0; ps < m_; ++ps) z(o, ps) = s * std::exp(top - l(o, ps));
    }
    for (Index r = 0; r < n_; ++r) {
      const Vector info = channels_[size_t(r)].row(pi) * (Matrix::Ones(o_, m_) - z);
      for (Index ps = 0; ps < m_; ++ps) {
        cost(pi, r * m_ + ps) = values_(r, ps) - values_(r, pi) - gamma_ * info[ps];
      }
    }
  }
  return cost;
}

Vector ExoSolver::PStep(const Matrix& cost) const {
  return SolveMatrixGame(cost).row_strategy.weights();
}

void ExoSolver::EllStep(const Vector& q, const Vector& p, std::vector<Matrix>& ell) const {
  const Index pairs = n_ * m_;
  auto objective = [&](const std::vector<Matrix>& l, double tau, std::vector<Matrix>* grad) {
    const Matrix cost = CostTable(q, l);
    const Vector gam = cost.transpose() * p;
    const double top = gam.maxCoeff();
    Vector w = ((gam.array() - top) / tau).exp();
    const double sw = w.sum();
    const double val = top + tau * std::log(sw);
    if (!grad) return val;
    w /= sw;
    grad->assign(size_t(m_), Matrix::Zero(o_, m_));
    for (Index pi = 0; pi < m_; ++pi) {
      if (p[pi] <= 0.0) continue;
      const Matrix& lp = l[size_t(pi)];
      Matrix& gp = (*grad)[size_t(pi)];
      for (Index o = 0; o < o_; ++o) {
        const double mx = lp.row(o).maxCoeff();
        Vector e(m_);
        for (Index k = 0; k < m_; ++k) e[k] = q[k] * std::exp(lp(o, k) - mx);
        const double s = e.sum();
        for (Index j = 0; j < pairs; ++j) {
          if (w[j] < 1e-14) continue;
          const Index r = j / m_, ps = j % m_;
          const double coef = w[j] * p[pi] * gamma_ * channels_[size_t(r)](pi, o);
          if (coef == 0.0) continue;
          const double scale = std::exp(mx - lp(o, ps));
          // d z / d l(k) = q_k e^{l_k - l_ps} - [k = ps] z.
          for (Index k = 0; k < m_; ++k) gp(o, k) += coef * e[k] * scale;
          gp(o, ps) -= coef * s * scale;
        }
      }
    }
    return val;
  };
  const double spread = std::max(1e-6, (values_.rowwise().maxCoeff() - values_.rowwise().minCoeff()).maxCoeff() + gamma_);
  double tau = 0.05 * spread;
  std::vector<Matrix> grad;
  double step = 1.0;
  for (int it = 0; it < options_.descent_steps; ++it) {
    const double f0 = objective(ell, tau, &grad);
    double gn = 0.0;
    for (const Matrix& g : grad) gn += g.squaredNorm();
    if (gn < 1e-24) break;
    step = std::min(step * 2.0, 10.0);
    while (step > 1e-10) {
      std::vector<Matrix> trial = ell;
      for (size_t k = 0; k < trial.size(); ++k) {
        trial[k] = (trial[k] - step * grad[k]).cwiseMax(-options_.ell_bound).cwiseMin(options_.ell_bound);
      }
      if (objective(trial, tau, nullptr) <= f0 - 1e-4 * step * gn) {
        ell = std::move(trial);
        break;
      }
      step *= 0.5;
    }
    tau = std::max(1e-4 * spread, tau * 0.93);
  }
}

double ExoSolver::Objective(const Vector& q, const Vector& p, const std::vector<Matrix>& ell,
                            Index* model, Index* decision) const {
  const Vector gam = CostTable(q, ell).transpose() * p;
  const Index j = ArgMaxLowest(gam);
  if (model) *model = j / m_;
  if (decision) *decision = j % m_;
  return gam[j];
}

ExoSolution ExoSolver::Solve(const Vector& q, const ExoSolution* warm) const {
  if (q.size() != m_) throw InputError("exploration by optimization: prior has the wrong size");
  std::vector<Matrix> zero(size_t(m_), Matrix::Zero(o_, m_));
  ExoSolution best;
  best.ell = zero;
  best.p = PStep(CostTable(q, zero));
  best.value = Objective(q, best.p, best.ell);
  best.zero_ell_value = best.value;
  std::vector<Matrix> ell = zero;
  Vector p = best.p;
  if (warm && warm->ell.size() == size_t(m_)) {
    ell = warm->ell;
    p = PStep(CostTable(q, ell));
    const double v = Objective(q, p, ell);
    if (v < best.value) {
      best.value = v;
      best.p = p;
      best.ell = ell;
    }
  }
  for (int a = 0; a < options_.alternations; ++a) {
    EllStep(q, p, ell);
    p = PStep(CostTable(q, ell));
    const double v = Objective(q, p, ell);
    if (v < best.value - 1e-12) {
      best.value = v;
      best.p = p;
      best.ell = ell;
    } else if (a > 2 && v >= best.value - 1e-9) {
      break;
    }
  }
  Objective(q, best.p, best.ell, &best.witness_model, &best.witness_decision);
  return best;
}

DecReport ExoValue(const ModelClass& cls, const Vector& prior_q, double gamma,
                   const ExoOptions& options) {
  const FiniteDistribution q(prior_q, 1e-9);
  ExoSolver solver(cls, gamma, options);
  const ExoSolution sol = solver.Solve(q.weights());
  DecReport rep;
  rep.kind = DecKind::kExo;
  rep.params["gamma"] = gamma;
  rep.value = sol.value;
  rep.achieving_p = FiniteDistribution::Normalized(sol.p);
  rep.achieving_q = q;
  rep.witness_model = sol.witness_model;
  rep.witness_name = cls.models[size_t(sol.witness_model)].name;
  rep.certificate = sol.zero_ell_value - sol.value;
  rep.certificate_kind = "upper-bound";
  rep.notes.push_back("value is the exact objective of the returned (p, l), an upper bound on the saddle value");
  return rep;
}

// ---------------------------------------------------------------- contextual

ModelClass ContextRestrictedClass(const std::vector<Matrix>& value_class, Index context) {
  if (value_class.empty()) throw InputError("per-context DEC: empty value class");
  if (context < 0 || context >= value_class.front().rows()) {
    throw InputError("per-context DEC: context out of range");
  }
  std::vector<Vector> hyps;
  for (const Matrix& h : value_class) hyps.push_back(h.row(context).transpose());
  return BuildGaussianMab(hyps);
}

DecReport PerContextRdec(const std::vector<Matrix>& value_class, Index context, double eps,
                         const HullOptions& hull) {
  const ModelClass cls = ContextRestrictedClass(value_class, context);
  DecReport rep = SupOverReferences(HullReferences(cls, hull), [&](const Model& ref) {
    return ConstrainedRdec(cls, ref, eps);
  });
  rep.params["context"] = double(context);
  return rep;
}

DecReport ValueConstrainedRdec(const std::vector<Matrix>& value_class, Index context,
                               const Vector& h_bar, double eps) {
  if (value_class.empty()) throw InputError("per-context DEC: empty value class");
  const Index n = Index(value_class.size()), a = value_class.front().cols();
  if (h_bar.size() != a) throw InputError("per-context DEC: reference has the wrong size");
  DecTables t;
  t.risk.resize(n, a);
  t.hellinger.resize(n, a);
  for (Index r = 0; r < n; ++r) {
    const Vector h = value_class[size_t(r)].row(context).transpose();
    t.risk.row(r) = (Vector::Constant(a, h.maxCoeff()) - h).transpose();
    t.hellinger.row(r) = (h - h_bar).array().square().matrix().transpose();
  }
  t.reference_risk = Vector::Constant(a, h_bar.maxCoeff()) - h_bar;
  t.reference_name = "h_bar";
  DecReport rep = ConstrainedRdecTables(t, eps);
  rep.params["context"] = double(context);
  return rep;
}

}  // namespace decdim

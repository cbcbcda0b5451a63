#include "decdim/algorithms.hpp"

#include <algorithm>
#include <cmath>

#include "decdim/rng.hpp"

namespace decdim {

Index UniformRandom::Select(int t) {
  SeedStream stream(seed_, std::uint64_t(t), SeedStream::kAlgorithm);
  return std::min<Index>(n_ - 1, Index(stream.NextUniform() * double(n_)));
}

Ucb::Ucb(std::vector<Index> arms, int horizon, UcbOptions options)
    : arms_(std::move(arms)), horizon_(horizon), options_(options) {
  if (arms_.empty()) throw InputError("UCB needs at least one arm");
  if (horizon_ < 1) throw InputError("UCB horizon must be positive");
  Reset(0);
}

void Ucb::Reset(std::uint64_t) {
  counts_.assign(arms_.size(), 0);
  sums_.assign(arms_.size(), 0.0);
}

double Ucb::UpperIndex(size_t slot) const {
  if (counts_[slot] == 0) return kInf;
  const double n = counts_[slot];
  return sums_[slot] / n +
         options_.width * std::sqrt(std::log(double(horizon_) / options_.delta) / n);
}

Index Ucb::Select(int) {
  size_t best = 0;
  double best_index = UpperIndex(0);
  for (size_t s = 1; s < arms_.size(); ++s) {
    const double u = UpperIndex(s);
    if (u > best_index) {
      best = s;
      best_index = u;
    }
  }
  return arms_[best];
}

void Ucb::Observe(int, Index decision, const Observation& obs) {
  for (size_t s = 0; s < arms_.size(); ++s) {
    if (arms_[s] == decision) {
      ++counts_[s];
      sums_[s] += obs.reward;
      return;
    }
  }
}

Index ReductionDrawCount(double ddim, double delta) {
  if (!std::isfinite(ddim)) throw InputError("reduction: decision dimension is infinite");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("reduction: delta must lie in (0, 1)");
  // Guard against 5 * ln 10 style products landing a hair above an integer.
  const double n = ddim * std::log(1.0 / delta);
  return std::max<Index>(1, Index(std::ceil(n - 1e-9)));
}

ReductionPlan ReductionPrepare(const DecReport& ddim_report, double delta, std::uint64_t seed) {
  ReductionPlan plan;
  plan.ddim = ddim_report.value;
  plan.num_draws = ReductionDrawCount(ddim_report.value, delta);
  plan.p_star = ddim_report.achieving_p;
  SeedStream stream(seed, 0, SeedStream::kSetup);
  for (Index i = 0; i < plan.num_draws; ++i) plan.draws.push_back(plan.p_star.Sample(stream.NextUniform()));
  plan.subset = plan.draws;
  std::sort(plan.subset.begin(), plan.subset.end());
  plan.subset.erase(std::unique(plan.subset.begin(), plan.subset.end()), plan.subset.end());
  return plan;
}

ReductionPlan ReductionPrepare(const ModelClass& cls, double delta_opt, double delta,
                               std::uint64_t seed) {
  return ReductionPrepare(DecisionDimension(cls, delta_opt), delta, seed);
}

bool ReductionCovers(const ReductionPlan& plan, const Model& model, double delta_opt) {
  return std::any_of(plan.subset.begin(), plan.subset.end(),
                     [&](Index d) { return model.risk[d] <= delta_opt + 1e-12; });
}

Reduction::Reduction(const ModelClass& cls, double delta_opt, double delta, int horizon,
                     UcbOptions ucb)
    : ddim_(DecisionDimension(cls, delta_opt)), delta_(delta), horizon_(horizon),
      ucb_options_(ucb) {
  ReductionDrawCount(ddim_.value, delta_);
  Reset(0);
}

void Reduction::Reset(std::uint64_t seed) {
  plan_ = ReductionPrepare(ddim_, delta_, seed);
  ucb_ = std::make_unique<Ucb>(plan_.subset, horizon_, ucb_options_);
}

Index Reduction::Select(int t) { return ucb_->Select(t); }

void Reduction::Observe(int t, Index decision, const Observation& obs) {
  ucb_->Observe(t, decision, obs);
}

Vector ExoUpdate(const Vector& q, const Vector& ell) {
  if (q.size() != ell.size()) throw InputError("exponential weights: size mismatch");
  const double top = ell.maxCoeff();
  Vector w = q.array() * (ell.array() - top).exp();
  return w / w.sum();
}

ExoPlus::ExoPlus(const ModelClass& cls, double gamma, Vector prior, ExoPlusOptions options)
    : solver_(cls, gamma, options.first), prior_(FiniteDistribution(prior, 1e-9).weights()),
      options_(options), warm_solver_(cls, gamma, options.warm) {
  if (prior_.size() != cls.num_decisions()) throw InputError("ExO+: prior has the wrong size");
  Reset(0);
}

void ExoPlus::Reset(std::uint64_t seed) {
  seed_ = seed;
  q_ = prior_;
  have_last_ = false;
  log_.clear();
}

Index ExoPlus::Select(int t) {
  if (have_last_) {
    last_ = warm_solver_.Solve(q_, &last_);
  } else {
    // Round 1 always starts from the prior, so its solution survives Reset.
    if (!first_) first_ = solver_.Solve(q_);
    last_ = *first_;
  }
  have_last_ = true;
  SeedStream stream(seed_, std::uint64_t(t), SeedStream::kAlgorithm);
  const Index d = FiniteDistribution::Normalized(last_.p).Sample(stream.NextUniform());
  ExoRoundLog entry;
  entry.t = t;
  entry.value = last_.value;
  entry.zero_ell_value = last_.zero_ell_value;
  entry.decision = d;
  log_.push_back(entry);
  return d;
}

void ExoPlus::Observe(int, Index decision, const Observation& obs) {
  const Matrix& l = last_.ell[size_t(decision)];
  const Vector row = l.row(obs.tag).transpose();
  q_ = ExoUpdate(q_, row);
  if (!log_.empty()) log_.back().ell_row = row;
}

FtrlCheck FtrlInequalityCheck(const Vector& prior, const Vector& comparator,
                              const std::vector<Vector>& ell_rows) {
  FtrlCheck out;
  out.kl = FDivergence(DivergenceKind::kKL, comparator, prior);
  if (!std::isfinite(out.kl)) {
    out.vacuous = true;
    out.slack = kInf;
    return out;
  }
  Vector q = prior;
  double sum = 0.0;
  for (const Vector& ell : ell_rows) {
    const double top = ell.maxCoeff();
    const double lse = top + std::log((q.array() * (ell.array() - top).exp()).sum());
    sum += comparator.dot(ell) - lse;
    q = ExoUpdate(q, ell);
  }
  out.slack = out.kl - sum;
  return out;
}

Telescoping TelescopingSums(const Vector& prior, const std::vector<Vector>& ell_rows) {
  Telescoping out;
  Vector q = prior;
  Vector total = Vector::Zero(prior.size());
  for (const Vector& ell : ell_rows) {
    const double top = ell.maxCoeff();
    out.incremental -= top + std::log((q.array() * (ell.array() - top).exp()).sum());
    q = ExoUpdate(q, ell);
    total += ell;
  }
  const double top = total.maxCoeff();
  out.closed_form = -(top + std::log((prior.array() * (total.array() - top).exp()).sum()));
  return out;
}

}  // namespace decdim

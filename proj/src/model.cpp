#include "decdim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace decdim {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double LogMixPdf(const std::vector<GaussianComponent>& mix, double x) {
  double top = -kInf;
  for (const auto& c : mix) {
    if (c.weight > 0.0) {
      top = std::max(top, std::log(c.weight) - 0.5 * (x - c.mean) * (x - c.mean));
    }
  }
  double s = 0.0;
  for (const auto& c : mix) {
    if (c.weight > 0.0) {
      s += std::exp(std::log(c.weight) - 0.5 * (x - c.mean) * (x - c.mean) - top);
    }
  }
  return top + std::log(s) - kLogSqrt2Pi;
}

// Composite Simpson rule over a window wide enough for unit-variance tails.
template <typename F>
double IntegrateReal(const std::vector<GaussianComponent>& a,
                     const std::vector<GaussianComponent>& b, F f) {
  double lo = kInf, hi = -kInf;
  for (const auto* mix : {&a, &b}) {
    for (const auto& c : *mix) {
      lo = std::min(lo, c.mean);
      hi = std::max(hi, c.mean);
    }
  }
  lo -= 12.0;
  hi += 12.0;
  const int n = 8192;
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

bool IsSingle(const std::vector<GaussianComponent>& mix) { return mix.size() == 1; }

double Phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double MixAffinity(const std::vector<GaussianComponent>& a,
                   const std::vector<GaussianComponent>& b) {
  if (IsSingle(a) && IsSingle(b)) {
    const double d = a[0].mean - b[0].mean;
    return std::exp(-d * d / 8.0);
  }
  return IntegrateReal(a, b, [&](double x) {
    return std::exp(0.5 * (LogMixPdf(a, x) + LogMixPdf(b, x)));
  });
}

double MixKl(const std::vector<GaussianComponent>& a,
             const std::vector<GaussianComponent>& b) {
  if (IsSingle(a) && IsSingle(b)) {
    const double d = a[0].mean - b[0].mean;
    return 0.5 * d * d;
  }
  return std::max(0.0, IntegrateReal(a, b, [&](double x) {
    const double la = LogMixPdf(a, x);
    return std::exp(la) * (la - LogMixPdf(b, x));
  }));
}

// (1/2) * integral of |wa * fa - wb * fb|.
double ScaledTv(double wa, const std::vector<GaussianComponent>& a, double wb,
                const std::vector<GaussianComponent>& b) {
  if (wa <= 0.0 || wb <= 0.0) return 0.5 * (wa + wb);
  if (IsSingle(a) && IsSingle(b)) {
    double m1 = a[0].mean, m2 = b[0].mean;
    if (m1 == m2) return 0.5 * std::abs(wa - wb);
    if (m1 > m2) {
      std::swap(m1, m2);
      std::swap(wa, wb);
    }
    const double cross = 0.5 * (m1 + m2) + std::log(wa / wb) / (m2 - m1);
    return std::max(0.0, (wa * Phi(cross - m1) - wb * Phi(cross - m2)) -
                             0.5 * (wa - wb));
  }
  return 0.5 * IntegrateReal(a, b, [&](double x) {
    return std::abs(wa * std::exp(LogMixPdf(a, x)) - wb * std::exp(LogMixPdf(b, x)));
  });
}

std::string Num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

Index ArgMinLowest(const Vector& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

}  // namespace

bool Emission::operator==(const Emission& other) const {
  if (tag_probs.size() != other.tag_probs.size() || tag_probs != other.tag_probs) {
    return false;
  }
  if (reward_mix.size() != other.reward_mix.size()) return false;
  for (size_t k = 0; k < reward_mix.size(); ++k) {
    if (reward_mix[k].size() != other.reward_mix[k].size()) return false;
    for (size_t j = 0; j < reward_mix[k].size(); ++j) {
      if (reward_mix[k][j].weight != other.reward_mix[k][j].weight ||
          reward_mix[k][j].mean != other.reward_mix[k][j].mean) {
        return false;
      }
    }
  }
  return true;
}

Emission FiniteEmission(const Vector& probs) { return Emission{probs, {}}; }

Emission GaussianEmission(double mean) {
  return Emission{Vector::Ones(1), {{GaussianComponent{1.0, mean}}}};
}

double EmissionDivergence(DivergenceKind kind, const Emission& p, const Emission& q) {
  if (!p.has_reward_draw() && !q.has_reward_draw()) {
    return FDivergence(kind, p.tag_probs, q.tag_probs);
  }
  const Index tags = p.tag_probs.size();
  switch (kind) {
    case DivergenceKind::kSquaredHellinger: {
      double bc = 0.0;
      for (Index k = 0; k < tags; ++k) {
        const double w = std::sqrt(p.tag_probs[k] * q.tag_probs[k]);
        if (w > 0.0) bc += w * MixAffinity(p.reward_mix[k], q.reward_mix[k]);
      }
      return std::clamp(1.0 - bc, 0.0, 1.0);
    }
    case DivergenceKind::kKL: {
      double kl = 0.0;
      for (Index k = 0; k < tags; ++k) {
        const double a = p.tag_probs[k], b = q.tag_probs[k];
        if (a <= 0.0) continue;
        if (b <= 0.0) return kInf;
        kl += a * (std::log(a / b) + MixKl(p.reward_mix[k], q.reward_mix[k]));
      }
      return std::max(0.0, kl);
    }
    case DivergenceKind::kTV: {
      double tv = 0.0;
      for (Index k = 0; k < tags; ++k) {
        tv += ScaledTv(p.tag_probs[k], p.reward_mix[k], q.tag_probs[k],
                       q.reward_mix[k]);
      }
      return std::clamp(tv, 0.0, 1.0);
    }
  }
  return 0.0;
}

double MeanReward(const ObservationSpace& space, const Emission& e) {
  if (!e.has_reward_draw()) return e.tag_probs.dot(space.reward);
  double mean = 0.0;
  for (Index k = 0; k < e.tag_probs.size(); ++k) {
    double m = 0.0;
    for (const auto& c : e.reward_mix[k]) m += c.weight * c.mean;
    mean += e.tag_probs[k] * m;
  }
  return mean;
}

Observation SampleObservation(const ObservationSpace& space, const Emission& e,
                              SeedStream& stream) {
  Observation o;
  const double u = stream.NextUniform();
  double acc = 0.0;
  for (Index k = 0; k < e.tag_probs.size(); ++k) {
    if (e.tag_probs[k] <= 0.0) continue;
    acc += e.tag_probs[k];
    o.tag = k;
    if (u < acc) break;
  }
  if (!e.has_reward_draw()) {
    o.reward = space.reward[o.tag];
    return o;
  }
  const auto& mix = e.reward_mix[o.tag];
  double mean = mix.front().mean;
  if (mix.size() > 1) {
    const double u = stream.NextUniform();
    double acc = 0.0;
    for (const auto& c : mix) {
      acc += c.weight;
      mean = c.mean;
      if (u < acc) break;
    }
  }
  o.reward = mean + stream.NextGaussian();
  return o;
}

Emission MixEmissions(const std::vector<const Emission*>& parts, const Vector& weights) {
  Emission out;
  out.tag_probs = Vector::Zero(parts.front()->tag_probs.size());
  for (size_t i = 0; i < parts.size(); ++i) {
    out.tag_probs += weights[Index(i)] * parts[i]->tag_probs;
  }
  if (!parts.front()->has_reward_draw()) return out;
  out.reward_mix.resize(size_t(out.tag_probs.size()));
  for (Index k = 0; k < out.tag_probs.size(); ++k) {
    auto& mix = out.reward_mix[size_t(k)];
    const double total = out.tag_probs[k];
    for (size_t i = 0; i < parts.size(); ++i) {
      const double w = weights[Index(i)] * parts[i]->tag_probs[k];
      if (w <= 0.0 && total > 0.0) continue;
      const double share = total > 0.0 ? w / total : weights[Index(i)];
      for (const auto& c : parts[i]->reward_mix[size_t(k)]) {
        auto it = std::find_if(mix.begin(), mix.end(),
                               [&](const GaussianComponent& g) { return g.mean == c.mean; });
        if (it == mix.end()) {
          mix.push_back({share * c.weight, c.mean});
        } else {
          it->weight += share * c.weight;
        }
      }
    }
    if (mix.size() == 1) mix[0].weight = 1.0;
  }
  return out;
}

std::string ToString(RiskMode mode) {
  switch (mode) {
    case RiskMode::kRewardMax: return "reward-max";
    case RiskMode::kExplicitRisk: return "explicit-risk";
    case RiskMode::kEstimation: return "estimation";
  }
  return "?";
}

RiskMode ParseRiskMode(const std::string& name) {
  if (name == "reward-max") return RiskMode::kRewardMax;
  if (name == "explicit-risk") return RiskMode::kExplicitRisk;
  if (name == "estimation") return RiskMode::kEstimation;
  throw InputError("unknown risk_mode '" + name + "'");
}

void DeriveRewardMaxRisk(const ObservationSpace& space, Model& model) {
  const Index m = static_cast<Index>(model.channel.size());
  if (model.value.size() == 0) {
    model.value.resize(m);
    for (Index i = 0; i < m; ++i) model.value[i] = MeanReward(space, model.channel[size_t(i)]);
  }
  const double best = model.value.maxCoeff();
  model.risk = (Vector::Constant(m, best) - model.value).cwiseMax(0.0);
  model.optimal_decision = 0;
  while (model.value[model.optimal_decision] != best) ++model.optimal_decision;
  model.risk[model.optimal_decision] = 0.0;
}

void ValidateClass(ModelClass& cls, double row_tol) {
  const Index m = cls.num_decisions();
  const Index tags = cls.num_tags();
  if (m == 0) throw InputError("class has no decisions");
  if (cls.models.empty()) throw InputError("class has no models");
  if (tags == 0) throw InputError("class has no observation tags");
  const bool draws = cls.observations.kind != ObservationKind::kFinite;
  if (!draws && cls.observations.reward.size() != tags) {
    throw InputError("reward map must have one entry per observation");
  }
  for (Index mi = 0; mi < cls.num_models(); ++mi) {
    Model& model = cls.models[size_t(mi)];
    const std::string where = "model '" + model.name + "'";
    if (static_cast<Index>(model.channel.size()) != m) {
      throw InputError(where + ": channel must have one entry per decision");
    }
    for (Index d = 0; d < m; ++d) {
      const Emission& e = model.channel[size_t(d)];
      const std::string row = where + " decision '" + cls.decisions[size_t(d)] + "'";
      if (e.tag_probs.size() != tags) throw InputError(row + ": wrong row length");
      if ((e.tag_probs.array() < 0.0).any() || !e.tag_probs.allFinite()) {
        throw InputError(row + ": negative or non-finite probability");
      }
      const double s = e.tag_probs.sum();
      if (std::abs(s - 1.0) > row_tol) {
        throw InputError(row + ": probability row sums to " + Num(s) +
                         " (row index " + std::to_string(d) + ")");
      }
      if (draws != e.has_reward_draw() ||
          (draws && static_cast<Index>(e.reward_mix.size()) != tags)) {
        throw InputError(row + ": emission does not match the observation space");
      }
    }
    if (cls.risk_mode == RiskMode::kRewardMax) {
      const Vector given = model.risk;
      if (model.value.size() != 0 && model.value.size() != m) {
        throw InputError(where + ": value must have one entry per decision");
      }
      DeriveRewardMaxRisk(cls.observations, model);
      if (given.size() != 0 &&
          (given.size() != m || (given - model.risk).cwiseAbs().maxCoeff() > 1e-9)) {
        throw InputError(where + ": risk disagrees with value under reward-max");
      }
    } else {
      if (model.risk.size() != m) {
        throw InputError(where + ": explicit risk needs one entry per decision");
      }
      if ((model.risk.array() < 0.0).any() || !model.risk.allFinite()) {
        throw InputError(where + ": risk must be finite and nonnegative");
      }
      model.optimal_decision = ArgMinLowest(model.risk);
    }
  }
  if (cls.risk_mode == RiskMode::kRewardMax) {
    const double measured = MeasuredLipschitz(cls);
    if (std::isfinite(cls.lipschitz_lr) && cls.lipschitz_lr < measured - 1e-9) {
      throw InputError("declared lipschitz_lr " + Num(cls.lipschitz_lr) +
                       " is below the measured " + Num(measured));
    }
    cls.lipschitz_lr = measured;
  }
}

double MeasuredLipschitz(const ModelClass& cls) {
  double lr = 0.0;
  for (Index a = 0; a < cls.num_models(); ++a) {
    for (Index b = a + 1; b < cls.num_models(); ++b) {
      const Model& ma = cls.models[size_t(a)];
      const Model& mb = cls.models[size_t(b)];
      for (Index d = 0; d < cls.num_decisions(); ++d) {
        const double gap = std::abs(ma.value[d] - mb.value[d]);
        if (gap <= 1e-12) continue;
        const double h = std::sqrt(EmissionDivergence(
            DivergenceKind::kSquaredHellinger, ma.channel[size_t(d)], mb.channel[size_t(d)]));
        if (h <= 0.0) return kInf;
        lr = std::max(lr, gap / h);
      }
    }
  }
  return lr;
}

KlWitness MaxKlToReference(const ModelClass& cls, const Model& reference) {
  KlWitness w;
  for (Index mi = 0; mi < cls.num_models(); ++mi) {
    for (Index d = 0; d < cls.num_decisions(); ++d) {
      const double kl = EmissionDivergence(DivergenceKind::kKL,
                                           cls.models[size_t(mi)].channel[size_t(d)],
                                           reference.channel[size_t(d)]);
      if (w.model < 0 || kl > w.value) w = {kl, mi, d};
    }
  }
  return w;
}

ReferenceModel ReferenceModelFor(const ModelClass& cls) {
  ReferenceModel ref;
  if (cls.reference) {
    ref = *cls.reference;
  } else {
    const Index tags = cls.num_tags();
    Emission e;
    switch (cls.observations.kind) {
      case ObservationKind::kFinite:
        e = FiniteEmission(Vector::Constant(tags, 1.0 / double(tags)));
        ref.c_kl = std::log(double(tags));
        break;
      case ObservationKind::kGaussian:
        e = GaussianEmission(0.0);
        ref.c_kl = 0.5;
        break;
      case ObservationKind::kContextGaussian:
        e.tag_probs = Vector::Constant(tags, 1.0 / double(tags));
        e.reward_mix.assign(size_t(tags), {GaussianComponent{1.0, 0.0}});
        ref.c_kl = std::log(double(tags)) + 1.0;
        break;
    }
    ref.model.name = "reference";
    ref.model.channel.assign(size_t(cls.num_decisions()), e);
    if (cls.risk_mode == RiskMode::kRewardMax) {
      DeriveRewardMaxRisk(cls.observations, ref.model);
    } else {
      ref.model.risk = Vector::Zero(cls.num_decisions());
    }
  }
  const KlWitness w = MaxKlToReference(cls, ref.model);
  if (w.value > ref.c_kl + 1e-9) {
    throw InputError("reference C_KL " + Num(ref.c_kl) + " violated by model '" +
                     cls.models[size_t(w.model)].name + "' at decision '" +
                     cls.decisions[size_t(w.decision)] + "': KL = " + Num(w.value));
  }
  return ref;
}

Model MixtureModel(const ModelClass& cls, const MixtureSpec& mix) {
  const FiniteDistribution w(mix.weights, 1e-9);
  if (w.size() != cls.num_models()) throw InputError("mixture weights: wrong size");
  Model out;
  std::ostringstream name;
  name << "mix[";
  std::vector<const Model*> parts;
  Vector pw(0);
  for (Index i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    if (!parts.empty()) name << " + ";
    name << Num(w[i]) << " " << cls.models[size_t(i)].name;
    parts.push_back(&cls.models[size_t(i)]);
    pw.conservativeResize(pw.size() + 1);
    pw[pw.size() - 1] = w[i];
  }
  name << "]";
  out.name = name.str();
  const Index m = cls.num_decisions();
  out.channel.resize(size_t(m));
  for (Index d = 0; d < m; ++d) {
    std::vector<const Emission*> es;
    for (const Model* p : parts) es.push_back(&p->channel[size_t(d)]);
    out.channel[size_t(d)] = MixEmissions(es, pw);
  }
  const bool have_values = std::all_of(parts.begin(), parts.end(),
                                       [&](const Model* p) { return p->value.size() == m; });
  if (have_values) {
    out.value = Vector::Zero(m);
    for (size_t i = 0; i < parts.size(); ++i) out.value += pw[Index(i)] * parts[i]->value;
  }
  if (cls.risk_mode == RiskMode::kRewardMax) {
    DeriveRewardMaxRisk(cls.observations, out);
  } else {
    out.risk = Vector::Zero(m);
    for (size_t i = 0; i < parts.size(); ++i) out.risk += pw[Index(i)] * parts[i]->risk;
    out.optimal_decision = ArgMinLowest(out.risk);
  }
  return out;
}

ModelClass BuildGaussianMab(const std::vector<Vector>& hypotheses) {
  if (hypotheses.empty() || hypotheses.front().size() == 0) {
    throw InputError("gaussian MAB: empty arm set");
  }
  const Index k = hypotheses.front().size();
  ModelClass cls;
  for (Index a = 0; a < k; ++a) cls.decisions.push_back("arm" + std::to_string(a + 1));
  cls.observations.kind = ObservationKind::kGaussian;
  cls.observations.tags = {"reward"};
  for (size_t h = 0; h < hypotheses.size(); ++h) {
    const Vector& means = hypotheses[h];
    if (means.size() != k) throw InputError("gaussian MAB: hypotheses differ in arm count");
    if ((means.array() < 0.0).any() || (means.array() > 1.0).any()) {
      throw InputError("gaussian MAB: mean outside [0, 1]");
    }
    Model model;
    model.name = "H" + std::to_string(h + 1);
    for (Index a = 0; a < k; ++a) model.channel.push_back(GaussianEmission(means[a]));
    model.value = means;
    cls.models.push_back(std::move(model));
  }
  ValidateClass(cls);
  ReferenceModel ref;
  ref.model.name = "reference";
  ref.model.channel.assign(size_t(k), GaussianEmission(0.0));
  DeriveRewardMaxRisk(cls.observations, ref.model);
  ref.c_kl = 0.5;
  cls.reference = ref;
  return cls;
}

ModelClass BuildLinearBandit(int d, const std::vector<Vector>& decisions,
                             const std::vector<Vector>& parameters) {
  if (d < 2) throw InputError("linear bandit: need d >= 2");
  if (decisions.empty() || parameters.empty()) throw InputError("linear bandit: empty grid");
  for (const auto* set : {&decisions, &parameters}) {
    for (const Vector& v : *set) {
      if (v.size() != d) throw InputError("linear bandit: grid point of wrong dimension");
      if (v.norm() > 1.0 + 1e-12) throw InputError("linear bandit: grid point outside the unit ball");
    }
  }
  ModelClass cls;
  for (size_t i = 0; i < decisions.size(); ++i) cls.decisions.push_back("x" + std::to_string(i));
  cls.observations.kind = ObservationKind::kGaussian;
  cls.observations.tags = {"reward"};
  for (size_t j = 0; j < parameters.size(); ++j) {
    Model model;
    model.name = "theta" + std::to_string(j);
    model.value.resize(Index(decisions.size()));
    for (size_t i = 0; i < decisions.size(); ++i) {
      const double mean = decisions[i].dot(parameters[j]);
      model.channel.push_back(GaussianEmission(mean));
      model.value[Index(i)] = mean;
    }
    cls.models.push_back(std::move(model));
  }
  ValidateClass(cls);
  return cls;
}

std::vector<Vector> CircleDirections(int n) {
  std::vector<Vector> out;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    Vector v(2);
    v << std::cos(t), std::sin(t);
    if (k == 0) v << 1.0, 0.0;
    out.push_back(v);
  }
  return out;
}

std::vector<Vector> LatticeDirections(int d, int k) {
  std::vector<Vector> out;
  std::vector<int> digits(static_cast<size_t>(d), -k);
  while (true) {
    int g = 0;
    for (int x : digits) g = std::gcd(g, std::abs(x));
    if (g == 1) {
      Vector v(d);
      for (int i = 0; i < d; ++i) v[i] = digits[size_t(i)];
      out.push_back(v.normalized());
    }
    int i = d - 1;
    while (i >= 0 && digits[size_t(i)] == k) digits[size_t(i--)] = -k;
    if (i < 0) break;
    ++digits[size_t(i)];
  }
  return out;
}

ModelClass BuildContextualBandit(const std::vector<Matrix>& value_class,
                                 const std::vector<Vector>& context_distributions,
                                 const ContextualOptions& options) {
  if (value_class.empty() || context_distributions.empty()) {
    throw InputError("contextual bandit: empty value class or context set");
  }
  const Index nc = value_class.front().rows(), na = value_class.front().cols();
  if (nc == 0 || na == 0) throw InputError("contextual bandit: no contexts or actions");
  for (const Matrix& h : value_class) {
    if (h.rows() != nc || h.cols() != na) throw InputError("contextual bandit: h tables differ in shape");
    if ((h.array() < 0.0).any() || (h.array() > 1.0).any()) {
      throw InputError("contextual bandit: h values must lie in [0, 1]");
    }
  }
  for (const Vector& nu : context_distributions) FiniteDistribution check(nu, 1e-9);

  double total = 1.0;
  for (Index c = 0; c < nc; ++c) total *= double(na);
  ContextualLayout layout;
  layout.num_contexts = nc;
  layout.num_actions = na;
  std::vector<std::vector<int>> policies;
  auto decode = [&](std::uint64_t code) {
    std::vector<int> p(static_cast<size_t>(nc));
    for (Index c = nc - 1; c >= 0; --c) {
      p[size_t(c)] = int(code % std::uint64_t(na));
      code /= std::uint64_t(na);
    }
    return p;
  };
  if (total <= double(options.policy_cap)) {
    for (std::uint64_t code = 0; code < std::uint64_t(total); ++code) policies.push_back(decode(code));
  } else if (options.sampled_policies > 0) {
    if (total > 9.0e15) throw InputError("contextual bandit: policy space too large to sample");
    layout.sampled = true;
    SeedStream stream(options.seed, 0, SeedStream::kSetup);
    std::vector<std::uint64_t> codes;
    while (Index(codes.size()) < options.sampled_policies) {
      const auto code = std::uint64_t(stream.NextUniform() * total);
      if (std::find(codes.begin(), codes.end(), code) == codes.end()) codes.push_back(code);
    }
    std::sort(codes.begin(), codes.end());
    for (auto code : codes) policies.push_back(decode(code));
  } else {
    throw InputError("contextual bandit: " + Num(total) + " policies exceed the cap of " +
                     std::to_string(options.policy_cap) + "; enable sampled-policy mode");
  }

  ModelClass cls;
  layout.policies.resize(Index(policies.size()), nc);
  for (size_t i = 0; i < policies.size(); ++i) {
    std::string name;
    for (Index c = 0; c < nc; ++c) {
      layout.policies(Index(i), c) = policies[i][size_t(c)];
      name += std::to_string(policies[i][size_t(c)]);
      if (na > 10 && c + 1 < nc) name += ".";
    }
    cls.decisions.push_back("pi" + name);
  }
  cls.observations.kind = ObservationKind::kContextGaussian;
  for (Index c = 0; c < nc; ++c) cls.observations.tags.push_back("c" + std::to_string(c));
  for (size_t h = 0; h < value_class.size(); ++h) {
    for (size_t j = 0; j < context_distributions.size(); ++j) {
      const Vector& nu = context_distributions[j];
      Model model;
      model.name = "h" + std::to_string(h) + "/nu" + std::to_string(j);
      model.value = Vector::Zero(Index(policies.size()));
      for (size_t i = 0; i < policies.size(); ++i) {
        Emission e;
        e.tag_probs = nu;
        for (Index c = 0; c < nc; ++c) {
          const double mean = value_class[h](c, policies[i][size_t(c)]);
          e.reward_mix.push_back({GaussianComponent{1.0, mean}});
          model.value[Index(i)] += nu[c] * mean;
        }
        model.channel.push_back(std::move(e));
      }
      cls.models.push_back(std::move(model));
    }
  }
  cls.contextual = layout;
  ValidateClass(cls);
  ReferenceModel ref;
  ref.model.name = "reference";
  Emission e;
  e.tag_probs = Vector::Constant(nc, 1.0 / double(nc));
  e.reward_mix.assign(size_t(nc), {GaussianComponent{1.0, 0.0}});
  ref.model.channel.assign(policies.size(), e);
  DeriveRewardMaxRisk(cls.observations, ref.model);
  ref.c_kl = std::log(double(nc)) + 1.0;
  cls.reference = ref;
  return cls;
}

ModelClass BuildInteractiveEstimation(const ModelClass& base, const std::vector<Index>& params,
                                      const Matrix& distance) {
  const Index np = distance.rows();
  if (np == 0 || distance.cols() != np) throw InputError("estimation: distance table must be square");
  if ((distance.array() < 0.0).any()) throw InputError("estimation: distance table has negative entries");
  if (distance.diagonal().cwiseAbs().maxCoeff() > 0.0) {
    throw InputError("estimation: distance table must vanish on the diagonal");
  }
  if (static_cast<Index>(params.size()) != base.num_models()) {
    throw InputError("estimation: need one parameter per model");
  }
  for (Index p : params) {
    if (p < 0 || p >= np) throw InputError("estimation: parameter index out of range");
  }
  ModelClass cls;
  cls.observations = base.observations;
  cls.risk_mode = RiskMode::kEstimation;
  for (const auto& d : base.decisions) {
    for (Index e = 0; e < np; ++e) cls.decisions.push_back(d + "|est" + std::to_string(e));
  }
  for (Index mi = 0; mi < base.num_models(); ++mi) {
    const Model& bm = base.models[size_t(mi)];
    Model model;
    model.name = bm.name;
    model.risk.resize(cls.num_decisions());
    for (Index d = 0; d < base.num_decisions(); ++d) {
      for (Index e = 0; e < np; ++e) {
        model.channel.push_back(bm.channel[size_t(d)]);
        model.risk[d * np + e] = distance(params[size_t(mi)], e);
      }
    }
    cls.models.push_back(std::move(model));
  }
  cls.estimation = EstimationLayout{base.num_decisions(), np, params, distance};
  ValidateClass(cls);
  return cls;
}

namespace {

ModelClass FiniteSkeleton(const std::vector<Matrix>& channels, const Vector& reward) {
  if (channels.empty()) throw InputError("class needs at least one model");
  const Index m = channels.front().rows(), no = channels.front().cols();
  ModelClass cls;
  for (Index d = 0; d < m; ++d) cls.decisions.push_back("a" + std::to_string(d));
  for (Index o = 0; o < no; ++o) cls.observations.tags.push_back("o" + std::to_string(o));
  cls.observations.reward = reward;
  for (size_t i = 0; i < channels.size(); ++i) {
    if (channels[i].rows() != m || channels[i].cols() != no) {
      throw InputError("channel matrices differ in shape");
    }
    Model model;
    model.name = "M" + std::to_string(i + 1);
    for (Index d = 0; d < m; ++d) model.channel.push_back(FiniteEmission(channels[i].row(d).transpose()));
    cls.models.push_back(std::move(model));
  }
  return cls;
}

}  // namespace

ModelClass BuildFiniteRewardClass(const Vector& reward, const std::vector<Matrix>& channels) {
  ModelClass cls = FiniteSkeleton(channels, reward);
  ValidateClass(cls);
  return cls;
}

ModelClass BuildExplicitRiskClass(const std::vector<Matrix>& channels,
                                  const std::vector<Vector>& risks) {
  if (channels.empty()) throw InputError("class needs at least one model");
  const Index no = channels.front().cols();
  Vector reward = no > 1 ? Vector(Vector::LinSpaced(no, 0.0, 1.0)) : Vector(Vector::Zero(no));
  ModelClass cls = FiniteSkeleton(channels, reward);
  if (risks.size() != channels.size()) throw InputError("need one risk table per model");
  cls.risk_mode = RiskMode::kExplicitRisk;
  for (size_t i = 0; i < risks.size(); ++i) cls.models[i].risk = risks[i];
  ValidateClass(cls);
  return cls;
}

ModelClass WorkedInstance() {
  Matrix m1(2, 2), m2(2, 2);
  m1 << 1, 0, 1, 0;
  m2 << 1, 0, 0, 1;
  Vector g1(2), g2(2);
  g1 << 0, 1;
  g2 << 1, 0;
  ModelClass cls = BuildExplicitRiskClass({m1, m2}, {g1, g2});
  cls.decisions = {"a", "b"};
  return cls;
}

}  // namespace decdim

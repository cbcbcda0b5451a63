#include "decdim/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "decdim/simulator.hpp"

namespace decdim {

using nlohmann::json;

std::string ToString(BoundKind kind) {
  switch (kind) {
    case BoundKind::kGeneral: return "general";
    case BoundKind::kFano: return "fano";
    case BoundKind::kFanoDmso: return "fano-dmso";
    case BoundKind::kMixMix: return "mixmix";
    case BoundKind::kQuantileHellinger: return "quantile-hellinger";
    case BoundKind::kDdimSample: return "ddim-sample";
    case BoundKind::kSandwich: return "sandwich";
  }
  return "?";
}

std::uint64_t Fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexDigest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string DigestOf(const json& inputs) { return HexDigest(Fnv1a64(inputs.dump())); }

namespace {

json VecJson(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json MatJson(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) rows.push_back(VecJson(m.row(r).transpose()));
  return rows;
}

// JSON has no infinity; keep it as a string so reports stay valid.
json Num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

double NumOf(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    return std::nan("");
  }
  return j.get<double>();
}

std::vector<double> DistinctLevels(const Matrix& m, bool positive_only) {
  std::set<double> s;
  for (Index i = 0; i < m.size(); ++i) {
    const double v = m.data()[i];
    if (!positive_only || v > 0.0) s.insert(v);
  }
  return {s.begin(), s.end()};
}

double FanoValue(double info, double mass, double level) {
  if (mass <= 0.0) return level;
  if (mass >= 1.0) return 0.0;
  return std::max(0.0, level * (1.0 + (info + std::log(2.0)) / std::log(mass)));
}

double LinearDeltaStar(int d, double threshold) {
  if (SphericalCap(d, 1.0) <= threshold) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (SphericalCap(d, mid) <= threshold ? lo : hi) = mid;
  }
  return lo;
}

struct LinearParts {
  double r, info, threshold, delta_star, small_norm, value;
};

LinearParts LinearFano(int d, double horizon, double c0, double c1) {
  LinearParts p{};
  p.r = std::min(c0 * d / std::sqrt(horizon), 1.0);
  p.info = LinearBanditMiBound(d, p.r, horizon);
  p.threshold = 0.25 * std::exp(-2.0 * p.info);
  p.delta_star = LinearDeltaStar(d, p.threshold);
  // theta ~ N(0, r^2/(4d) I) given ||theta|| <= r, so ||theta||^2 4d / r^2 ~ chi^2_d.
  p.small_norm = ChiSquareCdf(d, 4.0 * d * c1 * c1) / ChiSquareCdf(d, 4.0 * d);
  p.value = std::max(0.0, c1 * p.r * (0.5 * p.delta_star - 4.0 * p.small_norm));
  return p;
}

double QhValue(const json& w) {
  if (!w.contains("tail")) return 0.0;
  const double lhs = w["tail"].get<double>() - 3.0 * w["tail_std_err"].get<double>();
  const double rhs = w["delta"].get<double>() +
                     std::sqrt(14.0 * w["horizon"].get<double>() * w["expected_hellinger"].get<double>());
  return lhs > rhs ? w["level"].get<double>() : 0.0;
}

}  // namespace

json ToJson(const BoundReport& r) {
  return json{{"kind", ToString(r.kind)},
              {"value", Num(r.value)},
              {"witness", r.witness},
              {"inputs_digest", r.inputs_digest},
              {"notes", r.notes}};
}

// ------------------------------------------------------------ general

double RhoDeltaQ(const FiniteDistribution& prior, const Matrix& loss, const Vector& q,
                 double level) {
  double rho = 0.0;
  for (Index m = 0; m < loss.rows(); ++m) {
    for (Index x = 0; x < loss.cols(); ++x) {
      if (loss(m, x) < level) rho += prior[m] * q[x];
    }
  }
  return rho;
}

BoundReport GeneralLowerBound(const GeneralBoundInput& in) {
  const Index n = in.laws.rows(), nx = in.laws.cols();
  if (in.prior.size() != n || in.loss.rows() != n || in.loss.cols() != nx) {
    throw InputError("general bound: prior, laws and loss disagree in shape");
  }
  if (!(in.delta > 0.0 && in.delta < 1.0)) throw InputError("general bound: delta must lie in (0, 1)");
  std::vector<std::pair<std::string, Vector>> candidates;
  for (Index m = 0; m < n; ++m) candidates.push_back({"member " + std::to_string(m), in.laws.row(m).transpose()});
  candidates.push_back({"prior average", in.laws.transpose() * in.prior.weights()});
  for (size_t i = 0; i < in.extra_candidates.size(); ++i) {
    if (in.extra_candidates[i].size() != nx) throw InputError("general bound: candidate of wrong size");
    candidates.push_back({"extra " + std::to_string(i), in.extra_candidates[i]});
  }
  if (in.simplex_grid > 0) {
    const int g = in.simplex_grid;
    std::vector<int> counts(static_cast<size_t>(nx), 0);
    std::function<void(Index, int)> rec = [&](Index i, int left) {
      if (i == nx - 1) {
        counts[size_t(i)] = left;
        Vector q(nx);
        for (Index k = 0; k < nx; ++k) q[k] = double(counts[size_t(k)]) / g;
        candidates.push_back({"grid", q});
        return;
      }
      for (int c = 0; c <= left; ++c) {
        counts[size_t(i)] = c;
        rec(i + 1, left - c);
      }
    };
    rec(0, g);
  }
  std::vector<double> levels = DistinctLevels(in.loss, true);
  for (double v : in.delta_grid)
    if (v > 0.0) levels.push_back(v);
  std::sort(levels.begin(), levels.end());

  BoundReport rep;
  rep.kind = BoundKind::kGeneral;
  json inputs{{"prior", VecJson(in.prior.weights())}, {"laws", MatJson(in.laws)},
              {"loss", MatJson(in.loss)}, {"delta", in.delta}, {"kind", ToString(in.kind)},
              {"grid", in.simplex_grid}, {"delta_grid", in.delta_grid}};
  rep.inputs_digest = DigestOf(inputs);
  double best = 0.0;
  for (const auto& [label, q] : candidates) {
    double div = 0.0;
    for (Index m = 0; m < n; ++m) {
      if (in.prior[m] > 0.0) div += in.prior[m] * FDivergence(in.kind, in.laws.row(m).transpose(), q);
    }
    if (!std::isfinite(div)) continue;
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
      if (*it <= best) break;
      const double rho = RhoDeltaQ(in.prior, in.loss, q, *it);
      const double threshold = BernoulliQuantileDiv(in.kind, in.delta, rho);
      if (div < threshold) {
        best = *it;
        rep.witness = json{{"reference", label}, {"q", VecJson(q)}, {"level", *it},
                           {"rho", rho}, {"divergence", div}, {"delta", in.delta},
                           {"kind", ToString(in.kind)}};
        break;
      }
    }
  }
  rep.value = in.delta * best;
  if (best == 0.0) {
    rep.witness = json{{"delta", in.delta}, {"kind", ToString(in.kind)}};
    rep.notes.push_back("no qualifying (Q, Delta) pair among the candidates");
  }
  rep.notes.push_back("certified lower bound over the candidate set, possibly loose");
  return rep;
}

// ------------------------------------------------------------ Fano

BoundReport GeneralizedFanoFromInfo(const FiniteDistribution& prior, const Matrix& loss,
                                    double info, double level) {
  if (loss.rows() != prior.size()) throw InputError("Fano: prior and loss disagree on models");
  double mass = 0.0;
  Index arg = 0;
  for (Index x = 0; x < loss.cols(); ++x) {
    double s = 0.0;
    for (Index m = 0; m < loss.rows(); ++m)
      if (loss(m, x) < level) s += prior[m];
    if (s > mass) {
      mass = s;
      arg = x;
    }
  }
  BoundReport rep;
  rep.kind = BoundKind::kFano;
  rep.value = FanoValue(info, mass, level);
  rep.witness = json{{"info", info}, {"mass", mass}, {"outcome", arg}, {"level", level}};
  rep.inputs_digest = DigestOf(json{{"prior", VecJson(prior.weights())}, {"loss", MatJson(loss)},
                                    {"info", info}, {"level", level}});
  if (mass <= 0.0) rep.notes.push_back("degenerate: no outcome has positive near-correct mass");
  if (mass >= 1.0) rep.notes.push_back("degenerate: one outcome is near-correct for every model");
  return rep;
}

BoundReport GeneralizedFano(const FiniteDistribution& prior, const Matrix& channel,
                            const Matrix& loss, double level) {
  if (channel.cols() != loss.cols()) throw InputError("Fano: channel and loss disagree on outcomes");
  return GeneralizedFanoFromInfo(prior, loss, MutualInformation(prior, channel), level);
}

double SupNearOptimalMass(const FiniteDistribution& prior, const Matrix& risk, double level) {
  double best = 0.0;
  for (Index d = 0; d < risk.cols(); ++d) {
    double s = 0.0;
    for (Index m = 0; m < risk.rows(); ++m)
      if (risk(m, d) <= level + 1e-12) s += prior[m];
    best = std::max(best, s);
  }
  return best;
}

BoundReport FanoDmsoFinite(const ModelClass& cls, const FiniteDistribution& prior, double info_cap) {
  if (prior.size() != cls.num_models()) throw InputError("Fano: prior has the wrong size");
  if (!(info_cap >= 0.0)) throw InputError("Fano: information cap must be >= 0");
  Matrix risk(cls.num_models(), cls.num_decisions());
  for (Index m = 0; m < cls.num_models(); ++m) risk.row(m) = cls.models[size_t(m)].risk.transpose();
  const double threshold = 0.25 * std::exp(-2.0 * info_cap);
  std::vector<double> levels = DistinctLevels(risk, false);
  if (levels.front() > 0.0) levels.insert(levels.begin(), 0.0);
  // The mass is a right-continuous step function of the level, so the
  // qualifying set is an interval ending at the next level up.
  double sup = 0.0;
  double mass_below = 0.0;
  for (size_t k = 0; k + 1 < levels.size(); ++k) {
    const double mass = SupNearOptimalMass(prior, risk, levels[k]);
    if (mass > threshold) break;
    sup = levels[k + 1];
    mass_below = mass;
  }
  BoundReport rep;
  rep.kind = BoundKind::kFanoDmso;
  rep.value = 0.5 * sup;
  rep.witness = json{{"mode", "finite"}, {"info", info_cap}, {"threshold", threshold},
                     {"level", sup}, {"mass", mass_below}};
  rep.inputs_digest = DigestOf(json{{"prior", VecJson(prior.weights())}, {"risk", MatJson(risk)},
                                    {"info", info_cap}});
  if (sup == 0.0) rep.notes.push_back("no level qualifies");
  return rep;
}

double SphericalCapDensity(int d, double t) {
  if (d < 2) throw InputError("spherical cap needs d >= 2");
  const double c = std::exp(std::lgamma(d / 2.0) - std::lgamma((d - 1) / 2.0)) / std::sqrt(M_PI);
  return c * std::pow(std::max(0.0, 1.0 - t * t), (d - 3) / 2.0);
}

double SphericalCap(int d, double level) {
  if (d < 2) throw InputError("spherical cap needs d >= 2");
  if (level <= 0.0) return 0.0;
  level = std::min(level, 1.0);
  // t = cos(phi) turns the integral into int_0^a sin^{d-2}(phi) dphi.
  const double a = std::acos(std::sqrt(1.0 - level));
  const int n = d - 2;
  double even = a, odd = 1.0 - std::cos(a);
  double integral = n % 2 == 0 ? even : odd;
  for (int k = (n % 2 == 0 ? 2 : 3); k <= n; k += 2) {
    double& prev = k % 2 == 0 ? even : odd;
    prev = -std::pow(std::sin(a), k - 1) * std::cos(a) / k + double(k - 1) / k * prev;
    integral = prev;
  }
  const double c = std::exp(std::lgamma(d / 2.0) - std::lgamma((d - 1) / 2.0)) / std::sqrt(M_PI);
  return c * integral;
}

double ChiSquareCdf(double k, double x) {
  if (x <= 0.0) return 0.0;
  const double s = 0.5 * k, z = 0.5 * x;
  double term = 1.0 / s, sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= z / (s + n);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::min(1.0, std::exp(s * std::log(z) - z - std::lgamma(s)) * sum);
}

BoundReport FanoDmsoLinear(int d, double horizon, const LinearFanoOptions& options) {
  if (d < 2) throw InputError("linear Fano bound needs d >= 2");
  if (!(horizon >= 1.0)) throw InputError("linear Fano bound needs T >= 1");
  const LinearParts p = LinearFano(d, horizon, options.c0, options.norm_floor);
  BoundReport rep;
  rep.kind = BoundKind::kFanoDmso;
  rep.value = p.value;
  rep.witness = json{{"mode", "linear"}, {"d", d}, {"horizon", horizon}, {"c0", options.c0},
                     {"c1", options.norm_floor}, {"r", p.r}, {"info", p.info},
                     {"threshold", p.threshold}, {"level", p.delta_star},
                     {"small_norm_prob", p.small_norm}};
  rep.inputs_digest = DigestOf(json{{"d", d}, {"T", horizon}, {"c0", options.c0}, {"c1", options.norm_floor}});
  return rep;
}

// ------------------------------------------------------------ mixtures

BoundReport MixVsMix(const MixMixInput& in) {
  if (in.theta0.size() != size_t(in.nu0.size()) || in.theta1.size() != size_t(in.nu1.size())) {
    throw InputError("mixture bound: weights and parameter sets differ in size");
  }
  const FiniteDistribution nu0(in.nu0), nu1(in.nu1);
  BoundReport rep;
  rep.kind = BoundKind::kMixMix;
  rep.inputs_digest = DigestOf(json{{"theta0", in.theta0}, {"theta1", in.theta1},
                                    {"nu0", VecJson(in.nu0)}, {"nu1", VecJson(in.nu1)},
                                    {"loss", MatJson(in.loss)}, {"laws", MatJson(in.laws)},
                                    {"level", in.level}});
  for (Index a = 0; a < in.loss.cols(); ++a) {
    for (Index t0 : in.theta0) {
      for (Index t1 : in.theta1) {
        const double s = in.loss(t0, a) + in.loss(t1, a);
        if (s < 2.0 * in.level - 1e-12) {
          rep.value = 0.0;
          rep.witness = json{{"separated", false}, {"action", a}, {"theta0", t0},
                             {"theta1", t1}, {"loss_sum", s}, {"level", in.level}};
          rep.notes.push_back("separation condition fails");
          return rep;
        }
      }
    }
  }
  Vector m0 = Vector::Zero(in.laws.cols()), m1 = Vector::Zero(in.laws.cols());
  for (size_t i = 0; i < in.theta0.size(); ++i) m0 += nu0[Index(i)] * in.laws.row(in.theta0[i]).transpose();
  for (size_t i = 0; i < in.theta1.size(); ++i) m1 += nu1[Index(i)] * in.laws.row(in.theta1[i]).transpose();
  const double tv = FDivergence(DivergenceKind::kTV, m0, m1);
  rep.witness = json{{"separated", true}, {"tv", tv}, {"level", in.level}};
  if (tv > 0.5 + 1e-12) {
    rep.value = 0.0;
    rep.notes.push_back("mixtures too far apart: total variation above 1/2");
  } else {
    rep.value = in.level / 4.0;
  }
  return rep;
}

// ------------------------------------------------------------ quantile Hellinger

std::size_t RequiredMonteCarlo(double delta) {
  return std::size_t(std::ceil((3.0 / delta) * (3.0 / delta) - 1e-9));
}

BoundReport QuantileHellingerFromOccupancy(const ModelClass& cls, const Model& reference,
                                           const OccupancyLaws& occ, int horizon, double delta) {
  const Index m = cls.num_decisions();
  if (occ.q.size() != m || occ.p.size() != m) throw InputError("quantile bound: occupancy of wrong size");
  BoundReport rep;
  rep.kind = BoundKind::kQuantileHellinger;
  rep.witness = json{{"delta", delta}, {"horizon", horizon}, {"reference", reference.name}};
  double best = 0.0;
  for (Index k = 0; k < cls.num_models(); ++k) {
    const Model& model = cls.models[size_t(k)];
    double expected = 0.0;
    for (Index d = 0; d < m; ++d) {
      if (occ.q[d] > 0.0) {
        expected += occ.q[d] * EmissionDivergence(DivergenceKind::kSquaredHellinger,
                                                  model.channel[size_t(d)], reference.channel[size_t(d)]);
      }
    }
    const double budget = std::sqrt(14.0 * horizon * expected);
    std::set<double> levels(model.risk.data(), model.risk.data() + m);
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
      const double level = *it;
      if (level <= best) break;
      double tail = 0.0;
      for (Index d = 0; d < m; ++d)
        if (model.risk[d] >= level) tail += occ.p[d];
      const double se = occ.n > 1 ? std::sqrt(tail * (1.0 - tail) / double(occ.n - 1)) : 0.0;
      if (tail - 3.0 * se > delta + budget) {
        best = level;
        rep.witness = json{{"delta", delta}, {"horizon", horizon}, {"reference", reference.name},
                           {"model", k}, {"model_name", model.name}, {"level", level},
                           {"tail", tail}, {"tail_std_err", se},
                           {"expected_hellinger", expected}, {"n_mc", occ.n}};
        break;
      }
    }
  }
  rep.value = best;
  return rep;
}

BoundReport QuantileHellingerBound(const QuantileHellingerInput& in) {
  if (in.cls == nullptr) throw InputError("quantile bound: no class");
  if (!(in.delta > 0.0 && in.delta < 1.0)) throw InputError("quantile bound: delta must lie in (0, 1)");
  const std::size_t need = RequiredMonteCarlo(in.delta);
  if (in.n_mc < need) {
    throw InputError("quantile bound: n_mc = " + std::to_string(in.n_mc) +
                     " is too small for delta; need at least " + std::to_string(need));
  }
  if (in.references.empty()) throw InputError("quantile bound: no reference candidates");
  BoundReport best;
  best.kind = BoundKind::kQuantileHellinger;
  bool first = true;
  for (size_t i = 0; i < in.references.size(); ++i) {
    const OccupancyEstimate est = EstimateOccupancy(*in.cls, in.references[i], in.factory, in.horizon,
                                                    in.n_mc, TaskSeed(in.seed, i), in.threads);
    OccupancyLaws occ{est.q_hat.weights(), est.p_hat.weights(), est.q_std_err, est.p_std_err, in.n_mc};
    BoundReport rep = QuantileHellingerFromOccupancy(*in.cls, in.references[i], occ, in.horizon, in.delta);
    if (first || rep.value > best.value) {
      best = rep;
      first = false;
    }
  }
  best.inputs_digest = DigestOf(json{{"horizon", in.horizon}, {"delta", in.delta},
                                     {"n_mc", in.n_mc}, {"seed", in.seed},
                                     {"references", in.references.size()}});
  best.notes.push_back("Monte Carlo occupancy; tail probability reduced by 3 standard errors");
  return best;
}

// ------------------------------------------------------------ decision dimension

BoundReport DdimSampleLower(const ModelClass& cls, double level) {
  if (!(level > 0.0)) throw InputError("decision dimension bound: Delta must be positive");
  const ReferenceModel ref = ReferenceModelFor(cls);
  const DecReport ddim = DecisionDimension(cls, 2.0 * level);
  BoundReport rep;
  rep.kind = BoundKind::kDdimSample;
  rep.witness = json{{"level", level}, {"ddim", Num(ddim.value)}, {"c_kl", ref.c_kl},
                     {"reference", ref.model.name}};
  if (!std::isfinite(ddim.value)) {
    rep.value = kInf;
    rep.notes.push_back("unlearnable: decision dimension is infinite");
  } else {
    rep.value = std::max(0.0, (std::log(ddim.value) - 2.0) / (2.0 * ref.c_kl));
  }
  rep.inputs_digest = DigestOf(json{{"class", cls.num_models()}, {"level", level},
                                    {"ddim", Num(ddim.value)}, {"c_kl", ref.c_kl}});
  return rep;
}

BoundReport SandwichReport(const ModelClass& cls, double level, const SandwichOptions& options) {
  if (!(level > 0.0)) throw InputError("sandwich: Delta must be positive");
  const std::vector<Model> refs = HullReferences(cls, options.hull);
  const ModelClass hull = HullProxyClass(cls, options.hull);
  const double tdec_class = Tdec(cls, cls.models, level, options.tol).value;
  const double tdec_hull = Tdec(hull, refs, level, options.tol).value;
  const BoundReport sample = DdimSampleLower(cls, level);
  const ReferenceModel ref = ReferenceModelFor(cls);
  const double ddim = DecisionDimension(cls, level).value;
  const double ddim_half = DecisionDimension(cls, level / 2.0).value;
  const double log_ddim_half = std::max(1.0, std::log(ddim_half));
  const double log_models = std::max(1.0, std::log(double(cls.num_models())));
  BoundReport rep;
  rep.kind = BoundKind::kSandwich;
  rep.value = std::max(tdec_class, sample.value);
  const double upper = tdec_hull * log_ddim_half;
  const double upper_alt = tdec_class * log_models;
  rep.witness = json{{"level", level},
                     {"tdec_class", Num(tdec_class)},
                     {"tdec_hull", Num(tdec_hull)},
                     {"ddim_sample_lower", Num(sample.value)},
                     {"ddim", Num(ddim)},
                     {"ddim_half", Num(ddim_half)},
                     {"log_ddim_over_c_kl", Num(std::log(ddim) / ref.c_kl)},
                     {"c_kl", ref.c_kl},
                     {"lower", Num(rep.value)},
                     {"upper", Num(upper)},
                     {"upper_log_models", Num(upper_alt)},
                     {"log_ddim_half", log_ddim_half},
                     {"log_models", log_models},
                     {"upper_not_above_alternative", upper <= upper_alt}};
  rep.inputs_digest = DigestOf(json{{"models", cls.num_models()}, {"decisions", cls.num_decisions()},
                                    {"level", level}, {"tol", options.tol},
                                    {"sparsity", options.hull.sparsity},
                                    {"denominator", options.hull.denominator}});
  rep.notes.push_back("lower side uses member references; hull quantities use a mixture grid");
  return rep;
}

// ------------------------------------------------------------ recompute

double RecomputeBound(const BoundReport& r) {
  const json& w = r.witness;
  switch (r.kind) {
    case BoundKind::kGeneral: {
      if (!w.contains("level")) return 0.0;
      const double delta = w["delta"].get<double>();
      const double threshold = BernoulliQuantileDiv(ParseDivergenceKind(w["kind"].get<std::string>()),
                                                    delta, w["rho"].get<double>());
      return w["divergence"].get<double>() < threshold ? delta * w["level"].get<double>() : 0.0;
    }
    case BoundKind::kFano:
      return FanoValue(w["info"].get<double>(), w["mass"].get<double>(), w["level"].get<double>());
    case BoundKind::kFanoDmso: {
      if (w["mode"] == "finite") {
        return w["mass"].get<double>() <= w["threshold"].get<double>() ? 0.5 * w["level"].get<double>() : 0.0;
      }
      return LinearFano(w["d"].get<int>(), w["horizon"].get<double>(), w["c0"].get<double>(),
                        w["c1"].get<double>()).value;
    }
    case BoundKind::kMixMix:
      if (!w["separated"].get<bool>()) return 0.0;
      return w["tv"].get<double>() <= 0.5 + 1e-12 ? w["level"].get<double>() / 4.0 : 0.0;
    case BoundKind::kQuantileHellinger:
      return QhValue(w);
    case BoundKind::kDdimSample: {
      const double ddim = NumOf(w["ddim"]);
      if (!std::isfinite(ddim)) return kInf;
      return std::max(0.0, (std::log(ddim) - 2.0) / (2.0 * w["c_kl"].get<double>()));
    }
    case BoundKind::kSandwich:
      return std::max(NumOf(w["tdec_class"]), NumOf(w["ddim_sample_lower"]));
  }
  return 0.0;
}

}  // namespace decdim

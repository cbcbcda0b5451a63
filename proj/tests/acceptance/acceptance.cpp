#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "decdim/algorithms.hpp"
#include "decdim/bounds.hpp"
#include "decdim/class_io.hpp"
#include "decdim/cli.hpp"
#include "decdim/complexity.hpp"
#include "decdim/simulator.hpp"
#include "inequalities.hpp"

using namespace decdim;
using namespace decdim::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fixture(const std::string& name) { return std::string(DECDIM_FIXTURE_DIR) + "/" + name; }

std::string Format(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string Format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

std::vector<Vector> Arms(int k) {
  std::vector<Vector> hyps;
  for (int i = 0; i < k; ++i) hyps.push_back(Vector::Unit(k, i));
  return hyps;
}

double BinomialSigma(double p, std::size_t n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / double(n)); }

Outcome ExactDecisionDimension() {
  double worst = 0.0;
  for (int k = 2; k <= 10; ++k) {
    for (double delta : {0.1, 0.5, 0.99}) {
      worst = std::max(worst, std::abs(DecisionDimension(BuildGaussianMab(Arms(k)), delta).value - k));
    }
  }
  return {worst <= 1e-9, Format("K = 2..10, max |Ddim - K| = %.3g", worst)};
}

Outcome WorkedClosedForms() {
  const ModelClass cls = WorkedInstance();
  const Model& ref = cls.models[0];
  double offset_err = 0.0, constrained_err = 0.0, tdec_err = 0.0;
  for (double gamma : {0.5, 1.0, 2.0, 4.0}) {
    const DecReport r = OffsetRdec(cls, ref, gamma);
    offset_err = std::max(offset_err, std::abs(r.value - 1.0 / (2.0 + gamma)) + r.certificate);
  }
  for (double eps = 0.05; eps * eps <= 0.5; eps += 0.05) {
    constrained_err = std::max(constrained_err, std::abs(ConstrainedRdec(cls, ref, eps).value - eps * eps));
  }
  for (double delta : {0.05, 0.1, 0.2, 0.3, 0.4}) {
    const double t = Tdec(cls, cls.models, delta, 1e-6).value;
    tdec_err = std::max(tdec_err, std::abs(t - 1.0 / delta) * delta);
  }
  const bool pass = offset_err <= 1e-6 && constrained_err <= 1e-3 && tdec_err <= 1e-3;
  return {pass, Format("offset err %.2g, constrained err %.2g, T^DEC rel err %.2g", offset_err,
                       constrained_err, tdec_err)};
}

Outcome InequalitySuites() {
  std::mt19937_64 rng(2024);
  int checks = 0;
  int violations[6] = {0, 0, 0, 0, 0, 0};
  const char* names[6] = {"lagrangian", "quantile-recovery", "estimation", "conversion", "d_f monotone",
                          "diff-mean"};
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = 2 + Index(rng() % 3), o = 2 + Index(rng() % 2), m = 2 + Index(rng() % 4);
    const ModelClass cls = RandomFiniteClass(rng, d, o, m);
    for (const Model& ref : cls.models) {
      const DecTables t = MakeTables(cls, ref);
      for (double eps : {0.05, 0.1, 0.2, 0.4}) {
        violations[0] += LagrangianGap(t, eps) > 1e-9;
        violations[1] += QuantileRecoveryGap(t, eps, 0.5) > 1e-9;
        violations[3] += ConversionGap(cls, ref, eps) > 1e-9;
        checks += 3;
      }
    }
    const ModelClass est = RandomEstimationClass(rng, 1 + Index(rng() % 2), 2 + Index(rng() % 2),
                                                 2 + Index(rng() % 3));
    for (const Model& ref : est.models) {
      const DecTables t = MakeTables(est, ref);
      for (double eps : {0.05, 0.1, 0.2, 0.4}) {
        for (double delta : {0.1, 0.25, 0.4}) {
          violations[2] += EstimationGap(t, eps, delta) > 1e-9;
          ++checks;
        }
      }
    }
    for (DivergenceKind kind : {DivergenceKind::kKL, DivergenceKind::kSquaredHellinger, DivergenceKind::kTV}) {
      violations[4] += QuantileMonotonicityGap(rng, kind) > 1e-12;
      ++checks;
    }
    violations[5] += MeanDifferenceGap(rng, 2 + Index(rng() % 4)) > 1e-9;
    ++checks;
  }
  std::string detail = Format("%d checks on 200 classes;", checks);
  int total = 0;
  for (int i = 0; i < 6; ++i) {
    detail += Format(" %s %d", names[i], violations[i]);
    total += violations[i];
  }
  return {total == 0, detail};
}

Outcome HellingerChain() {
  std::mt19937_64 rng(99);
  int failures = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const Index o1 = 2 + Index(rng() % 2), o2 = 2 + Index(rng() % 2);
    const Kernels a = {RandomChannel(rng, 1, o1, 0.2), RandomChannel(rng, o1, o2, 0.2)};
    const Kernels b = {RandomChannel(rng, 1, o1, 0.2), RandomChannel(rng, o1, o2, 0.2)};
    const ChainCheck c = HellingerChainCheck(a, b);
    failures += !c.holds;
    if (c.rhs > 0.0) worst = std::max(worst, c.lhs / c.rhs);
  }
  return {failures == 0, Format("500 two-step instances, %d violations, max lhs/rhs = %.3f", failures, worst)};
}

Outcome ReductionBound() {
  const ModelClass cls = BuildGaussianMab(Arms(10));
  const double delta_opt = 0.1, delta = 0.1;
  const int T = 20000;
  const DecReport ddim = DecisionDimension(cls, delta_opt);
  const Index n = ReductionDrawCount(ddim.value, delta);
  const double bound = T * delta_opt + 10.0 * std::sqrt(T * double(n) * std::log(T / delta));
  AlgorithmFactory factory = [&] { return std::make_unique<Reduction>(cls, delta_opt, delta, T); };
  double worst_mean = 0.0;
  const std::vector<std::uint64_t> seeds = SeedList(5, 50);
  for (Index m : {Index(0), Index(4), Index(9)}) {
    const McSummary mc = MonteCarlo(cls, cls.models[size_t(m)], factory, T, seeds);
    worst_mean = std::max(worst_mean, mc.regret.mean);
  }
  const std::size_t trials = 2000;
  const std::vector<std::uint64_t> cover_seeds = SeedList(6, trials);
  double worst_rate = 0.0;
  std::vector<int> misses(size_t(cls.num_models()), 0);
  for (std::uint64_t s : cover_seeds) {
    const ReductionPlan plan = ReductionPrepare(ddim, delta, s);
    for (Index m = 0; m < cls.num_models(); ++m) misses[size_t(m)] += !ReductionCovers(plan, cls.models[size_t(m)], delta_opt);
  }
  for (int miss : misses) worst_rate = std::max(worst_rate, double(miss) / trials);
  const double allowed = delta + 2.576 * BinomialSigma(delta, trials);
  const bool pass = worst_mean <= bound && worst_rate <= allowed;
  return {pass, Format("N = %ld, mean regret %.1f <= %.1f; coverage failure %.4f <= %.4f", long(n), worst_mean,
                       bound, worst_rate, allowed)};
}

// Per-round FTRL slack for one comparator, from the logged ell rows.
double MinFtrlSlack(const Vector& prior, const Vector& comparator, const std::vector<Vector>& rows) {
  const double kl = FDivergence(DivergenceKind::kKL, comparator, prior);
  if (!std::isfinite(kl)) return kInf;
  Vector q = prior;
  double sum = 0.0, worst = kInf;
  for (const Vector& ell : rows) {
    const double top = ell.maxCoeff();
    sum += comparator.dot(ell) - (top + std::log((q.array() * (ell.array() - top).exp()).sum()));
    q = ExoUpdate(q, ell);
    worst = std::min(worst, kl - sum);
  }
  const double final_slack = FtrlInequalityCheck(prior, comparator, rows).slack;
  if (std::abs(final_slack - (kl - sum)) > 1e-9) return -kInf;
  return worst;
}

Outcome ExoPlusBound() {
  const ModelClass cls = LoadClass(Fixture("exo_tiny.json"));
  const double delta_opt = 0.1, delta = 0.1;
  const int T = 2000;
  const DecReport ddim = DecisionDimension(cls, delta_opt);
  const double log_term = std::log(ddim.value) + std::log(1.0 / delta);
  const std::vector<Model> refs = HullReferences(cls);
  const ModelClass hull = HullProxyClass(cls);
  double gamma = 1.0, best = kInf, best_offset = 0.0;
  for (double g = 1.0; g <= 1024.0; g *= 2.0) {
    const DecReport off = SupOverReferences(refs, [&](const Model& r) { return OffsetRdec(hull, r, g / 8.0); });
    const double obj = off.value + g * log_term / T;
    if (obj < best) {
      best = obj;
      gamma = g;
      best_offset = off.value;
    }
  }
  const double eps_bar = std::sqrt(log_term / T);
  std::vector<double> grid{eps_bar};
  for (int i = 0; std::ldexp(1.0, -i) >= eps_bar / 2.0; ++i) grid.push_back(std::ldexp(1.0, -i));
  const DecReport lin = LinConstrainedRdec(hull, refs, eps_bar, grid);
  const double bound = delta_opt + 20.0 * lin.value;

  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::uint64_t> seeds = SeedList(8, 50);
  std::vector<double> per_model_sum(size_t(cls.num_models()), 0.0);
  std::vector<int> per_model_n(size_t(cls.num_models()), 0);
  double min_slack = kInf, worst_gap = -kInf;
  for (size_t i = 0; i < seeds.size(); ++i) {
    const Index m = Index(i) % cls.num_models();
    ExoPlus alg(cls, gamma, ddim.achieving_p.weights());
    const Trace tr = RunEpisode(cls, cls.models[size_t(m)], alg, T, seeds[i]);
    per_model_sum[size_t(m)] += tr.cumulative_regret / T;
    ++per_model_n[size_t(m)];
    std::vector<Vector> rows;
    for (const ExoRoundLog& log : alg.log()) {
      rows.push_back(log.ell_row);
      worst_gap = std::max(worst_gap, log.value - log.zero_ell_value);
    }
    for (Index pi = 0; pi < cls.num_decisions(); ++pi) {
      min_slack = std::min(min_slack, MinFtrlSlack(alg.prior(), Vector::Unit(cls.num_decisions(), pi), rows));
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  double worst = 0.0;
  for (size_t m = 0; m < per_model_sum.size(); ++m) worst = std::max(worst, per_model_sum[m] / per_model_n[m]);
  const bool pass = worst <= bound && min_slack >= -1e-9 && worst_gap <= 1e-12;
  return {pass, Format("gamma %g (offset %.3f), eps_bar %.4f, lin %.4f: regret/T %.4f <= %.4f; "
                       "min FTRL slack %.3g; solver value - zero-ell value <= %.2g; %.0f s",
                       gamma, best_offset, eps_bar, lin.value, worst, bound, min_slack, worst_gap, seconds)};
}

Outcome LowerBoundConsistency() {
  const std::vector<std::string> fixtures = {"worked_2x2.json", "lecam.json", "exo_tiny.json"};
  const std::vector<std::string> algs = {"ucb", "uniform", "fixed", "reduction", "exoplus"};
  const int T = 4;
  const std::size_t runs = 400;
  int positive = 0, failures = 0, total = 0;
  double worst_margin = kInf;
  for (const std::string& f : fixtures) {
    const ModelClass cls = LoadClass(Fixture(f));
    for (const std::string& name : algs) {
      cli::AlgorithmParams p;
      p.name = name;
      p.horizon = T;
      p.gamma = 4.0;
      const AlgorithmFactory factory = cli::MakeFactory(cls, p);
      QuantileHellingerInput in;
      in.cls = &cls;
      in.factory = factory;
      in.horizon = T;
      in.delta = 0.5;
      in.references = cls.models;
      in.n_mc = runs;
      in.seed = 21;
      const BoundReport rep = QuantileHellingerBound(in);
      ++total;
      if (rep.value <= 0.0) continue;
      ++positive;
      const Index m = rep.witness["model"].get<Index>();
      const McSummary mc = MonteCarlo(cls, cls.models[size_t(m)], factory, T, SeedList(22, runs));
      std::size_t hits = 0;
      for (const SeedResult& s : mc.per_seed) hits += s.risk >= rep.value - 1e-12;
      const double phat = double(hits) / runs;
      const double margin = phat - (0.25 - 3.0 * BinomialSigma(phat, runs));
      worst_margin = std::min(worst_margin, margin);
      failures += margin < 0.0;
    }
  }
  return {failures == 0, Format("%d fixture/algorithm pairs, %d with positive bound, %d failures, "
                                "min margin %.3f", total, positive, failures, worst_margin)};
}

Outcome FanoScaling() {
  double lo = kInf, hi = 0.0;
  for (int d : {2, 3, 4}) {
    for (double T : {64.0, 256.0, 1024.0}) {
      const double ratio = FanoDmsoLinear(d, T).value / std::min(d / std::sqrt(T), 1.0);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  const double c = std::sqrt(lo * hi);
  double cap_err = 0.0;
  for (int d = 3; d <= 6; ++d) {
    for (double level : {0.1, 0.25, 0.5, 0.75}) {
      const double q = Simpson([&](double t) { return SphericalCapDensity(d, t); }, std::sqrt(1.0 - level), 1.0);
      cap_err = std::max(cap_err, std::abs(SphericalCap(d, level) - q));
    }
  }
  const bool pass = lo > 0.0 && hi <= 2.0 * c && lo >= c / 2.0 && cap_err <= 1e-6;
  return {pass, Format("c = %.3g, ratios in [%.3g, %.3g] (spread %.2f <= 4); cap vs quadrature %.2g", c, lo, hi,
                       hi / lo, cap_err)};
}

Outcome ContextualCoverage() {
  const Index contexts = 8;
  std::vector<Matrix> hs;
  for (Index x = 0; x < contexts; ++x) {
    Matrix h(contexts, 2);
    h.col(0).setConstant(0.5);
    h.col(1).setZero();
    h(x, 1) = 1.0;
    hs.push_back(h);
  }
  std::vector<Vector> nus;
  for (Index c = 0; c < contexts; ++c) nus.push_back(Vector::Unit(contexts, c));
  nus.push_back(Vector::Constant(contexts, 1.0 / contexts));
  std::mt19937_64 rng(77);
  for (int i = 0; i < 11; ++i) nus.push_back(RandomSimplex(rng, contexts, 0.3));
  const ModelClass cls = BuildContextualBandit(hs, nus);
  const Eigen::MatrixXi& pol = cls.contextual->policies;
  std::string detail;
  bool pass = true;
  for (double delta : {0.1, 0.2, 0.5}) {
    Vector p(pol.rows());
    for (Index i = 0; i < pol.rows(); ++i) {
      double w = 1.0;
      for (Index c = 0; c < contexts; ++c) w *= pol(i, c) == 1 ? delta : 1.0 - delta;
      p[i] = w;
    }
    double coverage = kInf;
    for (size_t x = 0; x < hs.size(); ++x) {
      for (const Vector& nu : nus) {
        double mass = 0.0;
        for (Index i = 0; i < pol.rows(); ++i) {
          double gap = 0.0;
          for (Index c = 0; c < contexts; ++c) {
            gap += nu[c] * (hs[x].row(c).maxCoeff() - hs[x](c, pol(i, c)));
          }
          if (gap <= delta + 1e-12) mass += p[i];
        }
        coverage = std::min(coverage, mass);
      }
    }
    const double ddim = DecisionDimension(cls, delta).value;
    const bool ok = 1.0 / coverage <= 2.0 / delta + 1e-9 && ddim <= 2.0 / delta + 1e-9;
    pass = pass && ok;
    detail += Format("Delta %.1f: 1/coverage %.3f, Ddim %.3f <= %.1f; ", delta, 1.0 / coverage, ddim, 2.0 / delta);
  }
  detail += Format("%ld policies, %ld models", long(pol.rows()), long(cls.num_models()));
  return {pass, detail};
}

std::string RunCliCapture(std::vector<std::string> args, int* code) {
  args.insert(args.begin(), "decdim_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  *code = cli::Run(int(argv.size()), argv.data(), out, err);
  return out.str();
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome CliDeterminism() {
  const std::vector<std::vector<std::string>> commands = {
      {"ddim", "--class", Fixture("mab10.json"), "--delta", "0.1"},
      {"ddim", "--class", Fixture("exo_tiny.json"), "--delta", "0.1", "--format", "json"},
      {"dec", "--class", Fixture("worked_2x2.json"), "--kind", "constrained-r", "--eps", "0.3"},
      {"dec", "--class", Fixture("exo_tiny.json"), "--kind", "exo", "--gamma", "4", "--format", "json"},
      {"bound", "--kind", "mixmix", "--class", Fixture("lecam.json"), "--delta", "0.5"},
      {"bound", "--kind", "fano-linear", "--d", "3", "--T", "256", "--format", "json"},
      {"bound", "--kind", "quantile-hellinger", "--class", Fixture("exo_tiny.json"), "--alg", "ucb", "--T", "6",
       "--mc", "60", "--master-seed", "4"},
      {"bound", "--kind", "sandwich", "--class", Fixture("worked_2x2.json"), "--delta", "0.2"},
      {"simulate", "--class", Fixture("mab10.json"), "--T", "500", "--seeds", "2", "--master-seed", "17"},
      {"simulate", "--class", Fixture("exo_tiny.json"), "--alg", "exoplus", "--T", "50", "--seeds", "2",
       "--format", "json"},
      {"sweep", "--class", Fixture("worked_2x2.json"), "--grid", "0.05:0.5:0.05"},
  };
  const auto dir = std::filesystem::temp_directory_path() / "decdim_acceptance_cli";
  std::filesystem::remove_all(dir);
  int mismatches = 0, errors = 0, files = 0;
  for (size_t i = 0; i < commands.size(); ++i) {
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      std::vector<std::string> cmd = commands[i];
      const auto out_dir = dir / (std::to_string(i) + "_" + std::to_string(rep));
      cmd.push_back("--out");
      cmd.push_back(out_dir.string());
      int code = 0;
      RunCliCapture(cmd, &code);
      errors += code != 0;
      const std::string ext = std::find(cmd.begin(), cmd.end(), "json") != cmd.end() ? "json" : "csv";
      const std::string bytes = Slurp(out_dir / (cmd[0] + "." + ext));
      if (rep == 0) {
        first = bytes;
        ++files;
      } else {
        mismatches += bytes != first || bytes.empty();
      }
    }
  }
  std::filesystem::remove_all(dir);
  return {mismatches == 0 && errors == 0,
          Format("%d commands rerun, %d byte mismatches, %d nonzero exits", files, mismatches, errors)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"exact decision dimension", ExactDecisionDimension},
      {"worked-instance closed forms", WorkedClosedForms},
      {"inequality suites", InequalitySuites},
      {"Hellinger chain rule", HellingerChain},
      {"reduction statistical bound", ReductionBound},
      {"ExO+ at tiny scale", ExoPlusBound},
      {"lower-bound consistency", LowerBoundConsistency},
      {"Fano linear-bandit scaling", FanoScaling},
      {"contextual coverage", ContextualCoverage},
      {"CLI determinism", CliDeterminism},
  };
  int only = 0;
  if (argc == 3 && std::strcmp(argv[1], "--only") == 0) only = std::atoi(argv[2]);
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && only != int(i + 1)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

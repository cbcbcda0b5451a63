#include "decdim/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "decdim/bounds.hpp"
#include "decdim/class_io.hpp"
#include "decdim/complexity.hpp"
#include "decdim/simulator.hpp"

namespace decdim::cli {

using nlohmann::json;

AlgorithmFactory MakeFactory(const ModelClass& cls, const AlgorithmParams& p) {
  const Index m = cls.num_decisions();
  const int T = p.horizon;
  if (T < 1) throw InputError("algorithm: T must be >= 1");
  if (p.name == "uniform") return [m] { return std::make_unique<UniformRandom>(m); };
  if (p.name == "fixed") {
    if (p.fixed_decision < 0 || p.fixed_decision >= m) throw InputError("fixed: decision out of range");
    const Index d = p.fixed_decision;
    return [d] { return std::make_unique<FixedDecision>(d); };
  }
  if (p.name == "ucb") {
    std::vector<Index> arms(static_cast<size_t>(m));
    for (Index i = 0; i < m; ++i) arms[size_t(i)] = i;
    return [arms, T] { return std::make_unique<Ucb>(arms, T); };
  }
  if (p.name == "reduction") {
    if (!(p.delta_opt > 0.0)) throw InputError("reduction: Delta must be positive");
    if (!(p.confidence > 0.0 && p.confidence < 1.0)) throw InputError("reduction: delta must lie in (0, 1)");
    auto shared = std::make_shared<const ModelClass>(cls);
    const double d_opt = p.delta_opt, conf = p.confidence;
    return [shared, d_opt, conf, T] { return std::make_unique<Reduction>(*shared, d_opt, conf, T); };
  }
  if (p.name == "exoplus") {
    if (!(p.gamma > 0.0)) throw InputError("exoplus: gamma must be positive");
    const DecReport ddim = DecisionDimension(cls, p.delta_opt);
    if (!std::isfinite(ddim.value)) throw InputError("exoplus: decision dimension is infinite at Delta");
    auto shared = std::make_shared<const ModelClass>(cls);
    const Vector prior = ddim.achieving_p.weights();
    const double gamma = p.gamma;
    return [shared, gamma, prior] { return std::make_unique<ExoPlus>(*shared, gamma, prior); };
  }
  throw InputError("unknown algorithm '" + p.name + "'");
}

namespace {

std::string Fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json JNum(double v) {
  if (std::isfinite(v)) return v;
  return Fmt(v);
}

struct Options {
  std::string class_path;
  double delta = 0.1;
  double eps = 0.1;
  double gamma = 1.0;
  double quantile = 0.5;
  int horizon = 100;
  std::size_t seeds = 10;
  std::uint64_t master_seed = 0;
  std::string grid;
  std::string out;
  std::string format = "csv";
  std::size_t mc = 400;
  double tol = 1e-6;
  std::string kind;
  std::string alg = "ucb";
  Index model = 0;
  Index decision = 0;
  double info = 0.0;
  int dim = 2;
  double c0 = 0.125;
  std::vector<Index> theta0{0};
  std::vector<Index> theta1{1};
  std::string reference = "members";
  int sparsity = 2;
  unsigned threads = 0;
};

struct Output {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  json details = json::array();
  int code = kOk;
  std::string message;  // goes to stderr
};

std::vector<double> ParseGrid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0) || hi < lo) {
      throw InputError("grid: expected lo:hi:step, got '" + text + "'");
    }
    const long n = std::lround(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) grid.push_back(lo + double(i) * step);
  } else {
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      try {
        size_t used = 0;
        grid.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw InputError("grid: bad value '" + tok + "'");
      }
    }
  }
  if (grid.empty()) throw InputError("grid: empty");
  return grid;
}

std::string FileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<Model> References(const ModelClass& cls, const Options& o) {
  if (o.reference == "members") return cls.models;
  if (o.reference == "hull") {
    HullOptions h;
    h.sparsity = o.sparsity;
    return HullReferences(cls, h);
  }
  throw InputError("reference: expected members or hull");
}

json DecJson(const DecReport& r) {
  json j{{"kind", ToString(r.kind)},
         {"value", JNum(r.value)},
         {"params", r.params},
         {"achieving_p", std::vector<double>(r.achieving_p.weights().data(),
                                             r.achieving_p.weights().data() + r.achieving_p.size())},
         {"witness", r.witness_name},
         {"reference", r.reference},
         {"certificate", JNum(r.certificate)},
         {"certificate_kind", r.certificate_kind},
         {"lower_certified", r.lower_certified},
         {"converged", r.converged},
         {"notes", r.notes}};
  if (r.achieving_q) {
    const Vector& q = r.achieving_q->weights();
    j["achieving_q"] = std::vector<double>(q.data(), q.data() + q.size());
  }
  return j;
}

void Validate(const Options& o) {
  if (!(o.delta > 0.0)) throw InputError("--delta must be positive");
  if (!(o.eps > 0.0)) throw InputError("--eps must be positive");
  if (!(o.gamma > 0.0)) throw InputError("--gamma must be positive");
  if (!(o.quantile > 0.0 && o.quantile < 1.0)) throw InputError("--quantile must lie in (0, 1)");
  if (o.horizon < 1) throw InputError("--T must be >= 1");
  if (o.seeds < 1) throw InputError("--seeds must be >= 1");
  if (!(o.tol > 0.0)) throw InputError("--tol must be positive");
  if (o.format != "csv" && o.format != "json") throw InputError("--format must be csv or json");
}

Output CmdDdim(const ModelClass& cls, const Options& o) {
  Output out;
  out.columns = {"measure", "delta", "value", "certificate"};
  const DecReport r = DecisionDimension(cls, o.delta);
  out.rows.push_back({"ddim", Fmt(o.delta), Fmt(r.value), Fmt(r.certificate)});
  out.details.push_back(DecJson(r));
  if (!std::isfinite(r.value)) {
    out.code = kInfinite;
    out.message = "unlearnable at Delta = " + Fmt(o.delta) + ": model '" + r.witness_name +
                  "' has no Delta-optimal decision";
  }
  return out;
}

DecReport RunDec(const ModelClass& cls, const Options& o, const std::string& kind) {
  const std::vector<Model> refs = References(cls, o);
  if (kind == "offset") {
    return SupOverReferences(refs, [&](const Model& ref) { return OffsetRdec(cls, ref, o.gamma); });
  }
  if (kind == "constrained-r") {
    return SupOverReferences(refs, [&](const Model& ref) { return ConstrainedRdec(cls, ref, o.eps); });
  }
  if (kind == "constrained-p") {
    return SupOverReferences(refs, [&](const Model& ref) { return ConstrainedPdec(cls, ref, o.eps); });
  }
  if (kind == "quantile-r") {
    return SupOverReferences(refs, [&](const Model& ref) { return QuantileRdec(cls, ref, o.eps, o.quantile); });
  }
  if (kind == "quantile-p") {
    return SupOverReferences(refs, [&](const Model& ref) { return QuantilePdec(cls, ref, o.eps, o.quantile); });
  }
  if (kind == "lin") {
    std::vector<double> grid = o.grid.empty() ? std::vector<double>{} : ParseGrid(o.grid);
    if (grid.empty()) {
      for (int i = 0; i <= 10; ++i) grid.push_back(std::ldexp(1.0, -i));
    }
    grid.push_back(o.eps);
    return LinConstrainedRdec(cls, refs, o.eps, grid);
  }
  if (kind == "tdec") return Tdec(cls, refs, o.delta, o.tol);
  if (kind == "exo") {
    return ExoValue(cls, FiniteDistribution::Uniform(cls.num_decisions()).weights(), o.gamma);
  }
  throw InputError("dec: unknown --kind '" + kind + "'");
}

Output CmdDec(const ModelClass& cls, const Options& o) {
  const std::string kind = o.kind.empty() ? "constrained-r" : o.kind;
  const DecReport r = RunDec(cls, o, kind);
  Output out;
  out.columns = {"measure", "kind", "gamma", "eps", "quantile", "delta", "value", "witness",
                 "certificate_kind", "lower_certified"};
  out.rows.push_back({"dec", kind, Fmt(o.gamma), Fmt(o.eps), Fmt(o.quantile), Fmt(o.delta),
                      Fmt(r.value), r.witness_name, r.certificate_kind,
                      r.lower_certified ? "1" : "0"});
  out.details.push_back(DecJson(r));
  if (!r.converged) {
    out.code = kBudget;
    out.message = "solver budget exhausted; value is flagged";
  }
  return out;
}

AlgorithmParams AlgParams(const Options& o) {
  AlgorithmParams p;
  p.name = o.alg;
  p.horizon = o.horizon;
  p.fixed_decision = o.decision;
  p.delta_opt = o.delta;
  p.confidence = o.quantile;
  p.gamma = o.gamma;
  return p;
}

Output CmdBound(const ModelClass* cls, const Options& o) {
  const std::string kind = o.kind.empty() ? "ddim-sample" : o.kind;
  auto need = [&]() -> const ModelClass& {
    if (cls == nullptr) throw InputError("bound " + kind + " needs --class");
    return *cls;
  };
  BoundReport r;
  if (kind == "fano-linear") {
    LinearFanoOptions lo;
    lo.c0 = o.c0;
    r = FanoDmsoLinear(o.dim, o.horizon, lo);
  } else if (kind == "fano-dmso") {
    const ModelClass& c = need();
    r = FanoDmsoFinite(c, FiniteDistribution::Uniform(c.num_models()), o.info);
  } else if (kind == "mixmix") {
    const ModelClass& c = need();
    if (!c.is_finite()) throw InputError("mixmix needs a finite observation space");
    if (o.decision < 0 || o.decision >= c.num_decisions()) throw InputError("--decision out of range");
    MixMixInput in;
    in.theta0 = o.theta0;
    in.theta1 = o.theta1;
    for (Index t : o.theta0)
      if (t < 0 || t >= c.num_models()) throw InputError("--theta0 out of range");
    for (Index t : o.theta1)
      if (t < 0 || t >= c.num_models()) throw InputError("--theta1 out of range");
    in.nu0 = Vector::Constant(Index(in.theta0.size()), 1.0 / double(in.theta0.size()));
    in.nu1 = Vector::Constant(Index(in.theta1.size()), 1.0 / double(in.theta1.size()));
    in.loss.resize(c.num_models(), c.num_decisions());
    in.laws.resize(c.num_models(), c.num_tags());
    for (Index m = 0; m < c.num_models(); ++m) {
      in.loss.row(m) = c.models[size_t(m)].risk.transpose();
      in.laws.row(m) = c.models[size_t(m)].channel[size_t(o.decision)].tag_probs.transpose();
    }
    in.level = o.delta;
    r = MixVsMix(in);
  } else if (kind == "quantile-hellinger") {
    const ModelClass& c = need();
    QuantileHellingerInput in;
    in.cls = &c;
    in.factory = MakeFactory(c, AlgParams(o));
    in.horizon = o.horizon;
    in.delta = o.quantile;
    in.references = References(c, o);
    in.n_mc = o.mc;
    in.seed = o.master_seed;
    in.threads = o.threads;
    r = QuantileHellingerBound(in);
  } else if (kind == "ddim-sample") {
    r = DdimSampleLower(need(), o.delta);
  } else if (kind == "sandwich") {
    SandwichOptions so;
    so.hull.sparsity = o.sparsity;
    so.tol = o.tol;
    r = SandwichReport(need(), o.delta, so);
  } else {
    throw InputError("bound: unknown --kind '" + kind + "'");
  }
  Output out;
  out.columns = {"measure", "kind", "delta", "quantile", "value", "inputs_digest"};
  out.rows.push_back({"bound", kind, Fmt(o.delta), Fmt(o.quantile), Fmt(r.value), r.inputs_digest});
  out.details.push_back(ToJson(r));
  if (std::isinf(r.value)) {
    out.code = kInfinite;
    out.message = "unlearnable: " + r.witness.dump();
  }
  return out;
}

Output CmdSimulate(const ModelClass& cls, const Options& o) {
  if (o.model < 0 || o.model >= cls.num_models()) throw InputError("--model out of range");
  const AlgorithmFactory factory = MakeFactory(cls, AlgParams(o));
  const std::vector<std::uint64_t> seeds = SeedList(o.master_seed, o.seeds);
  const McSummary mc = MonteCarlo(cls, cls.models[size_t(o.model)], factory, o.horizon, seeds, o.threads);
  std::map<std::uint64_t, std::size_t> index;
  for (std::size_t i = 0; i < seeds.size(); ++i) index[seeds[i]] = i;
  Output out;
  out.columns = {"seed_index", "seed", "regret", "risk", "final_decision"};
  std::vector<SeedResult> ordered = mc.per_seed;
  std::sort(ordered.begin(), ordered.end(),
            [&](const SeedResult& a, const SeedResult& b) { return index[a.seed] < index[b.seed]; });
  for (const SeedResult& s : ordered) {
    out.rows.push_back({std::to_string(index[s.seed]), std::to_string(s.seed), Fmt(s.regret),
                        Fmt(s.risk), std::to_string(s.final_decision)});
  }
  auto sj = [](const Summary& s) {
    return json{{"mean", s.mean}, {"std_err", s.std_err}, {"ci_low", s.ci_low},
                {"ci_high", s.ci_high}, {"median", s.median}, {"q90", s.q90}};
  };
  out.details.push_back(json{{"algorithm", o.alg}, {"environment", cls.models[size_t(o.model)].name},
                             {"T", o.horizon}, {"n", mc.n}, {"regret", sj(mc.regret)},
                             {"risk", sj(mc.risk)}});
  return out;
}

Output CmdSweep(const ModelClass& cls, const Options& o) {
  const std::vector<double> grid = ParseGrid(o.grid.empty() ? "0.05:0.5:0.05" : o.grid);
  Output out;
  out.columns = {"delta", "tdec", "tdec_hull", "ddim", "ddim_half", "ddim_sample_lower",
                 "log_ddim_over_c_kl", "lower", "upper", "upper_log_models", "upper_not_above_alternative"};
  SandwichOptions so;
  so.hull.sparsity = o.sparsity;
  so.tol = o.tol;
  for (double delta : grid) {
    if (!(delta > 0.0)) throw InputError("sweep: grid values must be positive");
  }
  for (double delta : grid) {
    const BoundReport r = SandwichReport(cls, delta, so);
    const json& w = r.witness;
    auto col = [&](const char* key) {
      const json& v = w[key];
      return v.is_string() ? v.get<std::string>() : Fmt(v.get<double>());
    };
    out.rows.push_back({Fmt(delta), col("tdec_class"), col("tdec_hull"), col("ddim"), col("ddim_half"),
                        col("ddim_sample_lower"), col("log_ddim_over_c_kl"), col("lower"), col("upper"),
                        col("upper_log_models"), w["upper_not_above_alternative"].get<bool>() ? "1" : "0"});
    out.details.push_back(ToJson(r));
    if (w["ddim"].is_string() && out.code == kOk) {
      out.code = kInfinite;
      out.message = "decision dimension is infinite at Delta = " + Fmt(delta);
    }
  }
  return out;
}

json ConfigJson(const std::string& command, const Options& o, const std::string& class_digest) {
  return json{{"command", command}, {"class_digest", class_digest}, {"delta", o.delta},
              {"eps", o.eps}, {"gamma", o.gamma}, {"quantile", o.quantile}, {"T", o.horizon},
              {"seeds", o.seeds}, {"master_seed", o.master_seed}, {"grid", o.grid},
              {"format", o.format}, {"mc", o.mc}, {"tol", o.tol}, {"kind", o.kind},
              {"alg", o.alg}, {"model", o.model}, {"decision", o.decision}, {"info", o.info},
              {"d", o.dim}, {"c0", o.c0}, {"theta0", o.theta0}, {"theta1", o.theta1},
              {"reference", o.reference}, {"sparsity", o.sparsity}, {"version", kVersion}};
}

void Emit(std::ostream& os, const std::string& command, const Output& res, const std::string& digest,
          const std::string& format) {
  if (format == "json") {
    json rows = json::array();
    for (const auto& row : res.rows) {
      json r = json::object();
      for (size_t i = 0; i < row.size(); ++i) r[res.columns[i]] = row[i];
      rows.push_back(r);
    }
    json doc{{"tool", "decdim"}, {"version", kVersion}, {"config_digest", digest},
             {"command", command}, {"exit_code", res.code}, {"rows", rows},
             {"details", res.details}};
    os << doc.dump(2) << "\n";
    return;
  }
  for (const auto& c : res.columns) os << c << ",";
  os << "version,config_digest\n";
  for (const auto& row : res.rows) {
    for (const auto& cell : row) os << cell << ",";
    os << kVersion << "," << digest << "\n";
  }
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decision dimension and DEC toolkit"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML/INI file with one section per subcommand");
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub, bool class_required) {
    auto* c = sub->add_option("--class", o.class_path, "model class JSON");
    if (class_required) c->required();
    sub->add_option("--out", o.out, "output directory (default: stdout)");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", o.threads, "worker threads (0: hardware)");
  };
  auto* ddim = app.add_subcommand("ddim", "decision dimension");
  common(ddim, true);
  ddim->add_option("--delta", o.delta, "near-optimality level")->required();

  auto* dec = app.add_subcommand("dec", "DEC values");
  common(dec, true);
  dec->add_option("--kind", o.kind,
                  "offset | constrained-r | constrained-p | quantile-r | quantile-p | lin | tdec | exo");
  dec->add_option("--gamma", o.gamma);
  dec->add_option("--eps", o.eps);
  dec->add_option("--quantile", o.quantile);
  dec->add_option("--delta", o.delta);
  dec->add_option("--grid", o.grid, "epsilon grid for lin");
  dec->add_option("--tol", o.tol);
  dec->add_option("--reference", o.reference, "members or hull");
  dec->add_option("--sparsity", o.sparsity);

  auto* bound = app.add_subcommand("bound", "lower bounds and the sandwich report");
  common(bound, false);
  bound->add_option("--kind", o.kind,
                    "fano-dmso | fano-linear | mixmix | quantile-hellinger | ddim-sample | sandwich");
  bound->add_option("--delta", o.delta);
  bound->add_option("--quantile", o.quantile);
  bound->add_option("--T", o.horizon);
  bound->add_option("--info", o.info, "mutual information cap for fano-dmso");
  bound->add_option("--d", o.dim, "dimension for fano-linear");
  bound->add_option("--c0", o.c0, "prior radius constant for fano-linear");
  bound->add_option("--theta0", o.theta0)->delimiter(',');
  bound->add_option("--theta1", o.theta1)->delimiter(',');
  bound->add_option("--decision", o.decision, "decision whose laws mixmix compares");
  bound->add_option("--alg", o.alg);
  bound->add_option("--gamma", o.gamma);
  bound->add_option("--mc", o.mc);
  bound->add_option("--master-seed", o.master_seed);
  bound->add_option("--reference", o.reference);
  bound->add_option("--sparsity", o.sparsity);
  bound->add_option("--tol", o.tol);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo regret and risk");
  common(sim, true);
  sim->add_option("--alg", o.alg, "ucb | uniform | fixed | reduction | exoplus");
  sim->add_option("--T", o.horizon);
  sim->add_option("--seeds", o.seeds);
  sim->add_option("--master-seed", o.master_seed);
  sim->add_option("--model", o.model, "environment model index");
  sim->add_option("--decision", o.decision, "decision for the fixed algorithm");
  sim->add_option("--delta", o.delta);
  sim->add_option("--quantile", o.quantile, "failure probability for reduction");
  sim->add_option("--gamma", o.gamma);

  auto* sweep = app.add_subcommand("sweep", "sandwich table over a Delta grid");
  common(sweep, true);
  sweep->add_option("--grid", o.grid, "lo:hi:step or a comma list");
  sweep->add_option("--tol", o.tol);
  sweep->add_option("--sparsity", o.sparsity);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Validate(o);
    std::string class_digest = "none";
    std::optional<ModelClass> cls;
    if (!o.class_path.empty()) {
      class_digest = HexDigest(Fnv1a64(FileBytes(o.class_path)));
      cls = LoadClass(o.class_path);
    }
    const std::string digest = DigestOf(ConfigJson(command, o, class_digest));
    Output res;
    if (command == "ddim") res = CmdDdim(*cls, o);
    else if (command == "dec") res = CmdDec(*cls, o);
    else if (command == "bound") res = CmdBound(cls ? &*cls : nullptr, o);
    else if (command == "simulate") res = CmdSimulate(*cls, o);
    else res = CmdSweep(*cls, o);
    if (o.out.empty()) {
      Emit(out, command, res, digest, o.format);
    } else {
      std::filesystem::create_directories(o.out);
      const auto path = std::filesystem::path(o.out) / (command + "." + o.format);
      std::ofstream f(path, std::ios::binary);
      if (!f) throw InputError("cannot write '" + path.string() + "'");
      Emit(f, command, res, digest, o.format);
      out << path.string() << "\n";
    }
    if (!res.message.empty()) err << res.message << "\n";
    return res.code;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace decdim::cli

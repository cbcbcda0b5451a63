#include "decdim/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <iomanip>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "decdim/rng.hpp"

namespace decdim {

Index EmpiricalBest(const std::vector<RoundRecord>& rounds, Index num_decisions) {
  std::vector<double> sums(static_cast<size_t>(num_decisions), 0.0);
  std::vector<int> counts(static_cast<size_t>(num_decisions), 0);
  for (const RoundRecord& r : rounds) {
    sums[size_t(r.decision)] += r.observation.reward;
    ++counts[size_t(r.decision)];
  }
  Index best = -1;
  double best_mean = -kInf;
  for (Index d = 0; d < num_decisions; ++d) {
    if (counts[size_t(d)] == 0) continue;
    const double mean = sums[size_t(d)] / counts[size_t(d)];
    if (mean > best_mean) {
      best = d;
      best_mean = mean;
    }
  }
  return best < 0 ? 0 : best;
}

Trace RunEpisode(const ModelClass& cls, const Model& environment, Algorithm& algorithm, int T,
                 std::uint64_t seed) {
  if (T < 0) throw InputError("T must be nonnegative");
  const Index m = cls.num_decisions();
  Trace trace;
  trace.rounds.reserve(static_cast<size_t>(T));
  algorithm.Reset(seed);
  double cumulative = 0.0;
  for (int t = 1; t <= T; ++t) {
    const Index d = algorithm.Select(t);
    if (d < 0 || d >= m) {
      throw SimulationError("round " + std::to_string(t) + ": " + algorithm.Name() +
                            " chose decision " + std::to_string(d) + " out of range");
    }
    SeedStream stream(seed, std::uint64_t(t), SeedStream::kEnvironment);
    RoundRecord rec;
    rec.t = t;
    rec.decision = d;
    rec.observation = SampleObservation(cls.observations, environment.channel[size_t(d)], stream);
    rec.instant_regret = environment.risk[d];
    cumulative += rec.instant_regret;
    rec.cumulative_regret = cumulative;
    algorithm.Observe(t, d, rec.observation);
    trace.rounds.push_back(rec);
  }
  trace.cumulative_regret = cumulative;
  if (const auto out = algorithm.Output()) {
    trace.final_decision = *out;
    trace.explicit_output = true;
  } else {
    trace.final_decision = EmpiricalBest(trace.rounds, m);
  }
  trace.risk = environment.risk[trace.final_decision];
  return trace;
}

namespace {

std::string FormatObservation(const ModelClass& cls, const Observation& o) {
  std::ostringstream s;
  s << std::setprecision(17);
  switch (cls.observations.kind) {
    case ObservationKind::kFinite: s << cls.observations.tags[size_t(o.tag)]; break;
    case ObservationKind::kGaussian: s << o.reward; break;
    case ObservationKind::kContextGaussian:
      s << cls.observations.tags[size_t(o.tag)] << ':' << o.reward;
      break;
  }
  return s.str();
}

}  // namespace

void WriteTraceCsv(std::ostream& out, const ModelClass& cls, const Trace& trace) {
  out << "t,decision,observation,instant_regret,cumulative_regret\n";
  out << std::setprecision(17);
  for (const RoundRecord& r : trace.rounds) {
    out << r.t << ',' << cls.decisions[size_t(r.decision)] << ','
        << FormatObservation(cls, r.observation) << ',' << r.instant_regret << ','
        << r.cumulative_regret << '\n';
  }
}

Summary Summarize(std::vector<double> values) {
  Summary s;
  const size_t n = values.size();
  if (n == 0) return s;
  // Centered on the first value so constant samples have exactly zero spread.
  double shifted = 0.0;
  for (double v : values) shifted += v - values.front();
  s.mean = values.front() + shifted / double(n);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std_err = n > 1 ? std::sqrt(ss / double(n - 1) / double(n)) : 0.0;
  s.ci_low = s.mean - 1.96 * s.std_err;
  s.ci_high = s.mean + 1.96 * s.std_err;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double a) {
    const double pos = a * double(n - 1);
    const size_t lo = size_t(std::floor(pos));
    const size_t hi = std::min(n - 1, lo + 1);
    return values[lo] + (pos - double(lo)) * (values[hi] - values[lo]);
  };
  s.median = quantile(0.5);
  s.q90 = quantile(0.9);
  return s;
}

namespace {

unsigned WorkerCount(unsigned threads, size_t count) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return unsigned(std::min<size_t>(threads, count));
}

// fn(i, worker); each worker index is used by one thread only.
template <typename Fn>
void ParallelFor(size_t count, unsigned threads, Fn fn) {
  threads = WorkerCount(threads, count);
  if (threads <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i, 0u);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (size_t i = next++; i < count; i = next++) {
        try {
          fn(i, w);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

McSummary MonteCarlo(const ModelClass& cls, const Model& environment,
                     const AlgorithmFactory& factory, int T,
                     const std::vector<std::uint64_t>& seeds, unsigned threads) {
  if (seeds.empty()) throw InputError("Monte Carlo needs at least one seed");
  std::vector<SeedResult> results(seeds.size());
  // One algorithm per worker; RunEpisode resets it for every seed.
  std::vector<std::unique_ptr<Algorithm>> algs(std::max(1u, WorkerCount(threads, seeds.size())));
  ParallelFor(seeds.size(), threads, [&](size_t i, unsigned w) {
    if (!algs[w]) algs[w] = factory();
    const Trace tr = RunEpisode(cls, environment, *algs[w], T, seeds[i]);
    results[i] = SeedResult{seeds[i], tr.cumulative_regret, tr.risk, tr.final_decision};
  });
  std::stable_sort(results.begin(), results.end(),
                   [](const SeedResult& a, const SeedResult& b) { return a.seed < b.seed; });
  McSummary out;
  out.n = results.size();
  std::vector<double> regrets, risks;
  for (const SeedResult& r : results) {
    regrets.push_back(r.regret);
    risks.push_back(r.risk);
  }
  out.regret = Summarize(regrets);
  out.risk = Summarize(risks);
  out.per_seed = std::move(results);
  return out;
}

std::vector<std::uint64_t> SeedList(std::uint64_t master, std::size_t count) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < count; ++i) seeds.push_back(TaskSeed(master, i));
  return seeds;
}

OccupancyEstimate EstimateOccupancy(const ModelClass& cls, const Model& reference,
                                    const AlgorithmFactory& factory, int T, std::size_t n_mc,
                                    std::uint64_t seed, unsigned threads) {
  if (n_mc < 1) throw InputError("occupancy estimate needs n_mc >= 1");
  if (T < 1) throw InputError("occupancy estimate needs T >= 1");
  const Index m = cls.num_decisions();
  Matrix profile(m, Index(n_mc));
  std::vector<Index> outputs(n_mc);
  std::vector<std::unique_ptr<Algorithm>> algs(std::max(1u, WorkerCount(threads, n_mc)));
  ParallelFor(n_mc, threads, [&](size_t i, unsigned w) {
    if (!algs[w]) algs[w] = factory();
    const Trace tr = RunEpisode(cls, reference, *algs[w], T, TaskSeed(seed, i));
    Vector counts = Vector::Zero(m);
    for (const RoundRecord& r : tr.rounds) counts[r.decision] += 1.0;
    profile.col(Index(i)) = counts / double(T);
    outputs[i] = tr.final_decision;
  });
  const double n = double(n_mc);
  OccupancyEstimate est;
  est.n_mc = n_mc;
  const Vector q_mean = profile.rowwise().sum() / n;
  Vector p_mean = Vector::Zero(m);
  for (Index d : outputs) p_mean[d] += 1.0 / n;
  est.q_std_err = Vector::Zero(m);
  est.p_std_err = Vector::Zero(m);
  if (n_mc > 1) {
    for (Index d = 0; d < m; ++d) {
      const double var = (profile.row(d).array() - q_mean[d]).square().sum() / (n - 1.0);
      est.q_std_err[d] = std::sqrt(var / n);
      est.p_std_err[d] = std::sqrt(p_mean[d] * (1.0 - p_mean[d]) / (n - 1.0));
    }
  }
  est.q_hat = FiniteDistribution::Normalized(q_mean);
  est.p_hat = FiniteDistribution::Normalized(p_mean);
  return est;
}

ChainCheck HellingerChainCheck(const Kernels& p, const Kernels& q) {
  if (p.empty() || p.size() != q.size()) throw InputError("chain check: kernel count mismatch");
  if (p.size() > 3) throw InputError("chain check supports at most 3 steps");
  Index rows = 1;
  for (size_t t = 0; t < p.size(); ++t) {
    if (p[t].rows() != rows || q[t].rows() != rows || p[t].cols() != q[t].cols()) {
      throw InputError("chain check: kernel " + std::to_string(t + 1) + " has the wrong shape");
    }
    rows *= p[t].cols();
  }
  // Walk every path; prefix index = row into the next kernel.
  double affinity = 0.0, expected = 0.0;
  std::function<void(size_t, Index, double, double, double)> walk =
      [&](size_t t, Index prefix, double pp, double qq, double acc) {
        if (t == p.size()) {
          affinity += std::sqrt(pp * qq);
          expected += pp * acc;
          return;
        }
        const Vector pr = p[t].row(prefix).transpose();
        const Vector qr = q[t].row(prefix).transpose();
        const double step = FDivergence(DivergenceKind::kSquaredHellinger, pr, qr);
        for (Index x = 0; x < pr.size(); ++x) {
          walk(t + 1, prefix * pr.size() + x, pp * pr[x], qq * qr[x], acc + step);
        }
      };
  walk(0, 0, 1.0, 1.0, 0.0);
  ChainCheck out;
  out.lhs = std::max(0.0, 1.0 - affinity);
  out.rhs = 7.0 * expected;
  out.holds = out.lhs <= out.rhs + 1e-12;
  return out;
}

}  // namespace decdim

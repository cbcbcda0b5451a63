#include "decdim/games.hpp"

#include <cmath>

#include "decdim/lp.hpp"

namespace decdim {
namespace {

void CheckFinite(const Matrix& payoff) {
  if (payoff.rows() == 0 || payoff.cols() == 0) throw InputError("game: empty payoff matrix");
  if (!payoff.allFinite()) throw InputError("game: non-finite payoff entry");
}

// Optimal mixed strategy of the minimizing row player via LP.
bool RowLp(const Matrix& payoff, Vector& strategy) {
  const Index r = payoff.rows(), c = payoff.cols();
  LinearProgram lp;
  lp.objective = Vector::Zero(r + 1);
  lp.objective[r] = 1.0;
  lp.free_vars.assign(size_t(r + 1), false);
  lp.free_vars[size_t(r)] = true;
  for (Index j = 0; j < c; ++j) {
    Vector row(r + 1);
    row.head(r) = payoff.col(j);
    row[r] = -1.0;
    lp.AddRow(row, Sense::kLe, 0.0);
  }
  Vector ones = Vector::Zero(r + 1);
  ones.head(r).setOnes();
  lp.AddRow(ones, Sense::kEq, 1.0);
  const LpResult res = SolveLp(lp);
  if (res.status != LpStatus::kOptimal) return false;
  strategy = res.x.head(r).cwiseMax(0.0);
  strategy /= strategy.sum();
  return true;
}

constexpr double kSimplexSlack = 1e-6;

GameSolution Certify(const Matrix& payoff, const Vector& p, const Vector& q,
                     const std::string& method, double tol) {
  GameSolution s;
  s.row_strategy = FiniteDistribution::Normalized(p);
  s.col_strategy = FiniteDistribution::Normalized(q);
  s.value = BestResponseValue(s.row_strategy, payoff, GameSide::kRow);
  s.lower = BestResponseValue(s.col_strategy, payoff, GameSide::kColumn);
  s.gap = std::max(0.0, s.value - s.lower);
  s.converged = s.gap <= tol;
  s.method = method;
  return s;
}

GameSolution SolveMw(const Matrix& payoff, const GameOptions& options) {
  const Index r = payoff.rows(), c = payoff.cols();
  const double scale = std::max(1e-300, payoff.cwiseAbs().maxCoeff());
  const Matrix a = payoff / scale;
  Vector lp_row = Vector::Zero(r), lp_col = Vector::Zero(c);  // log-weights
  Vector avg_p = Vector::Zero(r), avg_q = Vector::Zero(c);
  GameSolution best;
  best.gap = kInf;
  for (int t = 1; t <= options.mw_iterations; ++t) {
    Vector p = (lp_row.array() - lp_row.maxCoeff()).exp();
    Vector q = (lp_col.array() - lp_col.maxCoeff()).exp();
    p /= p.sum();
    q /= q.sum();
    avg_p += (p - avg_p) / t;
    avg_q += (q - avg_q) / t;
    const double eta_r = std::sqrt(8.0 * std::log(double(std::max<Index>(r, 2))) / t);
    const double eta_c = std::sqrt(8.0 * std::log(double(std::max<Index>(c, 2))) / t);
    lp_row -= eta_r * (a * q);
    lp_col += eta_c * (a.transpose() * p);
    if (t % 64 == 0 || t == options.mw_iterations) {
      GameSolution s = Certify(payoff, avg_p, avg_q, "multiplicative-weights", options.tol);
      if (s.gap < best.gap) best = s;
      if (best.gap <= options.tol) break;
    }
  }
  return best;
}

}  // namespace

double BestResponseValue(const FiniteDistribution& strategy, const Matrix& payoff,
                         GameSide side) {
  if (side == GameSide::kRow) {
    if (strategy.size() != payoff.rows()) throw InputError("best response: dimension mismatch");
    return (payoff.transpose() * strategy.weights()).maxCoeff();
  }
  if (strategy.size() != payoff.cols()) throw InputError("best response: dimension mismatch");
  return (payoff * strategy.weights()).minCoeff();
}

GameSolution SolveMatrixGame(const Matrix& payoff, const GameOptions& options) {
  CheckFinite(payoff);
  if (!(options.tol > 0.0)) throw InputError("game: tol must be positive");
  // Gaps are measured relative to the payoff scale once entries exceed 1.
  GameOptions scaled = options;
  scaled.tol = options.tol * std::max(1.0, payoff.cwiseAbs().maxCoeff());
  if (options.method == GameMethod::kSimplex) {
    Vector p, q;
    const Matrix neg_t = -payoff.transpose();
    if (RowLp(payoff, p) && RowLp(neg_t, q)) {
      GameSolution s = Certify(payoff, p, q, "simplex", scaled.tol);
      if (s.converged) return s;
      // Accept simplex output within round-off.
      if (s.gap <= kSimplexSlack * std::max(1.0, payoff.cwiseAbs().maxCoeff())) {
        s.converged = true;
        return s;
      }
    }
  }
  return SolveMw(payoff, scaled);
}

}  // namespace decdim

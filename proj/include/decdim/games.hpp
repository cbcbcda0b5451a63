#pragma once

#include <string>

#include "decdim/types.hpp"

namespace decdim {

// Zero-sum game: the row player picks a mixed row and minimizes
// p' A q; the column player maximizes.
struct GameSolution {
  FiniteDistribution row_strategy;
  FiniteDistribution col_strategy;
  double value = 0.0;  // max_j (p' A)_j, the row strategy's guaranteed value
  double lower = 0.0;  // min_i (A q)_i, the column strategy's guarantee
  double gap = 0.0;    // value - lower >= 0
  bool converged = true;
  std::string method;
};

enum class GameSide { kRow, kColumn };

// Exact value of the best pure response to `strategy` played by `side`:
// for a row strategy, max_j (p' A)_j; for a column strategy, min_i (A q)_i.
double BestResponseValue(const FiniteDistribution& strategy, const Matrix& payoff,
                         GameSide side);

enum class GameMethod { kSimplex, kMultiplicativeWeights };

struct GameOptions {
  double tol = 1e-9;
  GameMethod method = GameMethod::kSimplex;
  int mw_iterations = 200000;
};

GameSolution SolveMatrixGame(const Matrix& payoff, const GameOptions& options = {});

}  // namespace decdim

#pragma once

#include <vector>

#include "decdim/types.hpp"

namespace decdim {

enum class Sense { kLe, kGe, kEq };
enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

// minimize objective . x  subject to  a.row(i) . x (sense_i) b_i,
// x_j >= 0 unless free_vars[j].
struct LinearProgram {
  Vector objective;
  Matrix a;
  Vector b;
  std::vector<Sense> sense;
  std::vector<bool> free_vars;  // empty means all variables are nonnegative

  // Appends one constraint row.
  void AddRow(const Vector& row, Sense s, double rhs);
};

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double value = kInf;
  Vector x;
};

// Dense two-phase primal simplex. Dantzig pricing, switching to Bland's rule
// after a run of degenerate pivots; deterministic for a given program.
LpResult SolveLp(const LinearProgram& lp, int max_pivots = 200000);

}  // namespace decdim

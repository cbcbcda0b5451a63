#include "decdim/lp.hpp"

#include <cmath>

namespace decdim {

void LinearProgram::AddRow(const Vector& row, Sense s, double rhs) {
  const Index n = row.size();
  if (a.rows() == 0) a.resize(0, n);
  a.conservativeResize(a.rows() + 1, n);
  a.row(a.rows() - 1) = row.transpose();
  b.conservativeResize(b.size() + 1);
  b[b.size() - 1] = rhs;
  sense.push_back(s);
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

class Tableau {
 public:
  Tableau(Matrix t, std::vector<Index> basis, Index banned_from)
      : t_(std::move(t)), basis_(std::move(basis)), banned_from_(banned_from) {}

  // Runs simplex iterations on the cost row (last row). Returns status.
  LpStatus Run(int& budget) {
    const Index m = t_.rows() - 1;
    const Index n = t_.cols() - 1;
    int degenerate_run = 0;
    while (true) {
      if (budget-- <= 0) return LpStatus::kIterationLimit;
      const bool bland = degenerate_run > 50;
      Index enter = -1;
      double best = -kCostTol;
      for (Index j = 0; j < banned_from_; ++j) {
        const double d = t_(m, j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;
      Index leave = -1;
      double ratio = kInf;
      for (Index i = 0; i < m; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double r = t_(i, n) / a;
        if (r < ratio - 1e-13 ||
            (std::abs(r - ratio) <= 1e-13 && leave >= 0 && basis_[size_t(i)] < basis_[size_t(leave)])) {
          ratio = std::min(ratio, r);
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      degenerate_run = ratio <= 1e-13 ? degenerate_run + 1 : 0;
      Pivot(leave, enter);
    }
  }

  void Pivot(Index row, Index col) {
    t_.row(row) /= t_(row, col);
    for (Index i = 0; i < t_.rows(); ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[size_t(row)] = col;
  }

  Matrix& t() { return t_; }
  std::vector<Index>& basis() { return basis_; }
  void set_banned_from(Index j) { banned_from_ = j; }

 private:
  Matrix t_;
  std::vector<Index> basis_;
  Index banned_from_;
};

}  // namespace

LpResult SolveLp(const LinearProgram& lp, int max_pivots) {
  const Index n0 = lp.objective.size();
  const Index m = lp.a.rows();
  if (m > 0 && lp.a.cols() != n0) throw InputError("LP: constraint width mismatch");
  std::vector<Index> col_of(static_cast<size_t>(n0)), neg_col(static_cast<size_t>(n0), -1);
  Index n = 0;
  for (Index j = 0; j < n0; ++j) {
    col_of[size_t(j)] = n++;
    if (!lp.free_vars.empty() && lp.free_vars[size_t(j)]) neg_col[size_t(j)] = n++;
  }
  Index n_slack = 0, n_art = 0;
  for (Index i = 0; i < m; ++i) {
    Sense s = lp.sense[size_t(i)];
    if (lp.b[i] < 0.0 && s != Sense::kEq) s = s == Sense::kLe ? Sense::kGe : Sense::kLe;
    if (s != Sense::kEq) ++n_slack;
    if (s != Sense::kLe) ++n_art;
  }
  const Index cols = n + n_slack + n_art;
  Matrix t = Matrix::Zero(m + 1, cols + 1);
  std::vector<Index> basis(static_cast<size_t>(m));
  Index slack = n, art = n + n_slack;
  for (Index i = 0; i < m; ++i) {
    const double sign = lp.b[i] < 0.0 ? -1.0 : 1.0;
    Sense s = lp.sense[size_t(i)];
    if (sign < 0.0 && s != Sense::kEq) s = s == Sense::kLe ? Sense::kGe : Sense::kLe;
    for (Index j = 0; j < n0; ++j) {
      t(i, col_of[size_t(j)]) = sign * lp.a(i, j);
      if (neg_col[size_t(j)] >= 0) t(i, neg_col[size_t(j)]) = -sign * lp.a(i, j);
    }
    t(i, cols) = sign * lp.b[i];
    if (s == Sense::kLe) {
      t(i, slack) = 1.0;
      basis[size_t(i)] = slack++;
    } else {
      if (s == Sense::kGe) t(i, slack++) = -1.0;
      t(i, art) = 1.0;
      basis[size_t(i)] = art++;
    }
  }
  int budget = max_pivots;
  LpResult result;
  Tableau tab(std::move(t), std::move(basis), cols);
  if (n_art > 0) {
    Matrix& tt = tab.t();
    tt.row(m).setZero();
    for (Index j = n + n_slack; j < cols; ++j) tt(m, j) = 1.0;
    for (Index i = 0; i < m; ++i) {
      if (tab.basis()[size_t(i)] >= n + n_slack) tt.row(m) -= tt.row(i);
    }
    const LpStatus s = tab.Run(budget);
    if (s == LpStatus::kIterationLimit) {
      result.status = s;
      return result;
    }
    if (-tt(m, cols) > 1e-9) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    for (Index i = 0; i < m; ++i) {
      if (tab.basis()[size_t(i)] < n + n_slack) continue;
      for (Index j = 0; j < n + n_slack; ++j) {
        if (std::abs(tt(i, j)) > 1e-9) {
          tab.Pivot(i, j);
          break;
        }
      }
    }
    tab.set_banned_from(n + n_slack);
  }
  Matrix& tt = tab.t();
  tt.row(m).setZero();
  for (Index j = 0; j < n0; ++j) {
    tt(m, col_of[size_t(j)]) = lp.objective[j];
    if (neg_col[size_t(j)] >= 0) tt(m, neg_col[size_t(j)]) = -lp.objective[j];
  }
  for (Index i = 0; i < m; ++i) {
    const double c = tt(m, tab.basis()[size_t(i)]);
    if (c != 0.0) tt.row(m) -= c * tt.row(i);
  }
  const LpStatus s = tab.Run(budget);
  result.status = s;
  if (s != LpStatus::kOptimal) return result;
  Vector xs = Vector::Zero(cols);
  for (Index i = 0; i < m; ++i) xs[tab.basis()[size_t(i)]] = tt(i, cols);
  result.x.resize(n0);
  for (Index j = 0; j < n0; ++j) {
    result.x[j] = xs[col_of[size_t(j)]];
    if (neg_col[size_t(j)] >= 0) result.x[j] -= xs[neg_col[size_t(j)]];
  }
  result.value = lp.objective.dot(result.x);
  return result;
}

}  // namespace decdim

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "decdim/games.hpp"
#include "decdim/model.hpp"

namespace decdim {

enum class DecKind {
  kDdim,
  kOffsetR,
  kConstrainedR,
  kConstrainedP,
  kQuantileP,
  kQuantileR,
  kLinConstrainedR,
  kExo,
  kTdec,
};

std::string ToString(DecKind kind);

struct DecReport {
  DecKind kind = DecKind::kDdim;
  std::map<std::string, double> params;
  double value = 0.0;
  FiniteDistribution achieving_p;
  std::optional<FiniteDistribution> achieving_q;
  // Row of the witness: a class model index, or num_models for the reference.
  std::optional<Index> witness_model;
  std::string witness_name;
  double certificate = 0.0;
  // "exact", "game-gap", "upper-bound", "bisection", ...
  std::string certificate_kind = "exact";
  std::string reference;
  // Set when a supremum over the hull was replaced by a finite mixture grid.
  bool lower_certified = false;
  bool converged = true;
  std::vector<std::string> notes;
};

// Risk and squared-Hellinger tables of every class member against one
// reference model (rows: models, columns: decisions).
struct DecTables {
  Matrix risk;
  Matrix hellinger;
  Vector reference_risk;
  std::string reference_name;
};
DecTables MakeTables(const ModelClass& cls, const Model& reference);

// ---- decision dimension -------------------------------------------------
DecReport DecisionDimension(const ModelClass& cls, double delta);
// Same quantity from a table of value functions (rows: hypotheses).
DecReport DecisionDimensionFromValues(const Matrix& values, double delta);
DecReport DecisionDimensionFromRisk(const Matrix& risk, double delta);

// ---- offset DEC ---------------------------------------------------------
DecReport OffsetRdec(const ModelClass& cls, const Model& reference, double gamma,
                     bool include_reference = false);
DecReport OffsetRdecTables(const DecTables& t, double gamma, bool include_reference);

// ---- constrained DECs (exact) -------------------------------------------
// Regret version: sup over class + {reference}; PAC version: sup over the class.
DecReport ConstrainedRdec(const ModelClass& cls, const Model& reference, double eps);
DecReport ConstrainedPdec(const ModelClass& cls, const Model& reference, double eps);
DecReport ConstrainedRdecTables(const DecTables& t, double eps);
DecReport ConstrainedPdecTables(const DecTables& t, double eps);

// ---- quantile DECs (exact) ----------------------------------------------
double QuantileRisk(const FiniteDistribution& p, const Vector& risk, double delta);
DecReport QuantilePdec(const ModelClass& cls, const Model& reference, double eps,
                       double delta);
DecReport QuantileRdec(const ModelClass& cls, const Model& reference, double eps,
                       double delta);
DecReport QuantilePdecTables(const DecTables& t, double eps, double delta);
DecReport QuantileRdecTables(const DecTables& t, double eps, double delta);

// ---- hull references ----------------------------------------------------
struct HullOptions {
  bool include_members = true;
  int sparsity = 2;       // mixtures of at most this many members
  int denominator = 8;    // weights in {i / denominator}
  int random_restarts = 0;
  std::uint64_t seed = 0;
};
std::vector<Model> HullReferences(const ModelClass& cls, const HullOptions& options = {});
// Class extended with the hull-grid mixtures as additional members.
ModelClass HullProxyClass(const ModelClass& cls, const HullOptions& options = {});

using ReferenceFn = std::function<DecReport(const Model&)>;
// Largest report over the references; lower_certified when any reference is
// a mixture.
DecReport SupOverReferences(const std::vector<Model>& references, const ReferenceFn& fn);

// ---- linearized constrained DEC and T^DEC -------------------------------
DecReport LinConstrainedRdec(const ModelClass& cls, const std::vector<Model>& references,
                             double eps, const std::vector<double>& eps_grid);
DecReport Tdec(const ModelClass& cls, const std::vector<Model>& references, double delta,
               double tol = 1e-9);

// ---- exploration by optimization ----------------------------------------
struct ExoOptions {
  int alternations = 40;
  int descent_steps = 60;
  double ell_bound = 30.0;
};

// ell[pi](o, pi') = l(pi'; pi, o).
struct ExoSolution {
  Vector p;
  std::vector<Matrix> ell;
  double value = 0.0;  // exact max over (M, pi*) at (p, ell)
  double zero_ell_value = 0.0;
  Index witness_model = 0;
  Index witness_decision = 0;
};

class ExoSolver {
 public:
  ExoSolver(const ModelClass& cls, double gamma, ExoOptions options = {});
  // Warm start from `warm` when given (same shapes).
  ExoSolution Solve(const Vector& q, const ExoSolution* warm = nullptr) const;
  // Exact objective max_{M, pi*} Gamma(p, ell) and the maximizing pair.
  double Objective(const Vector& q, const Vector& p, const std::vector<Matrix>& ell,
                   Index* model = nullptr, Index* decision = nullptr) const;
  Index num_decisions() const { return m_; }
  Index num_outcomes() const { return o_; }

 private:
  // cost(pi, j) for pair j = model * m + pi_star.
  Matrix CostTable(const Vector& q, const std::vector<Matrix>& ell) const;
  Vector PStep(const Matrix& cost) const;
  void EllStep(const Vector& q, const Vector& p, std::vector<Matrix>& ell) const;

  Index m_, o_, n_;
  double gamma_;
  ExoOptions options_;
  Matrix values_;                  // n x m
  std::vector<Matrix> channels_;   // per model, m x o
};

DecReport ExoValue(const ModelClass& cls, const Vector& prior_q, double gamma,
                   const ExoOptions& options = {});

// ---- contextual per-context DEC -----------------------------------------
// Bandit class M_{H,c}: unit-variance Gaussian arms with means h(c, .).
ModelClass ContextRestrictedClass(const std::vector<Matrix>& value_class, Index context);
DecReport PerContextRdec(const std::vector<Matrix>& value_class, Index context, double eps,
                         const HullOptions& hull = {});
// Value-function constrained DEC at one context against reference values
// h_bar: sup over H + {h_bar} of E_p[gap] subject to E_p (h - h_bar)^2 <= eps^2.
DecReport ValueConstrainedRdec(const std::vector<Matrix>& value_class, Index context,
                               const Vector& h_bar, double eps);

}  // namespace decdim

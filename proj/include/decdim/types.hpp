#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace decdim {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Bad user input: malformed files, out-of-range parameters, violated
// preconditions. The CLI maps it to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A probability vector over an indexed finite set.
class FiniteDistribution {
 public:
  FiniteDistribution() = default;
  // Throws InputError unless weights are nonnegative and sum to 1 within tol.
  explicit FiniteDistribution(Vector weights, double tol = 1e-12);

  static FiniteDistribution Uniform(Index n);
  static FiniteDistribution PointMass(Index n, Index i);
  // Clips tiny negatives and rescales a nonnegative vector to sum 1.
  static FiniteDistribution Normalized(const Vector& weights);

  Index size() const { return w_.size(); }
  double operator[](Index i) const { return w_[i]; }
  const Vector& weights() const { return w_; }

  // Inverse-CDF sample for u in [0, 1).
  Index Sample(double u) const;
  // Indices with positive weight.
  std::vector<Index> Support() const;

 private:
  Vector w_;
};

using PolicyDistribution = FiniteDistribution;

}  // namespace decdim

#include "decdim/types.hpp"

#include <cmath>
#include <sstream>

namespace decdim {

FiniteDistribution::FiniteDistribution(Vector weights, double tol)
    : w_(std::move(weights)) {
  if (w_.size() == 0) throw InputError("distribution over an empty set");
  for (Index i = 0; i < w_.size(); ++i) {
    if (!std::isfinite(w_[i]) || w_[i] < 0.0) {
      std::ostringstream os;
      os << "negative or non-finite weight " << w_[i] << " at index " << i;
      throw InputError(os.str());
    }
  }
  const double s = w_.sum();
  if (std::abs(s - 1.0) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << s << ", not 1";
    throw InputError(os.str());
  }
}

FiniteDistribution FiniteDistribution::Uniform(Index n) {
  return FiniteDistribution(Vector::Constant(n, 1.0 / static_cast<double>(n)),
                            1e-9);
}

FiniteDistribution FiniteDistribution::PointMass(Index n, Index i) {
  Vector w = Vector::Zero(n);
  w[i] = 1.0;
  return FiniteDistribution(std::move(w));
}

FiniteDistribution FiniteDistribution::Normalized(const Vector& weights) {
  Vector w = weights.cwiseMax(0.0);
  const double s = w.sum();
  if (!(s > 0.0)) throw InputError("cannot normalize a zero vector");
  w /= s;
  return FiniteDistribution(std::move(w), 1e-9);
}

Index FiniteDistribution::Sample(double u) const {
  double acc = 0.0;
  Index last = 0;
  for (Index i = 0; i < w_.size(); ++i) {
    if (w_[i] <= 0.0) continue;
    acc += w_[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

std::vector<Index> FiniteDistribution::Support() const {
  std::vector<Index> s;
  for (Index i = 0; i < w_.size(); ++i)
    if (w_[i] > 0.0) s.push_back(i);
  return s;
}

}  // namespace decdim

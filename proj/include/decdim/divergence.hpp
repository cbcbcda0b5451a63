#pragma once

#include <cmath>
#include <string>

#include "decdim/types.hpp"

namespace decdim {

// f-divergences with generators x log x, |x - 1| / 2 and (sqrt(x) - 1)^2 / 2.
enum class DivergenceKind { kKL, kTV, kSquaredHellinger };

std::string ToString(DivergenceKind kind);
DivergenceKind ParseDivergenceKind(const std::string& name);

// D_f(P || Q) for probability vectors on a shared index set. KL returns
// +infinity when P puts mass where Q does not; 0 log 0 = 0.
template <typename DerivedP, typename DerivedQ>
double FDivergence(DivergenceKind kind, const Eigen::MatrixBase<DerivedP>& p,
                   const Eigen::MatrixBase<DerivedQ>& q) {
  if (p.size() != q.size()) throw InputError("divergence: size mismatch");
  double acc = 0.0;
  switch (kind) {
    case DivergenceKind::kKL:
      for (Index i = 0; i < p.size(); ++i) {
        const double pi = p.coeff(i), qi = q.coeff(i);
        if (pi <= 0.0) continue;
        if (qi <= 0.0) return kInf;
        acc += pi * std::log(pi / qi);
      }
      return acc < 0.0 ? 0.0 : acc;
    case DivergenceKind::kTV:
      return 0.5 * (p - q).cwiseAbs().sum();
    case DivergenceKind::kSquaredHellinger:
      for (Index i = 0; i < p.size(); ++i) {
        const double d = std::sqrt(std::max(0.0, double(p.coeff(i)))) -
                         std::sqrt(std::max(0.0, double(q.coeff(i))));
        acc += d * d;
      }
      return std::min(1.0, 0.5 * acc);
  }
  return 0.0;
}

inline double FDivergence(DivergenceKind kind, const FiniteDistribution& p,
                          const FiniteDistribution& q) {
  return FDivergence(kind, p.weights(), q.weights());
}

// Divergences between N(mu1, 1) and N(mu2, 1).
double GaussianDivergence(DivergenceKind kind, double mu1, double mu2);

// D_f(Bern(a) || Bern(b)).
double BernoulliDivergence(DivergenceKind kind, double a, double b);

// d_{f,delta}(p): D_f(Bern(1 - delta) || Bern(p)) when p <= 1 - delta, else 0.
double BernoulliQuantileDiv(DivergenceKind kind, double delta, double p);

// I(M; X) for M ~ prior and X | M ~ row M of `channel` (models x outcomes).
double MutualInformation(const FiniteDistribution& prior, const Matrix& channel);

// d log(1 + r^2 T / (4 d^2)).
double LinearBanditMiBound(int d, double r, double horizon);

}  // namespace decdim

#include "decdim/divergence.hpp"

namespace decdim {

std::string ToString(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::kKL: return "kl";
    case DivergenceKind::kTV: return "tv";
    case DivergenceKind::kSquaredHellinger: return "hellinger2";
  }
  return "?";
}

DivergenceKind ParseDivergenceKind(const std::string& name) {
  if (name == "kl") return DivergenceKind::kKL;
  if (name == "tv") return DivergenceKind::kTV;
  if (name == "hellinger2" || name == "hellinger") {
    return DivergenceKind::kSquaredHellinger;
  }
  throw InputError("unknown divergence kind '" + name + "'");
}

double GaussianDivergence(DivergenceKind kind, double mu1, double mu2) {
  const double d = mu1 - mu2;
  switch (kind) {
    case DivergenceKind::kKL: return 0.5 * d * d;
    case DivergenceKind::kTV: return std::erf(std::abs(d) / (2.0 * std::sqrt(2.0)));
    case DivergenceKind::kSquaredHellinger: return -std::expm1(-d * d / 8.0);
  }
  return 0.0;
}

double BernoulliDivergence(DivergenceKind kind, double a, double b) {
  const Eigen::Vector2d p(a, 1.0 - a), q(b, 1.0 - b);
  return FDivergence(kind, p, q);
}

double BernoulliQuantileDiv(DivergenceKind kind, double delta, double p) {
  if (p > 1.0 - delta) return 0.0;
  return BernoulliDivergence(kind, 1.0 - delta, p);
}

double MutualInformation(const FiniteDistribution& prior, const Matrix& channel) {
  if (channel.rows() != prior.size()) {
    throw InputError("mutual information: prior and channel disagree on models");
  }
  const Vector marginal = channel.transpose() * prior.weights();
  double info = 0.0;
  for (Index m = 0; m < channel.rows(); ++m) {
    if (prior[m] <= 0.0) continue;
    info += prior[m] *
            FDivergence(DivergenceKind::kKL, channel.row(m).transpose(), marginal);
  }
  return std::max(0.0, info);
}

double LinearBanditMiBound(int d, double r, double horizon) {
  if (d < 1 || !(r > 0.0) || horizon < 0.0) {
    throw InputError("linear bandit MI bound: need d >= 1, r > 0, T >= 0");
  }
  const double dd = static_cast<double>(d);
  return dd * std::log1p(r * r * horizon / (4.0 * dd * dd));
}

}  // namespace decdim

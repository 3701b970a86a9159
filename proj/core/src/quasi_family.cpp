#include "gaplm/quasi_family.hpp"

#include <algorithm>
#include <cmath>

#include "gaplm/error.hpp"

namespace gaplm {
namespace {

constexpr double kProbClamp = 1e-12;

double logistic(double m) {
  if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

// mu (1 - mu) without cancellation: e^{-|m|} / (1 + e^{-|m|})^2.
double logistic_variance(double m) {
  const double e = std::exp(-std::abs(m));
  return e / ((1.0 + e) * (1.0 + e));
}

// log(1 + e^m)
double softplus(double m) { return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m)); }

}  // namespace

QuasiFamily QuasiFamily::from_name(std::string_view name) {
  if (name == "bernoulli-logit" || name == "logit" || name == "binomial" || name == "bernoulli") {
    return bernoulli_logit();
  }
  if (name == "gaussian-identity" || name == "gaussian" || name == "identity") return gaussian_identity();
  if (name == "poisson-log" || name == "poisson") return poisson_log();
  throw ConfigError("unknown quasi-likelihood family '" + std::string(name) + "'");
}

std::string QuasiFamily::name() const {
  switch (kind_) {
    case FamilyKind::BernoulliLogit: return "bernoulli-logit";
    case FamilyKind::GaussianIdentity: return "gaussian-identity";
    case FamilyKind::PoissonLog: return "poisson-log";
  }
  return {};
}

double QuasiFamily::link(double mu) const {
  switch (kind_) {
    case FamilyKind::BernoulliLogit: return std::log(mu / (1.0 - mu));
    case FamilyKind::GaussianIdentity: return mu;
    case FamilyKind::PoissonLog: return std::log(mu);
  }
  return mu;
}

double QuasiFamily::inverse_link(double m) const {
  switch (kind_) {
    case FamilyKind::BernoulliLogit: return logistic(m);
    case FamilyKind::GaussianIdentity: return m;
    case FamilyKind::PoissonLog: return std::exp(m);
  }
  return m;
}

double QuasiFamily::mean_derivative(double m) const {
  switch (kind_) {
    case FamilyKind::BernoulliLogit: return logistic_variance(m);
    case FamilyKind::GaussianIdentity: return 1.0;
    case FamilyKind::PoissonLog: return std::exp(m);
  }
  return 1.0;
}

double QuasiFamily::variance(double mu) const {
  switch (kind_) {
    case FamilyKind::BernoulliLogit: return mu * (1.0 - mu);
    case FamilyKind::GaussianIdentity: return 1.0;
    case FamilyKind::PoissonLog: return mu;
  }
  return 1.0;
}

double QuasiFamily::quasi_loglik(double mu, double y) const {
  switch (kind_) {
    case FamilyKind::BernoulliLogit: {
      const double p = std::clamp(mu, kProbClamp, 1.0 - kProbClamp);
      return y * std::log(p) + (1.0 - y) * std::log1p(-p);
    }
    case FamilyKind::GaussianIdentity: return -0.5 * (y - mu) * (y - mu);
    case FamilyKind::PoissonLog: return (y > 0.0 ? y * std::log(mu) : 0.0) - mu;
  }
  return 0.0;
}

double QuasiFamily::quasi_loglik_linear(double m, double y) const {
  switch (kind_) {
    case FamilyKind::BernoulliLogit: return y * m - softplus(m);
    case FamilyKind::GaussianIdentity: return -0.5 * (y - m) * (y - m);
    case FamilyKind::PoissonLog: return y * m - std::exp(m);
  }
  return 0.0;
}

double QuasiFamily::rho(double m, int order) const {
  if (!std::isfinite(m)) throw DomainError("rho: linear predictor must be finite");
  if (order != 1 && order != 2) throw DomainError("rho: order must be 1 or 2");
  switch (kind_) {
    // Canonical links: d mu / dm = V(mu), so rho_1 = 1 and rho_2 = V.
    case FamilyKind::BernoulliLogit: return order == 1 ? 1.0 : logistic_variance(m);
    case FamilyKind::GaussianIdentity: return 1.0;
    case FamilyKind::PoissonLog: return order == 1 ? 1.0 : std::exp(m);
  }
  return 1.0;
}

double QuasiFamily::q1(double m, double y) const { return (y - inverse_link(m)) * rho(m, 1); }

double QuasiFamily::working_weight(double m) const {
  if (kind_ == FamilyKind::BernoulliLogit) {
    const double p = std::clamp(logistic(m), kProbClamp, 1.0 - kProbClamp);
    return p * (1.0 - p);
  }
  return rho(m, 2);
}

bool QuasiFamily::in_support(double y) const {
  if (!std::isfinite(y)) return false;
  switch (kind_) {
    case FamilyKind::BernoulliLogit: return y == 0.0 || y == 1.0;
    case FamilyKind::GaussianIdentity: return true;
    case FamilyKind::PoissonLog: return y >= 0.0 && y == std::floor(y);
  }
  return false;
}

double QuasiFamily::initial_mean(double ybar) const {
  switch (kind_) {
    case FamilyKind::BernoulliLogit: return std::clamp(ybar, 0.01, 0.99);
    case FamilyKind::GaussianIdentity: return ybar;
    case FamilyKind::PoissonLog: return std::max(ybar, 0.1);
  }
  return ybar;
}

double rho_eval(const QuasiFamily& family, double m, int order) { return family.rho(m, order); }

}  // namespace gaplm

#pragma once

#include <string>
#include <string_view>

namespace gaplm {

enum class FamilyKind { BernoulliLogit, GaussianIdentity, PoissonLog };

/// Quasi-likelihood family: link g, inverse link, variance V and kernel Q
/// with dQ(mu, y)/dmu = (y - mu) / V(mu).
///
/// Everything downstream works on the linear-predictor scale m = g(mu):
///   rho_l(m) = {d g^{-1}(m)/dm}^l / V(g^{-1}(m)),   q_1(m, y) = {y - g^{-1}(m)} rho_1(m).
class QuasiFamily {
 public:
  static QuasiFamily bernoulli_logit() { return QuasiFamily(FamilyKind::BernoulliLogit); }
  static QuasiFamily gaussian_identity() { return QuasiFamily(FamilyKind::GaussianIdentity); }
  static QuasiFamily poisson_log() { return QuasiFamily(FamilyKind::PoissonLog); }

  /// Accepts "bernoulli-logit", "gaussian-identity", "poisson-log" (and the
  /// short aliases "logit", "binomial", "gaussian", "poisson").
  static QuasiFamily from_name(std::string_view name);

  FamilyKind kind() const noexcept { return kind_; }
  std::string name() const;

  double link(double mu) const;
  double inverse_link(double m) const;
  /// d g^{-1}(m) / dm
  double mean_derivative(double m) const;
  double variance(double mu) const;

  /// Q(mu, y), up to a y-only constant.
  double quasi_loglik(double mu, double y) const;
  /// Q(g^{-1}(m), y), evaluated stably on the linear-predictor scale.
  double quasi_loglik_linear(double m, double y) const;

  double rho(double m, int order) const;
  double q1(double m, double y) const;

  /// Working weight rho_2(m) used by IRLS; Bernoulli means are clamped to
  /// [1e-12, 1 - 1e-12] so the weight never vanishes.
  double working_weight(double m) const;

  bool in_support(double y) const;

  /// Mean used to initialise the intercept when fitting.
  double initial_mean(double ybar) const;

  friend bool operator==(const QuasiFamily&, const QuasiFamily&) = default;

 private:
  explicit QuasiFamily(FamilyKind kind) : kind_(kind) {}
  FamilyKind kind_;
};

/// rho_1 or rho_2 at m. Throws DomainError for other orders or non-finite m.
double rho_eval(const QuasiFamily& family, double m, int order);

}  // namespace gaplm

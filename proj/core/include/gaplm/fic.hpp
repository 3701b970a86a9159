#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gaplm/irls.hpp"
#include "gaplm/model_space.hpp"
#include "gaplm/quasi_family.hpp"
#include "gaplm/spline_basis.hpp"

namespace gaplm {

/// Weights used when projecting Z onto the spline space and averaging
/// psi psi' into D. `Score` uses rho_1 (the default); `Information` uses
/// rho_2, the weight of the expected Hessian.
enum class PsiWeighting { Score, Information };

/// One nonparametric term eta_a(x*) of a focus parameter.
struct EtaTerm {
  int covariate = 0;
  /// Evaluation point on the unit scale of the spline basis.
  double x_unit = 0.0;

  friend bool operator==(const EtaTerm&, const EtaTerm&) = default;
};

/// Focus parameter mu = constant + c' beta (linear kind), optionally plus
/// sum_a eta_a(x*_a) evaluated by plug-in from the full fit (general kind).
struct FocusSpec {
  std::string name;
  Eigen::VectorXd coefficients;
  double constant = 0.0;
  std::vector<EtaTerm> eta_terms;

  bool general() const noexcept { return !eta_terms.empty(); }

  static FocusSpec coefficient(int d, int index, std::string name = {});
  static FocusSpec linear(Eigen::VectorXd c, double constant = 0.0, std::string name = {});
};

struct FocusGradient {
  /// d mu / d beta at the full-model estimate.
  Eigen::VectorXd mu_beta;
  /// Part of mu not carried by beta: the constant for linear foci; for
  /// general foci also intercept + sum_a eta_a(x*_a) from the full fit.
  double offset = 0.0;
  bool general = false;
};

FocusGradient focus_gradient(const FocusSpec& focus, const GaplmFit& full);

/// Plug-in ingredients shared by every submodel score.
struct FicInputs {
  Eigen::MatrixXd D_hat;
  Eigen::MatrixXd Sigma_hat;
  /// sqrt(n) * exploratory part of the full-model beta.
  Eigen::VectorXd delta_hat;
  Eigen::VectorXd mu_beta;
  double kappa2_hat = 0.0;
  Eigen::MatrixXd psi_hat;
  int n = 0;
  int dc = 0;

  int d() const noexcept { return static_cast<int>(D_hat.rows()); }
  int du() const noexcept { return d() - dc; }

  /// Copy with a new focus gradient; recomputes kappa2.
  FicInputs with_focus(const Eigen::VectorXd& mu_beta) const;
  /// D^{-1} Sigma D^{-1}.
  Eigen::MatrixXd scaled_covariance() const;
};

/// psi_i = Z_i - Gamma(X_i), with Gamma fitted by weighted least squares of
/// each Z column on [1 | basis] (same column set as the fit's design).
Eigen::MatrixXd estimate_psi(const GaplmFit& full, const BasisExpansion& basis, const Eigen::MatrixXd& z,
                             const QuasiFamily& family, PsiWeighting weighting = PsiWeighting::Score);

/// D = (1/n) sum w_i psi_i psi_i', Sigma = D (n Cov(beta_full)) D.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> estimate_D_Sigma(const GaplmFit& full, const Eigen::MatrixXd& psi,
                                                             const QuasiFamily& family, int n,
                                                             PsiWeighting weighting = PsiWeighting::Score);

/// Builds D, Sigma, delta and psi from the full fit; mu_beta is left empty.
FicInputs build_fic_inputs(const GaplmFit& full, const BasisExpansion& basis, const Eigen::MatrixXd& z, int dc,
                           PsiWeighting weighting = PsiWeighting::Score);

/// R_s = Pi_s' (Pi_s D Pi_s')^{-1} Pi_s; throws SingularityError when the
/// submodel block of D is numerically singular.
Eigen::MatrixXd submodel_r(const SubmodelSpec& spec, const Eigen::MatrixXd& D);

double fic_score(const SubmodelSpec& spec, const FicInputs& inputs);

struct IcScore {
  double aic = 0.0;
  double bic = 0.0;
};

/// AIC = -2 qloglik + 2 q, BIC = -2 qloglik + q log n, q = free parameters.
IcScore ic_score(const GaplmFit& fit);

struct IcScores {
  std::vector<std::optional<double>> aic;
  std::vector<std::optional<double>> bic;
  std::optional<int> argmin_aic;
  std::optional<int> argmin_bic;
};

/// Null entries (failed fits) stay null and never win.
IcScores ic_scores(std::span<const GaplmFit* const> fits);

/// Softmax of -FIC_s / kappa2 in the log domain. Null entries get weight 0.
Eigen::VectorXd sfic_weights(std::span<const std::optional<double>> fic, double kappa2);

/// Indicator of the smallest non-null score (first one on ties).
Eigen::VectorXd selection_weights(std::span<const std::optional<double>> scores);

/// mu_beta' embed(beta_s) + offset.
double submodel_focus_estimate(const SubmodelSpec& spec, const GaplmFit& fit, const FocusGradient& gradient);

struct FmaResult {
  double mu_hat = 0.0;
  double low = 0.0;
  double up = 0.0;
  double level = 0.95;
  /// mu_beta' {Q(delta)(0, delta) - (0, delta)} / sqrt(n); subtracted from mu_hat.
  double correction_term = 0.0;
  double z = 0.0;
  /// Set for general foci: coverage of the interval is not guaranteed.
  bool plugin_only = false;

  friend bool operator==(const FmaResult&, const FmaResult&) = default;
};

/// Model-average estimate sum_s w_s mu_s and its bias-corrected interval.
FmaResult fma_estimate(const Eigen::VectorXd& weights, std::span<const SubmodelSpec> specs,
                       std::span<const double> mu_hats, const FicInputs& inputs, double level,
                       bool general = false);

}  // namespace gaplm

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaplm/error.hpp"
#include "gaplm/quasi_family.hpp"
#include "gaplm/spline_basis.hpp"

namespace gaplm {

struct IrlsControls {
  /// Gradient criterion: max |score| < tol * (1 + |qloglik|).
  double tol = 1e-8;
  /// Relative change in qloglik below which the fit is declared converged.
  double rel_tol = 1e-10;
  int max_iter = 100;
  int max_halvings = 30;
  /// Use the q_1 outer-product sandwich instead of the inverse Fisher information.
  bool sandwich = false;
};

/// Optional column names used in error messages.
struct DesignNames {
  std::vector<std::string> smooth;
  std::vector<std::string> linear;
};

/// Column layout of the working design [1 | B_1 | ... | B_p | Z_s].
///
/// The first basis function of every smooth block is dropped: each block
/// sums to one, so keeping it would duplicate the intercept. Its coefficient
/// is fixed at zero, which leaves the fitted function space unchanged.
struct DesignLayout {
  std::vector<int> block_start;  // position in theta of each smooth block
  std::vector<int> block_free;   // free coefficients per block (dimension - 1)
  int linear_start = 1;
  int linear_count = 0;
  int total = 1;

  static DesignLayout from(const BasisExpansion& basis, int linear_count);
};

Eigen::MatrixXd working_design(const BasisExpansion& basis, const Eigen::MatrixXd& z);

/// Quasi-log-likelihood sum_i Q(g^{-1}(x_i' theta), y_i) of a fixed design,
/// with its analytic gradient X' q_1 and expected information X' W X.
class QuasiObjective {
 public:
  QuasiObjective(Eigen::MatrixXd design, Eigen::VectorXd y, QuasiFamily family);

  double value(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const;
  Eigen::MatrixXd information(const Eigen::VectorXd& theta) const;

  const Eigen::MatrixXd& design() const noexcept { return design_; }

 private:
  Eigen::MatrixXd design_;
  Eigen::VectorXd y_;
  QuasiFamily family_;
};

/// Converged quasi-likelihood fit of one (sub)model.
struct GaplmFit {
  QuasiFamily family = QuasiFamily::bernoulli_logit();
  std::vector<SplineSpec> specs;
  DesignLayout layout;

  /// Packed coefficients [raw intercept | free spline coefficients | beta].
  Eigen::VectorXd theta;
  /// Full spline coefficient vector per covariate (dropped entry is 0).
  std::vector<Eigen::VectorXd> gamma_hat;
  Eigen::VectorXd beta_hat;
  /// Level of the linear predictor when every component is centered.
  double intercept = 0.0;
  /// Training means of the raw components (the centering offsets).
  std::vector<double> center_offsets;
  /// Training column means of each basis block.
  std::vector<Eigen::VectorXd> block_means;

  Eigen::VectorXd linear_predictor;
  /// sum_i Q(mu_i, y_i).
  double qloglik = 0.0;
  Eigen::MatrixXd fisher;
  /// Covariance of theta (inverse Fisher information, or the sandwich).
  Eigen::MatrixXd covariance;
  /// Rows/columns of `covariance` belonging to beta.
  Eigen::MatrixXd beta_cov;
  int iterations = 0;
  bool converged = false;

  int n() const noexcept { return static_cast<int>(linear_predictor.size()); }
  /// Free parameters: intercept + spline + linear.
  int parameter_count() const noexcept { return layout.total; }

  CenteredComponent component(int covariate) const;

  /// Linear predictor at a new point; `x_unit` holds one value in [0,1]
  /// per smooth covariate, `z` the submodel's linear covariates.
  double predict_linear(std::span<const double> x_unit, const Eigen::VectorXd& z) const;
  double predict_response(std::span<const double> x_unit, const Eigen::VectorXd& z) const;

  /// Gradient of intercept + sum_{a in terms} eta_a(x_a) + c' beta with respect
  /// to theta. Components not listed contribute at their centered level 0.
  Eigen::VectorXd level_gradient(std::span<const std::pair<int, double>> eta_terms,
                                 const Eigen::VectorXd& c) const;
};

/// Raised when IRLS fails to converge (including complete separation).
/// Carries the last accepted iterate (with its information and covariance
/// when these are finite) when one exists.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& message, std::shared_ptr<const GaplmFit> last)
      : Error(message), last_(std::move(last)) {}
  const std::shared_ptr<const GaplmFit>& last_iterate() const noexcept { return last_; }

 private:
  std::shared_ptr<const GaplmFit> last_;
};

/// Maximises sum_i Q over [intercept | spline basis | Z_s] by Fisher scoring
/// with step-halving.
GaplmFit irls_fit(const Eigen::VectorXd& y, const BasisExpansion& basis, const Eigen::MatrixXd& z,
                  const QuasiFamily& family, const IrlsControls& controls = {},
                  const DesignNames& names = {});

}  // namespace gaplm

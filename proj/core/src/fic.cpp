#include "gaplm/fic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gaplm/error.hpp"
#include "gaplm/normal.hpp"

namespace gaplm {

FocusSpec FocusSpec::coefficient(int d, int index, std::string name) {
  if (index < 0 || index >= d) throw ConfigError("focus coefficient index out of range");
  FocusSpec f;
  f.name = std::move(name);
  f.coefficients = Eigen::VectorXd::Unit(d, index);
  return f;
}

FocusSpec FocusSpec::linear(Eigen::VectorXd c, double constant, std::string name) {
  FocusSpec f;
  f.name = std::move(name);
  f.coefficients = std::move(c);
  f.constant = constant;
  return f;
}

FocusGradient focus_gradient(const FocusSpec& focus, const GaplmFit& full) {
  if (focus.coefficients.size() != full.beta_hat.size()) {
    throw ConfigError("focus '" + focus.name + "' has " + std::to_string(focus.coefficients.size()) +
                      " coefficients but the full model has " + std::to_string(full.beta_hat.size()));
  }
  FocusGradient g;
  g.mu_beta = focus.coefficients;
  g.offset = focus.constant;
  g.general = focus.general();
  if (g.general) {
    g.offset += full.intercept;
    for (const auto& term : focus.eta_terms) {
      if (term.covariate < 0 || term.covariate >= static_cast<int>(full.specs.size())) {
        throw ConfigError("focus '" + focus.name + "' refers to a smooth covariate that is not in the model");
      }
      g.offset += full.component(term.covariate)(term.x_unit);
    }
  }
  return g;
}

Eigen::MatrixXd FicInputs::scaled_covariance() const {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(D_hat);
  const Eigen::MatrixXd left = ldlt.solve(Sigma_hat);
  const Eigen::MatrixXd v = ldlt.solve(left.transpose());
  return 0.5 * (v + v.transpose());
}

FicInputs FicInputs::with_focus(const Eigen::VectorXd& mu) const {
  if (mu.size() != d()) throw ConfigError("focus gradient length must equal d");
  FicInputs out = *this;
  out.mu_beta = mu;
  out.kappa2_hat = std::max(0.0, mu.dot(scaled_covariance() * mu));
  return out;
}

Eigen::MatrixXd estimate_psi(const GaplmFit& full, const BasisExpansion& basis, const Eigen::MatrixXd& z,
                             const QuasiFamily& family, PsiWeighting weighting) {
  const Eigen::Index n = z.rows();
  if (basis.rows() != n || full.linear_predictor.size() != n) {
    throw ConfigError("estimate_psi: row counts of fit, basis and Z differ");
  }
  const Eigen::MatrixXd b = working_design(basis, Eigen::MatrixXd(n, 0));
  Eigen::VectorXd sw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = full.linear_predictor(i);
    const double w = weighting == PsiWeighting::Score ? family.rho(m, 1) : family.working_weight(m);
    sw(i) = std::sqrt(w);
  }
  const Eigen::MatrixXd wb = sw.asDiagonal() * b;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(wb);
  qr.setThreshold(1e-10);
  if (qr.rank() < wb.cols()) {
    throw RankDeficientError("estimate_psi: weighted Gram matrix of the spline basis is singular",
                             static_cast<int>(qr.rank()), "spline basis");
  }
  const Eigen::MatrixXd coef = qr.solve(sw.asDiagonal() * z);
  return z - b * coef;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> estimate_D_Sigma(const GaplmFit& full, const Eigen::MatrixXd& psi,
                                                             const QuasiFamily& family, int n,
                                                             PsiWeighting weighting) {
  if (psi.rows() != n || full.linear_predictor.size() != n) {
    throw ConfigError("estimate_D_Sigma: psi must have one row per observation");
  }
  if (psi.cols() != full.beta_cov.rows()) throw ConfigError("estimate_D_Sigma: psi and beta_cov dimensions differ");
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    const double m = full.linear_predictor(i);
    w(i) = weighting == PsiWeighting::Score ? family.rho(m, 1) : family.working_weight(m);
  }
  Eigen::MatrixXd D = psi.transpose() * w.asDiagonal() * psi / static_cast<double>(n);
  D = 0.5 * (D + D.transpose());

  if (D.rows() > 0) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(D, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || lo < 1e-10 * hi) {
      throw SingularityError(
          "estimated information matrix D of the linear covariates is not positive definite "
          "(linear covariates are collinear with each other or with the smooth terms)");
    }
  }
  Eigen::MatrixXd sigma = D * (static_cast<double>(n) * full.beta_cov) * D;
  sigma = 0.5 * (sigma + sigma.transpose());
  return {D, sigma};
}

FicInputs build_fic_inputs(const GaplmFit& full, const BasisExpansion& basis, const Eigen::MatrixXd& z, int dc,
                           PsiWeighting weighting) {
  if (z.cols() != full.beta_hat.size()) throw ConfigError("build_fic_inputs: Z must hold every linear covariate");
  if (dc < 0 || dc > z.cols()) throw ConfigError("build_fic_inputs: invalid number of certain covariates");
  FicInputs in;
  in.n = static_cast<int>(z.rows());
  in.dc = dc;
  in.psi_hat = estimate_psi(full, basis, z, full.family, weighting);
  auto [D, sigma] = estimate_D_Sigma(full, in.psi_hat, full.family, in.n, weighting);
  in.D_hat = std::move(D);
  in.Sigma_hat = std::move(sigma);
  in.delta_hat = std::sqrt(static_cast<double>(in.n)) * full.beta_hat.tail(z.cols() - dc);
  in.mu_beta = Eigen::VectorXd::Zero(z.cols());
  return in;
}

Eigen::MatrixXd submodel_r(const SubmodelSpec& spec, const Eigen::MatrixXd& D) {
  const Eigen::Index d = D.rows();
  if (spec.dc() + spec.du() != d) throw ConfigError("submodel_r: submodel does not match the dimension of D");
  if (spec.size() == 0) return Eigen::MatrixXd::Zero(d, d);
  const Eigen::MatrixXd pi = spec.Pi();
  const Eigen::MatrixXd block = pi * D * pi.transpose();
  const Eigen::LLT<Eigen::MatrixXd> llt(block);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const double diag_min = llt.matrixL().toDenseMatrix().diagonal().minCoeff();
    const double diag_max = llt.matrixL().toDenseMatrix().diagonal().maxCoeff();
    ok = diag_min > 1e-7 * diag_max;
  }
  if (!ok) {
    throw SingularityError("submodel " + spec.bits() + ": information block Pi D Pi' is numerically singular");
  }
  return pi.transpose() * llt.solve(pi);
}

double fic_score(const SubmodelSpec& spec, const FicInputs& in) {
  const int d = in.d();
  if (in.mu_beta.size() != d) throw ConfigError("fic_score: focus gradient not set");
  const Eigen::MatrixXd R = submodel_r(spec, in.D_hat);
  const Eigen::MatrixXd A = R * in.D_hat - Eigen::MatrixXd::Identity(d, d);

  Eigen::VectorXd shift = Eigen::VectorXd::Zero(d);
  shift.tail(in.du()) = in.delta_hat;

  // (R_s D - I)' mu: every term is a quadratic form in this vector.
  const Eigen::VectorXd a = A.transpose() * in.mu_beta;
  const Eigen::VectorXd r = R * in.mu_beta;

  Eigen::MatrixXd scaled = in.scaled_covariance();
  scaled.topRows(in.dc).setZero();
  scaled.leftCols(in.dc).setZero();

  const double variance = r.dot(in.Sigma_hat * r);
  const double bias = a.dot(shift);
  const double bias_correction = a.dot(scaled * a);
  return variance + bias * bias - bias_correction;
}

IcScore ic_score(const GaplmFit& fit) {
  const double q = fit.parameter_count();
  const double n = fit.n();
  return {-2.0 * fit.qloglik + 2.0 * q, -2.0 * fit.qloglik + q * std::log(n)};
}

IcScores ic_scores(std::span<const GaplmFit* const> fits) {
  IcScores out;
  for (const GaplmFit* f : fits) {
    if (f == nullptr) {
      out.aic.emplace_back();
      out.bic.emplace_back();
      continue;
    }
    const auto s = ic_score(*f);
    out.aic.emplace_back(s.aic);
    out.bic.emplace_back(s.bic);
  }
  const auto pick = [](const std::vector<std::optional<double>>& v) -> std::optional<int> {
    std::optional<int> best;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] && (!best || *v[i] < *v[static_cast<std::size_t>(*best)])) best = static_cast<int>(i);
    }
    return best;
  };
  out.argmin_aic = pick(out.aic);
  out.argmin_bic = pick(out.bic);
  return out;
}

Eigen::VectorXd sfic_weights(std::span<const std::optional<double>> fic, double kappa2) {
  if (!(kappa2 > 0.0)) throw DomainError("sfic_weights: kappa2 must be positive");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fic.size()));
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& f : fic) {
    if (f && std::isfinite(*f)) top = std::max(top, -*f / kappa2);
  }
  if (!std::isfinite(top)) throw Error("sfic_weights: every submodel was excluded");
  double total = 0.0;
  for (std::size_t s = 0; s < fic.size(); ++s) {
    if (fic[s] && std::isfinite(*fic[s])) {
      w(static_cast<Eigen::Index>(s)) = std::exp(-*fic[s] / kappa2 - top);
      total += w(static_cast<Eigen::Index>(s));
    }
  }
  return w / total;
}

Eigen::VectorXd selection_weights(std::span<const std::optional<double>> scores) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(scores.size()));
  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < scores.size(); ++s) {
    if (scores[s] && std::isfinite(*scores[s]) && (!best || *scores[s] < *scores[*best])) best = s;
  }
  if (!best) throw Error("selection_weights: every submodel was excluded");
  w(static_cast<Eigen::Index>(*best)) = 1.0;
  return w;
}

double submodel_focus_estimate(const SubmodelSpec& spec, const GaplmFit& fit, const FocusGradient& gradient) {
  return gradient.mu_beta.dot(spec.embed(fit.beta_hat)) + gradient.offset;
}

FmaResult fma_estimate(const Eigen::VectorXd& weights, std::span<const SubmodelSpec> specs,
                       std::span<const double> mu_hats, const FicInputs& in, double level, bool general) {
  if (static_cast<std::size_t>(weights.size()) != specs.size() || specs.size() != mu_hats.size()) {
    throw ConfigError("fma_estimate: weights, submodels and estimates must have equal length");
  }
  const int d = in.d();
  FmaResult out;
  out.level = level;
  out.z = two_sided_critical(level);
  out.plugin_only = general;

  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const double w = weights(static_cast<Eigen::Index>(s));
    if (w == 0.0) continue;
    out.mu_hat += w * mu_hats[s];
    Q += w * submodel_r(specs[s], in.D_hat) * in.D_hat;
  }

  Eigen::VectorXd shift = Eigen::VectorXd::Zero(d);
  shift.tail(in.du()) = in.delta_hat;
  const double root_n = std::sqrt(static_cast<double>(in.n));
  out.correction_term = in.mu_beta.dot(Q * shift - shift) / root_n;
  const double half = out.z * std::sqrt(in.kappa2_hat) / root_n;
  out.low = out.mu_hat - out.correction_term - half;
  out.up = out.mu_hat - out.correction_term + half;
  return out;
}

}  // namespace gaplm

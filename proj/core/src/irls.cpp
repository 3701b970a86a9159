#include "gaplm/irls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gaplm {
namespace {

// Largest change of the linear predictor a Newton step may still propose
// once the quasi-likelihood has stopped moving.
constexpr double kDivergentStep = 1e-3;

std::string column_name(const DesignLayout& layout, const DesignNames& names, int col) {
  if (col == 0) return "(intercept)";
  for (std::size_t a = 0; a < layout.block_start.size(); ++a) {
    const int start = layout.block_start[a];
    if (col >= start && col < start + layout.block_free[a]) {
      const std::string base = a < names.smooth.size() ? names.smooth[a] : "smooth" + std::to_string(a);
      return base + "[b" + std::to_string(col - start + 1) + "]";
    }
  }
  const auto k = static_cast<std::size_t>(col - layout.linear_start);
  return k < names.linear.size() ? names.linear[k] : "z" + std::to_string(k);
}

void check_rank(const Eigen::MatrixXd& x, const DesignLayout& layout, const DesignNames& names) {
  // Unit-norm columns so that the rank threshold is scale free.
  Eigen::MatrixXd scaled = x;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const double nrm = scaled.col(j).norm();
    if (nrm == 0.0) {
      const std::string nm = column_name(layout, names, static_cast<int>(j));
      throw RankDeficientError("working design is rank deficient: column '" + nm + "' is identically zero",
                               static_cast<int>(j), nm);
    }
    scaled.col(j) /= nrm;
  }
  constexpr double threshold = 1e-9;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(threshold);
  if (qr.rank() == scaled.cols()) return;

  // Locate the first column lying in the span of its predecessors.
  for (Eigen::Index k = 1; k < scaled.cols(); ++k) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> partial(scaled.leftCols(k + 1));
    partial.setThreshold(threshold);
    if (partial.rank() < k + 1) {
      const std::string nm = column_name(layout, names, static_cast<int>(k));
      throw RankDeficientError("working design is rank deficient: column '" + nm +
                                   "' is a linear combination of earlier columns",
                               static_cast<int>(k), nm);
    }
  }
  throw RankDeficientError("working design is rank deficient", static_cast<int>(scaled.cols()) - 1,
                           column_name(layout, names, static_cast<int>(scaled.cols()) - 1));
}

GaplmFit assemble(const Eigen::VectorXd& theta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                  const BasisExpansion& basis, const DesignLayout& layout, const QuasiFamily& family) {
  GaplmFit fit;
  fit.family = family;
  fit.specs = basis.specs;
  fit.layout = layout;
  fit.theta = theta;
  fit.linear_predictor = x * theta;
  fit.qloglik = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    fit.qloglik += family.quasi_loglik_linear(fit.linear_predictor(i), y(i));
  }

  fit.intercept = theta(0);
  for (int a = 0; a < basis.covariates(); ++a) {
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(basis.block_width(a));
    gamma.tail(layout.block_free[static_cast<std::size_t>(a)]) =
        theta.segment(layout.block_start[static_cast<std::size_t>(a)], layout.block_free[static_cast<std::size_t>(a)]);
    const Eigen::VectorXd means = basis.block_means(a);
    const double offset = means.dot(gamma);
    fit.gamma_hat.push_back(std::move(gamma));
    fit.block_means.push_back(means);
    fit.center_offsets.push_back(offset);
    fit.intercept += offset;
  }
  fit.beta_hat = theta.segment(layout.linear_start, layout.linear_count);
  return fit;
}

void attach_covariance(GaplmFit& fit, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool sandwich) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = fit.family.working_weight(fit.linear_predictor(i));
  fit.fisher = x.transpose() * w.asDiagonal() * x;
  const Eigen::LLT<Eigen::MatrixXd> llt(fit.fisher);
  if (llt.info() != Eigen::Success) throw SingularityError("irls_fit: Fisher information is not positive definite");
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(k, k));
  if (sandwich) {
    Eigen::VectorXd q2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double q = fit.family.q1(fit.linear_predictor(i), y(i));
      q2(i) = q * q;
    }
    const Eigen::MatrixXd meat = x.transpose() * q2.asDiagonal() * x;
    inv = inv * meat * inv;
  }
  fit.covariance = 0.5 * (inv + inv.transpose());
  const auto& layout = fit.layout;
  fit.beta_cov = fit.covariance.block(layout.linear_start, layout.linear_start, layout.linear_count,
                                      layout.linear_count);
}

}  // namespace

DesignLayout DesignLayout::from(const BasisExpansion& basis, int linear_count) {
  DesignLayout layout;
  int pos = 1;
  for (int a = 0; a < basis.covariates(); ++a) {
    layout.block_start.push_back(pos);
    layout.block_free.push_back(basis.block_width(a) - 1);
    pos += basis.block_width(a) - 1;
  }
  layout.linear_start = pos;
  layout.linear_count = linear_count;
  layout.total = pos + linear_count;
  return layout;
}

Eigen::MatrixXd working_design(const BasisExpansion& basis, const Eigen::MatrixXd& z) {
  const auto layout = DesignLayout::from(basis, static_cast<int>(z.cols()));
  const Eigen::Index n = basis.rows();
  Eigen::MatrixXd x(n, layout.total);
  x.col(0).setOnes();
  for (int a = 0; a < basis.covariates(); ++a) {
    const auto free = layout.block_free[static_cast<std::size_t>(a)];
    x.middleCols(layout.block_start[static_cast<std::size_t>(a)], free) = basis.block(a).rightCols(free);
  }
  if (z.cols() > 0) x.rightCols(z.cols()) = z;
  return x;
}

QuasiObjective::QuasiObjective(Eigen::MatrixXd design, Eigen::VectorXd y, QuasiFamily family)
    : design_(std::move(design)), y_(std::move(y)), family_(family) {}

double QuasiObjective::value(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd m = design_ * theta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) total += family_.quasi_loglik_linear(m(i), y_(i));
  return total;
}

Eigen::VectorXd QuasiObjective::gradient(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd m = design_ * theta;
  Eigen::VectorXd q(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) q(i) = family_.q1(m(i), y_(i));
  return design_.transpose() * q;
}

Eigen::MatrixXd QuasiObjective::information(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd m = design_ * theta;
  Eigen::VectorXd w(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) w(i) = family_.working_weight(m(i));
  return design_.transpose() * w.asDiagonal() * design_;
}

CenteredComponent GaplmFit::component(int covariate) const {
  CenteredComponent c;
  c.spec = specs.at(static_cast<std::size_t>(covariate));
  c.gamma = gamma_hat.at(static_cast<std::size_t>(covariate));
  c.offset = center_offsets.at(static_cast<std::size_t>(covariate));
  return c;
}

double GaplmFit::predict_linear(std::span<const double> x_unit, const Eigen::VectorXd& z) const {
  if (x_unit.size() != specs.size() || z.size() != beta_hat.size()) {
    throw ConfigError("predict_linear: dimension mismatch with the fitted model");
  }
  double m = intercept + z.dot(beta_hat);
  for (std::size_t a = 0; a < specs.size(); ++a) m += component(static_cast<int>(a))(x_unit[a]);
  return m;
}

double GaplmFit::predict_response(std::span<const double> x_unit, const Eigen::VectorXd& z) const {
  return family.inverse_link(predict_linear(x_unit, z));
}

Eigen::VectorXd GaplmFit::level_gradient(std::span<const std::pair<int, double>> eta_terms,
                                         const Eigen::VectorXd& c) const {
  if (c.size() != beta_hat.size()) throw ConfigError("level_gradient: coefficient length mismatch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
  g(0) = 1.0;
  for (std::size_t a = 0; a < specs.size(); ++a) {
    // level = theta_0 + sum_{unlisted} mean_a . gamma_a + sum_{listed} b_a(x*) . gamma_a
    Eigen::VectorXd row = block_means[a];
    for (const auto& [cov, x] : eta_terms) {
      if (static_cast<std::size_t>(cov) == a) row = eval_basis(x, specs[a]);
    }
    const int free = layout.block_free[a];
    g.segment(layout.block_start[a], free) = row.tail(free);
  }
  g.segment(layout.linear_start, layout.linear_count) = c;
  return g;
}

GaplmFit irls_fit(const Eigen::VectorXd& y, const BasisExpansion& basis, const Eigen::MatrixXd& z,
                  const QuasiFamily& family, const IrlsControls& controls, const DesignNames& names) {
  const Eigen::Index n = y.size();
  if (basis.rows() != n || z.rows() != n) throw ConfigError("irls_fit: row counts of y, basis and Z differ");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!family.in_support(y(i))) {
      std::ostringstream msg;
      msg << "response value " << y(i) << " at row " << i << " is outside the support of " << family.name();
      throw DataError(msg.str());
    }
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      if (!std::isfinite(z(i, j))) {
        throw DataError("non-finite linear covariate at row " + std::to_string(i) + ", column " +
                        std::to_string(j));
      }
    }
  }

  const auto layout = DesignLayout::from(basis, static_cast<int>(z.cols()));
  if (n <= layout.total) {
    throw DataError("irls_fit: need more observations (" + std::to_string(n) + ") than coefficients (" +
                    std::to_string(layout.total) + ")");
  }
  const Eigen::MatrixXd x = working_design(basis, z);
  check_rank(x, layout, names);

  const QuasiObjective objective(x, y, family);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(layout.total);
  theta(0) = family.link(family.initial_mean(y.mean()));
  double ll = objective.value(theta);

  auto last_iterate = [&](int iters) {
    auto fit = std::make_shared<GaplmFit>(assemble(theta, x, y, basis, layout, family));
    fit->iterations = iters;
    fit->converged = false;
    try {
      attach_covariance(*fit, x, y, controls.sandwich);
    } catch (const SingularityError&) {
    }
    return fit;
  };

  bool converged = false;
  bool flat = false;
  int iter = 0;
  Eigen::VectorXd m = x * theta;
  Eigen::VectorXd w(n);
  Eigen::VectorXd q(n);
  for (iter = 1; iter <= controls.max_iter; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      w(i) = family.working_weight(m(i));
      q(i) = family.q1(m(i), y(i));
    }
    const Eigen::VectorXd score = x.transpose() * q;
    const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success) throw SingularityError("irls_fit: working information is singular");
    const Eigen::VectorXd step = ldlt.solve(score);
    const bool gradient_ok = score.lpNorm<Eigen::Infinity>() < controls.tol * (1.0 + std::abs(ll));

    if (gradient_ok || flat) {
      // At a finite maximiser the Newton step vanishes with the gradient. A
      // step that stays O(1) on a flat likelihood means the supremum is only
      // reached at infinity (separation).
      if ((x * step).lpNorm<Eigen::Infinity>() > kDivergentStep) {
        throw NonConvergenceError(
            "irls_fit: quasi-likelihood maximum is at infinity (complete or quasi-complete separation)",
            last_iterate(iter));
      }
      // One last full step; near the maximiser it squares the remaining error.
      const Eigen::VectorXd polished = theta + step;
      const double ll_polished = objective.value(polished);
      if (std::isfinite(ll_polished) && ll_polished >= ll - 64 * std::numeric_limits<double>::epsilon() * std::abs(ll)) {
        theta = polished;
        ll = ll_polished;
      }
      converged = true;
      break;
    }

    bool accepted = false;
    double t = 1.0;
    Eigen::VectorXd candidate;
    double ll_new = ll;
    for (int h = 0; h <= controls.max_halvings; ++h, t *= 0.5) {
      candidate = theta + t * step;
      ll_new = objective.value(candidate);
      if (std::isfinite(ll_new) && ll_new >= ll) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw NonConvergenceError("irls_fit: step-halving exhausted without increasing the quasi-likelihood",
                                last_iterate(iter));
    }

    flat = std::abs(ll_new - ll) < controls.rel_tol * (std::abs(ll) + 1e-300);
    theta = candidate;
    ll = ll_new;
    m = x * theta;
  }
  if (!converged) {
    throw NonConvergenceError("irls_fit: no convergence within " + std::to_string(controls.max_iter) +
                                  " iterations",
                              last_iterate(controls.max_iter));
  }

  GaplmFit fit = assemble(theta, x, y, basis, layout, family);
  fit.iterations = iter;
  fit.converged = true;

  attach_covariance(fit, x, y, controls.sandwich);
  return fit;
}

}  // namespace gaplm

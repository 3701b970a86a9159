#include "gaplm/spline_basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "gaplm/error.hpp"
#include "gaplm/log.hpp"

namespace gaplm {

std::vector<double> make_knots(int degree, int interior) {
  if (degree < 1) throw DomainError("spline degree must be >= 1");
  if (interior < 0) throw DomainError("number of interior knots must be >= 0");

  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(interior + 2 * (degree + 1)));
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), 0.0);
  for (int k = 1; k <= interior; ++k) {
    knots.push_back(static_cast<double>(k) / static_cast<double>(interior + 1));
  }
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), 1.0);
  return knots;
}

std::vector<double> SplineSpec::knots() const { return make_knots(degree, interior); }

double SplineSpec::to_unit(double x) const {
  const double width = upper - lower;
  double u = width > 0.0 ? (x - lower) / width : 0.0;
  if (u < 0.0 || u > 1.0) {
    std::ostringstream msg;
    msg << "value " << x << " outside the training range [" << lower << ", " << upper
        << "]; clamped to the boundary";
    warn(msg.str());
    u = std::clamp(u, 0.0, 1.0);
  }
  return u;
}

int eval_nonzero_basis(double x, int degree, std::span<const double> knots, std::span<double> out) {
  const int n_basis = static_cast<int>(knots.size()) - degree - 1;
  // Knot span: the last span is closed on the right so that x = 1 is covered.
  int span;
  if (x >= knots[static_cast<std::size_t>(n_basis)]) {
    span = n_basis - 1;
  } else {
    const auto it = std::upper_bound(knots.begin() + degree, knots.begin() + n_basis + 1, x);
    span = static_cast<int>(it - knots.begin()) - 1;
  }

  // Triangular Cox-de Boor scheme (stable, exact partition of unity up to rounding).
  double left[32];
  double right[32];
  out[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = x - knots[static_cast<std::size_t>(span + 1 - j)];
    right[j] = knots[static_cast<std::size_t>(span + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
  return span - degree;
}

Eigen::VectorXd eval_basis(double x, const SplineSpec& spec) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream msg;
    msg << "eval_basis: x = " << x << " lies outside [0, 1]; rescale the covariate first";
    throw DomainError(msg.str());
  }
  if (spec.degree < 1 || spec.degree > 30) throw DomainError("spline degree must be in [1, 30]");
  const auto knots = spec.knots();
  Eigen::VectorXd values = Eigen::VectorXd::Zero(spec.dimension());
  std::vector<double> local(static_cast<std::size_t>(spec.degree + 1));
  const int first = eval_nonzero_basis(x, spec.degree, knots, local);
  for (int r = 0; r <= spec.degree; ++r) values(first + r) = local[static_cast<std::size_t>(r)];
  return values;
}

BasisExpansion expand_design(const Eigen::MatrixXd& x_unit, std::span<const SplineSpec> specs) {
  if (static_cast<std::size_t>(x_unit.cols()) != specs.size()) {
    throw ConfigError("expand_design: one SplineSpec per covariate column is required");
  }
  BasisExpansion out;
  out.specs.assign(specs.begin(), specs.end());
  int total = 0;
  for (const auto& s : specs) {
    if (s.degree < 1 || s.degree > 30) throw DomainError("spline degree must be in [1, 30]");
    if (s.interior < 0) throw DomainError("number of interior knots must be >= 0");
    out.offsets.push_back(total);
    total += s.dimension();
  }

  const Eigen::Index n = x_unit.rows();
  out.columns = Eigen::MatrixXd::Zero(n, total);
  for (int a = 0; a < static_cast<int>(specs.size()); ++a) {
    const auto& s = specs[static_cast<std::size_t>(a)];
    const auto knots = s.knots();
    std::vector<double> local(static_cast<std::size_t>(s.degree + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = x_unit(i, a);
      if (!std::isfinite(x)) {
        throw DataError("non-finite smooth covariate value at row " + std::to_string(i) + ", column " +
                        std::to_string(a));
      }
      if (x < 0.0 || x > 1.0) {
        throw DomainError("smooth covariate value at row " + std::to_string(i) + ", column " +
                          std::to_string(a) + " lies outside [0, 1]");
      }
      const int first = eval_nonzero_basis(x, s.degree, knots, local);
      for (int r = 0; r <= s.degree; ++r) {
        out.columns(i, out.offsets[static_cast<std::size_t>(a)] + first + r) = local[static_cast<std::size_t>(r)];
      }
    }
  }
  out.column_means = n > 0 ? Eigen::VectorXd(out.columns.colwise().mean().transpose())
                           : Eigen::VectorXd::Zero(total);
  return out;
}

double CenteredComponent::raw(double x_unit) const { return eval_basis(x_unit, spec).dot(gamma); }

Eigen::VectorXd CenteredComponent::gradient(double x_unit, const Eigen::VectorXd& block_means) const {
  return eval_basis(x_unit, spec) - block_means;
}

CenteredComponent center_component(const Eigen::VectorXd& gamma_block, const BasisExpansion& expansion,
                                   int covariate) {
  if (gamma_block.size() != expansion.block_width(covariate)) {
    throw ConfigError("center_component: coefficient block has the wrong length");
  }
  CenteredComponent c;
  c.spec = expansion.specs.at(static_cast<std::size_t>(covariate));
  c.gamma = gamma_block;
  // Mean of the raw component over the sample equals gamma . column means.
  c.offset = expansion.block_means(covariate).dot(gamma_block);
  return c;
}

}  // namespace gaplm

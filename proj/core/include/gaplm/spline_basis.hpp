#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gaplm {

/// Equally spaced, clamped B-spline layout for one smooth covariate.
///
/// The basis lives on [0, 1]; `lower`/`upper` record the covariate's original
/// range so that raw values can be mapped onto the unit interval.
struct SplineSpec {
  int degree = 3;
  int interior = 0;
  double lower = 0.0;
  double upper = 1.0;

  /// Number of basis functions, J + degree + 1.
  int dimension() const noexcept { return interior + degree + 1; }

  std::vector<double> knots() const;

  /// Maps a value in the covariate's own units onto [0, 1]. Values outside
  /// [lower, upper] are clamped with a warning.
  double to_unit(double x) const;

  /// Inverse of to_unit (no clamping).
  double from_unit(double u) const noexcept { return lower + u * (upper - lower); }

  friend bool operator==(const SplineSpec&, const SplineSpec&) = default;
};

/// Clamped knot vector on [0,1] with `interior` equally spaced interior knots.
/// Length is interior + 2 * (degree + 1).
std::vector<double> make_knots(int degree, int interior);

/// All basis functions of `spec` at x in [0, 1] (Cox-de Boor recursion).
Eigen::VectorXd eval_basis(double x, const SplineSpec& spec);

/// Evaluates the degree+1 nonzero basis functions at x and returns the index
/// of the first of them. `out` must hold degree+1 values.
int eval_nonzero_basis(double x, int degree, std::span<const double> knots, std::span<double> out);

/// Evaluated B-spline design for p smooth covariates.
struct BasisExpansion {
  /// n x sum(dimension) raw basis values, covariate blocks side by side.
  Eigen::MatrixXd columns;
  /// Training-sample mean of every column (used for centering).
  Eigen::VectorXd column_means;
  std::vector<SplineSpec> specs;
  /// First column of each covariate's block.
  std::vector<int> offsets;

  int rows() const noexcept { return static_cast<int>(columns.rows()); }
  int covariates() const noexcept { return static_cast<int>(specs.size()); }
  int block_width(int covariate) const { return specs.at(covariate).dimension(); }
  int total_columns() const noexcept { return static_cast<int>(columns.cols()); }

  auto block(int covariate) const {
    return columns.middleCols(offsets.at(covariate), block_width(covariate));
  }
  auto block_means(int covariate) const {
    return column_means.segment(offsets.at(covariate), block_width(covariate));
  }
};

/// Expands every column of X (already rescaled to [0,1]) with its spec.
/// Throws DataError naming the row/column of any non-finite entry and
/// DomainError for entries outside [0,1].
BasisExpansion expand_design(const Eigen::MatrixXd& x_unit, std::span<const SplineSpec> specs);

/// Empirically centered spline component
///   eta(x) = sum_j gamma_j b_j(x) - (1/n) sum_i sum_j gamma_j b_j(X_i).
struct CenteredComponent {
  SplineSpec spec;
  Eigen::VectorXd gamma;
  /// Training mean of the raw component; subtracted on evaluation.
  double offset = 0.0;

  double raw(double x_unit) const;
  double operator()(double x_unit) const { return raw(x_unit) - offset; }

  /// Centered basis row b(x) - column means, so that eta(x) = row . gamma.
  Eigen::VectorXd gradient(double x_unit, const Eigen::VectorXd& block_means) const;
};

CenteredComponent center_component(const Eigen::VectorXd& gamma_block, const BasisExpansion& expansion,
                                   int covariate);

}  // namespace gaplm

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gaplm/irls.hpp"
#include "gaplm/quasi_family.hpp"

namespace gaplm {

/// How the reference knot count N_r is derived from n.
///   Auto:  ceil(n^{1/5.5})
///   Over:  ceil(n^{1/3})   (labelled over-smoothing in the simulation tables)
///   Under: ceil(n^{1/10})
enum class KnotMode { Auto, Over, Under };

KnotMode parse_knot_mode(std::string_view text);
std::string to_string(KnotMode mode);

int reference_knot_count(int n, KnotMode mode);

/// Integers in [ceil(2/3 N_r), floor(4/3 N_r)], restricted to >= 0.
std::vector<int> knot_candidates(int n, KnotMode mode);

struct KnotSearch {
  int n = 0;
  int reference = 0;
  std::vector<int> candidates;
  /// -2 qloglik + q log n per candidate; empty when the fit failed.
  std::vector<std::optional<double>> bic_trace;
  int chosen = 0;
};

/// Fits the full model once per candidate (same J for every smooth
/// covariate) and keeps the BIC minimiser; ties go to the smaller J.
/// `x_unit` holds the smooth covariates already on [0,1].
KnotSearch select_knots(const Eigen::VectorXd& y, const Eigen::MatrixXd& x_unit, const Eigen::MatrixXd& z,
                        const QuasiFamily& family, int degree, KnotMode mode = KnotMode::Auto,
                        const IrlsControls& controls = {});

/// Same search over an explicit candidate list.
KnotSearch select_knots(const Eigen::VectorXd& y, const Eigen::MatrixXd& x_unit, const Eigen::MatrixXd& z,
                        const QuasiFamily& family, int degree, const std::vector<int>& candidates,
                        const IrlsControls& controls = {});

/// One SplineSpec per smooth covariate with a common degree and J.
std::vector<SplineSpec> uniform_specs(int covariates, int degree, int interior);

}  // namespace gaplm

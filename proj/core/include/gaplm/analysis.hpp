#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaplm/dataset.hpp"
#include "gaplm/fic.hpp"
#include "gaplm/knot_select.hpp"

namespace gaplm {

enum class WeightScheme { FIC, SFIC, AIC, BIC, Full };

WeightScheme parse_weight_scheme(std::string_view text);
std::string to_string(WeightScheme scheme);

/// How FIC and S-FIC classify a left-out row in cross-validation.
///   Averaged: weighted average of the submodel linear predictors.
///   Selected: the linear predictor of the highest-weight submodel.
enum class LoocvPrediction { Averaged, Selected };

struct AnalysisOptions {
  int degree = 3;
  KnotMode knot_mode = KnotMode::Auto;
  /// Fixed interior knot count; overrides the BIC search when set.
  std::optional<int> knots;
  double level = 0.95;
  WeightScheme weights = WeightScheme::SFIC;
  PsiWeighting psi_weighting = PsiWeighting::Score;
  bool sandwich = false;
  /// Restricts the sweep; all 2^{d_u} submodels when empty.
  std::optional<std::vector<SubmodelSpec>> submodels;
  int curve_points = 101;
  int threads = 1;
};

struct CoefficientRow {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 0.0;

  friend bool operator==(const CoefficientRow&, const CoefficientRow&) = default;
};

struct SubmodelRow {
  std::string label;
  std::string bits;
  int parameters = 0;
  std::optional<double> qloglik;
  std::optional<double> aic;
  std::optional<double> bic;
  std::optional<double> fic;
  std::optional<double> mu_hat;
  double weight = 0.0;
  /// Set when the fit or the FIC of this submodel failed.
  std::optional<std::string> error;

  friend bool operator==(const SubmodelRow&, const SubmodelRow&) = default;
};

struct FicReport {
  std::string focus;
  WeightScheme scheme = WeightScheme::SFIC;
  double kappa2 = 0.0;
  std::vector<SubmodelRow> rows;
  std::optional<std::string> argmin_fic;
  std::optional<std::string> argmin_aic;
  std::optional<std::string> argmin_bic;

  friend bool operator==(const FicReport&, const FicReport&) = default;
};

struct CurveSample {
  std::string covariate;
  /// Grid in file units, standardized units and on [0,1].
  std::vector<double> x;
  std::vector<double> x_standardized;
  std::vector<double> x_unit;
  std::vector<double> eta;
  std::vector<double> se;

  friend bool operator==(const CurveSample&, const CurveSample&) = default;
};

struct LoocvResult {
  LoocvPrediction prediction = LoocvPrediction::Averaged;
  int n = 0;
  int knots = 0;
  /// Misclassification ratio per method (AIC, BIC, FIC, S-FIC).
  std::vector<std::pair<std::string, double>> ratios;
  /// Folds whose prediction failed (counted as errors).
  int failed_folds = 0;

  friend bool operator==(const LoocvResult&, const LoocvResult&) = default;
};

struct KnotTrace {
  int reference = 0;
  std::vector<int> candidates;
  std::vector<std::optional<double>> bic;
  int chosen = 0;

  friend bool operator==(const KnotTrace&, const KnotTrace&) = default;
};

struct AnalysisReport {
  std::string family;
  int n = 0;
  int rows_dropped = 0;
  double level = 0.95;
  std::vector<std::string> smooth;
  CovariatePartition partition;
  std::vector<ColumnTransform> transforms;
  KnotTrace knots;
  std::vector<CoefficientRow> coefficients;
  std::vector<FicReport> foci;
  std::vector<FmaResult> fma;
  std::vector<CurveSample> curves;
  std::optional<LoocvResult> loocv;
  /// Failure annotations of a partial report.
  std::vector<std::string> failures;

  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

/// Knot search, full fit, coefficient table, curves and, for every focus,
/// the submodel sweep with the chosen weighting and its averaged estimate.
/// Stage failures are recorded in `failures` and later stages skipped.
AnalysisReport analyze(const Dataset& data, const std::vector<FocusSpec>& foci, const AnalysisOptions& options);

/// Leave-one-out misclassification ratios of AIC, BIC, FIC and S-FIC for a
/// binary response. Each fold uses the left-out row's linear predictor as
/// the focus and reuses `knots` interior knots.
LoocvResult loocv(const Dataset& data, int knots, const AnalysisOptions& options,
                  LoocvPrediction prediction = LoocvPrediction::Averaged);

}  // namespace gaplm

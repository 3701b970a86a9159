#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaplm/model_space.hpp"
#include "gaplm/quasi_family.hpp"

namespace gaplm {

struct DatasetConfig {
  std::string path;
  std::string response;
  /// Covariates entering through eta_a, in order.
  std::vector<std::string> smooth;
  CovariatePartition linear;
  std::string family = "bernoulli-logit";
  /// Center by the sample mean and divide by the sample sd (n - 1).
  bool standardize = true;
  /// Column names for headerless files. When set, a first row that does not
  /// parse as numbers is skipped as a header.
  std::vector<std::string> names;
  /// Columns in which a value of exactly 0 marks a missing entry.
  std::vector<std::string> zero_missing;
};

/// How one covariate was mapped from file units.
///   linear: z = (raw - center) / scale
///   smooth: s = (raw - center) / scale, u = (s - lower) / (upper - lower)
struct ColumnTransform {
  std::string name;
  double center = 0.0;
  double scale = 1.0;
  /// Range of the standardized training values (smooth covariates only).
  double lower = 0.0;
  double upper = 1.0;

  double standardize(double raw) const noexcept { return (raw - center) / scale; }
  double unstandardize(double s) const noexcept { return center + s * scale; }
  /// Standardized value to the unit interval of the spline basis.
  double unit(double s) const noexcept { return (s - lower) / (upper - lower); }
  double from_unit(double u) const noexcept { return lower + u * (upper - lower); }

  friend bool operator==(const ColumnTransform&, const ColumnTransform&) = default;
};

struct Dataset {
  Eigen::VectorXd y;
  /// n x p smooth covariates on [0,1].
  Eigen::MatrixXd x_unit;
  /// n x d linear covariates (certain first, then exploratory).
  Eigen::MatrixXd z;
  CovariatePartition partition;
  std::vector<ColumnTransform> smooth;
  std::vector<ColumnTransform> linear;
  QuasiFamily family = QuasiFamily::bernoulli_logit();
  int rows_read = 0;
  int rows_dropped = 0;

  int n() const noexcept { return static_cast<int>(y.size()); }

  /// Maps one raw row (smooth values, then linear values, in file units)
  /// to model coordinates.
  void transform_row(const std::vector<double>& raw_smooth, const std::vector<double>& raw_linear,
                     Eigen::VectorXd& x_unit_out, Eigen::VectorXd& z_out) const;

  /// Copy without row i.
  Dataset without_row(int i) const;
};

/// Column-oriented numeric table read from CSV. Empty or non-numeric cells
/// become NaN.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  int rows() const noexcept { return columns.empty() ? 0 : static_cast<int>(columns.front().size()); }
  int column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in, const std::vector<std::string>& names = {});

/// Reads config.path and prepares the model matrices.
Dataset load_csv(const DatasetConfig& config);
Dataset load_csv(std::istream& in, const DatasetConfig& config);
Dataset prepare_dataset(const CsvTable& table, const DatasetConfig& config);

}  // namespace gaplm

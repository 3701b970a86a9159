#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gaplm {

/// Linear covariates split into those always kept ("certain") and those
/// whose inclusion is uncertain ("exploratory"). Order defines beta = (beta_c, beta_u).
struct CovariatePartition {
  std::vector<std::string> certain;
  std::vector<std::string> exploratory;

  int dc() const noexcept { return static_cast<int>(certain.size()); }
  int du() const noexcept { return static_cast<int>(exploratory.size()); }
  int d() const noexcept { return dc() + du(); }

  /// Throws ConfigError when names repeat.
  void validate() const;
  /// Position of `name` in beta, or -1.
  int index_of(std::string_view name) const;
  std::vector<std::string> all() const;

  friend bool operator==(const CovariatePartition&, const CovariatePartition&) = default;
};

/// One submodel: the certain covariates plus a subset of exploratory ones.
///
/// pi_s (d_uS x d_u) selects the masked exploratory coordinates in order and
/// Pi_s = diag(I_dc, pi_s).
class SubmodelSpec {
 public:
  static constexpr int kMaxExploratory = 20;

  SubmodelSpec() = default;
  SubmodelSpec(int dc, int du, std::uint32_t mask);

  static SubmodelSpec full(int dc, int du);
  static SubmodelSpec narrow(int dc, int du) { return SubmodelSpec(dc, du, 0); }

  int dc() const noexcept { return dc_; }
  int du() const noexcept { return du_; }
  std::uint32_t mask() const noexcept { return mask_; }
  bool includes(int exploratory_index) const noexcept { return (mask_ >> exploratory_index) & 1U; }
  int selected_count() const noexcept;
  /// d_c + d_uS
  int size() const noexcept { return dc_ + selected_count(); }
  bool is_full() const noexcept { return selected_count() == du_; }

  /// Exploratory indices (0-based) in the submodel, increasing.
  std::vector<int> selected() const;
  /// Positions in beta (0-based) kept by Pi_s.
  std::vector<int> kept_positions() const;

  Eigen::MatrixXd pi() const;
  Eigen::MatrixXd Pi() const;
  /// Complement selector over unselected exploratory coordinates.
  Eigen::MatrixXd pi_bar() const;

  Eigen::VectorXd project(const Eigen::VectorXd& v) const;
  Eigen::VectorXd embed(const Eigen::VectorXd& w) const;
  /// Columns of a full n x d matrix kept by the submodel.
  Eigen::MatrixXd select_columns(const Eigen::MatrixXd& z) const;

  /// Digit label: 1-based beta positions of the included exploratory
  /// covariates ("0" for none). Requires d <= 9.
  std::string label() const;
  /// Bitstring over exploratory covariates, first covariate first.
  std::string bits() const;

  static SubmodelSpec parse_label(std::string_view label, int dc, int du);
  static SubmodelSpec parse_bits(std::string_view bits, int dc, int du);

  friend bool operator==(const SubmodelSpec&, const SubmodelSpec&) = default;

 private:
  int dc_ = 0;
  int du_ = 0;
  std::uint32_t mask_ = 0;
};

/// All 2^{d_u} submodels by increasing size, then lexicographically by
/// the list of included exploratory covariates. An explicit subset is
/// returned verbatim (duplicates rejected).
std::vector<SubmodelSpec> enumerate_submodels(const CovariatePartition& partition,
                                              const std::optional<std::vector<SubmodelSpec>>& subset = std::nullopt);

/// Comma-separated list of digit labels or bitstrings (prefixed "b:").
std::vector<SubmodelSpec> parse_submodel_list(std::string_view csv, const CovariatePartition& partition);

}  // namespace gaplm

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaplm/fic.hpp"
#include "gaplm/knot_select.hpp"

namespace gaplm::sim {

/// Monte-Carlo design:
///   logit P(Y=1) = sin(2 pi X1) + 5 X2^4 + 3 X2^2 - 2 + Z' beta,
///   beta = (1.5, 2, r0 (2, 1, 3) / sqrt(n)),
/// X1, X2 ~ U[0,1] independent, Z ~ N_5(0, C) with C_ij = varpi^|i-j|.
struct SimDesign {
  int n = 200;
  double r0 = 1.0;
  double varpi = 0.0;
  int replications = 200;
  std::uint64_t base_seed = 20100521;
  KnotMode knot_mode = KnotMode::Auto;
  double level = 0.95;
  int degree = 3;
  PsiWeighting weighting = PsiWeighting::Score;
  int threads = 1;

  void validate() const;
};

inline constexpr int kCertain = 2;
inline constexpr int kExploratory = 3;
inline constexpr int kFoci = 4;

enum class Method { Full, AIC, BIC, FIC, SFIC };
inline constexpr std::array<Method, 5> kMethods = {Method::Full, Method::AIC, Method::BIC, Method::FIC,
                                                   Method::SFIC};
std::string to_string(Method m);

struct SimDataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;  // n x 2, already on [0,1]
  Eigen::MatrixXd z;  // n x 5
};

Eigen::VectorXd true_beta(const SimDesign& design);
double eta1(double x);
double eta2(double x);

/// Data set `rep`; the generator is seeded from (base_seed, rep) only.
SimDataset generate_dataset(const SimDesign& design, int rep);

/// The four focus parameters of the study (mu_4 involves eta_1(0.86) + eta_2(0.53)).
std::vector<FocusSpec> study_foci();
std::array<double, kFoci> true_focus_values(const SimDesign& design);

struct Interval {
  double low = 0.0;
  double up = 0.0;
  bool contains(double v) const noexcept { return low <= v && v <= up; }
};

struct MethodOutcome {
  double estimate = 0.0;
  std::optional<Interval> interval;
};

struct ReplicationResult {
  int rep = 0;
  bool ok = false;
  std::string error;
  int knots = 0;
  /// [method][focus]
  std::array<std::array<MethodOutcome, kFoci>, 5> outcomes{};
};

ReplicationResult run_replication(const SimDesign& design, int rep);

struct CellSummary {
  /// Absent when no interval was produced (FIC/S-FIC for mu_4).
  std::optional<double> cp;
  double mse = 0.0;
  int intervals = 0;
  int covered = 0;
};

struct SimSummary {
  SimDesign design;
  int succeeded = 0;
  int failed = 0;
  std::array<double, kFoci> truth{};
  std::array<std::array<CellSummary, kFoci>, 5> cells{};
  std::vector<std::string> failures;

  const CellSummary& cell(Method m, int focus) const { return cells[static_cast<std::size_t>(m)][static_cast<std::size_t>(focus)]; }
};

/// Aggregates results in replication order (independent of execution order).
SimSummary summarize(const SimDesign& design, const std::vector<ReplicationResult>& results);

SimSummary run_study(const SimDesign& design);

/// Table layout: one row per method, CP/MSE columns per focus.
void write_summary_csv(std::ostream& os, const SimSummary& summary);

}  // namespace gaplm::sim

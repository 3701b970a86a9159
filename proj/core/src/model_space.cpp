#include "gaplm/model_space.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include "gaplm/error.hpp"

namespace gaplm {

void CovariatePartition::validate() const {
  std::set<std::string> seen;
  for (const auto& n : all()) {
    if (!seen.insert(n).second) throw ConfigError("covariate '" + n + "' is listed more than once");
  }
}

int CovariatePartition::index_of(std::string_view name) const {
  for (int i = 0; i < dc(); ++i) {
    if (certain[static_cast<std::size_t>(i)] == name) return i;
  }
  for (int k = 0; k < du(); ++k) {
    if (exploratory[static_cast<std::size_t>(k)] == name) return dc() + k;
  }
  return -1;
}

std::vector<std::string> CovariatePartition::all() const {
  std::vector<std::string> out = certain;
  out.insert(out.end(), exploratory.begin(), exploratory.end());
  return out;
}

SubmodelSpec::SubmodelSpec(int dc, int du, std::uint32_t mask) : dc_(dc), du_(du), mask_(mask) {
  if (dc < 0 || du < 0) throw ConfigError("submodel dimensions must be non-negative");
  if (du > kMaxExploratory) throw ConfigError("at most 20 exploratory covariates are supported");
  if (du < 32 && (mask >> du) != 0U) throw ConfigError("submodel mask selects a non-existent covariate");
}

SubmodelSpec SubmodelSpec::full(int dc, int du) {
  return SubmodelSpec(dc, du, du == 0 ? 0U : ((1U << du) - 1U));
}

int SubmodelSpec::selected_count() const noexcept { return std::popcount(mask_); }

std::vector<int> SubmodelSpec::selected() const {
  std::vector<int> out;
  for (int k = 0; k < du_; ++k) {
    if (includes(k)) out.push_back(k);
  }
  return out;
}

std::vector<int> SubmodelSpec::kept_positions() const {
  std::vector<int> out;
  for (int i = 0; i < dc_; ++i) out.push_back(i);
  for (int k : selected()) out.push_back(dc_ + k);
  return out;
}

Eigen::MatrixXd SubmodelSpec::pi() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(selected_count(), du_);
  int r = 0;
  for (int k : selected()) p(r++, k) = 1.0;
  return p;
}

Eigen::MatrixXd SubmodelSpec::Pi() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(size(), dc_ + du_);
  const auto kept = kept_positions();
  for (std::size_t r = 0; r < kept.size(); ++r) p(static_cast<Eigen::Index>(r), kept[r]) = 1.0;
  return p;
}

Eigen::MatrixXd SubmodelSpec::pi_bar() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(du_ - selected_count(), du_);
  int r = 0;
  for (int k = 0; k < du_; ++k) {
    if (!includes(k)) p(r++, k) = 1.0;
  }
  return p;
}

Eigen::VectorXd SubmodelSpec::project(const Eigen::VectorXd& v) const {
  if (v.size() != dc_ + du_) throw ConfigError("project: vector length must equal d");
  const auto kept = kept_positions();
  Eigen::VectorXd out(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t r = 0; r < kept.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(kept[r]);
  return out;
}

Eigen::VectorXd SubmodelSpec::embed(const Eigen::VectorXd& w) const {
  if (w.size() != size()) throw ConfigError("embed: vector length must equal d_c + d_uS");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dc_ + du_);
  const auto kept = kept_positions();
  for (std::size_t r = 0; r < kept.size(); ++r) out(kept[r]) = w(static_cast<Eigen::Index>(r));
  return out;
}

Eigen::MatrixXd SubmodelSpec::select_columns(const Eigen::MatrixXd& z) const {
  if (z.cols() != dc_ + du_) throw ConfigError("select_columns: matrix must have d columns");
  const auto kept = kept_positions();
  Eigen::MatrixXd out(z.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t r = 0; r < kept.size(); ++r) out.col(static_cast<Eigen::Index>(r)) = z.col(kept[r]);
  return out;
}

std::string SubmodelSpec::label() const {
  if (dc_ + du_ > 9) throw ConfigError("digit labels need d <= 9; use bitstrings");
  std::string out;
  for (int k : selected()) out.push_back(static_cast<char>('0' + dc_ + k + 1));
  return out.empty() ? "0" : out;
}

std::string SubmodelSpec::bits() const {
  std::string out;
  for (int k = 0; k < du_; ++k) out.push_back(includes(k) ? '1' : '0');
  return out;
}

SubmodelSpec SubmodelSpec::parse_label(std::string_view label, int dc, int du) {
  if (label.empty()) throw ConfigError("empty submodel label");
  if (label == "0") return SubmodelSpec(dc, du, 0);
  std::uint32_t mask = 0;
  for (char ch : label) {
    const int pos = ch - '0';
    if (ch < '1' || ch > '9' || pos <= dc || pos > dc + du) {
      throw ConfigError("submodel label '" + std::string(label) + "' names a position that is not exploratory");
    }
    const std::uint32_t bit = 1U << (pos - dc - 1);
    if (mask & bit) throw ConfigError("submodel label '" + std::string(label) + "' repeats a position");
    mask |= bit;
  }
  return SubmodelSpec(dc, du, mask);
}

SubmodelSpec SubmodelSpec::parse_bits(std::string_view bits, int dc, int du) {
  if (static_cast<int>(bits.size()) != du) {
    throw ConfigError("submodel bitstring '" + std::string(bits) + "' must have one digit per exploratory covariate");
  }
  std::uint32_t mask = 0;
  for (int k = 0; k < du; ++k) {
    const char ch = bits[static_cast<std::size_t>(k)];
    if (ch == '1') {
      mask |= 1U << k;
    } else if (ch != '0') {
      throw ConfigError("submodel bitstring '" + std::string(bits) + "' may only contain 0 and 1");
    }
  }
  return SubmodelSpec(dc, du, mask);
}

std::vector<SubmodelSpec> enumerate_submodels(const CovariatePartition& partition,
                                              const std::optional<std::vector<SubmodelSpec>>& subset) {
  const int dc = partition.dc();
  const int du = partition.du();
  if (du > SubmodelSpec::kMaxExploratory) throw ConfigError("at most 20 exploratory covariates are supported");

  if (subset) {
    std::set<std::uint32_t> seen;
    for (const auto& s : *subset) {
      if (s.dc() != dc || s.du() != du) throw ConfigError("submodel subset does not match the covariate partition");
      if (!seen.insert(s.mask()).second) throw ConfigError("duplicate submodel in the requested subset");
    }
    return *subset;
  }

  std::vector<SubmodelSpec> all;
  all.reserve(std::size_t{1} << du);
  for (std::uint32_t mask = 0; mask < (1U << du); ++mask) all.emplace_back(dc, du, mask);
  std::sort(all.begin(), all.end(), [](const SubmodelSpec& a, const SubmodelSpec& b) {
    if (a.selected_count() != b.selected_count()) return a.selected_count() < b.selected_count();
    return a.selected() < b.selected();
  });
  return all;
}

std::vector<SubmodelSpec> parse_submodel_list(std::string_view csv, const CovariatePartition& partition) {
  std::vector<SubmodelSpec> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    auto token = csv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (!token.empty()) {
      if (token.starts_with("b:")) {
        out.push_back(SubmodelSpec::parse_bits(token.substr(2), partition.dc(), partition.du()));
      } else {
        out.push_back(SubmodelSpec::parse_label(token, partition.dc(), partition.du()));
      }
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return enumerate_submodels(partition, out);
}

}  // namespace gaplm

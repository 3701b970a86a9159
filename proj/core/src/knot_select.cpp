#include "gaplm/knot_select.hpp"

#include <cmath>

#include "gaplm/error.hpp"
#include "gaplm/fic.hpp"
#include "gaplm/log.hpp"

namespace gaplm {

KnotMode parse_knot_mode(std::string_view text) {
  if (text == "auto") return KnotMode::Auto;
  if (text == "over" || text == "auto-over") return KnotMode::Over;
  if (text == "under" || text == "auto-under") return KnotMode::Under;
  throw ConfigError("unknown knot mode '" + std::string(text) + "' (expected auto, over or under)");
}

std::string to_string(KnotMode mode) {
  switch (mode) {
    case KnotMode::Auto: return "auto";
    case KnotMode::Over: return "over";
    case KnotMode::Under: return "under";
  }
  return {};
}

int reference_knot_count(int n, KnotMode mode) {
  if (n < 1) throw DomainError("knot selection needs n >= 1");
  double exponent = 1.0 / 5.5;
  if (mode == KnotMode::Over) exponent = 1.0 / 3.0;
  if (mode == KnotMode::Under) exponent = 1.0 / 10.0;
  return static_cast<int>(std::ceil(std::pow(static_cast<double>(n), exponent)));
}

std::vector<int> knot_candidates(int n, KnotMode mode) {
  const int nr = reference_knot_count(n, mode);
  // Integer arithmetic keeps exact multiples (e.g. 2/3 * 3 = 2) exact.
  const int lo = std::max(0, (2 * nr + 2) / 3);
  const int hi = (4 * nr) / 3;
  std::vector<int> out;
  for (int j = lo; j <= hi; ++j) out.push_back(j);
  if (out.empty()) out.push_back(lo);
  return out;
}

std::vector<SplineSpec> uniform_specs(int covariates, int degree, int interior) {
  std::vector<SplineSpec> specs(static_cast<std::size_t>(covariates));
  for (auto& s : specs) {
    s.degree = degree;
    s.interior = interior;
  }
  return specs;
}

KnotSearch select_knots(const Eigen::VectorXd& y, const Eigen::MatrixXd& x_unit, const Eigen::MatrixXd& z,
                        const QuasiFamily& family, int degree, KnotMode mode, const IrlsControls& controls) {
  auto search = select_knots(y, x_unit, z, family, degree, knot_candidates(static_cast<int>(y.size()), mode),
                             controls);
  search.reference = reference_knot_count(static_cast<int>(y.size()), mode);
  return search;
}

KnotSearch select_knots(const Eigen::VectorXd& y, const Eigen::MatrixXd& x_unit, const Eigen::MatrixXd& z,
                        const QuasiFamily& family, int degree, const std::vector<int>& candidates,
                        const IrlsControls& controls) {
  if (candidates.empty()) throw ConfigError("select_knots: no candidate knot counts");
  KnotSearch search;
  search.n = static_cast<int>(y.size());
  search.candidates = candidates;
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    try {
      const auto specs = uniform_specs(static_cast<int>(x_unit.cols()), degree, candidates[k]);
      const auto basis = expand_design(x_unit, specs);
      const auto fit = irls_fit(y, basis, z, family, controls);
      search.bic_trace.emplace_back(ic_score(fit).bic);
      if (!best || *search.bic_trace[k] < *search.bic_trace[*best]) best = k;
    } catch (const Error& e) {
      warn("knot candidate J = " + std::to_string(candidates[k]) + " excluded: " + e.what());
      search.bic_trace.emplace_back();
    }
  }
  if (!best) throw Error("select_knots: the full model failed for every candidate knot count");
  search.chosen = candidates[*best];
  return search;
}

}  // namespace gaplm

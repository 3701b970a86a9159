#include "gaplm/simulation.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "gaplm/error.hpp"
#include "gaplm/normal.hpp"

namespace gaplm::sim {

void SimDesign::validate() const {
  if (n < 20) throw ConfigError("simulation: n must be at least 20");
  if (replications < 1) throw ConfigError("simulation: replications must be positive");
  if (!(varpi > -1.0 && varpi < 1.0)) throw ConfigError("simulation: correlation parameter must lie in (-1, 1)");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("simulation: level must lie in (0, 1)");
  if (degree < 1) throw ConfigError("simulation: spline degree must be >= 1");
  if (threads < 1) throw ConfigError("simulation: threads must be >= 1");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Full: return "Full";
    case Method::AIC: return "AIC";
    case Method::BIC: return "BIC";
    case Method::FIC: return "FIC";
    case Method::SFIC: return "S-FIC";
  }
  return {};
}

double eta1(double x) { return std::sin(2.0 * std::numbers::pi * x); }

double eta2(double x) {
  const double x2 = x * x;
  return 5.0 * x2 * x2 + 3.0 * x2 - 2.0;
}

Eigen::VectorXd true_beta(const SimDesign& design) {
  Eigen::VectorXd beta(5);
  const double scale = design.r0 / std::sqrt(static_cast<double>(design.n));
  beta << 1.5, 2.0, 2.0 * scale, 1.0 * scale, 3.0 * scale;
  return beta;
}

SimDataset generate_dataset(const SimDesign& design, int rep) {
  if (rep < 0 || rep >= design.replications) throw ConfigError("generate_dataset: replication index out of range");
  std::seed_seq seq{static_cast<std::uint32_t>(design.base_seed & 0xffffffffULL),
                    static_cast<std::uint32_t>(design.base_seed >> 32), static_cast<std::uint32_t>(rep)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd corr(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) corr(i, j) = i == j ? 1.0 : std::pow(design.varpi, std::abs(i - j));
  }
  const Eigen::MatrixXd chol = corr.llt().matrixL();
  const Eigen::VectorXd beta = true_beta(design);

  SimDataset data;
  data.y.resize(design.n);
  data.x.resize(design.n, 2);
  data.z.resize(design.n, 5);
  Eigen::VectorXd e(5);
  for (int i = 0; i < design.n; ++i) {
    data.x(i, 0) = unif(rng);
    data.x(i, 1) = unif(rng);
    for (int k = 0; k < 5; ++k) e(k) = normal(rng);
    data.z.row(i) = (chol * e).transpose();
    const double m = eta1(data.x(i, 0)) + eta2(data.x(i, 1)) + data.z.row(i).dot(beta);
    const double p = 1.0 / (1.0 + std::exp(-m));
    data.y(i) = unif(rng) < p ? 1.0 : 0.0;
  }
  return data;
}

std::vector<FocusSpec> study_foci() {
  std::vector<FocusSpec> foci;
  foci.push_back(FocusSpec::coefficient(5, 0, "mu1"));
  foci.push_back(FocusSpec::coefficient(5, 1, "mu2"));
  Eigen::VectorXd c3(5);
  c3 << 0.75, 0.05, -0.3, 0.1, -0.06;
  foci.push_back(FocusSpec::linear(c3, 0.0, "mu3"));
  Eigen::VectorXd c4(5);
  c4 << 0.32, -0.87, -0.33, -0.15, 0.13;
  auto mu4 = FocusSpec::linear(c4, 0.0, "mu4");
  mu4.eta_terms = {{0, 0.86}, {1, 0.53}};
  foci.push_back(mu4);
  return foci;
}

std::array<double, kFoci> true_focus_values(const SimDesign& design) {
  const auto beta = true_beta(design);
  const auto foci = study_foci();
  std::array<double, kFoci> out{};
  for (int f = 0; f < kFoci; ++f) {
    const auto& focus = foci[static_cast<std::size_t>(f)];
    out[static_cast<std::size_t>(f)] = focus.constant + focus.coefficients.dot(beta);
  }
  out[3] += eta1(0.86) + eta2(0.53);
  return out;
}

namespace {

std::vector<std::pair<int, double>> eta_pairs(const FocusSpec& focus) {
  std::vector<std::pair<int, double>> out;
  for (const auto& t : focus.eta_terms) out.emplace_back(t.covariate, t.x_unit);
  return out;
}

// Naive Wald interval of a single fitted model, ignoring any selection step.
MethodOutcome wald(const GaplmFit& fit, const SubmodelSpec& spec, const FocusSpec& focus, double z) {
  const Eigen::VectorXd c = spec.project(focus.coefficients);
  MethodOutcome out;
  double variance;
  if (focus.general()) {
    const auto terms = eta_pairs(focus);
    out.estimate = focus.constant + fit.intercept + c.dot(fit.beta_hat);
    for (const auto& [a, x] : terms) out.estimate += fit.component(a)(x);
    const Eigen::VectorXd g = fit.level_gradient(terms, c);
    variance = g.dot(fit.covariance * g);
  } else {
    out.estimate = focus.constant + c.dot(fit.beta_hat);
    variance = c.dot(fit.beta_cov * c);
  }
  const double half = z * std::sqrt(std::max(variance, 0.0));
  out.interval = Interval{out.estimate - half, out.estimate + half};
  return out;
}

}  // namespace

ReplicationResult run_replication(const SimDesign& design, int rep) {
  ReplicationResult result;
  result.rep = rep;
  try {
    const SimDataset data = generate_dataset(design, rep);
    const QuasiFamily family = QuasiFamily::bernoulli_logit();
    const auto search = select_knots(data.y, data.x, data.z, family, design.degree, design.knot_mode);
    result.knots = search.chosen;
    const auto basis = expand_design(data.x, uniform_specs(2, design.degree, search.chosen));

    CovariatePartition partition{{"Z1", "Z2"}, {"Z3", "Z4", "Z5"}};
    const auto specs = enumerate_submodels(partition);
    std::vector<GaplmFit> fits;
    fits.reserve(specs.size());
    for (const auto& s : specs) fits.push_back(irls_fit(data.y, basis, s.select_columns(data.z), family));
    const std::size_t full_index = specs.size() - 1;
    const GaplmFit& full = fits[full_index];

    const FicInputs base = build_fic_inputs(full, basis, data.z, kCertain, design.weighting);
    std::vector<const GaplmFit*> fit_ptrs;
    for (const auto& f : fits) fit_ptrs.push_back(&f);
    const IcScores ic = ic_scores(fit_ptrs);
    const double zcrit = two_sided_critical(design.level);

    const auto foci = study_foci();
    for (int f = 0; f < kFoci; ++f) {
      const auto& focus = foci[static_cast<std::size_t>(f)];
      const FocusGradient grad = focus_gradient(focus, full);
      const FicInputs inputs = base.with_focus(grad.mu_beta);

      std::vector<std::optional<double>> fic(specs.size());
      std::vector<double> mu_hat(specs.size());
      for (std::size_t s = 0; s < specs.size(); ++s) {
        mu_hat[s] = submodel_focus_estimate(specs[s], fits[s], grad);
        try {
          fic[s] = fic_score(specs[s], inputs);
        } catch (const SingularityError&) {
          fic[s].reset();
        }
      }

      auto& out = result.outcomes;
      const auto fi = static_cast<std::size_t>(f);
      out[static_cast<std::size_t>(Method::Full)][fi] = wald(full, specs[full_index], focus, zcrit);
      const auto aic = static_cast<std::size_t>(*ic.argmin_aic);
      const auto bic = static_cast<std::size_t>(*ic.argmin_bic);
      out[static_cast<std::size_t>(Method::AIC)][fi] = wald(fits[aic], specs[aic], focus, zcrit);
      out[static_cast<std::size_t>(Method::BIC)][fi] = wald(fits[bic], specs[bic], focus, zcrit);

      const auto averaged = [&](const Eigen::VectorXd& w) {
        const FmaResult r = fma_estimate(w, specs, mu_hat, inputs, design.level, focus.general());
        MethodOutcome o;
        o.estimate = r.mu_hat;
        if (!focus.general()) o.interval = Interval{r.low, r.up};
        return o;
      };
      out[static_cast<std::size_t>(Method::FIC)][fi] = averaged(selection_weights(fic));
      out[static_cast<std::size_t>(Method::SFIC)][fi] = averaged(sfic_weights(fic, inputs.kappa2_hat));
    }
    result.ok = true;
  } catch (const Error& e) {
    result.ok = false;
    result.error = e.what();
  }
  return result;
}

SimSummary summarize(const SimDesign& design, const std::vector<ReplicationResult>& results) {
  SimSummary summary;
  summary.design = design;
  summary.truth = true_focus_values(design);
  for (const auto& r : results) {
    if (!r.ok) {
      ++summary.failed;
      summary.failures.push_back("replication " + std::to_string(r.rep) + ": " + r.error);
      continue;
    }
    ++summary.succeeded;
    for (std::size_t m = 0; m < kMethods.size(); ++m) {
      for (std::size_t f = 0; f < kFoci; ++f) {
        const auto& o = r.outcomes[m][f];
        auto& cell = summary.cells[m][f];
        const double err = o.estimate - summary.truth[f];
        cell.mse += err * err;
        if (o.interval) {
          ++cell.intervals;
          if (o.interval->contains(summary.truth[f])) ++cell.covered;
        }
      }
    }
  }
  for (auto& row : summary.cells) {
    for (auto& cell : row) {
      if (summary.succeeded > 0) cell.mse /= summary.succeeded;
      if (cell.intervals > 0) cell.cp = static_cast<double>(cell.covered) / cell.intervals;
    }
  }
  return summary;
}

SimSummary run_study(const SimDesign& design) {
  design.validate();
  std::vector<ReplicationResult> results(static_cast<std::size_t>(design.replications));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int rep = next++; rep < design.replications; rep = next++) {
      results[static_cast<std::size_t>(rep)] = run_replication(design, rep);
    }
  };
  if (design.threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < design.threads; ++t) pool.emplace_back(worker);
  }
  return summarize(design, results);
}

void write_summary_csv(std::ostream& os, const SimSummary& s) {
  os << "n,r0,rho,knot_mode,replications,succeeded,method";
  for (int f = 1; f <= kFoci; ++f) os << ",mu" << f << "_CP,mu" << f << "_MSE";
  os << '\n';
  for (const auto m : kMethods) {
    os << s.design.n << ',' << s.design.r0 << ',' << s.design.varpi << ',' << to_string(s.design.knot_mode) << ','
       << s.design.replications << ',' << s.succeeded << ',' << to_string(m);
    for (int f = 0; f < kFoci; ++f) {
      const auto& c = s.cell(m, f);
      os << ',';
      if (c.cp) os << *c.cp;
      os << ',' << c.mse;
    }
    os << '\n';
  }
}

}  // namespace gaplm::sim

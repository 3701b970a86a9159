#include "gaplm/analysis.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <memory>
#include <thread>

#include "gaplm/error.hpp"
#include "gaplm/log.hpp"
#include "gaplm/normal.hpp"

namespace gaplm {

WeightScheme parse_weight_scheme(std::string_view text) {
  if (text == "fic") return WeightScheme::FIC;
  if (text == "sfic" || text == "s-fic") return WeightScheme::SFIC;
  if (text == "aic") return WeightScheme::AIC;
  if (text == "bic") return WeightScheme::BIC;
  if (text == "full") return WeightScheme::Full;
  throw ConfigError("unknown weighting '" + std::string(text) + "' (expected fic, sfic, aic, bic or full)");
}

std::string to_string(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::FIC: return "fic";
    case WeightScheme::SFIC: return "sfic";
    case WeightScheme::AIC: return "aic";
    case WeightScheme::BIC: return "bic";
    case WeightScheme::Full: return "full";
  }
  return {};
}

namespace {

template <class F>
void parallel_for(int count, int threads, F&& body) {
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < count; i = next++) body(i);
  };
  if (threads <= 1 || count <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (int t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
}

DesignNames design_names(const Dataset& data) {
  DesignNames names;
  for (const auto& t : data.smooth) names.smooth.push_back(t.name);
  names.linear = data.partition.all();
  return names;
}

struct SubmodelFits {
  std::vector<std::shared_ptr<const GaplmFit>> fits;
  std::vector<std::string> errors;
};

// A fit that stopped at a separating direction still classifies correctly,
// so its last iterate is kept when `keep_last` is set.
SubmodelFits fit_submodels(const Eigen::VectorXd& y, const BasisExpansion& basis, const Eigen::MatrixXd& z,
                           const std::vector<SubmodelSpec>& specs, const QuasiFamily& family,
                           const IrlsControls& controls, const DesignNames& names, int threads, bool keep_last) {
  SubmodelFits out;
  out.fits.resize(specs.size());
  out.errors.resize(specs.size());
  parallel_for(static_cast<int>(specs.size()), threads, [&](int s) {
    const auto& spec = specs[static_cast<std::size_t>(s)];
    DesignNames sub{names.smooth, {}};
    for (int j : spec.kept_positions()) {
      if (static_cast<std::size_t>(j) < names.linear.size()) sub.linear.push_back(names.linear[static_cast<std::size_t>(j)]);
    }
    try {
      out.fits[static_cast<std::size_t>(s)] =
          std::make_shared<const GaplmFit>(irls_fit(y, basis, spec.select_columns(z), family, controls, sub));
    } catch (const NonConvergenceError& e) {
      if (keep_last && e.last_iterate() && e.last_iterate()->covariance.size() > 0) {
        out.fits[static_cast<std::size_t>(s)] = e.last_iterate();
      } else {
        out.errors[static_cast<std::size_t>(s)] = e.what();
      }
    } catch (const Error& e) {
      out.errors[static_cast<std::size_t>(s)] = e.what();
    }
  });
  return out;
}

std::optional<std::size_t> full_index(const std::vector<SubmodelSpec>& specs) {
  for (std::size_t s = 0; s < specs.size(); ++s) {
    if (specs[s].is_full()) return s;
  }
  return std::nullopt;
}

Eigen::VectorXd scheme_weights(WeightScheme scheme, const std::vector<SubmodelSpec>& specs,
                               const std::vector<std::optional<double>>& fic, const IcScores& ic, double kappa2) {
  switch (scheme) {
    case WeightScheme::FIC: return selection_weights(fic);
    case WeightScheme::SFIC: return sfic_weights(fic, kappa2);
    case WeightScheme::AIC: return selection_weights(ic.aic);
    case WeightScheme::BIC: return selection_weights(ic.bic);
    case WeightScheme::Full: {
      const auto f = full_index(specs);
      if (!f) throw ConfigError("weighting 'full' needs the full model in the submodel list");
      Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(specs.size()));
      w(static_cast<Eigen::Index>(*f)) = 1.0;
      return w;
    }
  }
  return {};
}

CurveSample curve(const GaplmFit& full, const ColumnTransform& t, int a, int points) {
  CurveSample c;
  c.covariate = t.name;
  const CenteredComponent comp = full.component(a);
  const auto start = full.layout.block_start[static_cast<std::size_t>(a)];
  const auto free = full.layout.block_free[static_cast<std::size_t>(a)];
  const Eigen::MatrixXd cov = full.covariance.block(start, start, free, free);
  for (int k = 0; k < points; ++k) {
    const double u = static_cast<double>(k) / (points - 1);
    const Eigen::VectorXd g = comp.gradient(u, full.block_means[static_cast<std::size_t>(a)]).tail(free);
    c.x_unit.push_back(u);
    c.x_standardized.push_back(t.from_unit(u));
    c.x.push_back(t.unstandardize(t.from_unit(u)));
    c.eta.push_back(comp(u));
    c.se.push_back(std::sqrt(std::max(0.0, g.dot(cov * g))));
  }
  return c;
}

}  // namespace

AnalysisReport analyze(const Dataset& data, const std::vector<FocusSpec>& foci, const AnalysisOptions& options) {
  if (options.curve_points < 2) throw ConfigError("curve grid needs at least 2 points");
  AnalysisReport report;
  report.family = data.family.name();
  report.n = data.n();
  report.rows_dropped = data.rows_dropped;
  report.level = options.level;
  report.partition = data.partition;
  for (const auto& t : data.smooth) {
    report.smooth.push_back(t.name);
    report.transforms.push_back(t);
  }
  report.transforms.insert(report.transforms.end(), data.linear.begin(), data.linear.end());

  const IrlsControls controls{.sandwich = options.sandwich};
  const DesignNames names = design_names(data);
  const int p = static_cast<int>(data.smooth.size());

  KnotSearch search;
  try {
    search = options.knots ? select_knots(data.y, data.x_unit, data.z, data.family, options.degree,
                                          std::vector<int>{*options.knots}, controls)
                           : select_knots(data.y, data.x_unit, data.z, data.family, options.degree,
                                          options.knot_mode, controls);
  } catch (const Error& e) {
    report.failures.push_back(std::string("knot selection: ") + e.what());
    return report;
  }
  report.knots = {search.reference, search.candidates, search.bic_trace, search.chosen};

  const BasisExpansion basis = expand_design(data.x_unit, uniform_specs(p, options.degree, search.chosen));
  std::shared_ptr<const GaplmFit> full;
  try {
    full = std::make_shared<const GaplmFit>(irls_fit(data.y, basis, data.z, data.family, controls, names));
  } catch (const Error& e) {
    report.failures.push_back(std::string("full model: ") + e.what());
    return report;
  }

  const auto linear_names = data.partition.all();
  for (std::size_t j = 0; j < linear_names.size(); ++j) {
    CoefficientRow row;
    row.name = linear_names[j];
    row.estimate = full->beta_hat(static_cast<Eigen::Index>(j));
    row.se = std::sqrt(full->beta_cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
    row.z = row.estimate / row.se;
    row.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(row.z)));
    report.coefficients.push_back(row);
  }
  for (int a = 0; a < p; ++a) {
    report.curves.push_back(curve(*full, data.smooth[static_cast<std::size_t>(a)], a, options.curve_points));
  }

  if (foci.empty()) return report;

  const auto specs = enumerate_submodels(data.partition, options.submodels);
  auto fits = fit_submodels(data.y, basis, data.z, specs, data.family, controls, names, options.threads, false);
  if (const auto f = full_index(specs)) fits.fits[*f] = full;

  FicInputs base;
  try {
    base = build_fic_inputs(*full, basis, data.z, data.partition.dc(), options.psi_weighting);
  } catch (const Error& e) {
    report.failures.push_back(std::string("FIC ingredients: ") + e.what());
    return report;
  }

  std::vector<const GaplmFit*> ptrs;
  for (const auto& f : fits.fits) ptrs.push_back(f.get());
  const IcScores ic = ic_scores(ptrs);

  for (const auto& focus : foci) {
    FicReport fr;
    fr.focus = focus.name;
    fr.scheme = options.weights;
    try {
      const FocusGradient grad = focus_gradient(focus, *full);
      const FicInputs inputs = base.with_focus(grad.mu_beta);
      fr.kappa2 = inputs.kappa2_hat;
      std::vector<std::optional<double>> fic(specs.size());
      std::vector<double> mu(specs.size(), 0.0);
      for (std::size_t s = 0; s < specs.size(); ++s) {
        SubmodelRow row;
        row.label = data.partition.d() <= 9 ? specs[s].label() : specs[s].bits();
        row.bits = specs[s].bits();
        row.parameters = 1 + basis.total_columns() - p + specs[s].size();
        if (!fits.fits[s]) {
          row.error = fits.errors[s];
          fr.rows.push_back(row);
          continue;
        }
        const GaplmFit& fit = *fits.fits[s];
        row.parameters = fit.parameter_count();
        row.qloglik = fit.qloglik;
        row.aic = ic.aic[s];
        row.bic = ic.bic[s];
        mu[s] = submodel_focus_estimate(specs[s], fit, grad);
        row.mu_hat = mu[s];
        try {
          fic[s] = fic_score(specs[s], inputs);
          row.fic = fic[s];
        } catch (const SingularityError& e) {
          warn(std::string("submodel ") + row.label + " excluded from weighting: " + e.what());
          row.error = e.what();
        }
        fr.rows.push_back(row);
      }
      const auto pick = [&](const std::vector<std::optional<double>>& v) -> std::optional<std::string> {
        std::optional<std::size_t> best;
        for (std::size_t s = 0; s < v.size(); ++s) {
          if (v[s] && (!best || *v[s] < *v[*best])) best = s;
        }
        if (!best) return std::nullopt;
        return fr.rows[*best].label;
      };
      fr.argmin_fic = pick(fic);
      fr.argmin_aic = pick(ic.aic);
      fr.argmin_bic = pick(ic.bic);

      // S-FIC needs kappa2 > 0; a focus with mu_beta = 0 gets all weight on argmin FIC.
      const WeightScheme scheme =
          options.weights == WeightScheme::SFIC && !(inputs.kappa2_hat > 0.0) ? WeightScheme::FIC : options.weights;
      const Eigen::VectorXd w = scheme_weights(scheme, specs, fic, ic, inputs.kappa2_hat);
      for (std::size_t s = 0; s < specs.size(); ++s) fr.rows[s].weight = w(static_cast<Eigen::Index>(s));
      report.fma.push_back(fma_estimate(w, specs, mu, inputs, options.level, focus.general()));
      report.foci.push_back(std::move(fr));
    } catch (const Error& e) {
      report.failures.push_back("focus '" + focus.name + "': " + e.what());
    }
  }
  return report;
}

LoocvResult loocv(const Dataset& data, int knots, const AnalysisOptions& options, LoocvPrediction prediction) {
  if (data.family.kind() != FamilyKind::BernoulliLogit) throw ConfigError("loocv needs a binary response");
  const int n = data.n();
  const int p = static_cast<int>(data.smooth.size());
  const auto specs = enumerate_submodels(data.partition, options.submodels);
  const auto fi = full_index(specs);
  if (!fi) throw ConfigError("loocv needs the full model in the submodel list");
  const IrlsControls controls{.sandwich = options.sandwich};
  const DesignNames names = design_names(data);
  const auto spline_specs = uniform_specs(p, options.degree, knots);

  constexpr int kMethods = 4;
  std::vector<std::array<bool, kMethods>> wrong(static_cast<std::size_t>(n));
  std::vector<char> failed(static_cast<std::size_t>(n), 0);

  parallel_for(n, options.threads, [&](int i) {
    auto& miss = wrong[static_cast<std::size_t>(i)];
    miss.fill(true);
    try {
      const Dataset train = data.without_row(i);
      const BasisExpansion basis = expand_design(train.x_unit, spline_specs);
      const auto fits = fit_submodels(train.y, basis, train.z, specs, data.family, controls, names, 1, true);
      if (!fits.fits[*fi]) throw Error(fits.errors[*fi]);

      const Eigen::VectorXd x_i = data.x_unit.row(i).transpose();
      const Eigen::VectorXd z_i = data.z.row(i).transpose();
      const std::vector<double> x_vals(x_i.data(), x_i.data() + x_i.size());
      std::vector<std::optional<double>> m(specs.size());
      std::vector<const GaplmFit*> ptrs;
      for (std::size_t s = 0; s < specs.size(); ++s) {
        ptrs.push_back(fits.fits[s].get());
        if (fits.fits[s]) m[s] = fits.fits[s]->predict_linear(x_vals, specs[s].project(z_i));
      }
      const bool y1 = data.y(i) > 0.5;
      const auto judge = [&](int method, double mhat) { miss[static_cast<std::size_t>(method)] = (mhat >= 0.0) != y1; };

      const IcScores ic = ic_scores(ptrs);
      if (ic.argmin_aic) judge(0, *m[static_cast<std::size_t>(*ic.argmin_aic)]);
      if (ic.argmin_bic) judge(1, *m[static_cast<std::size_t>(*ic.argmin_bic)]);

      const FicInputs inputs =
          build_fic_inputs(*fits.fits[*fi], basis, train.z, data.partition.dc(), options.psi_weighting).with_focus(z_i);
      std::vector<std::optional<double>> fic(specs.size());
      for (std::size_t s = 0; s < specs.size(); ++s) {
        if (!m[s]) continue;
        try {
          fic[s] = fic_score(specs[s], inputs);
        } catch (const SingularityError&) {
        }
      }
      const auto weighted = [&](const Eigen::VectorXd& w) {
        double out = 0.0;
        for (std::size_t s = 0; s < specs.size(); ++s) {
          if (w(static_cast<Eigen::Index>(s)) > 0.0) out += w(static_cast<Eigen::Index>(s)) * *m[s];
        }
        return out;
      };
      judge(2, weighted(selection_weights(fic)));
      if (inputs.kappa2_hat > 0.0) {
        const Eigen::VectorXd w = sfic_weights(fic, inputs.kappa2_hat);
        if (prediction == LoocvPrediction::Averaged) {
          judge(3, weighted(w));
        } else {
          Eigen::Index best = 0;
          w.maxCoeff(&best);
          judge(3, *m[static_cast<std::size_t>(best)]);
        }
      } else {
        judge(3, weighted(selection_weights(fic)));
      }
    } catch (const Error& e) {
      failed[static_cast<std::size_t>(i)] = 1;
      warn("loocv fold " + std::to_string(i) + " counted as a misclassification: " + e.what());
    }
  });

  LoocvResult out;
  out.prediction = prediction;
  out.n = n;
  out.knots = knots;
  const std::array<std::string, kMethods> labels = {"AIC", "BIC", "FIC", "S-FIC"};
  for (int k = 0; k < kMethods; ++k) {
    int errors = 0;
    for (const auto& w : wrong) errors += w[static_cast<std::size_t>(k)] ? 1 : 0;
    out.ratios.emplace_back(labels[static_cast<std::size_t>(k)], static_cast<double>(errors) / n);
  }
  for (char f : failed) out.failed_folds += f;
  return out;
}

}  // namespace gaplm

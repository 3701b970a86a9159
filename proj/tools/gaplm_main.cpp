#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaplm/analysis.hpp"
#include "gaplm/dataset.hpp"
#include "gaplm/error.hpp"
#include "gaplm/focus_parse.hpp"
#include "gaplm/report_io.hpp"
#include "gaplm/simulation.hpp"

namespace {

struct CommonArgs {
  std::string data;
  std::string response;
  std::vector<std::string> smooth;
  std::vector<std::string> certain;
  std::vector<std::string> exploratory;
  std::vector<std::string> names;
  std::vector<std::string> zero_missing;
  std::string family = "bernoulli-logit";
  bool no_standardize = false;
  int degree = 3;
  std::string knots = "auto";
  std::vector<std::string> foci;
  double level = 0.95;
  std::string weights;
  std::string psi = "score";
  std::string submodels;
  bool sandwich = false;
  std::uint64_t seed = 20100521;
  int threads = 1;
  int curve_points = 101;
  std::string out;
  std::string format = "json";
};

void add_data_options(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--data", a.data, "CSV file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--response", a.response, "response column")->required();
  cmd->add_option("--smooth", a.smooth, "covariates entering through splines")->delimiter(',');
  cmd->add_option("--certain", a.certain, "linear covariates kept in every submodel")->delimiter(',');
  cmd->add_option("--exploratory", a.exploratory, "linear covariates subject to selection")->delimiter(',');
  cmd->add_option("--names", a.names, "column names for a headerless file")->delimiter(',');
  cmd->add_option("--zero-missing", a.zero_missing, "columns in which 0 marks a missing value")->delimiter(',');
  cmd->add_option("--family", a.family, "bernoulli-logit, gaussian-identity or poisson-log")->capture_default_str();
  cmd->add_flag("--no-standardize", a.no_standardize, "keep covariates in file units");
  cmd->add_option("--degree", a.degree, "spline degree")->capture_default_str()->check(CLI::Range(1, 30));
  cmd->add_option("--knots", a.knots, "auto, auto-over, auto-under or an interior knot count")
      ->capture_default_str();
  cmd->add_flag("--sandwich", a.sandwich, "robust (sandwich) covariance");
  cmd->add_option("--psi-weights", a.psi, "score or information")->capture_default_str();
  cmd->add_option("--seed", a.seed, "random seed (simulation only; the analysis is deterministic)");
  cmd->add_option("--threads", a.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "output file (stdout when omitted)");
  cmd->add_option("--format", a.format, "json or csv")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "csv"}));
}

void add_focus_options(CLI::App* cmd, CommonArgs& a, const std::string& default_weights) {
  a.weights = default_weights;
  cmd->add_option("--focus", a.foci, "focus parameter, e.g. mu=beta:X+eta:S@0.5 (repeatable)")->required();
  cmd->add_option("--level", a.level, "nominal interval coverage")->capture_default_str()->check(CLI::Range(0.5, 0.9999));
  cmd->add_option("--weights", a.weights, "fic, sfic, aic, bic or full")
      ->capture_default_str()
      ->check(CLI::IsMember({"fic", "sfic", "aic", "bic", "full"}));
  cmd->add_option("--submodels", a.submodels, "comma-separated labels (or b:<bits>) to restrict the sweep");
}

gaplm::DatasetConfig dataset_config(const CommonArgs& a) {
  gaplm::DatasetConfig c;
  c.path = a.data;
  c.response = a.response;
  c.smooth = a.smooth;
  c.linear = {a.certain, a.exploratory};
  c.family = a.family;
  c.standardize = !a.no_standardize;
  c.names = a.names;
  c.zero_missing = a.zero_missing;
  return c;
}

gaplm::AnalysisOptions analysis_options(const CommonArgs& a, const gaplm::Dataset& data) {
  gaplm::AnalysisOptions o;
  o.degree = a.degree;
  if (!a.knots.empty() && std::isdigit(static_cast<unsigned char>(a.knots.front()))) {
    int k = 0;
    const auto [ptr, ec] = std::from_chars(a.knots.data(), a.knots.data() + a.knots.size(), k);
    if (ec != std::errc() || ptr != a.knots.data() + a.knots.size()) {
      throw gaplm::ConfigError("--knots: '" + a.knots + "' is not a knot count");
    }
    o.knots = k;
  } else {
    o.knot_mode = gaplm::parse_knot_mode(a.knots);
  }
  o.level = a.level;
  if (!a.weights.empty()) o.weights = gaplm::parse_weight_scheme(a.weights);
  if (a.psi == "score") {
    o.psi_weighting = gaplm::PsiWeighting::Score;
  } else if (a.psi == "information") {
    o.psi_weighting = gaplm::PsiWeighting::Information;
  } else {
    throw gaplm::ConfigError("--psi-weights must be score or information");
  }
  o.sandwich = a.sandwich;
  if (!a.submodels.empty()) o.submodels = gaplm::parse_submodel_list(a.submodels, data.partition);
  o.threads = a.threads;
  o.curve_points = a.curve_points;
  return o;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw gaplm::ConfigError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

// Secondary CSV tables go next to --out as <out>.<suffix>.csv.
void write_side_table(const std::string& out, const std::string& suffix,
                      void (*writer)(std::ostream&, const gaplm::AnalysisReport&), const gaplm::AnalysisReport& r) {
  if (out.empty()) return;
  std::ofstream f(out + "." + suffix + ".csv");
  if (!f) throw gaplm::ConfigError("cannot write '" + out + "." + suffix + ".csv'");
  writer(f, r);
}

int report_failures(const gaplm::AnalysisReport& r) {
  for (const auto& f : r.failures) std::cerr << "error: " << f << '\n';
  return r.failures.empty() ? 0 : 3;
}

int run_fit(const CommonArgs& a) {
  const auto data = gaplm::load_csv(dataset_config(a));
  const auto report = gaplm::analyze(data, {}, analysis_options(a, data));
  Output out(a.out);
  if (a.format == "json") {
    out.stream() << gaplm::report_to_json(report).dump(2) << '\n';
  } else {
    gaplm::write_coefficients_csv(out.stream(), report);
    write_side_table(a.out, "curves", gaplm::write_curves_csv, report);
  }
  return report_failures(report);
}

int run_focused(const CommonArgs& a, bool averaged) {
  const auto data = gaplm::load_csv(dataset_config(a));
  const auto ctx = gaplm::FocusContext::from(data);
  std::vector<gaplm::FocusSpec> foci;
  for (const auto& f : a.foci) foci.push_back(gaplm::parse_focus(f, ctx));
  const auto report = gaplm::analyze(data, foci, analysis_options(a, data));
  Output out(a.out);
  if (a.format == "json") {
    out.stream() << gaplm::report_to_json(report).dump(2) << '\n';
  } else if (averaged) {
    gaplm::write_fma_csv(out.stream(), report);
    write_side_table(a.out, "submodels", gaplm::write_submodels_csv, report);
  } else {
    gaplm::write_submodels_csv(out.stream(), report);
    write_side_table(a.out, "fma", gaplm::write_fma_csv, report);
  }
  return report_failures(report);
}

int run_cv(const CommonArgs& a, const std::string& prediction) {
  const auto data = gaplm::load_csv(dataset_config(a));
  const auto options = analysis_options(a, data);
  int knots = 0;
  if (options.knots) {
    knots = *options.knots;
  } else {
    const gaplm::IrlsControls controls{.sandwich = options.sandwich};
    knots = gaplm::select_knots(data.y, data.x_unit, data.z, data.family, options.degree, options.knot_mode,
                                controls)
                .chosen;
  }
  const auto mode =
      prediction == "selected" ? gaplm::LoocvPrediction::Selected : gaplm::LoocvPrediction::Averaged;
  const auto result = gaplm::loocv(data, knots, options, mode);
  Output out(a.out);
  if (a.format == "json") {
    gaplm::AnalysisReport shell;
    shell.loocv = result;
    out.stream() << gaplm::report_to_json(shell)["loocv"].dump(2) << '\n';
  } else {
    gaplm::write_loocv_csv(out.stream(), result);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spline-based generalized additive partial linear models with focused model selection and averaging"};
  app.require_subcommand(1);

  CommonArgs fit_args, select_args, average_args, cv_args;
  auto* fit = app.add_subcommand("fit", "fit the full model: coefficient table, knot search and curves");
  add_data_options(fit, fit_args);
  fit->add_option("--curve-points", fit_args.curve_points, "grid size of the curve samples")
      ->capture_default_str()
      ->check(CLI::Range(101, 100000));

  auto* select = app.add_subcommand("select", "score every submodel by FIC, AIC and BIC for each focus");
  add_data_options(select, select_args);
  add_focus_options(select, select_args, "fic");

  auto* average = app.add_subcommand("average", "model-averaged focus estimates with bias-corrected intervals");
  add_data_options(average, average_args);
  add_focus_options(average, average_args, "sfic");

  auto* cv = app.add_subcommand("cv", "leave-one-out misclassification ratios of AIC, BIC, FIC and S-FIC");
  add_data_options(cv, cv_args);
  cv_args.weights.clear();
  cv->add_option("--submodels", cv_args.submodels, "comma-separated labels (or b:<bits>) to restrict the sweep");
  std::string prediction = "averaged";
  cv->add_option("--prediction", prediction, "averaged or selected (FIC/S-FIC classification rule)")
      ->capture_default_str()
      ->check(CLI::IsMember({"averaged", "selected"}));

  gaplm::sim::SimDesign design;
  std::string knot_mode = "auto";
  std::string sim_out;
  std::string sim_format = "csv";
  std::string sim_psi = "score";
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo coverage and MSE study");
  simulate->add_option("--n", design.n, "sample size")->capture_default_str();
  simulate->add_option("--r0", design.r0, "local misspecification scale")->capture_default_str();
  simulate->add_option("--rho", design.varpi, "correlation of neighbouring linear covariates")->capture_default_str();
  simulate->add_option("--reps", design.replications, "replications")->capture_default_str();
  simulate->add_option("--seed", design.base_seed, "base seed")->capture_default_str();
  simulate->add_option("--knot-mode", knot_mode, "auto, over or under")->capture_default_str();
  simulate->add_option("--level", design.level, "nominal interval coverage")->capture_default_str();
  simulate->add_option("--degree", design.degree, "spline degree")->capture_default_str();
  simulate->add_option("--psi-weights", sim_psi, "score or information")->capture_default_str();
  simulate->add_option("--threads", design.threads, "worker threads")->capture_default_str();
  simulate->add_option("--out", sim_out, "output file (stdout when omitted)");
  simulate->add_option("--format", sim_format, "csv or json")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) return run_fit(fit_args);
    if (*select) return run_focused(select_args, false);
    if (*average) return run_focused(average_args, true);
    if (*cv) return run_cv(cv_args, prediction);
    if (*simulate) {
      design.knot_mode = gaplm::parse_knot_mode(knot_mode);
      if (sim_psi == "information") {
        design.weighting = gaplm::PsiWeighting::Information;
      } else if (sim_psi != "score") {
        throw gaplm::ConfigError("--psi-weights must be score or information");
      }
      const auto summary = gaplm::sim::run_study(design);
      for (const auto& f : summary.failures) std::cerr << "warning: " << f << '\n';
      Output out(sim_out);
      if (sim_format == "json") {
        out.stream() << gaplm::summary_to_json(summary).dump(2) << '\n';
      } else {
        out.stream().precision(6);
        gaplm::sim::write_summary_csv(out.stream(), summary);
      }
      return 0;
    }
  } catch (const gaplm::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

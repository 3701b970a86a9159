#include "gaplm/report_io.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "gaplm/error.hpp"

namespace gaplm {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json vec(const std::vector<std::optional<double>>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(opt(x));
  return a;
}

std::vector<std::optional<double>> opt_vec(const json& a) {
  std::vector<std::optional<double>> v;
  for (const auto& x : a) v.push_back(x.is_null() ? std::nullopt : std::optional<double>(x.get<double>()));
  return v;
}

// NaN has no JSON form; it is written as null and read back as NaN.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json transform_json(const ColumnTransform& t) {
  return {{"name", t.name}, {"center", t.center}, {"scale", t.scale}, {"lower", t.lower}, {"upper", t.upper}};
}

ColumnTransform transform_from(const json& j) {
  return {j.at("name").get<std::string>(), j.at("center").get<double>(), j.at("scale").get<double>(),
          j.at("lower").get<double>(), j.at("upper").get<double>()};
}

json fma_json(const FmaResult& r) {
  return {{"mu_hat", num(r.mu_hat)},
          {"low", num(r.low)},
          {"up", num(r.up)},
          {"level", r.level},
          {"correction_term", num(r.correction_term)},
          {"z", r.z},
          {"plugin_only", r.plugin_only}};
}

FmaResult fma_from(const json& j) {
  FmaResult r;
  r.mu_hat = num(j.at("mu_hat"));
  r.low = num(j.at("low"));
  r.up = num(j.at("up"));
  r.level = j.at("level").get<double>();
  r.correction_term = num(j.at("correction_term"));
  r.z = j.at("z").get<double>();
  r.plugin_only = j.at("plugin_only").get<bool>();
  return r;
}

json loocv_json(const LoocvResult& r) {
  json ratios = json::object();
  json order = json::array();
  for (const auto& [name, v] : r.ratios) {
    ratios[name] = v;
    order.push_back(name);
  }
  return {{"prediction", r.prediction == LoocvPrediction::Averaged ? "averaged" : "selected"},
          {"n", r.n},
          {"knots", r.knots},
          {"methods", order},
          {"ratios", ratios},
          {"failed_folds", r.failed_folds}};
}

LoocvResult loocv_from(const json& j) {
  LoocvResult r;
  r.prediction = j.at("prediction").get<std::string>() == "selected" ? LoocvPrediction::Selected
                                                                      : LoocvPrediction::Averaged;
  r.n = j.at("n").get<int>();
  r.knots = j.at("knots").get<int>();
  for (const auto& name : j.at("methods")) {
    const auto key = name.get<std::string>();
    r.ratios.emplace_back(key, j.at("ratios").at(key).get<double>());
  }
  r.failed_folds = j.at("failed_folds").get<int>();
  return r;
}

void csv_opt(std::ostream& os, const std::optional<double>& v) {
  os << ',';
  if (v && std::isfinite(*v)) os << *v;
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

json report_to_json(const AnalysisReport& r) {
  json j;
  j["family"] = r.family;
  j["n"] = r.n;
  j["rows_dropped"] = r.rows_dropped;
  j["level"] = r.level;
  j["smooth"] = r.smooth;
  j["certain"] = r.partition.certain;
  j["exploratory"] = r.partition.exploratory;
  j["transforms"] = json::array();
  for (const auto& t : r.transforms) j["transforms"].push_back(transform_json(t));
  j["knots"] = {{"reference", r.knots.reference},
                {"candidates", r.knots.candidates},
                {"bic", vec(r.knots.bic)},
                {"chosen", r.knots.chosen}};
  j["coefficients"] = json::array();
  for (const auto& c : r.coefficients) {
    j["coefficients"].push_back(
        {{"name", c.name}, {"estimate", num(c.estimate)}, {"se", num(c.se)}, {"z", num(c.z)}, {"p_value", num(c.p_value)}});
  }
  j["foci"] = json::array();
  for (std::size_t f = 0; f < r.foci.size(); ++f) {
    const auto& fr = r.foci[f];
    json rows = json::array();
    for (const auto& s : fr.rows) {
      rows.push_back({{"label", s.label},
                      {"bits", s.bits},
                      {"parameters", s.parameters},
                      {"qloglik", opt(s.qloglik)},
                      {"aic", opt(s.aic)},
                      {"bic", opt(s.bic)},
                      {"fic", opt(s.fic)},
                      {"mu_hat", opt(s.mu_hat)},
                      {"weight", s.weight},
                      {"error", opt(s.error)}});
    }
    json entry = {{"focus", fr.focus},
                  {"scheme", to_string(fr.scheme)},
                  {"kappa2", fr.kappa2},
                  {"submodels", rows},
                  {"argmin_fic", opt(fr.argmin_fic)},
                  {"argmin_aic", opt(fr.argmin_aic)},
                  {"argmin_bic", opt(fr.argmin_bic)}};
    if (f < r.fma.size()) entry["fma"] = fma_json(r.fma[f]);
    j["foci"].push_back(entry);
  }
  j["curves"] = json::array();
  for (const auto& c : r.curves) {
    j["curves"].push_back({{"covariate", c.covariate},
                           {"x", c.x},
                           {"x_standardized", c.x_standardized},
                           {"x_unit", c.x_unit},
                           {"eta", c.eta},
                           {"se", c.se}});
  }
  j["loocv"] = r.loocv ? loocv_json(*r.loocv) : json(nullptr);
  j["failures"] = r.failures;
  return j;
}

AnalysisReport report_from_json(const json& j) {
  try {
    AnalysisReport r;
    r.family = j.at("family").get<std::string>();
    r.n = j.at("n").get<int>();
    r.rows_dropped = j.at("rows_dropped").get<int>();
    r.level = j.at("level").get<double>();
    r.smooth = j.at("smooth").get<std::vector<std::string>>();
    r.partition.certain = j.at("certain").get<std::vector<std::string>>();
    r.partition.exploratory = j.at("exploratory").get<std::vector<std::string>>();
    for (const auto& t : j.at("transforms")) r.transforms.push_back(transform_from(t));
    const auto& k = j.at("knots");
    r.knots.reference = k.at("reference").get<int>();
    r.knots.candidates = k.at("candidates").get<std::vector<int>>();
    r.knots.bic = opt_vec(k.at("bic"));
    r.knots.chosen = k.at("chosen").get<int>();
    for (const auto& c : j.at("coefficients")) {
      r.coefficients.push_back({c.at("name").get<std::string>(), num(c.at("estimate")), num(c.at("se")),
                                num(c.at("z")), num(c.at("p_value"))});
    }
    for (const auto& e : j.at("foci")) {
      FicReport fr;
      fr.focus = e.at("focus").get<std::string>();
      fr.scheme = parse_weight_scheme(e.at("scheme").get<std::string>());
      fr.kappa2 = e.at("kappa2").get<double>();
      for (const auto& s : e.at("submodels")) {
        SubmodelRow row;
        row.label = s.at("label").get<std::string>();
        row.bits = s.at("bits").get<std::string>();
        row.parameters = s.at("parameters").get<int>();
        row.qloglik = get_opt<double>(s, "qloglik");
        row.aic = get_opt<double>(s, "aic");
        row.bic = get_opt<double>(s, "bic");
        row.fic = get_opt<double>(s, "fic");
        row.mu_hat = get_opt<double>(s, "mu_hat");
        row.weight = s.at("weight").get<double>();
        row.error = get_opt<std::string>(s, "error");
        fr.rows.push_back(row);
      }
      fr.argmin_fic = get_opt<std::string>(e, "argmin_fic");
      fr.argmin_aic = get_opt<std::string>(e, "argmin_aic");
      fr.argmin_bic = get_opt<std::string>(e, "argmin_bic");
      if (e.contains("fma")) r.fma.push_back(fma_from(e.at("fma")));
      r.foci.push_back(std::move(fr));
    }
    for (const auto& c : j.at("curves")) {
      r.curves.push_back({c.at("covariate").get<std::string>(), c.at("x").get<std::vector<double>>(),
                          c.at("x_standardized").get<std::vector<double>>(), c.at("x_unit").get<std::vector<double>>(),
                          c.at("eta").get<std::vector<double>>(), c.at("se").get<std::vector<double>>()});
    }
    if (!j.at("loocv").is_null()) r.loocv = loocv_from(j.at("loocv"));
    r.failures = j.at("failures").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report JSON: ") + e.what());
  }
}

void write_coefficients_csv(std::ostream& os, const AnalysisReport& r) {
  os.precision(12);
  os << "name,estimate,se,z,p_value\n";
  for (const auto& c : r.coefficients) {
    os << csv_text(c.name) << ',' << c.estimate << ',' << c.se << ',' << c.z << ',' << c.p_value << '\n';
  }
}

void write_submodels_csv(std::ostream& os, const AnalysisReport& r) {
  os.precision(12);
  os << "focus,label,bits,parameters,qloglik,aic,bic,fic,mu_hat,weight,error\n";
  for (const auto& fr : r.foci) {
    for (const auto& s : fr.rows) {
      os << csv_text(fr.focus) << ',' << s.label << ',' << s.bits << ',' << s.parameters;
      csv_opt(os, s.qloglik);
      csv_opt(os, s.aic);
      csv_opt(os, s.bic);
      csv_opt(os, s.fic);
      csv_opt(os, s.mu_hat);
      os << ',' << s.weight << ',' << (s.error ? csv_text(*s.error) : std::string()) << '\n';
    }
  }
}

void write_fma_csv(std::ostream& os, const AnalysisReport& r) {
  os.precision(12);
  os << "focus,scheme,kappa2,mu_hat,low,up,level,correction_term,plugin_only\n";
  for (std::size_t f = 0; f < r.foci.size() && f < r.fma.size(); ++f) {
    const auto& m = r.fma[f];
    os << csv_text(r.foci[f].focus) << ',' << to_string(r.foci[f].scheme) << ',' << r.foci[f].kappa2 << ','
       << m.mu_hat << ',' << m.low << ',' << m.up << ',' << m.level << ',' << m.correction_term << ','
       << (m.plugin_only ? 1 : 0) << '\n';
  }
}

void write_curves_csv(std::ostream& os, const AnalysisReport& r) {
  os.precision(12);
  os << "covariate,x,x_standardized,x_unit,eta,se\n";
  for (const auto& c : r.curves) {
    for (std::size_t k = 0; k < c.x.size(); ++k) {
      os << csv_text(c.covariate) << ',' << c.x[k] << ',' << c.x_standardized[k] << ',' << c.x_unit[k] << ','
         << c.eta[k] << ',' << c.se[k] << '\n';
    }
  }
}

void write_loocv_csv(std::ostream& os, const LoocvResult& result) {
  os.precision(12);
  os << "method,error_ratio,n,failed_folds\n";
  for (const auto& [name, v] : result.ratios) {
    os << name << ',' << v << ',' << result.n << ',' << result.failed_folds << '\n';
  }
}

json summary_to_json(const sim::SimSummary& s) {
  json j;
  j["design"] = {{"n", s.design.n},
                 {"r0", s.design.r0},
                 {"rho", s.design.varpi},
                 {"replications", s.design.replications},
                 {"seed", s.design.base_seed},
                 {"knot_mode", to_string(s.design.knot_mode)},
                 {"level", s.design.level}};
  j["succeeded"] = s.succeeded;
  j["failed"] = s.failed;
  j["truth"] = s.truth;
  j["methods"] = json::array();
  for (const auto m : sim::kMethods) {
    json cells = json::array();
    for (int f = 0; f < sim::kFoci; ++f) {
      const auto& c = s.cell(m, f);
      cells.push_back({{"cp", opt(c.cp)}, {"mse", c.mse}});
    }
    j["methods"].push_back({{"method", sim::to_string(m)}, {"foci", cells}});
  }
  j["failures"] = s.failures;
  return j;
}

}  // namespace gaplm

#pragma once

#include <iosfwd>

#include <nlohmann/json.hpp>

#include "gaplm/analysis.hpp"
#include "gaplm/simulation.hpp"

namespace gaplm {

nlohmann::json report_to_json(const AnalysisReport& report);
/// Inverse of report_to_json; throws DataError on malformed input.
AnalysisReport report_from_json(const nlohmann::json& j);

/// name,estimate,se,z,p_value
void write_coefficients_csv(std::ostream& os, const AnalysisReport& report);
/// One row per (focus, submodel).
void write_submodels_csv(std::ostream& os, const AnalysisReport& report);
/// One row per focus: estimate, interval and correction term.
void write_fma_csv(std::ostream& os, const AnalysisReport& report);
/// One row per (covariate, grid point).
void write_curves_csv(std::ostream& os, const AnalysisReport& report);
void write_loocv_csv(std::ostream& os, const LoocvResult& result);

nlohmann::json summary_to_json(const sim::SimSummary& summary);

}  // namespace gaplm

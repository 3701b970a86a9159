#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gaplm/dataset.hpp"
#include "gaplm/fic.hpp"

namespace gaplm {

/// Names and scales needed to turn focus text into a FocusSpec.
struct FocusContext {
  CovariatePartition partition;
  /// Smooth covariates; eta evaluation points are given in their
  /// standardized units and mapped to [0,1] through `unit`.
  std::vector<ColumnTransform> smooth;

  static FocusContext from(const Dataset& data) { return {data.partition, data.smooth}; }
};

/// Parses `[name=]term+term+...` where each term is one of
///   beta:<covariate>
///   lincomb:<c1>*<covariate1>+<c2>*<covariate2>...   (signs allowed)
///   eta:<smooth covariate>@<value>
///   const:<value>
/// A '+' followed by a term prefix starts a new term; any other '+' or '-'
/// continues a lincomb. Repeated covariates accumulate.
FocusSpec parse_focus(std::string_view text, const FocusContext& context);

}  // namespace gaplm

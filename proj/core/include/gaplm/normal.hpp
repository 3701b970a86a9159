#pragma once

namespace gaplm {

/// Standard normal CDF.
double normal_cdf(double x);

/// Upper-tail probability 1 - Phi(x), accurate in the far tail.
double normal_sf(double x);

/// Inverse of the standard normal CDF for p in (0, 1).
/// Acklam's rational approximation followed by one Halley refinement step.
double normal_quantile(double p);

/// Two-sided critical value z with 2*Phi(z) - 1 = level.
double two_sided_critical(double level);

}  // namespace gaplm

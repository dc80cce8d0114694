#pragma once

#include <span>

namespace occauth {

// Empirical quantile with linear interpolation between order statistics
// (the "type 7" convention: position q * (n - 1)). q must lie in [0, 1];
// the sample must be non-empty.
double empirical_quantile(std::span<const double> values, double q);

double mean_of(std::span<const double> values);

// 1/N convention.
double population_variance(std::span<const double> values);

}  // namespace occauth

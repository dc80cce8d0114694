#include "occauth/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "occauth/types.hpp"

namespace occauth {

double empirical_quantile(std::span<const double> values, double q) {
    if (values.empty()) {
        throw InsufficientDataError("empirical_quantile: empty sample");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw InvalidArgumentError("empirical_quantile: q outside [0, 1]");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double mean_of(std::span<const double> values) {
    if (values.empty()) {
        throw InsufficientDataError("mean_of: empty sample");
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double population_variance(std::span<const double> values) {
    const double m = mean_of(values);
    double sum = 0.0;
    for (double v : values) sum += (v - m) * (v - m);
    return sum / static_cast<double>(values.size());
}

}  // namespace occauth

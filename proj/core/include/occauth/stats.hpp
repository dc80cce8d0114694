#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "occauth/evaluation.hpp"
#include "occauth/types.hpp"

namespace occauth {

// Per-user HTERs under two classifiers, aligned by user.
struct PairedSample {
    std::vector<double> a;
    std::vector<double> b;
};

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool reject_at_05 = false;  // p_value < 0.05
    bool degenerate = false;
    bool approximate = false;  // large-sample or estimated-parameter approximation
};

// One-sample Kolmogorov-Smirnov test of the differences against a normal
// distribution with mean and standard deviation estimated from the data. The
// p-value uses the asymptotic Kolmogorov distribution and is conservative
// when parameters are estimated, hence the approximate flag.
TestResult ks_normality(std::span<const double> differences);

// Two-sample sup-difference of empirical CDFs (the self-test mode: a sample
// evaluated against its own ECDF gives exactly 0).
double ks_statistic(std::span<const double> sample, std::span<const double> reference);

// Two-sided signed-rank test; zero differences are dropped, tied magnitudes
// take average ranks. Exact p by the distribution over all 2^n sign
// assignments for n <= 20, normal approximation with continuity and tie
// corrections beyond that.
TestResult wilcoxon_signed_rank(const PairedSample& sample);

// Friedman rank test over a users x treatments matrix, tie-corrected, p from
// chi-squared with k - 1 degrees of freedom. A matrix whose rows are all
// constant has no rank variation: statistic 0, p 1, degenerate flag set.
TestResult friedman(const std::vector<std::vector<double>>& users_by_treatments);

// One row per classifier pair: KS on the HTER differences, Wilcoxon on the
// pair, Friedman on the two-column matrix. Degenerate inputs (for example a
// classifier paired with itself) are reported as degenerate cells rather
// than failing the whole battery.
struct BatteryRow {
    std::string pair;
    TestResult ks;
    TestResult wilcoxon;
    TestResult friedman;
};

std::vector<BatteryRow> pairwise_battery(
    const std::map<std::string, EvalReport>& reports,
    std::span<const std::pair<std::string, std::string>> pairs);

}  // namespace occauth

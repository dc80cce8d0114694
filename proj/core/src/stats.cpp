#include "occauth/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>

#include "occauth/numeric.hpp"

namespace occauth {
namespace {

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_tail(double lambda) {
    if (lambda < 1e-6) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Average ranks of |values|, grouped by exact equality; returned in doubled
// units so ties stay integral.
std::vector<std::int64_t> doubled_ranks(const std::vector<double>& magnitudes) {
    const std::size_t n = magnitudes.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return magnitudes[a] < magnitudes[b]; });

    std::vector<std::int64_t> ranks2(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && magnitudes[order[j]] == magnitudes[order[i]]) ++j;
        // Average of ranks i+1 .. j, doubled: (i + 1 + j).
        const std::int64_t rank2 = static_cast<std::int64_t>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) ranks2[order[t]] = rank2;
        i = j;
    }
    return ranks2;
}

TestResult finish(TestResult r) {
    r.reject_at_05 = r.p_value < 0.05;
    return r;
}

}  // namespace

double ks_statistic(std::span<const double> sample, std::span<const double> reference) {
    if (sample.empty() || reference.empty()) {
        throw InsufficientDataError("ks_statistic: empty sample");
    }
    std::vector<double> a(sample.begin(), sample.end());
    std::vector<double> b(reference.begin(), reference.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    // Sup over the merged jump points of |F_a - F_b|.
    double d = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() || ib < b.size()) {
        const double x = (ib >= b.size() || (ia < a.size() && a[ia] <= b[ib])) ? a[ia] : b[ib];
        while (ia < a.size() && a[ia] <= x) ++ia;
        while (ib < b.size() && b[ib] <= x) ++ib;
        const double fa = static_cast<double>(ia) / a.size();
        const double fb = static_cast<double>(ib) / b.size();
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

TestResult ks_normality(std::span<const double> differences) {
    const std::size_t n = differences.size();
    if (n < 5) throw InsufficientDataError("ks_normality: need at least five differences");

    const double mu = mean_of(differences);
    double ss = 0.0;
    for (double d : differences) ss += (d - mu) * (d - mu);
    const double sigma = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sigma > 0.0)) {
        throw DegenerateDataError("ks_normality: zero variance");
    }

    std::vector<double> sorted(differences.begin(), differences.end());
    std::sort(sorted.begin(), sorted.end());
    double d_stat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = standard_normal_cdf((sorted[i] - mu) / sigma);
        const double above = static_cast<double>(i + 1) / n - f;
        const double below = f - static_cast<double>(i) / n;
        d_stat = std::max({d_stat, above, below});
    }

    TestResult r;
    r.statistic = d_stat;
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    r.p_value = kolmogorov_tail((sqrt_n + 0.12 + 0.11 / sqrt_n) * d_stat);
    r.approximate = true;  // parameters estimated from the data
    return finish(r);
}

TestResult wilcoxon_signed_rank(const PairedSample& sample) {
    if (sample.a.size() != sample.b.size()) {
        throw AlignmentError("wilcoxon_signed_rank: samples differ in length");
    }
    std::vector<double> magnitudes;
    std::vector<bool> positive;
    for (std::size_t i = 0; i < sample.a.size(); ++i) {
        const double d = sample.a[i] - sample.b[i];
        if (!std::isfinite(d)) throw InvalidArgumentError("wilcoxon_signed_rank: non-finite value");
        if (d == 0.0) continue;  // zeros dropped
        magnitudes.push_back(std::abs(d));
        positive.push_back(d > 0.0);
    }
    if (magnitudes.empty()) {
        throw DegenerateDataError("wilcoxon_signed_rank: all differences are zero");
    }
    const std::size_t n = magnitudes.size();
    if (n < 5) {
        throw InsufficientDataError("wilcoxon_signed_rank: fewer than five non-zero differences");
    }

    const std::vector<std::int64_t> ranks2 = doubled_ranks(magnitudes);
    std::int64_t w_plus2 = 0;
    std::int64_t total2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total2 += ranks2[i];
        if (positive[i]) w_plus2 += ranks2[i];
    }
    const std::int64_t w_minus2 = total2 - w_plus2;
    const std::int64_t w2 = std::min(w_plus2, w_minus2);

    TestResult r;
    r.statistic = 0.5 * static_cast<double>(w2);

    if (n <= 20) {
        // Exact null distribution of 2*W+ by convolution over the doubled
        // ranks; counts are exact in 64 bits since 2^20 assignments at most.
        std::vector<std::uint64_t> counts(static_cast<std::size_t>(total2) + 1, 0);
        counts[0] = 1;
        std::size_t reach = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t step = static_cast<std::size_t>(ranks2[i]);
            reach += step;
            for (std::size_t v = reach + 1; v-- > step;) {
                counts[v] += counts[v - step];
            }
        }
        // Two-sided: P(W+ <= w) + P(W+ >= total - w), minus the overlap when
        // the two tails meet.
        const std::int64_t upper_from = total2 - w2;
        std::uint64_t tail = 0;
        for (std::int64_t v = 0; v <= total2; ++v) {
            const bool in_low = v <= w2;
            const bool in_high = v >= upper_from;
            if (in_low || in_high) tail += counts[static_cast<std::size_t>(v)];
        }
        r.p_value = static_cast<double>(tail) / std::exp2(static_cast<double>(n));
    } else {
        // Normal approximation with continuity correction; tie correction
        // sum(t^3 - t)/48 over tie groups.
        std::vector<double> sorted(magnitudes);
        std::sort(sorted.begin(), sorted.end());
        double tie_correction = 0.0;
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j < n && sorted[j] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i);
            tie_correction += (t * t * t - t) / 48.0;
            i = j;
        }
        const double nd = static_cast<double>(n);
        const double mean_w = nd * (nd + 1.0) / 4.0;
        const double var_w = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_correction;
        if (!(var_w > 0.0)) throw DegenerateDataError("wilcoxon_signed_rank: zero variance");
        const double w = 0.5 * static_cast<double>(w2);
        const double z = (w - mean_w + 0.5) / std::sqrt(var_w);
        r.p_value = std::clamp(2.0 * standard_normal_cdf(z), 0.0, 1.0);
        r.approximate = true;
    }
    return finish(r);
}

TestResult friedman(const std::vector<std::vector<double>>& users_by_treatments) {
    const std::size_t n = users_by_treatments.size();
    if (n < 5) throw InsufficientDataError("friedman: need at least five users");
    const std::size_t k = users_by_treatments.front().size();
    if (k < 2) throw InvalidArgumentError("friedman: need at least two treatments");
    for (const auto& row : users_by_treatments) {
        if (row.size() != k) throw ShapeError("friedman: ragged matrix");
    }

    // Within-user average ranks.
    std::vector<double> column_rank_sums(k, 0.0);
    double sum_sq_ranks = 0.0;
    for (const auto& row : users_by_treatments) {
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
        std::size_t i = 0;
        while (i < k) {
            std::size_t j = i;
            while (j < k && row[order[j]] == row[order[i]]) ++j;
            const double rank = 0.5 * static_cast<double>(i + 1 + j);
            for (std::size_t t = i; t < j; ++t) {
                column_rank_sums[order[t]] += rank;
                sum_sq_ranks += rank * rank;
            }
            i = j;
        }
    }

    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    double numerator = 0.0;
    for (double rj : column_rank_sums) {
        const double dev = rj - nd * (kd + 1.0) / 2.0;
        numerator += dev * dev;
    }
    // Tie-corrected denominator; zero only when every row is fully tied.
    const double denominator = sum_sq_ranks - nd * kd * (kd + 1.0) * (kd + 1.0) / 4.0;

    TestResult r;
    if (denominator <= 0.0) {
        if (numerator > 0.0) throw DegenerateDataError("friedman: inconsistent rank variance");
        r.statistic = 0.0;
        r.p_value = 1.0;
        r.degenerate = true;  // no rank variation at all
        return finish(r);
    }
    r.statistic = (kd - 1.0) * numerator / denominator;
    const boost::math::chi_squared chi2(kd - 1.0);
    r.p_value = std::clamp(1.0 - boost::math::cdf(chi2, r.statistic), 0.0, 1.0);
    return finish(r);
}

std::vector<BatteryRow> pairwise_battery(
    const std::map<std::string, EvalReport>& reports,
    std::span<const std::pair<std::string, std::string>> pairs) {
    // Aligned per-user HTER vectors; every report must cover the same users.
    std::map<std::string, std::vector<double>> hters;
    std::vector<std::string> user_order;
    bool first = true;
    for (const auto& [name, report] : reports) {
        std::vector<std::string> users;
        std::vector<double> values;
        for (const auto& [user, metrics] : report.per_user) {
            users.push_back(user);
            values.push_back(metrics.hter);
        }
        if (first) {
            user_order = users;
            first = false;
        } else if (users != user_order) {
            throw AlignmentError("pairwise_battery: reports cover different user sets");
        }
        hters[name] = std::move(values);
    }

    auto vector_of = [&](const std::string& name) -> const std::vector<double>& {
        const auto it = hters.find(name);
        if (it == hters.end()) {
            throw InvalidArgumentError("pairwise_battery: no report named '" + name + "'");
        }
        return it->second;
    };

    std::vector<BatteryRow> rows;
    rows.reserve(pairs.size());
    for (const auto& [name_a, name_b] : pairs) {
        const std::vector<double>& a = vector_of(name_a);
        const std::vector<double>& b = vector_of(name_b);

        BatteryRow row;
        row.pair = name_a + "-" + name_b;
        auto degenerate_cell = [] {
            TestResult r;
            r.p_value = std::numeric_limits<double>::quiet_NaN();
            r.degenerate = true;
            r.reject_at_05 = false;
            return r;
        };
        std::vector<double> diffs(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) diffs[i] = a[i] - b[i];
        try {
            row.ks = ks_normality(diffs);
        } catch (const DegenerateDataError&) {
            row.ks = degenerate_cell();
        }
        try {
            row.wilcoxon = wilcoxon_signed_rank(PairedSample{a, b});
        } catch (const DegenerateDataError&) {
            row.wilcoxon = degenerate_cell();
        }
        std::vector<std::vector<double>> matrix(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) matrix[i] = {a[i], b[i]};
        try {
            row.friedman = friedman(matrix);
        } catch (const DegenerateDataError&) {
            row.friedman = degenerate_cell();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace occauth

#include "occauth/fusion.hpp"

#include <cmath>
#include <limits>

#include "occauth/numeric.hpp"

namespace occauth {

std::string_view to_string(NormMethod method) {
    switch (method) {
        case NormMethod::logistic: return "logistic";
        case NormMethod::tanh: return "tanh";
        case NormMethod::softsign: return "softsign";
    }
    throw InvalidArgumentError("to_string: unknown NormMethod");
}

NormMethod norm_method_from_string(std::string_view name) {
    if (name == "logistic") return NormMethod::logistic;
    if (name == "tanh") return NormMethod::tanh;
    if (name == "softsign") return NormMethod::softsign;
    throw InvalidArgumentError("unknown normalizer '" + std::string(name) +
                               "' (expected logistic, tanh, or softsign)");
}

double normalize(double raw_score, const NormalizerConfig& config) {
    if (!std::isfinite(raw_score)) throw InvalidScoreError("normalize: non-finite score");
    if (!(config.beta > 0.0)) throw InvalidArgumentError("normalize: beta must be positive");
    switch (config.method) {
        case NormMethod::logistic:
            return 1.0 / (1.0 + std::exp(-config.beta * raw_score));
        case NormMethod::tanh:
            return 2.0 / (1.0 + std::exp(-2.0 * config.beta * raw_score)) - 1.0;
        case NormMethod::softsign:
            return raw_score / (1.0 + std::abs(raw_score));
    }
    throw InvalidArgumentError("normalize: unknown method");
}

BetaCalibration calibrate_beta(std::span<const double> genuine_train_scores) {
    if (genuine_train_scores.size() < 2) {
        throw InsufficientDataError("calibrate_beta: need at least two genuine scores");
    }
    for (double s : genuine_train_scores) {
        if (!std::isfinite(s)) throw InvalidScoreError("calibrate_beta: non-finite score");
    }
    const double q50 = empirical_quantile(genuine_train_scores, 0.50);
    const double q95 = empirical_quantile(genuine_train_scores, 0.95);

    BetaCalibration cal;
    cal.offset = q50;
    const double spread = q95 - q50;
    if (spread <= 0.0) {
        cal.beta = 1.0;
        cal.degenerate = true;
        return cal;
    }
    // 1 / (1 + exp(-beta * spread)) = 0.95  =>  beta = ln(19) / spread
    cal.beta = std::log(19.0) / spread;
    return cal;
}

CalibratedNormalizer make_calibrated_normalizer(std::span<const double> genuine_train_scores,
                                                NormMethod method) {
    const BetaCalibration cal = calibrate_beta(genuine_train_scores);
    return CalibratedNormalizer{NormalizerConfig{method, cal.beta}, cal.offset};
}

double fuse_scores(std::span<const double> member_scores) {
    if (member_scores.empty()) {
        throw IncompleteFusionError("fuse_scores: no member scores");
    }
    double sum = 0.0;
    for (double s : member_scores) {
        if (!std::isfinite(s)) {
            throw IncompleteFusionError("fuse_scores: missing or non-finite member score");
        }
        sum += s;
    }
    return sum / static_cast<double>(member_scores.size());
}

Decision fuse_decisions(std::span<const Decision> member_decisions) {
    if (member_decisions.size() < 2) {
        throw InvalidArgumentError("fuse_decisions: need at least two decisions");
    }
    int accepts = 0;
    for (Decision d : member_decisions) {
        if (d == Decision::accept) ++accepts;
    }
    const int rejects = static_cast<int>(member_decisions.size()) - accepts;
    return accepts > rejects ? Decision::accept : Decision::reject;
}

std::vector<std::vector<OccKind>> enumerate_fusions() {
    std::vector<std::vector<OccKind>> subsets;
    for (unsigned mask = 0; mask < 16; ++mask) {
        std::vector<OccKind> members;
        for (int bit = 0; bit < 4; ++bit) {
            if (mask & (1u << bit)) members.push_back(kAllOccKinds[bit]);
        }
        if (members.size() >= 2) subsets.push_back(std::move(members));
    }
    return subsets;
}

CorrelationMatrix score_correlation(const std::vector<std::vector<double>>& score_columns) {
    const int k = static_cast<int>(score_columns.size());
    if (k < 1) throw InvalidArgumentError("score_correlation: no columns");
    const std::size_t n = score_columns.front().size();
    if (n < 2) throw InsufficientDataError("score_correlation: need at least two samples");
    for (const auto& col : score_columns) {
        if (col.size() != n) throw ShapeError("score_correlation: ragged columns");
        for (double v : col) {
            if (!std::isfinite(v)) throw InvalidScoreError("score_correlation: non-finite score");
        }
    }

    std::vector<double> means(k), norms(k);
    for (int c = 0; c < k; ++c) {
        means[c] = mean_of(score_columns[c]);
        double ss = 0.0;
        for (double v : score_columns[c]) ss += (v - means[c]) * (v - means[c]);
        norms[c] = std::sqrt(ss);
    }

    CorrelationMatrix m;
    m.r.assign(k, std::vector<double>(k, std::numeric_limits<double>::quiet_NaN()));
    m.defined.assign(k, std::vector<bool>(k, false));
    for (int a = 0; a < k; ++a) {
        for (int b = a; b < k; ++b) {
            if (norms[a] == 0.0 || norms[b] == 0.0) continue;  // flagged undefined
            double cross = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cross += (score_columns[a][i] - means[a]) * (score_columns[b][i] - means[b]);
            }
            double r = a == b ? 1.0 : cross / (norms[a] * norms[b]);
            r = std::clamp(r, -1.0, 1.0);
            m.r[a][b] = r;
            m.r[b][a] = r;
            m.defined[a][b] = true;
            m.defined[b][a] = true;
        }
    }
    return m;
}

std::unique_ptr<OccModel> fit_stacker(std::span<const std::array<double, 4>> genuine_score_vectors,
                                      const Sv1cParams& params) {
    if (genuine_score_vectors.size() < 8) {
        throw InsufficientDataError("fit_stacker: need at least eight genuine score vectors");
    }
    std::vector<FeatureVector> points;
    points.reserve(genuine_score_vectors.size());
    for (const auto& v : genuine_score_vectors) {
        points.emplace_back(std::vector<double>(v.begin(), v.end()));
    }
    return fit_sv1c(points, params);
}

}  // namespace occauth

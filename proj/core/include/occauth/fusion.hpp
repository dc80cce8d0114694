#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "occauth/classifiers.hpp"
#include "occauth/types.hpp"

namespace occauth {

enum class NormMethod { logistic, tanh, softsign };

std::string_view to_string(NormMethod method);
NormMethod norm_method_from_string(std::string_view name);

// Squashing map onto a bounded scale. beta is ignored by softsign.
struct NormalizerConfig {
    NormMethod method = NormMethod::logistic;
    double beta = 1.0;
};

// logistic: 1 / (1 + exp(-beta * s)), in (0, 1)
// tanh:     2 / (1 + exp(-2 beta * s)) - 1, in (-1, 1)
// softsign: s / (1 + |s|), in (-1, 1)
// All strictly increasing in s.
double normalize(double raw_score, const NormalizerConfig& config);

// Impostor-free calibration: beta maps the genuine median to the sigmoid
// midpoint and the 95th percentile to 0.95 after centering at the median.
// Degenerate spread falls back to beta = 1 with the flag set.
struct BetaCalibration {
    double beta = 1.0;
    double offset = 0.0;  // the genuine median; subtract before normalizing
    bool degenerate = false;
};

BetaCalibration calibrate_beta(std::span<const double> genuine_train_scores);

struct CalibratedNormalizer {
    NormalizerConfig config;
    double offset = 0.0;

    double apply(double raw_score) const { return normalize(raw_score - offset, config); }
};

CalibratedNormalizer make_calibrated_normalizer(std::span<const double> genuine_train_scores,
                                                NormMethod method = NormMethod::logistic);

// Unweighted mean of the members' normalized scores.
double fuse_scores(std::span<const double> member_scores);

// Majority vote; an exact tie rejects.
Decision fuse_decisions(std::span<const Decision> member_decisions);

// All subsets of the four classifiers with at least two members:
// six pairs, four triples, one quadruple.
std::vector<std::vector<OccKind>> enumerate_fusions();

// Pearson correlations between score columns. Entries touching a
// zero-variance column are undefined (NaN, defined flag false).
struct CorrelationMatrix {
    std::vector<std::vector<double>> r;
    std::vector<std::vector<bool>> defined;
    int size() const noexcept { return static_cast<int>(r.size()); }
};

CorrelationMatrix score_correlation(const std::vector<std::vector<double>>& score_columns);

// Meta-SV1C over the members' normalized score vectors.
std::unique_ptr<OccModel> fit_stacker(std::span<const std::array<double, 4>> genuine_score_vectors,
                                      const Sv1cParams& params = {});

}  // namespace occauth

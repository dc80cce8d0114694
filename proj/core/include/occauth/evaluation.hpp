#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "occauth/classifiers.hpp"
#include "occauth/fusion.hpp"
#include "occauth/types.hpp"

namespace occauth {

// Continuous-authentication protocol settings. Impostor samples are borrowed
// from other users' test sessions only; nothing but genuine training data
// ever reaches a fit call.
struct ProtocolConfig {
    int impostors_per_user = 0;  // 0 = 10x the user's genuine test count, capped by availability
    double threshold_quantile = 0.05;
    RngSeed rng;
    int det_points = 101;
    int max_threads = 0;  // 0 = OCC_AUTH_THREADS env var, else hardware concurrency
    NormMethod norm_method = NormMethod::logistic;
    // Test instrumentation: invoked (serialized) with the exact samples handed
    // to every fit call.
    std::function<void(OccKind, std::span<const FeatureVector>)> fit_observer;
};

struct ScoreSet {
    std::vector<double> genuine;
    std::vector<double> impostor;
};

// Empirical quantile of the genuine training scores (linear interpolation);
// the default q = 0.05 targets roughly 5% training FRR.
double select_threshold(std::span<const double> genuine_train_scores, double quantile);

// FAR = % impostor scores >= theta, FRR = % genuine scores < theta.
std::pair<double, double> confusion_rates(const ScoreSet& scores, double theta);

double hter(double far, double frr);

// Rank-based (Mann-Whitney) probability that a random genuine score exceeds a
// random impostor score, ties counted half, in percent.
double auc(const ScoreSet& scores);

struct DetPoint {
    double threshold;
    double far;
    double frr;
};

// Threshold sweep over the pooled score range; the last threshold sits just
// above the maximum so the curve reaches the reject-all corner.
std::vector<DetPoint> det_curve(const ScoreSet& scores, int n_points);

struct UserMetrics {
    double far = 0.0;
    double frr = 0.0;
    double hter = 0.0;
    double auc = 0.0;
};

struct EvalReport {
    std::vector<std::pair<std::string, UserMetrics>> per_user;  // sorted by user id
    UserMetrics aggregate;                                      // unweighted user mean
    std::vector<DetPoint> det;
    std::vector<std::string> excluded_users;
};

// Per-user raw scores under each fitted classifier, plus the calibrations and
// thresholds derived from genuine training scores. Classifier index follows
// kAllOccKinds order.
struct UserScores {
    std::string user_id;
    std::array<bool, 4> fitted{};
    std::array<std::vector<double>, 4> train;
    std::array<std::vector<double>, 4> genuine;
    std::array<std::vector<double>, 4> impostor;
    std::array<CalibratedNormalizer, 4> normalizers;
    std::array<double, 4> thresholds{};

    bool stacker_trained = false;
    std::vector<double> stacker_train;
    std::vector<double> stacker_genuine;
    std::vector<double> stacker_impostor;
    double stacker_threshold = 0.0;
};

struct ProtocolScores {
    std::vector<UserScores> users;
    std::vector<std::string> excluded_users;
};

// Fits the requested classifiers per user (once), borrows impostor samples,
// and scores every train/test sample. Everything downstream (single reports,
// fusions, the stacker, correlations) reuses these scores.
ProtocolScores run_score_protocol(std::span<const UserDataset> datasets,
                                  const EnrollmentConfig& base_config,
                                  const ProtocolConfig& protocol,
                                  std::span<const OccKind> kinds, bool with_stacker);

EvalReport single_report(const ProtocolScores& scores, OccKind kind, const ProtocolConfig& protocol);

// Score-level fusion: mean of the members' calibrated normalized scores; the
// fused threshold is the quantile of the fused genuine training scores.
EvalReport score_fusion_report(const ProtocolScores& scores, std::span<const OccKind> members,
                               const ProtocolConfig& protocol);

// Decision-level fusion evaluates at the members' own operating points, so it
// has a single (FAR, FRR) instead of a curve.
struct DecisionFusionResult {
    double far = 0.0;
    double frr = 0.0;
    double hter = 0.0;
};
DecisionFusionResult decision_fusion_report(const ProtocolScores& scores,
                                            std::span<const OccKind> members);

EvalReport stacker_report(const ProtocolScores& scores, const ProtocolConfig& protocol);

// Pearson correlation of the four classifiers' normalized scores over all
// test samples (genuine + impostor) pooled across users.
CorrelationMatrix protocol_correlation(const ProtocolScores& scores);

// The spec'd single-classifier protocol: enroll on train_genuine only, borrow
// impostors, threshold from the genuine-training-score quantile, aggregate as
// the unweighted user mean.
EvalReport run_protocol(std::span<const UserDataset> datasets, const EnrollmentConfig& config,
                        const ProtocolConfig& protocol);

}  // namespace occauth

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "occauth/types.hpp"

namespace occauth {

// A raw multi-channel sensor stream. readings[t] holds the K channel values
// recorded at timestamps[t]; timestamps are seconds and monotone
// non-decreasing.
struct SensorSeries {
    std::vector<double> timestamps;
    std::vector<std::vector<double>> readings;
    double rate_hint = 0.0;  // samples/second

    int channel_count() const noexcept {
        return readings.empty() ? 0 : static_cast<int>(readings.front().size());
    }
    double duration() const noexcept {
        return timestamps.empty() ? 0.0 : timestamps.back() - timestamps.front();
    }
};

struct WindowSpec {
    double length_s = 10.0;
    double step_s = 5.0;
};

struct GaussianMode {
    std::vector<double> mean;
    std::vector<std::vector<double>> covariance;  // symmetric positive definite
    double weight = 1.0;
};

enum class SynthMode { unimodal, multimodal };

// Synthetic mixture generator spec. Outliers are drawn uniformly from a box
// three times the extent of the generated genuine cloud; their count is
// floor(outlier_fraction * n_genuine).
struct SynthSpec {
    SynthMode mode = SynthMode::unimodal;
    int n_genuine = 0;
    std::vector<GaussianMode> modes;
    double outlier_fraction = 0.0;  // [0, 1)
    RngSeed seed;
};

struct SynthResult {
    std::vector<FeatureVector> genuine;
    std::vector<FeatureVector> outliers;
};

SynthResult generate_synthetic(const SynthSpec& spec);

// Window i covers [i*step, i*step + length) relative to the first timestamp;
// a series shorter than one window yields an empty list.
std::vector<SensorSeries> sliding_windows(const SensorSeries& series, const WindowSpec& spec);

// Per channel: mean, standard deviation (1/N), min, max, median, interquartile
// range, mean absolute change, zero-crossing count of the mean-centered
// signal. Channels are concatenated in order, so dim = 8 * channel_count.
FeatureVector extract_features(const SensorSeries& window);

inline constexpr int kFeaturesPerChannel = 8;

// CSV ingestion. The expected layout is a header row
// `user_id,session,timestamp_s,ch1,...,chK`; channel_columns may pin an
// explicit subset, otherwise every column beyond the three keys is a channel.
struct CsvSchema {
    std::string user_column = "user_id";
    std::string session_column = "session";
    std::string timestamp_column = "timestamp_s";
    std::vector<std::string> channel_columns;
};

struct SessionSeries {
    std::string user_id;
    std::string session;
    SensorSeries series;
};

// Rows grouped by (user, session) and sorted by timestamp within each group;
// groups come back sorted by (user, session).
std::vector<SessionSeries> load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

// Multi-user benchmark: one isotropic Gaussian cluster per user, centroids
// placed on distinct axes scaled by `separation` (so every pair of centroids
// is at least `separation` apart in units of the within-user sigma).
struct SyntheticUsersSpec {
    int n_users = 10;
    int dim = 10;
    int train_per_user = 100;
    int test_per_user = 50;
    double separation = 10.0;
    RngSeed seed;
};

std::vector<UserDataset> generate_user_datasets(const SyntheticUsersSpec& spec);

// Windows a raw stream and extracts one FeatureVector per window.
std::vector<FeatureVector> features_from_series(const SensorSeries& series, const WindowSpec& spec);

// Builds per-user datasets from ingested sessions: the first session of each
// user (in sorted order) becomes the training session, the second the test
// session. Users with fewer than two sessions are rejected.
std::vector<UserDataset> datasets_from_sessions(std::span<const SessionSeries> sessions,
                                                const WindowSpec& window);

}  // namespace occauth

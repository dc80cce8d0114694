#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "occauth/preprocess.hpp"
#include "occauth/types.hpp"

namespace occauth {

enum class OccKind { sv1c, ee, iforest, lof };

// Short names used on the CLI and in report files.
std::string_view to_string(OccKind kind);
OccKind occ_kind_from_string(std::string_view name);
inline constexpr OccKind kAllOccKinds[] = {OccKind::sv1c, OccKind::ee, OccKind::iforest,
                                           OccKind::lof};

struct Sv1cParams {
    double nu = 0.1;         // upper bound on the training-outlier fraction, (0, 1]
    double epsilon = 1e-3;   // stopping tolerance on the dual optimality gap
    double gamma = 0.0;      // RBF width; <= 0 means 1/dim
    int max_iterations = 100000;
};

struct EeParams {
    double support_fraction = 0.75;  // (0.5, 1]; h = floor(support_fraction * N)
    double contamination = 0.1;      // [0, 0.5); only used for the default threshold
    int n_restarts = 50;
    RngSeed seed;
};

struct IfParams {
    int n_trees = 100;
    int subsample_size = 256;  // psi; clamped to N with a warning
    RngSeed seed;
};

struct LofParams {
    int k_neighbors = 0;  // 0 resolves to max(5, min(20, N/2))
};

// A fitted one-class model. Only the fit_* functions produce one; instances
// are immutable and scoring is safe to call from many threads.
class OccModel {
public:
    virtual ~OccModel() = default;

    OccKind kind() const noexcept { return kind_; }
    int input_dim() const noexcept { return input_dim_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    // Higher = more genuine. Raw adapter outputs that grow with abnormality
    // (LOF, isolation score, Mahalanobis distance) are negated inside.
    GenuinenessScore score(const FeatureVector& x) const;

    // Besides-the-data threshold suggested by the model itself (SV1C: the
    // natural boundary 0; EE: the contamination quantile of training scores).
    std::optional<double> default_threshold() const noexcept { return default_threshold_; }

    // Versioned, self-describing JSON.
    void save(std::ostream& out) const;
    static std::unique_ptr<OccModel> load(std::istream& in);

protected:
    OccModel(OccKind kind, int input_dim) : kind_(kind), input_dim_(input_dim) {}
    virtual double raw_score(std::span<const double> x) const = 0;
    virtual void save_impl(std::ostream& out) const = 0;

    OccKind kind_;
    int input_dim_;
    std::optional<double> default_threshold_;
    std::vector<std::string> warnings_;
};

std::unique_ptr<OccModel> fit_sv1c(std::span<const FeatureVector> x, const Sv1cParams& params = {});
std::unique_ptr<OccModel> fit_ee(std::span<const FeatureVector> x, const EeParams& params = {});
std::unique_ptr<OccModel> fit_iforest(std::span<const FeatureVector> x, const IfParams& params = {});
std::unique_ptr<OccModel> fit_lof(std::span<const FeatureVector> x, const LofParams& params = {});

// accept iff score >= threshold (boundary inclusive).
Decision predict(const OccModel& model, const FeatureVector& x, double threshold);

// Mahalanobis distance of x from mean under the given covariance (not
// squared). Shared by the elliptic envelope and exposed for direct checks.
double mahalanobis_distance(std::span<const double> x, std::span<const double> mean,
                            const std::vector<std::vector<double>>& covariance);

// Introspection of fitted state, mainly for verification tooling.
struct Sv1cInfo {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> alphas;
    double rho = 0.0;
    double gamma = 0.0;
    double final_gap = 0.0;
    int iterations = 0;
};
Sv1cInfo sv1c_info(const OccModel& model);

struct EeInfo {
    std::vector<double> robust_mean;
    std::vector<std::vector<double>> robust_covariance;
    double covariance_determinant = 0.0;
    bool regularized = false;
};
EeInfo ee_info(const OccModel& model);

// Isolation-forest score arithmetic, exposed so the formula can be checked
// in isolation: c(n) = 2 H(n-1) - 2 (n-1)/n with exact harmonic numbers, and
// s = 2^(-mean_path / c(psi)).
double iforest_average_path_length(int n);
double iforest_anomaly_score(double mean_path_length, int subsample_size);

// Preprocessing defaults applied at enrollment. Only the elliptic envelope
// consumes PCA-projected features; the other three see the standardized
// full-dimension vectors.
struct EnrollmentConfig {
    OccKind kind = OccKind::sv1c;
    Sv1cParams sv1c;
    EeParams ee;
    IfParams iforest;
    LofParams lof;
    double ee_pca_keep_fraction = 0.30;
};

// One user's trained pipeline: standardizer (+ PCA for EE) + model. score()
// takes raw feature vectors and applies the chain.
class Enrollment {
public:
    Enrollment(Standardizer standardizer, std::unique_ptr<OccModel> model)
        : standardizer_(std::move(standardizer)), model_(std::move(model)) {}
    Enrollment(Standardizer standardizer, PcaProjector pca, std::unique_ptr<OccModel> model)
        : standardizer_(std::move(standardizer)), pca_(std::move(pca)), model_(std::move(model)) {}

    GenuinenessScore score(const FeatureVector& raw) const;
    std::vector<double> score_all(std::span<const FeatureVector> raw) const;

    const OccModel& model() const noexcept { return *model_; }
    const Standardizer& standardizer() const noexcept { return standardizer_; }
    const PcaProjector* pca() const noexcept { return pca_ ? &*pca_ : nullptr; }

private:
    Standardizer standardizer_;
    std::optional<PcaProjector> pca_;
    std::unique_ptr<OccModel> model_;
};

Enrollment enroll(std::span<const FeatureVector> train_genuine, const EnrollmentConfig& config);

// Score grid over a 2-D box for boundary plots. Emitted values are
// score(x, y) - threshold, so the zero-level set is the decision boundary.
struct GridBounds {
    double x_min = -1.0, x_max = 1.0;
    double y_min = -1.0, y_max = 1.0;
};

struct ScoreGrid {
    GridBounds bounds;
    int resolution = 0;
    std::vector<double> values;  // row-major, values[iy * resolution + ix]

    double value(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * resolution + ix]; }
    double x_at(int ix) const;
    double y_at(int iy) const;
};

ScoreGrid decision_grid(const Enrollment& enrollment, GridBounds bounds, int resolution,
                        double threshold = 0.0);
ScoreGrid decision_grid(const OccModel& model, GridBounds bounds, int resolution,
                        double threshold = 0.0);

}  // namespace occauth

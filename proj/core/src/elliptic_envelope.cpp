#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "models.hpp"
#include "occauth/numeric.hpp"
#include "occauth/rng.hpp"

namespace occauth {
namespace detail {
namespace {

constexpr double kRidgeTau = 1e-6;

struct Estimate {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;  // 1/h convention
    double det = std::numeric_limits<double>::infinity();
};

Estimate subset_estimate(const Eigen::MatrixXd& data, std::span<const int> subset) {
    const int dim = static_cast<int>(data.cols());
    Estimate e;
    e.mean = Eigen::VectorXd::Zero(dim);
    for (int idx : subset) e.mean += data.row(idx).transpose();
    e.mean /= static_cast<double>(subset.size());
    e.cov = Eigen::MatrixXd::Zero(dim, dim);
    for (int idx : subset) {
        Eigen::VectorXd d = data.row(idx).transpose() - e.mean;
        e.cov += d * d.transpose();
    }
    e.cov /= static_cast<double>(subset.size());
    e.det = e.cov.determinant();
    return e;
}

// Squared Mahalanobis distances of every row under the estimate; returns
// false when the covariance cannot be factorized.
bool all_distances(const Eigen::MatrixXd& data, const Estimate& e, std::vector<double>& out) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(e.cov);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    const Eigen::VectorXd& d = ldlt.vectorD();
    for (int i = 0; i < d.size(); ++i) {
        if (!(d[i] > 0.0)) return false;
    }
    out.resize(data.rows());
    for (int i = 0; i < data.rows(); ++i) {
        Eigen::VectorXd diff = data.row(i).transpose() - e.mean;
        out[i] = diff.dot(ldlt.solve(diff));
    }
    return true;
}

std::vector<int> h_smallest(const std::vector<double>& distances, int h) {
    std::vector<int> order(distances.size());
    std::iota(order.begin(), order.end(), 0);
    // Ties broken by index so the step is deterministic.
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (distances[a] != distances[b]) return distances[a] < distances[b];
        return a < b;
    });
    order.resize(h);
    std::sort(order.begin(), order.end());
    return order;
}

// C-steps from a starting estimate down to a local determinant minimum.
Estimate concentrate(const Eigen::MatrixXd& data, Estimate start, int h) {
    Estimate current = std::move(start);
    std::vector<double> distances;
    for (int step = 0; step < 100; ++step) {
        if (!all_distances(data, current, distances)) break;
        Estimate next = subset_estimate(data, h_smallest(distances, h));
        if (!(next.det < current.det - 1e-12 * std::max(1.0, std::abs(current.det)))) {
            if (next.det < current.det) current = std::move(next);
            break;
        }
        current = std::move(next);
    }
    return current;
}

// Overflow-safe C(n, k), saturating above the exhaustive-search cutoff.
double binomial_capped(int n, int k, double cap) {
    double value = 1.0;
    for (int i = 1; i <= k; ++i) {
        value *= static_cast<double>(n - k + i) / i;
        if (value > cap) return cap + 1.0;
    }
    return value;
}

Estimate exhaustive_mcd(const Eigen::MatrixXd& data, int h) {
    const int n = static_cast<int>(data.rows());
    std::vector<int> subset(h);
    std::iota(subset.begin(), subset.end(), 0);
    Estimate best;
    while (true) {
        Estimate e = subset_estimate(data, subset);
        if (e.det < best.det) best = std::move(e);
        // Next lexicographic combination.
        int i = h - 1;
        while (i >= 0 && subset[i] == n - h + i) --i;
        if (i < 0) break;
        ++subset[i];
        for (int j = i + 1; j < h; ++j) subset[j] = subset[j - 1] + 1;
    }
    return best;
}

Estimate fast_mcd(const Eigen::MatrixXd& data, int h, int n_restarts, RngSeed seed) {
    const int n = static_cast<int>(data.rows());
    const int dim = static_cast<int>(data.cols());
    Estimate best;
    std::vector<double> distances;
    for (int restart = 0; restart < n_restarts; ++restart) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
        std::vector<int> pool(n);
        std::iota(pool.begin(), pool.end(), 0);
        rng.shuffle(pool);

        // (dim + 1)-subset, grown until its covariance is invertible.
        int take = dim + 1;
        Estimate start;
        while (take <= h) {
            start = subset_estimate(data, std::span<const int>(pool.data(), take));
            if (all_distances(data, start, distances)) break;
            ++take;
        }
        if (take > h) continue;  // fully degenerate draw

        Estimate local = concentrate(data, std::move(start), h);
        if (local.det < best.det) best = std::move(local);
    }
    return best;
}

struct Materialized {
    std::vector<double> mean;
    std::vector<std::vector<double>> cov;
    std::vector<std::vector<double>> precision;
    double det;
    bool regularized;
};

// Inverts the covariance, ridging it when singular.
Materialized materialize(Estimate e) {
    const int dim = static_cast<int>(e.cov.rows());
    bool regularized = false;
    Eigen::LLT<Eigen::MatrixXd> llt(e.cov);
    if (llt.info() != Eigen::Success || !(e.cov.determinant() > 0.0)) {
        double trace = e.cov.trace();
        if (!(trace > 0.0)) trace = static_cast<double>(dim);
        e.cov += kRidgeTau * (trace / dim) * Eigen::MatrixXd::Identity(dim, dim);
        regularized = true;
        llt.compute(e.cov);
        if (llt.info() != Eigen::Success) {
            throw Error("fit_ee: covariance not invertible even after regularization");
        }
    }
    Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(dim, dim));

    Materialized m;
    m.mean.assign(e.mean.data(), e.mean.data() + dim);
    m.cov.resize(dim);
    m.precision.resize(dim);
    for (int i = 0; i < dim; ++i) {
        m.cov[i].assign(e.cov.row(i).begin(), e.cov.row(i).end());
        m.precision[i].assign(precision.row(i).begin(), precision.row(i).end());
    }
    m.det = e.cov.determinant();
    m.regularized = regularized;
    return m;
}

Eigen::MatrixXd to_matrix(std::span<const FeatureVector> x, const char* what) {
    const int dim = x.front().dim();
    Eigen::MatrixXd data(x.size(), dim);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].dim() != dim) throw ShapeError(std::string(what) + ": inconsistent dimensions");
        for (int j = 0; j < dim; ++j) data(i, j) = x[i][j];
    }
    return data;
}

std::unique_ptr<EeModel> build_model(int dim, Materialized m, std::span<const FeatureVector> x,
                                     double contamination) {
    auto model = std::make_unique<EeModel>(dim, std::move(m.mean), std::move(m.cov),
                                           std::move(m.precision), m.det, m.regularized);
    if (m.regularized) {
        model->add_warning("ee: singular robust covariance; ridge regularization applied");
    }
    std::vector<double> train_scores;
    train_scores.reserve(x.size());
    for (const auto& v : x) train_scores.push_back(model->score(v).value);
    model->set_default_threshold(empirical_quantile(train_scores, contamination));
    return model;
}

}  // namespace

EeModel::EeModel(int input_dim, std::vector<double> mean,
                 std::vector<std::vector<double>> covariance,
                 std::vector<std::vector<double>> precision, double determinant, bool regularized)
    : OccModel(OccKind::ee, input_dim),
      mean_(std::move(mean)),
      covariance_(std::move(covariance)),
      precision_(std::move(precision)),
      determinant_(determinant),
      regularized_(regularized) {}

double EeModel::raw_score(std::span<const double> x) const {
    const int dim = input_dim_;
    double quad = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double di = x[i] - mean_[i];
        for (int j = 0; j < dim; ++j) {
            quad += di * precision_[i][j] * (x[j] - mean_[j]);
        }
    }
    return -std::sqrt(std::max(0.0, quad));
}

void EeModel::save_impl(std::ostream& out) const {
    nlohmann::json j = model_header(*this);
    j["state"] = {{"mean", mean_},
                  {"covariance", covariance_},
                  {"precision", precision_},
                  {"determinant", determinant_},
                  {"regularized", regularized_}};
    out << j.dump(2) << '\n';
}

std::unique_ptr<OccModel> EeModel::from_json(const nlohmann::json& j) {
    const auto& s = j.at("state");
    auto model = std::make_unique<EeModel>(
        j.at("input_dim").get<int>(), s.at("mean").get<std::vector<double>>(),
        s.at("covariance").get<std::vector<std::vector<double>>>(),
        s.at("precision").get<std::vector<std::vector<double>>>(),
        s.at("determinant").get<double>(), s.at("regularized").get<bool>());
    model->warnings_ = j.at("warnings").get<std::vector<std::string>>();
    if (!j.at("default_threshold").is_null()) {
        model->default_threshold_ = j.at("default_threshold").get<double>();
    }
    return model;
}

std::unique_ptr<OccModel> fit_ee_fallback(std::span<const FeatureVector> x, double contamination) {
    const int dim = x.front().dim();
    Eigen::MatrixXd data = to_matrix(x, "fit_ee_fallback");
    std::vector<int> all(x.size());
    std::iota(all.begin(), all.end(), 0);
    Materialized m = materialize(subset_estimate(data, all));
    auto model = build_model(dim, std::move(m), x, contamination);
    static_cast<EeModel&>(*model).add_warning(
        "ee: training set too small for MCD; regularized sample covariance used");
    return model;
}

}  // namespace detail

std::unique_ptr<OccModel> fit_ee(std::span<const FeatureVector> x, const EeParams& params) {
    if (!(params.support_fraction > 0.5 && params.support_fraction <= 1.0)) {
        throw InvalidArgumentError("fit_ee: support_fraction outside (0.5, 1]");
    }
    if (!(params.contamination >= 0.0 && params.contamination < 0.5)) {
        throw InvalidArgumentError("fit_ee: contamination outside [0, 0.5)");
    }
    if (params.n_restarts < 1) throw InvalidArgumentError("fit_ee: n_restarts < 1");
    if (x.empty()) throw InsufficientDataError("fit_ee: no samples");

    const int n = static_cast<int>(x.size());
    const int dim = x.front().dim();
    if (n <= dim + 1) {
        throw InsufficientDataError("fit_ee: need more than dim + 1 samples");
    }
    const int h = static_cast<int>(std::floor(params.support_fraction * n));
    if (!(2 * h > n + dim + 1)) {
        throw InvalidArgumentError("fit_ee: subset size h must exceed (N + dim + 1) / 2");
    }

    Eigen::MatrixXd data = detail::to_matrix(x, "fit_ee");

    // The exhaustive branch doubles as an internal oracle on tiny inputs.
    detail::Estimate best;
    if (detail::binomial_capped(n, h, 1e4) <= 1e4) {
        best = detail::exhaustive_mcd(data, h);
    } else {
        best = detail::fast_mcd(data, h, params.n_restarts, params.seed);
    }
    if (!std::isfinite(best.det)) {
        throw DegenerateDataError("fit_ee: every candidate subset had a degenerate covariance");
    }
    return detail::build_model(dim, detail::materialize(std::move(best)), x, params.contamination);
}

double mahalanobis_distance(std::span<const double> x, std::span<const double> mean,
                            const std::vector<std::vector<double>>& covariance) {
    const int dim = static_cast<int>(mean.size());
    if (static_cast<int>(x.size()) != dim || static_cast<int>(covariance.size()) != dim) {
        throw ShapeError("mahalanobis_distance: dimension mismatch");
    }
    Eigen::MatrixXd cov(dim, dim);
    Eigen::VectorXd diff(dim);
    for (int i = 0; i < dim; ++i) {
        if (static_cast<int>(covariance[i].size()) != dim) {
            throw ShapeError("mahalanobis_distance: covariance not square");
        }
        diff[i] = x[i] - mean[i];
        for (int j = 0; j < dim; ++j) cov(i, j) = covariance[i][j];
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    if (ldlt.info() != Eigen::Success) {
        throw InvalidArgumentError("mahalanobis_distance: covariance not factorizable");
    }
    return std::sqrt(std::max(0.0, diff.dot(ldlt.solve(diff))));
}

}  // namespace occauth

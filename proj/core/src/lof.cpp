#include <algorithm>
#include <cmath>
#include <ostream>

#include "models.hpp"

namespace occauth {
namespace detail {
namespace {

double euclidean(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

// k-distance: the k-th smallest entry; the neighborhood is every index whose
// distance does not exceed it, so duplicates and ties are all included.
double k_distance(const std::vector<double>& distances, int k) {
    std::vector<double> copy(distances);
    std::nth_element(copy.begin(), copy.begin() + (k - 1), copy.end());
    return copy[k - 1];
}

}  // namespace

LofModel::LofModel(int input_dim, std::vector<std::vector<double>> train_points, int k_neighbors,
                   std::vector<double> k_distances, std::vector<double> lrds)
    : OccModel(OccKind::lof, input_dim),
      train_points_(std::move(train_points)),
      k_(k_neighbors),
      k_distances_(std::move(k_distances)),
      lrds_(std::move(lrds)) {}

double LofModel::raw_score(std::span<const double> x) const {
    const std::size_t n = train_points_.size();
    std::vector<double> dist(n);
    for (std::size_t j = 0; j < n; ++j) dist[j] = euclidean(x, train_points_[j]);
    const double kd = k_distance(dist, k_);

    // Novelty mode: the query never joins the training set.
    double reach_sum = 0.0;
    double lrd_sum = 0.0;
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (dist[j] <= kd) {
            reach_sum += std::max({k_distances_[j], dist[j], kLofReachabilityFloor});
            lrd_sum += lrds_[j];
            ++count;
        }
    }
    const double lrd_x = static_cast<double>(count) / reach_sum;
    const double lof = (lrd_sum / count) / lrd_x;
    return -lof;
}

void LofModel::save_impl(std::ostream& out) const {
    nlohmann::json j = model_header(*this);
    j["state"] = {{"train_points", train_points_},
                  {"k_neighbors", k_},
                  {"k_distances", k_distances_},
                  {"lrds", lrds_}};
    out << j.dump(2) << '\n';
}

std::unique_ptr<OccModel> LofModel::from_json(const nlohmann::json& j) {
    const auto& s = j.at("state");
    auto model = std::make_unique<LofModel>(
        j.at("input_dim").get<int>(),
        s.at("train_points").get<std::vector<std::vector<double>>>(),
        s.at("k_neighbors").get<int>(), s.at("k_distances").get<std::vector<double>>(),
        s.at("lrds").get<std::vector<double>>());
    model->warnings_ = j.at("warnings").get<std::vector<std::string>>();
    return model;
}

}  // namespace detail

std::unique_ptr<OccModel> fit_lof(std::span<const FeatureVector> x, const LofParams& params) {
    const int n = static_cast<int>(x.size());
    int k = params.k_neighbors;
    if (k == 0) k = std::max(5, std::min(20, n / 2));
    if (k < 1) throw InvalidArgumentError("fit_lof: k_neighbors must be positive");
    if (k >= n) {
        throw InvalidArgumentError("fit_lof: k_neighbors (" + std::to_string(k) +
                                   ") must be smaller than the training set size (" +
                                   std::to_string(n) + ")");
    }

    const int dim = x.front().dim();
    std::vector<std::vector<double>> points;
    points.reserve(n);
    for (const auto& v : x) {
        if (v.dim() != dim) throw ShapeError("fit_lof: inconsistent feature dimensions");
        points.push_back(v.values);
    }

    // Dense distance matrix; training sets are small.
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = detail::euclidean(points[i], points[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }

    std::vector<double> k_dists(n);
    std::vector<std::vector<int>> neighborhoods(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> others;
        others.reserve(n - 1);
        for (int j = 0; j < n; ++j) {
            if (j != i) others.push_back(dist[i][j]);
        }
        k_dists[i] = detail::k_distance(others, k);
        for (int j = 0; j < n; ++j) {
            if (j != i && dist[i][j] <= k_dists[i]) neighborhoods[i].push_back(j);
        }
    }

    std::vector<double> lrds(n);
    for (int i = 0; i < n; ++i) {
        double reach_sum = 0.0;
        for (int j : neighborhoods[i]) {
            reach_sum += std::max({k_dists[j], dist[i][j], detail::kLofReachabilityFloor});
        }
        lrds[i] = static_cast<double>(neighborhoods[i].size()) / reach_sum;
    }

    return std::make_unique<detail::LofModel>(dim, std::move(points), k, std::move(k_dists),
                                              std::move(lrds));
}

}  // namespace occauth

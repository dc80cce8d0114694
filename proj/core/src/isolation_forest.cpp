#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "models.hpp"
#include "occauth/rng.hpp"

namespace occauth {

double iforest_average_path_length(int n) {
    if (n <= 1) return 0.0;
    // 2 H(n-1) - 2 (n-1)/n with the exact harmonic number; the sizes involved
    // are bounded by the subsample size, so summing is cheap.
    double harmonic = 0.0;
    for (int i = 1; i <= n - 1; ++i) harmonic += 1.0 / i;
    return 2.0 * harmonic - 2.0 * static_cast<double>(n - 1) / n;
}

double iforest_anomaly_score(double mean_path_length, int subsample_size) {
    const double c = iforest_average_path_length(subsample_size);
    if (!(c > 0.0)) throw InvalidArgumentError("iforest_anomaly_score: subsample_size < 2");
    return std::exp2(-mean_path_length / c);
}

namespace detail {
namespace {

struct TreeBuilder {
    const std::vector<const FeatureVector*>& points;
    int height_limit;
    Rng& rng;
    std::vector<IsolationTreeNode> nodes;

    int build(std::vector<int>& indices, int begin, int end, int depth) {
        const int node_id = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes[node_id].size = end - begin;
        if (end - begin <= 1 || depth >= height_limit) return node_id;

        // Candidate features are those not constant over this node's data.
        const int dim = points[indices[begin]]->dim();
        std::vector<int> usable;
        std::vector<std::pair<double, double>> ranges(dim);
        for (int f = 0; f < dim; ++f) {
            double lo = (*points[indices[begin]])[f];
            double hi = lo;
            for (int i = begin + 1; i < end; ++i) {
                const double v = (*points[indices[i]])[f];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            ranges[f] = {lo, hi};
            if (hi > lo) usable.push_back(f);
        }
        if (usable.empty()) return node_id;  // all duplicates

        const int feature = usable[rng.uniform_index(usable.size())];
        const auto [lo, hi] = ranges[feature];
        // Strictly interior split point so neither side is empty.
        double u = rng.uniform01();
        if (u <= 0.0) u = 0x1.0p-53;
        const double split = lo + u * (hi - lo);

        auto mid_it = std::partition(indices.begin() + begin, indices.begin() + end,
                                     [&](int idx) { return (*points[idx])[feature] < split; });
        const int mid = static_cast<int>(mid_it - indices.begin());

        nodes[node_id].feature = feature;
        nodes[node_id].split = split;
        nodes[node_id].left = build(indices, begin, mid, depth + 1);
        nodes[node_id].right = build(indices, mid, end, depth + 1);
        return node_id;
    }
};

double path_length(const std::vector<IsolationTreeNode>& nodes, std::span<const double> x) {
    int node = 0;
    int depth = 0;
    while (nodes[node].feature >= 0) {
        node = x[nodes[node].feature] < nodes[node].split ? nodes[node].left : nodes[node].right;
        ++depth;
    }
    return depth + iforest_average_path_length(nodes[node].size);
}

}  // namespace

IForestModel::IForestModel(int input_dim, std::vector<std::vector<IsolationTreeNode>> trees,
                           int subsample_size)
    : OccModel(OccKind::iforest, input_dim),
      trees_(std::move(trees)),
      subsample_size_(subsample_size) {}

double IForestModel::raw_score(std::span<const double> x) const {
    double total = 0.0;
    for (const auto& tree : trees_) total += path_length(tree, x);
    const double mean_path = total / static_cast<double>(trees_.size());
    return -iforest_anomaly_score(mean_path, subsample_size_);
}

void IForestModel::save_impl(std::ostream& out) const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : trees_) {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& n : tree) {
            t.push_back({{"feature", n.feature},
                         {"split", n.split},
                         {"left", n.left},
                         {"right", n.right},
                         {"size", n.size}});
        }
        trees.push_back(std::move(t));
    }
    nlohmann::json j = model_header(*this);
    j["state"] = {{"trees", std::move(trees)}, {"subsample_size", subsample_size_}};
    out << j.dump(2) << '\n';
}

std::unique_ptr<OccModel> IForestModel::from_json(const nlohmann::json& j) {
    const auto& s = j.at("state");
    std::vector<std::vector<IsolationTreeNode>> trees;
    for (const auto& t : s.at("trees")) {
        std::vector<IsolationTreeNode> tree;
        tree.reserve(t.size());
        for (const auto& n : t) {
            tree.push_back({n.at("feature").get<int>(), n.at("split").get<double>(),
                            n.at("left").get<int>(), n.at("right").get<int>(),
                            n.at("size").get<int>()});
        }
        trees.push_back(std::move(tree));
    }
    auto model = std::make_unique<IForestModel>(j.at("input_dim").get<int>(), std::move(trees),
                                                s.at("subsample_size").get<int>());
    model->warnings_ = j.at("warnings").get<std::vector<std::string>>();
    return model;
}

}  // namespace detail

std::unique_ptr<OccModel> fit_iforest(std::span<const FeatureVector> x, const IfParams& params) {
    if (x.size() < 2) throw InsufficientDataError("fit_iforest: need at least two samples");
    if (params.n_trees < 1) throw InvalidArgumentError("fit_iforest: n_trees < 1");
    if (params.subsample_size < 2) throw InvalidArgumentError("fit_iforest: subsample_size < 2");

    const int n = static_cast<int>(x.size());
    const int dim = x.front().dim();
    std::vector<const FeatureVector*> points;
    points.reserve(n);
    for (const auto& v : x) {
        if (v.dim() != dim) throw ShapeError("fit_iforest: inconsistent feature dimensions");
        points.push_back(&v);
    }

    bool clamped = false;
    int psi = params.subsample_size;
    if (psi > n) {
        psi = n;
        clamped = true;
    }
    const int height_limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(psi))));

    std::vector<std::vector<detail::IsolationTreeNode>> trees;
    trees.reserve(params.n_trees);
    std::vector<int> pool(n);
    for (int t = 0; t < params.n_trees; ++t) {
        Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
        std::iota(pool.begin(), pool.end(), 0);
        // Partial Fisher-Yates: the first psi entries are the subsample.
        for (int i = 0; i < psi; ++i) {
            const std::size_t j = i + rng.uniform_index(static_cast<std::size_t>(n - i));
            std::swap(pool[i], pool[j]);
        }
        std::vector<int> subsample(pool.begin(), pool.begin() + psi);

        detail::TreeBuilder builder{points, height_limit, rng, {}};
        builder.build(subsample, 0, psi, 0);
        trees.push_back(std::move(builder.nodes));
    }

    auto model = std::make_unique<detail::IForestModel>(dim, std::move(trees), psi);
    if (clamped) {
        model->add_warning("iforest: subsample_size " + std::to_string(params.subsample_size) +
                           " clamped to training size " + std::to_string(n));
    }
    return model;
}

}  // namespace occauth

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "models.hpp"

namespace occauth {
namespace detail {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

}  // namespace

Sv1cModel::Sv1cModel(int input_dim, std::vector<std::vector<double>> support_vectors,
                     std::vector<double> alphas, double rho, double gamma, double final_gap,
                     int iterations)
    : OccModel(OccKind::sv1c, input_dim),
      support_vectors_(std::move(support_vectors)),
      alphas_(std::move(alphas)),
      rho_(rho),
      gamma_(gamma),
      final_gap_(final_gap),
      iterations_(iterations) {
    default_threshold_ = 0.0;  // the natural boundary f(x) = 0
}

double Sv1cModel::raw_score(std::span<const double> x) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < support_vectors_.size(); ++i) {
        sum += alphas_[i] * std::exp(-gamma_ * squared_distance(support_vectors_[i], x));
    }
    return sum - rho_;
}

void Sv1cModel::save_impl(std::ostream& out) const {
    nlohmann::json j = model_header(*this);
    j["state"] = {{"support_vectors", support_vectors_},
                  {"alphas", alphas_},
                  {"rho", rho_},
                  {"gamma", gamma_},
                  {"final_gap", final_gap_},
                  {"iterations", iterations_}};
    out << j.dump(2) << '\n';
}

std::unique_ptr<OccModel> Sv1cModel::from_json(const nlohmann::json& j) {
    const auto& s = j.at("state");
    auto model = std::make_unique<Sv1cModel>(
        j.at("input_dim").get<int>(), s.at("support_vectors").get<std::vector<std::vector<double>>>(),
        s.at("alphas").get<std::vector<double>>(), s.at("rho").get<double>(),
        s.at("gamma").get<double>(), s.at("final_gap").get<double>(),
        s.at("iterations").get<int>());
    model->warnings_ = j.at("warnings").get<std::vector<std::string>>();
    return model;
}

}  // namespace detail

std::unique_ptr<OccModel> fit_sv1c(std::span<const FeatureVector> x, const Sv1cParams& params) {
    if (x.size() < 2) throw InsufficientDataError("fit_sv1c: need at least two samples");
    if (!(params.nu > 0.0 && params.nu <= 1.0)) {
        throw InvalidArgumentError("fit_sv1c: nu outside (0, 1]");
    }
    if (!(params.epsilon > 0.0)) throw InvalidArgumentError("fit_sv1c: epsilon must be positive");
    if (params.max_iterations < 1) throw InvalidArgumentError("fit_sv1c: max_iterations < 1");

    const int n = static_cast<int>(x.size());
    const int dim = x.front().dim();
    for (const auto& v : x) {
        if (v.dim() != dim) throw ShapeError("fit_sv1c: inconsistent feature dimensions");
    }
    const double gamma = params.gamma > 0.0 ? params.gamma : 1.0 / dim;
    const double box = 1.0 / (params.nu * n);

    // Dense RBF kernel matrix. Training sets in this problem are small
    // (tens to low thousands of samples per user).
    std::vector<double> kernel(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        kernel[static_cast<std::size_t>(i) * n + i] = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double k =
                std::exp(-gamma * detail::squared_distance(x[i].values, x[j].values));
            kernel[static_cast<std::size_t>(i) * n + j] = k;
            kernel[static_cast<std::size_t>(j) * n + i] = k;
        }
    }
    auto k_at = [&](int i, int j) { return kernel[static_cast<std::size_t>(i) * n + j]; };

    // Feasible start: the first floor(nu*n) points take the full box, the
    // next one the remainder, so that sum(alpha) == 1.
    std::vector<double> alpha(n, 0.0);
    {
        const int full = static_cast<int>(std::floor(params.nu * n));
        double remaining = 1.0;
        for (int i = 0; i < full && i < n; ++i) {
            alpha[i] = box;
            remaining -= box;
        }
        if (full < n && remaining > 0.0) alpha[full] = remaining;
    }

    // Gradient of (1/2) a'Ka.
    std::vector<double> grad(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double g = 0.0;
        for (int j = 0; j < n; ++j) {
            if (alpha[j] > 0.0) g += k_at(i, j) * alpha[j];
        }
        grad[i] = g;
    }

    const double snap = box * 1e-12;
    auto at_upper = [&](int i) { return alpha[i] >= box - snap; };
    auto at_lower = [&](int i) { return alpha[i] <= snap; };

    // SMO over the most violating pair: raise the alpha with the smallest
    // gradient among those below the box, lower the one with the largest
    // gradient among those above zero. Optimal when the spread is within
    // epsilon.
    double gap = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    for (; iterations < params.max_iterations; ++iterations) {
        int up = -1, down = -1;
        double g_min = std::numeric_limits<double>::infinity();
        double g_max = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (!at_upper(i) && grad[i] < g_min) {
                g_min = grad[i];
                up = i;
            }
            if (!at_lower(i) && grad[i] > g_max) {
                g_max = grad[i];
                down = i;
            }
        }
        gap = g_max - g_min;
        if (gap <= params.epsilon) {
            converged = true;
            break;
        }

        const double curvature =
            std::max(k_at(up, up) + k_at(down, down) - 2.0 * k_at(up, down), 1e-12);
        double delta = (grad[down] - grad[up]) / curvature;
        delta = std::min({delta, box - alpha[up], alpha[down]});

        alpha[up] += delta;
        alpha[down] -= delta;
        if (alpha[up] > box - snap) alpha[up] = box;
        if (alpha[down] < snap) alpha[down] = 0.0;
        for (int i = 0; i < n; ++i) {
            grad[i] += delta * (k_at(i, up) - k_at(i, down));
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "fit_sv1c: no convergence after " << params.max_iterations
            << " iterations; final gap " << gap << " > epsilon " << params.epsilon;
        throw ConvergenceError(msg.str());
    }

    // rho: gradient value at free vectors, or the midpoint of the KKT bounds
    // when every alpha sits on a bound.
    double rho;
    {
        double sum = 0.0;
        int free_count = 0;
        double lower = -std::numeric_limits<double>::infinity();
        double upper = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (at_upper(i)) {
                lower = std::max(lower, grad[i]);
            } else if (at_lower(i)) {
                upper = std::min(upper, grad[i]);
            } else {
                sum += grad[i];
                ++free_count;
            }
        }
        rho = free_count > 0 ? sum / free_count : 0.5 * (lower + upper);
    }

    std::vector<std::vector<double>> support_vectors;
    std::vector<double> alphas;
    for (int i = 0; i < n; ++i) {
        if (alpha[i] > 0.0) {
            support_vectors.push_back(x[i].values);
            alphas.push_back(alpha[i]);
        }
    }
    return std::make_unique<detail::Sv1cModel>(dim, std::move(support_vectors), std::move(alphas),
                                               rho, gamma, gap, iterations);
}

}  // namespace occauth

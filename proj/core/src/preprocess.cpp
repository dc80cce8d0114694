#include "occauth/preprocess.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace occauth {
namespace {

void check_consistent_dim(std::span<const FeatureVector> x, const char* what) {
    for (const auto& v : x) {
        if (v.dim() != x.front().dim()) {
            throw ShapeError(std::string(what) + ": inconsistent feature dimensions");
        }
    }
}

Eigen::MatrixXd sample_matrix(std::span<const FeatureVector> x) {
    Eigen::MatrixXd m(x.size(), x.front().dim());
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (int j = 0; j < x.front().dim(); ++j) m(i, j) = x[i][j];
    }
    return m;
}

}  // namespace

Standardizer fit_standardizer(std::span<const FeatureVector> x) {
    if (x.empty()) throw InsufficientDataError("fit_standardizer: no samples");
    check_consistent_dim(x, "fit_standardizer");
    const int dim = x.front().dim();
    const double n = static_cast<double>(x.size());

    Standardizer s;
    s.means_.assign(dim, 0.0);
    s.stds_.assign(dim, 0.0);
    for (const auto& v : x) {
        for (int j = 0; j < dim; ++j) s.means_[j] += v[j];
    }
    for (int j = 0; j < dim; ++j) s.means_[j] /= n;
    for (const auto& v : x) {
        for (int j = 0; j < dim; ++j) {
            const double d = v[j] - s.means_[j];
            s.stds_[j] += d * d;
        }
    }
    for (int j = 0; j < dim; ++j) {
        double sd = std::sqrt(s.stds_[j] / n);
        if (sd < 1e-12 * std::max(1.0, std::abs(s.means_[j]))) sd = 1.0;  // degenerate column
        s.stds_[j] = sd;
    }
    return s;
}

FeatureVector Standardizer::apply(const FeatureVector& x) const {
    if (x.dim() != dim()) throw ShapeError("Standardizer: dimension mismatch");
    std::vector<double> out(x.values.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (x[j] - means_[j]) / stds_[j];
    return FeatureVector(std::move(out));
}

std::vector<FeatureVector> Standardizer::apply(std::span<const FeatureVector> xs) const {
    std::vector<FeatureVector> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(apply(x));
    return out;
}

PcaProjector fit_pca(std::span<const FeatureVector> x, double keep_fraction) {
    if (x.size() < 2) throw InsufficientDataError("fit_pca: need at least two samples");
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
        throw InvalidArgumentError("fit_pca: keep_fraction outside (0, 1]");
    }
    check_consistent_dim(x, "fit_pca");
    const int dim = x.front().dim();

    Eigen::MatrixXd data = sample_matrix(x);
    Eigen::RowVectorXd center = data.colwise().mean();
    data.rowwise() -= center;
    // Covariance in the same 1/N convention as the standardizer.
    Eigen::MatrixXd cov = data.transpose() * data / static_cast<double>(x.size());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw Error("fit_pca: eigendecomposition failed");
    }

    const int keep = static_cast<int>(std::ceil(keep_fraction * dim));

    PcaProjector p;
    p.center_.assign(center.data(), center.data() + dim);
    p.explained_variance_.resize(dim);
    p.components_.reserve(keep);
    // Eigen reports eigenvalues in increasing order; reverse to ranked order.
    for (int r = 0; r < dim; ++r) {
        const int src = dim - 1 - r;
        p.explained_variance_[r] = std::max(0.0, solver.eigenvalues()[src]);
        if (r < keep) {
            Eigen::VectorXd v = solver.eigenvectors().col(src);
            // Deterministic sign: largest-magnitude coordinate positive.
            int arg = 0;
            for (int j = 1; j < dim; ++j) {
                if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
            }
            if (v[arg] < 0.0) v = -v;
            p.components_.emplace_back(v.data(), v.data() + dim);
        }
    }
    return p;
}

FeatureVector PcaProjector::project(const FeatureVector& x) const {
    if (x.dim() != input_dim()) throw ShapeError("PcaProjector: dimension mismatch");
    std::vector<double> out(components_.size(), 0.0);
    for (std::size_t r = 0; r < components_.size(); ++r) {
        double dot = 0.0;
        for (int j = 0; j < input_dim(); ++j) dot += components_[r][j] * (x[j] - center_[j]);
        out[r] = dot;
    }
    return FeatureVector(std::move(out));
}

std::vector<FeatureVector> PcaProjector::project(std::span<const FeatureVector> xs) const {
    std::vector<FeatureVector> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(project(x));
    return out;
}

FeatureVector PcaProjector::reconstruct(const FeatureVector& projected) const {
    if (projected.dim() != n_components()) {
        throw ShapeError("PcaProjector: reconstruct dimension mismatch");
    }
    std::vector<double> out(center_);
    for (std::size_t r = 0; r < components_.size(); ++r) {
        for (int j = 0; j < input_dim(); ++j) out[j] += projected[r] * components_[r][j];
    }
    return FeatureVector(std::move(out));
}

}  // namespace occauth

#pragma once

#include <span>
#include <vector>

#include "occauth/types.hpp"

namespace occauth {

// Per-feature affine map to zero mean and unit variance, fitted on genuine
// training samples only. Variance uses the 1/N convention; near-constant
// features keep std 1 so they transform to zero instead of exploding.
class Standardizer {
public:
    FeatureVector apply(const FeatureVector& x) const;
    std::vector<FeatureVector> apply(std::span<const FeatureVector> xs) const;

    const std::vector<double>& means() const noexcept { return means_; }
    const std::vector<double>& stds() const noexcept { return stds_; }
    int dim() const noexcept { return static_cast<int>(means_.size()); }

private:
    friend Standardizer fit_standardizer(std::span<const FeatureVector>);
    std::vector<double> means_;
    std::vector<double> stds_;
};

Standardizer fit_standardizer(std::span<const FeatureVector> x);

// Orthonormal projection onto the top principal components of the (already
// standardized) training data, ranked by explained variance.
class PcaProjector {
public:
    FeatureVector project(const FeatureVector& x) const;
    std::vector<FeatureVector> project(std::span<const FeatureVector> xs) const;
    FeatureVector reconstruct(const FeatureVector& projected) const;

    int input_dim() const noexcept { return static_cast<int>(center_.size()); }
    int n_components() const noexcept { return static_cast<int>(components_.size()); }
    // Row i is the i-th component (unit length, non-increasing variance).
    const std::vector<std::vector<double>>& components() const noexcept { return components_; }
    // All input_dim eigenvalues of the sample covariance, non-increasing.
    const std::vector<double>& explained_variance() const noexcept { return explained_variance_; }

private:
    friend PcaProjector fit_pca(std::span<const FeatureVector>, double);
    std::vector<double> center_;
    std::vector<std::vector<double>> components_;
    std::vector<double> explained_variance_;
};

// Retains ceil(keep_fraction * dim) components.
PcaProjector fit_pca(std::span<const FeatureVector> x, double keep_fraction = 0.30);

}  // namespace occauth

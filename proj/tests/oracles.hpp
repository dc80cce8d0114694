#pragma once

// Independent reference implementations used only by tests. Each oracle
// recomputes its quantity from first principles, without touching the
// library code paths it is checking.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace oracles {

// Local outlier factor of a query against a training set, from the raw
// pairwise-distance definition (k-distance, reachability, lrd), O(N^2).
double brute_force_lof(std::span<const std::vector<double>> train,
                       std::span<const double> query, int k);

// Minimum covariance determinant over every h-subset: returns the smallest
// covariance determinant (1/h convention) and the matching subset mean.
struct McdOracleResult {
    double determinant;
    std::vector<double> mean;
};
McdOracleResult exhaustive_mcd(std::span<const std::vector<double>> points, int h);

// Cyclic Jacobi eigendecomposition of a symmetric matrix; eigenvalues
// returned in decreasing order with matching unit eigenvectors (rows).
struct JacobiResult {
    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> eigenvectors;
};
JacobiResult jacobi_eigen(const std::vector<std::vector<double>>& symmetric);

// Exact two-sided Wilcoxon signed-rank p-value by enumerating all 2^n sign
// assignments: the union of {W+ <= w} and {W+ >= S - w} with w = min(W+, W-).
double wilcoxon_enumeration_p(std::span<const double> differences);

// Pairwise-comparison AUC in percent, ties counted half.
double brute_force_auc(std::span<const double> genuine, std::span<const double> impostor);

// Quantile by hand: sort, position q*(n-1), linear interpolation.
double quantile_by_hand(std::vector<double> values, double q);

// Pearson correlation from the textbook formula.
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace oracles

#pragma once

// Internal: concrete fitted-model classes behind the OccModel interface plus
// their JSON (de)serialization hooks. Not installed.

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "occauth/classifiers.hpp"

namespace occauth::detail {

class Sv1cModel final : public OccModel {
public:
    Sv1cModel(int input_dim, std::vector<std::vector<double>> support_vectors,
              std::vector<double> alphas, double rho, double gamma, double final_gap,
              int iterations);

    static std::unique_ptr<OccModel> from_json(const nlohmann::json& j);

    const std::vector<std::vector<double>>& support_vectors() const { return support_vectors_; }
    const std::vector<double>& alphas() const { return alphas_; }
    double rho() const { return rho_; }
    double gamma() const { return gamma_; }
    double final_gap() const { return final_gap_; }
    int iterations() const { return iterations_; }

protected:
    double raw_score(std::span<const double> x) const override;
    void save_impl(std::ostream& out) const override;

private:
    std::vector<std::vector<double>> support_vectors_;
    std::vector<double> alphas_;
    double rho_;
    double gamma_;
    double final_gap_;
    int iterations_;
};

class EeModel final : public OccModel {
public:
    EeModel(int input_dim, std::vector<double> mean, std::vector<std::vector<double>> covariance,
            std::vector<std::vector<double>> precision, double determinant, bool regularized);

    static std::unique_ptr<OccModel> from_json(const nlohmann::json& j);

    const std::vector<double>& robust_mean() const { return mean_; }
    const std::vector<std::vector<double>>& robust_covariance() const { return covariance_; }
    double determinant() const { return determinant_; }
    bool regularized() const { return regularized_; }

    void set_default_threshold(double t) { default_threshold_ = t; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

protected:
    double raw_score(std::span<const double> x) const override;
    void save_impl(std::ostream& out) const override;

private:
    std::vector<double> mean_;
    std::vector<std::vector<double>> covariance_;
    std::vector<std::vector<double>> precision_;
    double determinant_;
    bool regularized_;
};

// Regularized plain sample covariance; the enrollment fallback when the
// training set is too small for MCD.
std::unique_ptr<OccModel> fit_ee_fallback(std::span<const FeatureVector> x, double contamination);

struct IsolationTreeNode {
    int feature = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
    int size = 0;
};

class IForestModel final : public OccModel {
public:
    IForestModel(int input_dim, std::vector<std::vector<IsolationTreeNode>> trees,
                 int subsample_size);

    static std::unique_ptr<OccModel> from_json(const nlohmann::json& j);

    int subsample_size() const { return subsample_size_; }
    const std::vector<std::vector<IsolationTreeNode>>& trees() const { return trees_; }

    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

protected:
    double raw_score(std::span<const double> x) const override;
    void save_impl(std::ostream& out) const override;

private:
    std::vector<std::vector<IsolationTreeNode>> trees_;
    int subsample_size_;
};

class LofModel final : public OccModel {
public:
    LofModel(int input_dim, std::vector<std::vector<double>> train_points, int k_neighbors,
             std::vector<double> k_distances, std::vector<double> lrds);

    static std::unique_ptr<OccModel> from_json(const nlohmann::json& j);

    int k_neighbors() const { return k_; }

protected:
    double raw_score(std::span<const double> x) const override;
    void save_impl(std::ostream& out) const override;

private:
    std::vector<std::vector<double>> train_points_;
    int k_;
    std::vector<double> k_distances_;
    std::vector<double> lrds_;
};

inline constexpr int kModelFormatVersion = 1;
inline constexpr double kLofReachabilityFloor = 1e-12;

nlohmann::json model_header(const OccModel& model);

}  // namespace occauth::detail

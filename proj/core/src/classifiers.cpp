#include "occauth/classifiers.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "models.hpp"

namespace occauth {

std::string_view to_string(OccKind kind) {
    switch (kind) {
        case OccKind::sv1c: return "sv1c";
        case OccKind::ee: return "ee";
        case OccKind::iforest: return "if";
        case OccKind::lof: return "lof";
    }
    throw InvalidArgumentError("to_string: unknown OccKind");
}

OccKind occ_kind_from_string(std::string_view name) {
    if (name == "sv1c") return OccKind::sv1c;
    if (name == "ee") return OccKind::ee;
    if (name == "if" || name == "iforest") return OccKind::iforest;
    if (name == "lof") return OccKind::lof;
    throw InvalidArgumentError("unknown classifier '" + std::string(name) +
                               "' (expected sv1c, ee, if, or lof)");
}

GenuinenessScore OccModel::score(const FeatureVector& x) const {
    if (x.dim() != input_dim_) {
        throw ShapeError("score: expected dim " + std::to_string(input_dim_) + ", got " +
                         std::to_string(x.dim()));
    }
    const double value = raw_score(x.values);
    if (!std::isfinite(value)) {
        throw InvalidScoreError("score: model produced a non-finite value");
    }
    return GenuinenessScore{value};
}

void OccModel::save(std::ostream& out) const { save_impl(out); }

std::unique_ptr<OccModel> OccModel::load(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model load: ") + e.what());
    }
    if (j.value("format_version", -1) != detail::kModelFormatVersion) {
        throw SchemaError("model load: unsupported format_version");
    }
    const OccKind kind = occ_kind_from_string(j.at("kind").get<std::string>());
    switch (kind) {
        case OccKind::sv1c: return detail::Sv1cModel::from_json(j);
        case OccKind::ee: return detail::EeModel::from_json(j);
        case OccKind::iforest: return detail::IForestModel::from_json(j);
        case OccKind::lof: return detail::LofModel::from_json(j);
    }
    throw SchemaError("model load: unknown kind");
}

namespace detail {

nlohmann::json model_header(const OccModel& model) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = std::string(to_string(model.kind()));
    j["input_dim"] = model.input_dim();
    if (model.default_threshold()) {
        j["default_threshold"] = *model.default_threshold();
    } else {
        j["default_threshold"] = nullptr;
    }
    j["warnings"] = model.warnings();
    return j;
}

}  // namespace detail

Decision predict(const OccModel& model, const FeatureVector& x, double threshold) {
    if (!std::isfinite(threshold)) throw InvalidArgumentError("predict: non-finite threshold");
    return model.score(x).value >= threshold ? Decision::accept : Decision::reject;
}

Sv1cInfo sv1c_info(const OccModel& model) {
    const auto* m = dynamic_cast<const detail::Sv1cModel*>(&model);
    if (m == nullptr) throw InvalidArgumentError("sv1c_info: model is not an SV1C");
    return Sv1cInfo{m->support_vectors(), m->alphas(), m->rho(), m->gamma(), m->final_gap(),
                    m->iterations()};
}

EeInfo ee_info(const OccModel& model) {
    const auto* m = dynamic_cast<const detail::EeModel*>(&model);
    if (m == nullptr) throw InvalidArgumentError("ee_info: model is not an elliptic envelope");
    return EeInfo{m->robust_mean(), m->robust_covariance(), m->determinant(), m->regularized()};
}

GenuinenessScore Enrollment::score(const FeatureVector& raw) const {
    FeatureVector z = standardizer_.apply(raw);
    if (pca_) z = pca_->project(z);
    return model_->score(z);
}

std::vector<double> Enrollment::score_all(std::span<const FeatureVector> raw) const {
    std::vector<double> out;
    out.reserve(raw.size());
    for (const auto& x : raw) out.push_back(score(x).value);
    return out;
}

Enrollment enroll(std::span<const FeatureVector> train_genuine, const EnrollmentConfig& config) {
    if (train_genuine.size() < 2) {
        throw InsufficientDataError("enroll: need at least two genuine training samples");
    }
    Standardizer standardizer = fit_standardizer(train_genuine);
    std::vector<FeatureVector> z = standardizer.apply(train_genuine);

    switch (config.kind) {
        case OccKind::sv1c:
            return Enrollment(std::move(standardizer), fit_sv1c(z, config.sv1c));
        case OccKind::iforest:
            return Enrollment(std::move(standardizer), fit_iforest(z, config.iforest));
        case OccKind::lof:
            return Enrollment(std::move(standardizer), fit_lof(z, config.lof));
        case OccKind::ee: {
            PcaProjector pca = fit_pca(z, config.ee_pca_keep_fraction);
            std::vector<FeatureVector> projected = pca.project(z);
            const int n = static_cast<int>(projected.size());
            const int dim = projected.front().dim();
            std::unique_ptr<OccModel> model;
            if (n <= dim + 1) {
                model = detail::fit_ee_fallback(projected, config.ee.contamination);
            } else {
                model = fit_ee(projected, config.ee);
            }
            return Enrollment(std::move(standardizer), std::move(pca), std::move(model));
        }
    }
    throw InvalidArgumentError("enroll: unknown classifier kind");
}

double ScoreGrid::x_at(int ix) const {
    return bounds.x_min + (bounds.x_max - bounds.x_min) * ix / (resolution - 1);
}

double ScoreGrid::y_at(int iy) const {
    return bounds.y_min + (bounds.y_max - bounds.y_min) * iy / (resolution - 1);
}

namespace {

template <class Scorer>
ScoreGrid make_grid(const Scorer& scorer, int dim, GridBounds bounds, int resolution,
                    double threshold) {
    if (dim != 2) {
        throw ShapeError("decision_grid: model consumes " + std::to_string(dim) +
                         "-dimensional features, need 2");
    }
    if (resolution < 2) throw InvalidArgumentError("decision_grid: resolution < 2");
    if (!(bounds.x_max > bounds.x_min) || !(bounds.y_max > bounds.y_min)) {
        throw InvalidArgumentError("decision_grid: empty bounds");
    }
    ScoreGrid grid;
    grid.bounds = bounds;
    grid.resolution = resolution;
    grid.values.resize(static_cast<std::size_t>(resolution) * resolution);
    for (int iy = 0; iy < resolution; ++iy) {
        for (int ix = 0; ix < resolution; ++ix) {
            FeatureVector p(std::vector<double>{grid.x_at(ix), grid.y_at(iy)});
            grid.values[static_cast<std::size_t>(iy) * resolution + ix] =
                scorer.score(p).value - threshold;
        }
    }
    return grid;
}

}  // namespace

ScoreGrid decision_grid(const Enrollment& enrollment, GridBounds bounds, int resolution,
                        double threshold) {
    return make_grid(enrollment, enrollment.standardizer().dim(), bounds, resolution, threshold);
}

ScoreGrid decision_grid(const OccModel& model, GridBounds bounds, int resolution,
                        double threshold) {
    return make_grid(model, model.input_dim(), bounds, resolution, threshold);
}

}  // namespace occauth

#include "occauth/datastream.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "occauth/numeric.hpp"
#include "occauth/rng.hpp"

namespace occauth {
namespace {

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& rows, const char* what) {
    if (rows.empty()) throw InvalidArgumentError(std::string(what) + ": empty matrix");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) {
            throw InvalidArgumentError(std::string(what) + ": ragged matrix");
        }
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

struct ModeSampler {
    Eigen::VectorXd mean;
    Eigen::MatrixXd chol;  // lower factor of the covariance
    double cum_weight;
};

void validate_spec(const SynthSpec& spec) {
    if (spec.n_genuine < 0) throw InvalidArgumentError("SynthSpec: negative n_genuine");
    if (!(spec.outlier_fraction >= 0.0 && spec.outlier_fraction < 1.0)) {
        throw InvalidArgumentError("SynthSpec: outlier_fraction outside [0, 1)");
    }
    if (spec.modes.empty()) throw InvalidArgumentError("SynthSpec: no modes");
    double total = 0.0;
    for (const auto& mode : spec.modes) {
        if (mode.weight <= 0.0) throw InvalidArgumentError("SynthSpec: non-positive mode weight");
        total += mode.weight;
        if (mode.mean.size() != spec.modes.front().mean.size()) {
            throw InvalidArgumentError("SynthSpec: modes disagree on dimension");
        }
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgumentError("SynthSpec: weights must sum to 1");
}

}  // namespace

SynthResult generate_synthetic(const SynthSpec& spec) {
    validate_spec(spec);
    const int dim = static_cast<int>(spec.modes.front().mean.size());

    std::vector<ModeSampler> samplers;
    samplers.reserve(spec.modes.size());
    double cum = 0.0;
    for (const auto& mode : spec.modes) {
        Eigen::MatrixXd cov = to_eigen(mode.covariance, "SynthSpec covariance");
        if (cov.rows() != dim || cov.cols() != dim) {
            throw InvalidArgumentError("SynthSpec: covariance shape mismatch");
        }
        if (!cov.isApprox(cov.transpose(), 1e-9)) {
            throw InvalidArgumentError("SynthSpec: covariance not symmetric");
        }
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) {
            throw InvalidArgumentError("SynthSpec: covariance not positive definite");
        }
        cum += mode.weight;
        samplers.push_back({Eigen::Map<const Eigen::VectorXd>(mode.mean.data(), dim),
                            llt.matrixL(), cum});
    }

    Rng rng(spec.seed);
    SynthResult out;
    out.genuine.reserve(spec.n_genuine);

    Eigen::VectorXd lo = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::infinity());
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(dim, -std::numeric_limits<double>::infinity());

    Eigen::VectorXd z(dim);
    for (int i = 0; i < spec.n_genuine; ++i) {
        const double pick = rng.uniform01();
        const ModeSampler* chosen = &samplers.back();
        for (const auto& s : samplers) {
            if (pick < s.cum_weight) {
                chosen = &s;
                break;
            }
        }
        for (int d = 0; d < dim; ++d) z[d] = rng.normal();
        Eigen::VectorXd x = chosen->mean + chosen->chol * z;
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
        out.genuine.emplace_back(std::vector<double>(x.data(), x.data() + dim));
    }

    const int n_outliers =
        static_cast<int>(std::floor(spec.outlier_fraction * spec.n_genuine));
    if (n_outliers > 0) {
        // Box centered on the data, three times its extent per axis.
        Eigen::VectorXd center = 0.5 * (lo + hi);
        Eigen::VectorXd half = 1.5 * (hi - lo);
        out.outliers.reserve(n_outliers);
        for (int i = 0; i < n_outliers; ++i) {
            std::vector<double> v(dim);
            for (int d = 0; d < dim; ++d) {
                v[d] = center[d] + half[d] * (2.0 * rng.uniform01() - 1.0);
            }
            out.outliers.emplace_back(std::move(v));
        }
    }
    return out;
}

std::vector<SensorSeries> sliding_windows(const SensorSeries& series, const WindowSpec& spec) {
    if (!(spec.length_s > 0.0) || !(spec.step_s > 0.0)) {
        throw InvalidArgumentError("WindowSpec: length and step must be positive");
    }
    if (spec.step_s > spec.length_s) {
        throw InvalidArgumentError("WindowSpec: step exceeds window length");
    }
    std::vector<SensorSeries> windows;
    if (series.timestamps.empty()) return windows;
    const double start = series.timestamps.front();
    const double dur = series.duration();
    if (dur < spec.length_s) return windows;

    const int count = static_cast<int>(std::floor((dur - spec.length_s) / spec.step_s)) + 1;
    windows.reserve(count);
    std::size_t cursor = 0;
    for (int i = 0; i < count; ++i) {
        const double w_lo = start + i * spec.step_s;
        const double w_hi = w_lo + spec.length_s;
        while (cursor < series.timestamps.size() && series.timestamps[cursor] < w_lo) ++cursor;
        SensorSeries w;
        w.rate_hint = series.rate_hint;
        for (std::size_t t = cursor; t < series.timestamps.size() && series.timestamps[t] < w_hi; ++t) {
            w.timestamps.push_back(series.timestamps[t]);
            w.readings.push_back(series.readings[t]);
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

FeatureVector extract_features(const SensorSeries& window) {
    if (window.timestamps.empty() || window.readings.empty()) {
        throw DegenerateDataError("extract_features: empty window");
    }
    const int channels = window.channel_count();
    const std::size_t n = window.readings.size();
    std::vector<double> features;
    features.reserve(static_cast<std::size_t>(channels) * kFeaturesPerChannel);

    std::vector<double> column(n);
    for (int c = 0; c < channels; ++c) {
        for (std::size_t t = 0; t < n; ++t) {
            if (window.readings[t].size() != static_cast<std::size_t>(channels)) {
                throw InvalidArgumentError("extract_features: ragged channel rows");
            }
            column[t] = window.readings[t][c];
        }
        const double mu = mean_of(column);
        const double sigma = std::sqrt(population_variance(column));
        const auto [mn_it, mx_it] = std::minmax_element(column.begin(), column.end());
        const double median = empirical_quantile(column, 0.5);
        const double iqr = empirical_quantile(column, 0.75) - empirical_quantile(column, 0.25);

        double abs_change = 0.0;
        for (std::size_t t = 1; t < n; ++t) abs_change += std::abs(column[t] - column[t - 1]);
        if (n > 1) abs_change /= static_cast<double>(n - 1);

        // Sign changes of the centered signal; exact zeros do not flip sign.
        int crossings = 0;
        int last_sign = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = column[t] - mu;
            const int sign = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
            if (sign != 0) {
                if (last_sign != 0 && sign != last_sign) ++crossings;
                last_sign = sign;
            }
        }

        features.push_back(mu);
        features.push_back(sigma);
        features.push_back(*mn_it);
        features.push_back(*mx_it);
        features.push_back(median);
        features.push_back(iqr);
        features.push_back(abs_change);
        features.push_back(static_cast<double>(crossings));
    }
    return FeatureVector(std::move(features));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_double(const std::string& cell, std::size_t row, const std::string& column) {
    try {
        std::size_t consumed = 0;
        const double v = std::stod(cell, &consumed);
        if (consumed != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row) + ": non-numeric value '" + cell +
                         "' in column '" + column + "'");
    }
}

}  // namespace

std::vector<SessionSeries> load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string header_line;
    if (!std::getline(in, header_line)) throw SchemaError(path.string() + ": empty file");
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
    const std::vector<std::string> header = split_csv_line(header_line);

    auto column_index = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<int>(i);
        }
        throw SchemaError(path.string() + ": missing column '" + name + "'");
    };

    const int user_col = column_index(schema.user_column);
    const int session_col = column_index(schema.session_column);
    const int ts_col = column_index(schema.timestamp_column);

    std::vector<int> channel_cols;
    std::vector<std::string> channel_names;
    if (schema.channel_columns.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            const int idx = static_cast<int>(i);
            if (idx == user_col || idx == session_col || idx == ts_col) continue;
            channel_cols.push_back(idx);
            channel_names.push_back(header[i]);
        }
    } else {
        for (const auto& name : schema.channel_columns) {
            channel_cols.push_back(column_index(name));
            channel_names.push_back(name);
        }
    }
    if (channel_cols.empty()) throw SchemaError(path.string() + ": no channel columns");

    struct Row {
        double timestamp;
        std::vector<double> readings;
    };
    std::map<std::pair<std::string, std::string>, std::vector<Row>> groups;

    std::string line;
    std::size_t row_number = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("row " + std::to_string(row_number) + ": expected " +
                             std::to_string(header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        }
        Row row;
        row.timestamp = parse_double(cells[ts_col], row_number, schema.timestamp_column);
        row.readings.reserve(channel_cols.size());
        for (std::size_t c = 0; c < channel_cols.size(); ++c) {
            row.readings.push_back(parse_double(cells[channel_cols[c]], row_number, channel_names[c]));
        }
        groups[{cells[user_col], cells[session_col]}].push_back(std::move(row));
    }

    std::vector<SessionSeries> out;
    out.reserve(groups.size());
    for (auto& [key, rows] : groups) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Row& a, const Row& b) { return a.timestamp < b.timestamp; });
        SessionSeries s;
        s.user_id = key.first;
        s.session = key.second;
        s.series.timestamps.reserve(rows.size());
        s.series.readings.reserve(rows.size());
        for (auto& r : rows) {
            s.series.timestamps.push_back(r.timestamp);
            s.series.readings.push_back(std::move(r.readings));
        }
        if (rows.size() > 1 && s.series.duration() > 0.0) {
            s.series.rate_hint = static_cast<double>(rows.size() - 1) / s.series.duration();
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<FeatureVector> features_from_series(const SensorSeries& series, const WindowSpec& spec) {
    std::vector<FeatureVector> features;
    for (const SensorSeries& w : sliding_windows(series, spec)) {
        if (w.timestamps.empty()) continue;
        features.push_back(extract_features(w));
    }
    return features;
}

std::vector<UserDataset> datasets_from_sessions(std::span<const SessionSeries> sessions,
                                                const WindowSpec& window) {
    std::map<std::string, std::vector<const SessionSeries*>> by_user;
    for (const auto& s : sessions) by_user[s.user_id].push_back(&s);

    std::vector<UserDataset> datasets;
    datasets.reserve(by_user.size());
    for (auto& [user, list] : by_user) {
        if (list.size() < 2) {
            throw InvalidArgumentError("user '" + user + "' has fewer than two sessions");
        }
        std::sort(list.begin(), list.end(), [](const SessionSeries* a, const SessionSeries* b) {
            return a->session < b->session;
        });
        UserDataset d;
        d.user_id = user;
        d.train_genuine = features_from_series(list[0]->series, window);
        d.test_genuine = features_from_series(list[1]->series, window);
        datasets.push_back(std::move(d));
    }
    return datasets;
}

std::vector<UserDataset> generate_user_datasets(const SyntheticUsersSpec& spec) {
    if (spec.n_users < 1 || spec.dim < 1) {
        throw InvalidArgumentError("SyntheticUsersSpec: need at least one user and one dimension");
    }
    if (spec.train_per_user < 1 || spec.test_per_user < 0) {
        throw InvalidArgumentError("SyntheticUsersSpec: invalid sample counts");
    }
    std::vector<UserDataset> users;
    users.reserve(spec.n_users);
    for (int u = 0; u < spec.n_users; ++u) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(u)));
        std::vector<double> centroid(spec.dim, 0.0);
        const int axis = u % spec.dim;
        centroid[axis] = spec.separation * (1.0 + static_cast<double>(u / spec.dim));

        auto draw = [&](int count) {
            std::vector<FeatureVector> samples;
            samples.reserve(count);
            for (int i = 0; i < count; ++i) {
                std::vector<double> v(spec.dim);
                for (int d = 0; d < spec.dim; ++d) v[d] = centroid[d] + rng.normal();
                samples.emplace_back(std::move(v));
            }
            return samples;
        };

        UserDataset d;
        d.user_id = "user" + std::string(u < 10 ? "0" : "") + std::to_string(u);
        d.train_genuine = draw(spec.train_per_user);
        d.test_genuine = draw(spec.test_per_user);
        users.push_back(std::move(d));
    }
    return users;
}

}  // namespace occauth

#include "occauth/report_io.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace occauth {

std::string format_double(double value) {
    char buffer[64];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc{}) throw Error("format_double: conversion failed");
    return std::string(buffer, end);
}

namespace {

void write_metrics_row(std::ostream& out, const std::string& label, const UserMetrics& m) {
    out << label << ',' << format_double(m.far) << ',' << format_double(m.frr) << ','
        << format_double(m.hter) << ',' << format_double(m.auc) << ','
        << format_double(100.0 - m.hter) << '\n';
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row) {
    try {
        return std::stod(cell);
    } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row) + ": non-numeric value '" + cell + "'");
    }
}

}  // namespace

void write_eval_csv(std::ostream& out, const EvalReport& report) {
    out << "user,far,frr,hter,auc,hter_complement\n";
    for (const auto& [user, metrics] : report.per_user) {
        write_metrics_row(out, user, metrics);
    }
    write_metrics_row(out, "aggregate", report.aggregate);
    for (const auto& note : report.excluded_users) {
        out << "# excluded: " << note << '\n';
    }
}

std::vector<std::pair<std::string, UserMetrics>> read_eval_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("eval csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split_line(line) != std::vector<std::string>{"user", "far", "frr", "hter", "auc",
                                                     "hter_complement"}) {
        throw SchemaError("eval csv: unexpected header");
    }
    std::vector<std::pair<std::string, UserMetrics>> rows;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto cells = split_line(line);
        if (cells.size() != 6) {
            throw ParseError("eval csv row " + std::to_string(row_number) + ": expected 6 cells");
        }
        if (cells[0] == "aggregate") continue;
        UserMetrics m;
        m.far = parse_cell(cells[1], row_number);
        m.frr = parse_cell(cells[2], row_number);
        m.hter = parse_cell(cells[3], row_number);
        m.auc = parse_cell(cells[4], row_number);
        rows.emplace_back(cells[0], m);
    }
    return rows;
}

void write_det_csv(std::ostream& out, std::span<const DetPoint> det) {
    out << "theta,far,frr\n";
    for (const DetPoint& p : det) {
        out << format_double(p.threshold) << ',' << format_double(p.far) << ','
            << format_double(p.frr) << '\n';
    }
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& matrix,
                           std::span<const std::string> labels) {
    if (static_cast<int>(labels.size()) != matrix.size()) {
        throw ShapeError("write_correlation_csv: label count mismatch");
    }
    out << "classifier";
    for (const auto& label : labels) out << ',' << label;
    out << '\n';
    for (int i = 0; i < matrix.size(); ++i) {
        out << labels[i];
        for (int j = 0; j < matrix.size(); ++j) {
            out << ',' << (matrix.defined[i][j] ? format_double(matrix.r[i][j]) : "nan");
        }
        out << '\n';
    }
}

void write_battery_csv(std::ostream& out, std::span<const BatteryRow> rows) {
    out << "pair,ks_p,wilcoxon_p,friedman_p\n";
    auto cell = [](const TestResult& r) {
        return r.degenerate ? std::string("nan") : format_double(r.p_value);
    };
    for (const BatteryRow& row : rows) {
        out << row.pair << ',' << cell(row.ks) << ',' << cell(row.wilcoxon) << ','
            << cell(row.friedman) << '\n';
    }
}

void write_features_csv(std::ostream& out, std::span<const FeatureVector> features) {
    if (features.empty()) {
        out << "f1\n";
        return;
    }
    const int dim = features.front().dim();
    for (int j = 0; j < dim; ++j) out << (j ? "," : "") << 'f' << (j + 1);
    out << '\n';
    for (const auto& v : features) {
        for (int j = 0; j < dim; ++j) out << (j ? "," : "") << format_double(v[j]);
        out << '\n';
    }
}

void write_user_features_csv(std::ostream& out, const std::string& user_id,
                             const std::string& session, std::span<const FeatureVector> features,
                             bool write_header) {
    if (write_header) {
        out << "user_id,session";
        const int dim = features.empty() ? 0 : features.front().dim();
        for (int j = 0; j < dim; ++j) out << ",f" << (j + 1);
        out << '\n';
    }
    for (const auto& v : features) {
        out << user_id << ',' << session;
        for (int j = 0; j < v.dim(); ++j) out << ',' << format_double(v[j]);
        out << '\n';
    }
}

std::vector<UserDataset> read_features_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("features csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_line(line);
    if (header.size() < 3 || header[0] != "user_id" || header[1] != "session") {
        throw SchemaError("features csv: expected header user_id,session,f1,...");
    }
    const std::size_t dim = header.size() - 2;

    std::map<std::string, std::map<std::string, std::vector<FeatureVector>>> grouped;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("features csv row " + std::to_string(row_number) +
                             ": wrong cell count");
        }
        std::vector<double> values(dim);
        for (std::size_t j = 0; j < dim; ++j) values[j] = parse_cell(cells[j + 2], row_number);
        grouped[cells[0]][cells[1]].push_back(FeatureVector(std::move(values)));
    }

    std::vector<UserDataset> datasets;
    for (auto& [user, sessions] : grouped) {
        if (sessions.size() < 2) {
            throw InvalidArgumentError("features csv: user '" + user +
                                       "' has fewer than two sessions");
        }
        UserDataset d;
        d.user_id = user;
        auto it = sessions.begin();
        d.train_genuine = std::move(it->second);
        ++it;
        d.test_genuine = std::move(it->second);
        datasets.push_back(std::move(d));
    }
    return datasets;
}

void write_grid_csv(std::ostream& out, const ScoreGrid& grid) {
    out << "x,y,score\n";
    for (int iy = 0; iy < grid.resolution; ++iy) {
        for (int ix = 0; ix < grid.resolution; ++ix) {
            out << format_double(grid.x_at(ix)) << ',' << format_double(grid.y_at(iy)) << ','
                << format_double(grid.value(ix, iy)) << '\n';
        }
    }
}

}  // namespace occauth

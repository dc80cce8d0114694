#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "occauth/evaluation.hpp"
#include "occauth/fusion.hpp"
#include "occauth/stats.hpp"

namespace occauth {

// Stable CSV layouts, UTF-8 with header rows. Doubles are written in
// shortest round-trip form so reruns are byte-identical.

std::string format_double(double value);

// user,far,frr,hter,auc,hter_complement  (+ one `aggregate` row at the end;
// excluded users are emitted as trailing comment lines `# excluded: ...`).
void write_eval_csv(std::ostream& out, const EvalReport& report);

// Reads back the per-user rows (the aggregate row and comments are skipped).
std::vector<std::pair<std::string, UserMetrics>> read_eval_csv(std::istream& in);

// theta,far,frr
void write_det_csv(std::ostream& out, std::span<const DetPoint> det);

// Square matrix with row/column labels; undefined entries print as nan.
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& matrix,
                           std::span<const std::string> labels);

// pair,ks_p,wilcoxon_p,friedman_p — degenerate cells print as nan.
void write_battery_csv(std::ostream& out, std::span<const BatteryRow> rows);

// f1,...,fK feature rows.
void write_features_csv(std::ostream& out, std::span<const FeatureVector> features);

// user_id,session,f1,...,fK
void write_user_features_csv(std::ostream& out, const std::string& user_id,
                             const std::string& session, std::span<const FeatureVector> features,
                             bool write_header);

std::vector<UserDataset> read_features_csv(std::istream& in);

// x,y,score rows for contour plotting.
void write_grid_csv(std::ostream& out, const ScoreGrid& grid);

}  // namespace occauth

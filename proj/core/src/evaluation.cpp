#include "occauth/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "occauth/numeric.hpp"
#include "occauth/rng.hpp"

namespace occauth {

double select_threshold(std::span<const double> genuine_train_scores, double quantile) {
    if (genuine_train_scores.size() < 2) {
        throw InsufficientDataError("select_threshold: need at least two genuine scores");
    }
    for (double s : genuine_train_scores) {
        if (!std::isfinite(s)) throw InvalidScoreError("select_threshold: non-finite score");
    }
    return empirical_quantile(genuine_train_scores, quantile);
}

std::pair<double, double> confusion_rates(const ScoreSet& scores, double theta) {
    if (scores.genuine.empty()) throw InsufficientDataError("confusion_rates: no genuine scores");
    if (scores.impostor.empty()) throw InsufficientDataError("confusion_rates: no impostor scores");
    std::size_t false_accepts = 0;
    for (double s : scores.impostor) {
        if (s >= theta) ++false_accepts;
    }
    std::size_t false_rejects = 0;
    for (double s : scores.genuine) {
        if (s < theta) ++false_rejects;
    }
    const double far = 100.0 * static_cast<double>(false_accepts) / scores.impostor.size();
    const double frr = 100.0 * static_cast<double>(false_rejects) / scores.genuine.size();
    return {far, frr};
}

double hter(double far, double frr) {
    if (!(far >= 0.0 && far <= 100.0) || !(frr >= 0.0 && frr <= 100.0)) {
        throw InvalidArgumentError("hter: rates must lie in [0, 100]");
    }
    return 0.5 * (far + frr);
}

double auc(const ScoreSet& scores) {
    if (scores.genuine.empty() || scores.impostor.empty()) {
        throw InsufficientDataError("auc: both score sides must be non-empty");
    }
    // Average ranks over the pooled sample; ties contribute half wins.
    struct Entry {
        double score;
        bool genuine;
    };
    std::vector<Entry> pooled;
    pooled.reserve(scores.genuine.size() + scores.impostor.size());
    for (double s : scores.genuine) pooled.push_back({s, true});
    for (double s : scores.impostor) pooled.push_back({s, false});
    std::sort(pooled.begin(), pooled.end(),
              [](const Entry& a, const Entry& b) { return a.score < b.score; });

    double genuine_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].score == pooled[i].score) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
        for (std::size_t t = i; t < j; ++t) {
            if (pooled[t].genuine) genuine_rank_sum += avg_rank;
        }
        i = j;
    }
    const double n_g = static_cast<double>(scores.genuine.size());
    const double n_i = static_cast<double>(scores.impostor.size());
    const double u = genuine_rank_sum - n_g * (n_g + 1.0) / 2.0;
    return 100.0 * u / (n_g * n_i);
}

namespace {

std::vector<double> sweep_thresholds(double lo, double hi, int n_points) {
    std::vector<double> thresholds(n_points);
    for (int i = 0; i + 1 < n_points; ++i) {
        thresholds[i] = lo + (hi - lo) * i / (n_points - 1);
    }
    // Just past the maximum so the final point is the reject-all corner.
    thresholds[n_points - 1] = std::nextafter(hi, std::numeric_limits<double>::infinity());
    return thresholds;
}

}  // namespace

std::vector<DetPoint> det_curve(const ScoreSet& scores, int n_points) {
    if (n_points < 2) throw InvalidArgumentError("det_curve: need at least two points");
    if (scores.genuine.empty() || scores.impostor.empty()) {
        throw InsufficientDataError("det_curve: both score sides must be non-empty");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double s : scores.genuine) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    for (double s : scores.impostor) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    std::vector<DetPoint> det;
    det.reserve(n_points);
    for (double theta : sweep_thresholds(lo, hi, n_points)) {
        const auto [far, frr] = confusion_rates(scores, theta);
        det.push_back({theta, far, frr});
    }
    return det;
}

namespace {

int kind_index(OccKind kind) {
    for (int i = 0; i < 4; ++i) {
        if (kAllOccKinds[i] == kind) return i;
    }
    throw InvalidArgumentError("unknown OccKind");
}

int resolve_threads(int requested, std::size_t n_tasks) {
    int threads = requested;
    if (threads <= 0) {
        if (const char* env = std::getenv("OCC_AUTH_THREADS")) {
            threads = std::atoi(env);
        }
    }
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
    return static_cast<int>(std::min<std::size_t>(threads, std::max<std::size_t>(n_tasks, 1)));
}

// Index-based parallel loop; exceptions from workers are rethrown.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<FeatureVector> borrow_impostors(const std::vector<const UserDataset*>& donors,
                                            const std::string& victim, int target, RngSeed seed) {
    // Round-robin over donors, each donor's pool pre-shuffled, no replacement.
    std::vector<std::vector<std::size_t>> queues;
    queues.reserve(donors.size());
    for (const UserDataset* donor : donors) {
        std::vector<std::size_t> order(donor->test_genuine.size());
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(seed, "impostors/" + victim + "/" + donor->user_id));
        rng.shuffle(order);
        queues.push_back(std::move(order));
    }
    std::vector<FeatureVector> borrowed;
    borrowed.reserve(target);
    std::vector<std::size_t> cursor(donors.size(), 0);
    bool any = true;
    while (static_cast<int>(borrowed.size()) < target && any) {
        any = false;
        for (std::size_t d = 0; d < donors.size() && static_cast<int>(borrowed.size()) < target;
             ++d) {
            if (cursor[d] < queues[d].size()) {
                borrowed.push_back(donors[d]->test_genuine[queues[d][cursor[d]++]]);
                any = true;
            }
        }
    }
    return borrowed;
}

}  // namespace

ProtocolScores run_score_protocol(std::span<const UserDataset> datasets,
                                  const EnrollmentConfig& base_config,
                                  const ProtocolConfig& protocol,
                                  std::span<const OccKind> kinds, bool with_stacker) {
    if (datasets.size() < 2) {
        throw InvalidArgumentError("protocol: impostor borrowing needs at least two users");
    }
    if (!(protocol.threshold_quantile > 0.0 && protocol.threshold_quantile < 1.0)) {
        throw InvalidArgumentError("protocol: threshold_quantile outside (0, 1)");
    }
    if (kinds.empty()) throw InvalidArgumentError("protocol: no classifiers requested");

    std::vector<const UserDataset*> usable;
    ProtocolScores result;
    for (const UserDataset& d : datasets) {
        if (d.train_genuine.empty()) {
            throw InvalidArgumentError("protocol: user '" + d.user_id +
                                       "' has no genuine training samples");
        }
        if (d.test_genuine.empty()) {
            result.excluded_users.push_back(d.user_id + " (no test data)");
        } else {
            usable.push_back(&d);
        }
    }
    if (usable.size() < 2) {
        throw InvalidArgumentError("protocol: fewer than two users with test data");
    }
    std::sort(usable.begin(), usable.end(),
              [](const UserDataset* a, const UserDataset* b) { return a->user_id < b->user_id; });

    std::mutex observer_mutex;
    auto observe = [&](OccKind kind, std::span<const FeatureVector> samples) {
        if (protocol.fit_observer) {
            std::lock_guard lock(observer_mutex);
            protocol.fit_observer(kind, samples);
        }
    };

    result.users.resize(usable.size());
    std::vector<std::string> exclusion_notes(usable.size());

    const int threads = resolve_threads(protocol.max_threads, usable.size());
    parallel_for(usable.size(), threads, [&](std::size_t ui) {
        const UserDataset& user = *usable[ui];
        UserScores& us = result.users[ui];
        us.user_id = user.user_id;

        const std::size_t total_available = [&] {
            std::size_t total = 0;
            for (const UserDataset* donor : usable) {
                if (donor != &user) total += donor->test_genuine.size();
            }
            return total;
        }();
        std::size_t target = protocol.impostors_per_user > 0
                                 ? static_cast<std::size_t>(protocol.impostors_per_user)
                                 : 10 * user.test_genuine.size();
        target = std::min(target, total_available);
        if (target == 0) {
            exclusion_notes[ui] = user.user_id + " (no impostor samples available)";
            return;
        }
        std::vector<const UserDataset*> donors;
        for (const UserDataset* donor : usable) {
            if (donor != &user) donors.push_back(donor);
        }
        const std::vector<FeatureVector> impostors =
            borrow_impostors(donors, user.user_id, static_cast<int>(target), protocol.rng);

        for (OccKind kind : kinds) {
            const int k = kind_index(kind);
            EnrollmentConfig config = base_config;
            config.kind = kind;
            observe(kind, user.train_genuine);
            const Enrollment enrollment = enroll(user.train_genuine, config);

            us.fitted[k] = true;
            us.train[k] = enrollment.score_all(user.train_genuine);
            us.genuine[k] = enrollment.score_all(user.test_genuine);
            us.impostor[k] = enrollment.score_all(impostors);
            us.normalizers[k] = make_calibrated_normalizer(us.train[k], protocol.norm_method);
            us.thresholds[k] = select_threshold(us.train[k], protocol.threshold_quantile);
        }

        if (with_stacker && us.fitted[0] && us.fitted[1] && us.fitted[2] && us.fitted[3] &&
            user.train_genuine.size() >= 8) {
            auto tuples_of = [&](const std::array<std::vector<double>, 4>& per_kind,
                                 std::size_t count) {
                std::vector<std::array<double, 4>> tuples(count);
                for (std::size_t i = 0; i < count; ++i) {
                    for (int k = 0; k < 4; ++k) {
                        tuples[i][k] = us.normalizers[k].apply(per_kind[k][i]);
                    }
                }
                return tuples;
            };
            const auto train_tuples = tuples_of(us.train, user.train_genuine.size());
            {
                std::vector<FeatureVector> as_features;
                as_features.reserve(train_tuples.size());
                for (const auto& t : train_tuples) {
                    as_features.emplace_back(std::vector<double>(t.begin(), t.end()));
                }
                observe(OccKind::sv1c, as_features);
            }
            const auto stacker = fit_stacker(train_tuples);
            auto score_tuples = [&](const std::vector<std::array<double, 4>>& tuples) {
                std::vector<double> out;
                out.reserve(tuples.size());
                for (const auto& t : tuples) {
                    out.push_back(
                        stacker->score(FeatureVector(std::vector<double>(t.begin(), t.end())))
                            .value);
                }
                return out;
            };
            us.stacker_train = score_tuples(train_tuples);
            us.stacker_genuine = score_tuples(tuples_of(us.genuine, user.test_genuine.size()));
            us.stacker_impostor = score_tuples(tuples_of(us.impostor, impostors.size()));
            us.stacker_threshold = select_threshold(us.stacker_train, protocol.threshold_quantile);
            us.stacker_trained = true;
        }
    });

    // Drop users that could not be evaluated, preserving sorted order.
    std::vector<UserScores> kept;
    kept.reserve(result.users.size());
    for (std::size_t i = 0; i < result.users.size(); ++i) {
        if (!exclusion_notes[i].empty()) {
            result.excluded_users.push_back(exclusion_notes[i]);
        } else {
            kept.push_back(std::move(result.users[i]));
        }
    }
    result.users = std::move(kept);
    if (result.users.size() < 2) {
        throw InvalidArgumentError("protocol: fewer than two users could be evaluated");
    }
    std::sort(result.excluded_users.begin(), result.excluded_users.end());
    return result;
}

namespace {

struct SystemScores {
    std::string user_id;
    ScoreSet scores;
    double threshold = 0.0;
};

EvalReport build_report(const std::vector<SystemScores>& systems,
                        const std::vector<std::string>& excluded, int det_points) {
    EvalReport report;
    report.excluded_users = excluded;

    double far_sum = 0.0, frr_sum = 0.0, hter_sum = 0.0, auc_sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const SystemScores& s : systems) {
        const auto [far, frr] = confusion_rates(s.scores, s.threshold);
        UserMetrics m;
        m.far = far;
        m.frr = frr;
        m.hter = hter(far, frr);
        m.auc = auc(s.scores);
        report.per_user.emplace_back(s.user_id, m);
        far_sum += m.far;
        frr_sum += m.frr;
        hter_sum += m.hter;
        auc_sum += m.auc;
        for (double v : s.scores.genuine) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        for (double v : s.scores.impostor) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double n = static_cast<double>(systems.size());
    report.aggregate = {far_sum / n, frr_sum / n, hter_sum / n, auc_sum / n};

    // DET: mean FAR/FRR across the user population at each shared threshold.
    for (double theta : sweep_thresholds(lo, hi, det_points)) {
        double far_total = 0.0, frr_total = 0.0;
        for (const SystemScores& s : systems) {
            const auto [far, frr] = confusion_rates(s.scores, theta);
            far_total += far;
            frr_total += frr;
        }
        report.det.push_back({theta, far_total / n, frr_total / n});
    }
    return report;
}

void require_fitted(const ProtocolScores& scores, OccKind kind) {
    for (const UserScores& us : scores.users) {
        if (!us.fitted[kind_index(kind)]) {
            throw InvalidArgumentError("report: classifier '" + std::string(to_string(kind)) +
                                       "' was not fitted in this protocol run");
        }
    }
}

}  // namespace

EvalReport single_report(const ProtocolScores& scores, OccKind kind,
                         const ProtocolConfig& protocol) {
    require_fitted(scores, kind);
    const int k = kind_index(kind);
    std::vector<SystemScores> systems;
    systems.reserve(scores.users.size());
    for (const UserScores& us : scores.users) {
        systems.push_back({us.user_id, ScoreSet{us.genuine[k], us.impostor[k]}, us.thresholds[k]});
    }
    return build_report(systems, scores.excluded_users, protocol.det_points);
}

EvalReport score_fusion_report(const ProtocolScores& scores, std::span<const OccKind> members,
                               const ProtocolConfig& protocol) {
    if (members.size() < 2) throw InvalidArgumentError("score fusion: need at least two members");
    for (OccKind kind : members) require_fitted(scores, kind);

    std::vector<SystemScores> systems;
    systems.reserve(scores.users.size());
    for (const UserScores& us : scores.users) {
        auto fused = [&](const std::array<std::vector<double>, 4>& per_kind, std::size_t count) {
            std::vector<double> out;
            out.reserve(count);
            std::vector<double> member_scores(members.size());
            for (std::size_t i = 0; i < count; ++i) {
                for (std::size_t m = 0; m < members.size(); ++m) {
                    const int k = kind_index(members[m]);
                    member_scores[m] = us.normalizers[k].apply(per_kind[k][i]);
                }
                out.push_back(fuse_scores(member_scores));
            }
            return out;
        };
        SystemScores s;
        s.user_id = us.user_id;
        const std::vector<double> fused_train = fused(us.train, us.train[kind_index(members[0])].size());
        s.scores.genuine = fused(us.genuine, us.genuine[kind_index(members[0])].size());
        s.scores.impostor = fused(us.impostor, us.impostor[kind_index(members[0])].size());
        s.threshold = select_threshold(fused_train, protocol.threshold_quantile);
        systems.push_back(std::move(s));
    }
    return build_report(systems, scores.excluded_users, protocol.det_points);
}

DecisionFusionResult decision_fusion_report(const ProtocolScores& scores,
                                            std::span<const OccKind> members) {
    if (members.size() < 2) {
        throw InvalidArgumentError("decision fusion: need at least two members");
    }
    for (OccKind kind : members) require_fitted(scores, kind);

    double far_sum = 0.0, frr_sum = 0.0;
    for (const UserScores& us : scores.users) {
        auto vote = [&](const std::array<std::vector<double>, 4>& per_kind, std::size_t i) {
            std::vector<Decision> decisions;
            decisions.reserve(members.size());
            for (OccKind kind : members) {
                const int k = kind_index(kind);
                decisions.push_back(per_kind[k][i] >= us.thresholds[k] ? Decision::accept
                                                                       : Decision::reject);
            }
            return fuse_decisions(decisions);
        };
        const std::size_t n_genuine = us.genuine[kind_index(members[0])].size();
        const std::size_t n_impostor = us.impostor[kind_index(members[0])].size();
        std::size_t rejects = 0;
        for (std::size_t i = 0; i < n_genuine; ++i) {
            if (vote(us.genuine, i) == Decision::reject) ++rejects;
        }
        std::size_t accepts = 0;
        for (std::size_t i = 0; i < n_impostor; ++i) {
            if (vote(us.impostor, i) == Decision::accept) ++accepts;
        }
        far_sum += 100.0 * static_cast<double>(accepts) / n_impostor;
        frr_sum += 100.0 * static_cast<double>(rejects) / n_genuine;
    }
    const double n = static_cast<double>(scores.users.size());
    DecisionFusionResult r;
    r.far = far_sum / n;
    r.frr = frr_sum / n;
    r.hter = hter(r.far, r.frr);
    return r;
}

EvalReport stacker_report(const ProtocolScores& scores, const ProtocolConfig& protocol) {
    std::vector<SystemScores> systems;
    std::vector<std::string> excluded = scores.excluded_users;
    for (const UserScores& us : scores.users) {
        if (!us.stacker_trained) {
            excluded.push_back(us.user_id + " (too few samples to train the stacker)");
            continue;
        }
        systems.push_back(
            {us.user_id, ScoreSet{us.stacker_genuine, us.stacker_impostor}, us.stacker_threshold});
    }
    if (systems.size() < 2) {
        throw InsufficientDataError("stacker report: fewer than two users have a trained stacker");
    }
    std::sort(excluded.begin(), excluded.end());
    return build_report(systems, excluded, protocol.det_points);
}

CorrelationMatrix protocol_correlation(const ProtocolScores& scores) {
    std::vector<std::vector<double>> columns(4);
    for (const UserScores& us : scores.users) {
        for (int k = 0; k < 4; ++k) {
            if (!us.fitted[k]) {
                throw InvalidArgumentError(
                    "protocol_correlation: all four classifiers must be fitted");
            }
            for (double v : us.genuine[k]) columns[k].push_back(us.normalizers[k].apply(v));
            for (double v : us.impostor[k]) columns[k].push_back(us.normalizers[k].apply(v));
        }
    }
    return score_correlation(columns);
}

EvalReport run_protocol(std::span<const UserDataset> datasets, const EnrollmentConfig& config,
                        const ProtocolConfig& protocol) {
    const OccKind kinds[] = {config.kind};
    const ProtocolScores scores =
        run_score_protocol(datasets, config, protocol, kinds, /*with_stacker=*/false);
    return single_report(scores, config.kind, protocol);
}

}  // namespace occauth

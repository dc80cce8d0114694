#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oracles {
namespace {

double dist(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sum);
}

constexpr double kReachFloor = 1e-12;

// k-distance of `from` among `candidates` (distances provided), neighborhood
// = all candidates within it.
double k_dist_of(const std::vector<double>& distances, int k) {
    std::vector<double> sorted(distances);
    std::sort(sorted.begin(), sorted.end());
    return sorted[k - 1];
}

// lrd of a training point p (index based) within the training set.
double lrd_train(std::span<const std::vector<double>> train, int p, int k) {
    std::vector<double> distances;
    for (std::size_t j = 0; j < train.size(); ++j) {
        if (static_cast<int>(j) != p) distances.push_back(dist(train[p], train[j]));
    }
    const double kd = k_dist_of(distances, k);
    double reach_sum = 0.0;
    int count = 0;
    for (std::size_t j = 0; j < train.size(); ++j) {
        if (static_cast<int>(j) == p) continue;
        const double d = dist(train[p], train[j]);
        if (d <= kd) {
            // reachability w.r.t. the neighbor's own k-distance
            std::vector<double> other;
            for (std::size_t t = 0; t < train.size(); ++t) {
                if (t != j) other.push_back(dist(train[j], train[t]));
            }
            const double kd_j = k_dist_of(other, k);
            reach_sum += std::max({kd_j, d, kReachFloor});
            ++count;
        }
    }
    return count / reach_sum;
}

}  // namespace

double brute_force_lof(std::span<const std::vector<double>> train,
                       std::span<const double> query, int k) {
    std::vector<double> distances(train.size());
    for (std::size_t j = 0; j < train.size(); ++j) distances[j] = dist(query, train[j]);
    const double kd = k_dist_of(distances, k);

    double reach_sum = 0.0;
    double lrd_sum = 0.0;
    int count = 0;
    for (std::size_t j = 0; j < train.size(); ++j) {
        if (distances[j] <= kd) {
            std::vector<double> other;
            for (std::size_t t = 0; t < train.size(); ++t) {
                if (t != j) other.push_back(dist(train[j], train[t]));
            }
            reach_sum += std::max({k_dist_of(other, k), distances[j], kReachFloor});
            lrd_sum += lrd_train(train, static_cast<int>(j), k);
            ++count;
        }
    }
    const double lrd_query = count / reach_sum;
    return (lrd_sum / count) / lrd_query;
}

McdOracleResult exhaustive_mcd(std::span<const std::vector<double>> points, int h) {
    const int n = static_cast<int>(points.size());
    const int dim = static_cast<int>(points.front().size());
    if (dim != 2) throw std::invalid_argument("exhaustive_mcd oracle handles dim 2 only");

    std::vector<int> subset(h);
    std::iota(subset.begin(), subset.end(), 0);

    McdOracleResult best{std::numeric_limits<double>::infinity(), {}};
    while (true) {
        double mx = 0.0, my = 0.0;
        for (int idx : subset) {
            mx += points[idx][0];
            my += points[idx][1];
        }
        mx /= h;
        my /= h;
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (int idx : subset) {
            const double dx = points[idx][0] - mx;
            const double dy = points[idx][1] - my;
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
        sxx /= h;
        sxy /= h;
        syy /= h;
        const double det = sxx * syy - sxy * sxy;
        if (det < best.determinant) best = {det, {mx, my}};

        int i = h - 1;
        while (i >= 0 && subset[i] == n - h + i) --i;
        if (i < 0) break;
        ++subset[i];
        for (int j = i + 1; j < h; ++j) subset[j] = subset[j - 1] + 1;
    }
    return best;
}

JacobiResult jacobi_eigen(const std::vector<std::vector<double>>& symmetric) {
    const int n = static_cast<int>(symmetric.size());
    std::vector<std::vector<double>> a = symmetric;
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) v[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        }
        if (off < 1e-26) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a[i][p], aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = a[p][i], aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = v[i][p], viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] > a[y][y]; });

    JacobiResult result;
    result.eigenvalues.reserve(n);
    result.eigenvectors.reserve(n);
    for (int r : order) {
        result.eigenvalues.push_back(a[r][r]);
        std::vector<double> vec(n);
        for (int i = 0; i < n; ++i) vec[i] = v[i][r];
        result.eigenvectors.push_back(std::move(vec));
    }
    return result;
}

double wilcoxon_enumeration_p(std::span<const double> differences) {
    std::vector<double> magnitudes;
    std::vector<bool> positive;
    for (double d : differences) {
        if (d == 0.0) continue;
        magnitudes.push_back(std::abs(d));
        positive.push_back(d > 0.0);
    }
    const int n = static_cast<int>(magnitudes.size());
    if (n == 0 || n > 20) throw std::invalid_argument("enumeration oracle: n must be 1..20");

    // Average ranks in doubled units, grouped by exact equality.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return magnitudes[x] < magnitudes[y]; });
    std::vector<std::int64_t> ranks2(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j < n && magnitudes[order[j]] == magnitudes[order[i]]) ++j;
        for (int t = i; t < j; ++t) ranks2[order[t]] = i + 1 + j;
        i = j;
    }

    std::int64_t total2 = 0;
    std::int64_t observed2 = 0;
    for (int idx = 0; idx < n; ++idx) {
        total2 += ranks2[idx];
        if (positive[idx]) observed2 += ranks2[idx];
    }
    const std::int64_t w2 = std::min(observed2, total2 - observed2);

    std::uint64_t tail = 0;
    const std::uint64_t patterns = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        std::int64_t w_plus2 = 0;
        for (int idx = 0; idx < n; ++idx) {
            if (mask & (std::uint64_t{1} << idx)) w_plus2 += ranks2[idx];
        }
        if (w_plus2 <= w2 || w_plus2 >= total2 - w2) ++tail;
    }
    return static_cast<double>(tail) / static_cast<double>(patterns);
}

double brute_force_auc(std::span<const double> genuine, std::span<const double> impostor) {
    double wins = 0.0;
    for (double g : genuine) {
        for (double m : impostor) {
            if (g > m) {
                wins += 1.0;
            } else if (g == m) {
                wins += 0.5;
            }
        }
    }
    return 100.0 * wins / (static_cast<double>(genuine.size()) * impostor.size());
}

double quantile_by_hand(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double pos = q * (values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (pos - lo) * (values[lo + 1] - values[lo]);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cross = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cross += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    return cross / std::sqrt(va * vb);
}

}  // namespace oracles

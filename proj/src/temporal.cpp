#include "gridagg/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace gridagg {

FeatureMatrix build_feature_matrix(const Network& network, std::size_t period_len) {
    const std::size_t horizon = network.snapshots.size();
    if (period_len == 0 || horizon % period_len != 0)
        throw std::invalid_argument("horizon of " + std::to_string(horizon) + " snapshots is not divisible by period length " +
                                    std::to_string(period_len));

    std::vector<const std::vector<double>*> series;
    for (const auto& l : network.loads) series.push_back(&l.profile);
    for (const auto& g : network.generators) series.push_back(&g.profile);

    FeatureMatrix fm;
    fm.rows = horizon / period_len;
    fm.cols = series.size() * period_len;
    fm.values.assign(fm.rows * fm.cols, 0.0);
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& values = *series[s];
        if (values.size() != horizon) throw std::invalid_argument("profile length does not match snapshot count");
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        const double span = horizon ? *hi - *lo : 0.0;
        if (span <= 0.0) continue;
        for (std::size_t t = 0; t < horizon; ++t)
            fm(t / period_len, s * period_len + t % period_len) = (values[t] - *lo) / span;
    }
    return fm;
}

namespace {

double squared_distance(const FeatureMatrix& fm, std::size_t row, const std::vector<double>& centroid) {
    double sum = 0.0;
    for (std::size_t c = 0; c < fm.cols; ++c) {
        const double d = fm(row, c) - centroid[c];
        sum += d * d;
    }
    return sum;
}

/// Uniform in [0, 1) from the raw engine output, identical on every platform.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<std::vector<double>> kmeanspp_seed(const FeatureMatrix& fm, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = fm.rows;
    std::vector<std::vector<double>> centroids;
    auto row_vector = [&](std::size_t r) {
        return std::vector<double>(fm.values.begin() + static_cast<std::ptrdiff_t>(r * fm.cols),
                                   fm.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * fm.cols));
    };
    centroids.push_back(row_vector(std::min<std::size_t>(n - 1, static_cast<std::size_t>(uniform01(rng) * n))));
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            best[r] = std::min(best[r], squared_distance(fm, r, centroids.back()));
            total += best[r];
        }
        std::size_t pick = 0;
        if (total <= 0.0) {
            // All remaining points coincide with a centroid: take the first
            // row not yet used as a seed so seeds stay distinct rows.
            pick = std::min(centroids.size(), n - 1);
        } else {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t r = 0; r < n; ++r) {
                acc += best[r];
                if (acc > target && best[r] > 0.0) {
                    pick = r;
                    break;
                }
            }
        }
        centroids.push_back(row_vector(pick));
    }
    return centroids;
}

}  // namespace

PeriodClustering cluster_periods(const FeatureMatrix& fm, std::size_t k, std::uint64_t seed, std::size_t period_len,
                                 const KMeansOptions& options) {
    const std::size_t n = fm.rows;
    if (k == 0) throw std::invalid_argument("cluster_periods: k must be positive");
    if (k > n)
        throw std::invalid_argument("cluster_periods: k=" + std::to_string(k) + " exceeds period count " +
                                    std::to_string(n));

    PeriodClustering out;
    out.period_len = period_len;
    out.period_count = n;

    std::vector<std::size_t> label(n, 0);
    if (k == n) {
        std::iota(label.begin(), label.end(), 0);
    } else {
        std::mt19937_64 rng(seed);
        auto centroids = kmeanspp_seed(fm, k, rng);
        for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
            for (std::size_t r = 0; r < n; ++r) {
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < k; ++c) {
                    const double d = squared_distance(fm, r, centroids[c]);
                    if (d < best) {
                        best = d;
                        label[r] = c;
                    }
                }
            }
            std::vector<std::vector<double>> next(k, std::vector<double>(fm.cols, 0.0));
            std::vector<std::size_t> count(k, 0);
            for (std::size_t r = 0; r < n; ++r) {
                ++count[label[r]];
                for (std::size_t c = 0; c < fm.cols; ++c) next[label[r]][c] += fm(r, c);
            }
            for (std::size_t c = 0; c < k; ++c) {
                if (count[c] == 0) {
                    // Empty cluster: reseed at the point farthest from its centroid.
                    std::size_t far = 0;
                    double far_d = -1.0;
                    for (std::size_t r = 0; r < n; ++r) {
                        const double d = squared_distance(fm, r, centroids[label[r]]);
                        if (d > far_d) {
                            far_d = d;
                            far = r;
                        }
                    }
                    for (std::size_t j = 0; j < fm.cols; ++j) next[c][j] = fm(far, j);
                    label[far] = c;
                    continue;
                }
                for (double& v : next[c]) v /= static_cast<double>(count[c]);
            }
            double shift = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                double d = 0.0;
                for (std::size_t j = 0; j < fm.cols; ++j) d += (next[c][j] - centroids[c][j]) * (next[c][j] - centroids[c][j]);
                shift = std::max(shift, std::sqrt(d));
            }
            centroids = std::move(next);
            if (shift < options.tolerance) {
                ++out.iterations;
                break;
            }
        }
        // Final assignment against the converged centroids.
        for (std::size_t r = 0; r < n; ++r) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = squared_distance(fm, r, centroids[c]);
                if (d < best) {
                    best = d;
                    label[r] = c;
                }
            }
        }
        // Representative of each cluster: the member closest to its centroid.
        std::vector<std::size_t> medoid(k, n);
        std::vector<double> medoid_d(k, std::numeric_limits<double>::infinity());
        for (std::size_t r = 0; r < n; ++r) {
            const double d = squared_distance(fm, r, centroids[label[r]]);
            if (d < medoid_d[label[r]]) {
                medoid_d[label[r]] = d;
                medoid[label[r]] = r;
            }
        }
        // A cluster can still be empty when centroids coincide (duplicate
        // periods); give it the non-representative point farthest from its
        // centroid so exactly k representatives remain.
        for (std::size_t c = 0; c < k; ++c) {
            if (medoid[c] != n) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t r = 0; r < n; ++r) {
                bool is_medoid = std::find(medoid.begin(), medoid.end(), r) != medoid.end();
                if (is_medoid) continue;
                const double d = squared_distance(fm, r, centroids[label[r]]);
                if (d > far_d) {
                    far_d = d;
                    far = r;
                }
            }
            label[far] = c;
            medoid[c] = far;
        }
        out.representatives = medoid;
    }
    if (out.representatives.empty()) {
        out.representatives.resize(n);
        std::iota(out.representatives.begin(), out.representatives.end(), 0);
    }

    // Renumber clusters by chronological order of their representative.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return out.representatives[a] < out.representatives[b]; });
    std::vector<std::size_t> rank(k);
    for (std::size_t i = 0; i < k; ++i) rank[order[i]] = i;
    std::vector<std::size_t> reps(k);
    for (std::size_t c = 0; c < k; ++c) reps[rank[c]] = out.representatives[c];
    out.representatives = std::move(reps);
    out.assignment.resize(n);
    for (std::size_t r = 0; r < n; ++r) out.assignment[r] = rank[label[r]];

    out.weights.assign(k, 0.0);
    for (std::size_t r = 0; r < n; ++r) out.weights[out.assignment[r]] += static_cast<double>(period_len);
    return out;
}

std::vector<double> representative_snapshot_weights(const Network& network, const PeriodClustering& clustering) {
    const std::size_t len = clustering.period_len;
    if (network.snapshots.size() != clustering.period_count * len)
        throw std::invalid_argument("clustering horizon does not match the network's snapshots");
    std::vector<double> weights(clustering.k() * len, 0.0);
    for (std::size_t p = 0; p < clustering.period_count; ++p)
        for (std::size_t h = 0; h < len; ++h)
            weights[clustering.assignment[p] * len + h] += network.snapshots.weights[p * len + h];
    return weights;
}

Network apply_clustering(const Network& network, const PeriodClustering& clustering) {
    const std::size_t len = clustering.period_len;
    const auto weights = representative_snapshot_weights(network, clustering);

    std::vector<std::size_t> picked;
    picked.reserve(clustering.k() * len);
    for (std::size_t rep : clustering.representatives)
        for (std::size_t h = 0; h < len; ++h) picked.push_back(rep * len + h);

    Network out = network;
    out.snapshots.labels.clear();
    for (std::size_t t : picked) out.snapshots.labels.push_back(network.snapshots.labels[t]);
    out.snapshots.weights = weights;
    auto slice = [&](const std::vector<double>& profile) {
        std::vector<double> s;
        s.reserve(picked.size());
        for (std::size_t t : picked) s.push_back(profile[t]);
        return s;
    };
    for (auto& g : out.generators) g.profile = slice(g.profile);
    for (auto& l : out.loads) l.profile = slice(l.profile);
    return out;
}

}  // namespace gridagg

#pragma once

#include "gridagg/network.hpp"

#include <cstdint>
#include <vector>

namespace gridagg {

/// Row-major periods x features matrix.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

/// Row p concatenates every load profile, then every generator capacity
/// factor profile, over period p. Each series is min-max scaled over the
/// full horizon; a constant series becomes zeros.
FeatureMatrix build_feature_matrix(const Network& network, std::size_t period_len);

struct PeriodClustering {
    std::size_t period_len = 0;
    std::size_t period_count = 0;
    std::vector<std::size_t> representatives;  // period index per cluster, ascending
    std::vector<std::size_t> assignment;       // period -> cluster
    std::vector<double> weights;               // hours per cluster
    std::size_t iterations = 0;

    std::size_t k() const { return representatives.size(); }
};

struct KMeansOptions {
    std::size_t max_iterations = 300;
    double tolerance = 1e-6;
};

/// Lloyd k-means with k-means++ seeding; each cluster is represented by its
/// member period closest to the centroid. Weights are cluster size times
/// period_len (unit snapshot weights assumed).
PeriodClustering cluster_periods(const FeatureMatrix& features, std::size_t k, std::uint64_t seed,
                                 std::size_t period_len, const KMeansOptions& options = {});

/// Replaces the weights with the hours actually represented: for every
/// representative snapshot, the summed weights of the matching snapshot in
/// each member period.
std::vector<double> representative_snapshot_weights(const Network& network, const PeriodClustering& clustering);

/// New network whose snapshots are the representatives' snapshots, in
/// chronological order, reweighted; profiles sliced accordingly.
Network apply_clustering(const Network& network, const PeriodClustering& clustering);

}  // namespace gridagg

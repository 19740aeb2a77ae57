#include "fixtures.hpp"

#include "gridagg/ingest.hpp"
#include "gridagg/temporal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace gridagg;
using namespace gridagg::testing;

namespace {

Network daily_network(const std::vector<std::vector<double>>& days, std::size_t period_len) {
    Network n = empty_network(days.size() * period_len);
    add_bus(n, "a", 220.0);
    std::vector<double> load;
    for (const auto& d : days)
        for (std::size_t h = 0; h < period_len; ++h) load.push_back(d[h % d.size()]);
    add_load(n, "d", "a", load);
    add_generator(n, "g", "a", 1000.0, 1.0);
    return n;
}

double weighted_energy(const Network& n, std::size_t load) {
    double e = 0.0;
    for (std::size_t t = 0; t < n.snapshots.size(); ++t) e += n.snapshots.weights[t] * n.loads[load].profile[t];
    return e;
}

}  // namespace

TEST(FeatureMatrix, ShapeIsPeriodsBySeriesTimesLength) {
    std::vector<std::vector<double>> days{{1.0, 2.0}, {3.0, 4.0}};
    Network n = daily_network(days, 24);
    n.generators[0].profile.assign(48, 0.5);
    n.generators[0].profile[3] = 0.9;
    const FeatureMatrix f = build_feature_matrix(n, 24);
    EXPECT_EQ(f.rows, 2u);
    EXPECT_EQ(f.cols, 48u);
}

TEST(FeatureMatrix, ConstantSeriesBecomeZero) {
    const Network n = daily_network({{5.0}, {5.0}}, 24);
    const FeatureMatrix f = build_feature_matrix(n, 24);
    for (double v : f.values) EXPECT_EQ(v, 0.0);
}

TEST(FeatureMatrix, IdenticalDaysGiveIdenticalRows) {
    const Network n = daily_network({{1.0, 3.0}, {1.0, 3.0}}, 24);
    const FeatureMatrix f = build_feature_matrix(n, 24);
    for (std::size_t c = 0; c < f.cols; ++c) EXPECT_EQ(f(0, c), f(1, c));
}

TEST(FeatureMatrix, MinMaxScaledAcrossHorizon) {
    const Network n = daily_network({{10.0, 20.0}, {30.0, 40.0}}, 2);
    const FeatureMatrix f = build_feature_matrix(n, 2);
    EXPECT_DOUBLE_EQ(f(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(f(0, 1), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(f(1, 1), 1.0);
}

TEST(FeatureMatrix, HorizonMustDivide) {
    const Network n = daily_network({{1.0}}, 24);
    EXPECT_THROW(build_feature_matrix(n, 7), std::invalid_argument);
}

TEST(ClusterPeriods, KEqualsPeriodsIsIdentity) {
    const Network n = daily_network({{1.0}, {2.0}, {7.0}}, 4);
    const auto c = cluster_periods(build_feature_matrix(n, 4), 3, 9, 4);
    EXPECT_EQ(c.representatives, (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(c.assignment, (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(c.weights, (std::vector<double>{4.0, 4.0, 4.0}));
}

TEST(ClusterPeriods, DuplicatesCollapse) {
    const Network n = daily_network({{1.0, 2.0}, {9.0, 4.0}, {1.0, 2.0}, {9.0, 4.0}}, 24);
    const auto c = cluster_periods(build_feature_matrix(n, 24), 2, 1, 24);
    EXPECT_EQ(c.weights, (std::vector<double>{48.0, 48.0}));
    EXPECT_EQ(c.assignment[0], c.assignment[2]);
    EXPECT_EQ(c.assignment[1], c.assignment[3]);
    EXPECT_NE(c.assignment[0], c.assignment[1]);
}

TEST(ClusterPeriods, SingleClusterCoversHorizon) {
    const Network n = daily_network({{1.0}, {2.0}, {3.0}}, 24);
    const auto c = cluster_periods(build_feature_matrix(n, 24), 1, 0, 24);
    ASSERT_EQ(c.k(), 1u);
    EXPECT_EQ(c.weights[0], 72.0);
    EXPECT_EQ(c.representatives[0], 1u);  // the middle day is nearest the mean
}

TEST(ClusterPeriods, TooManyClusters) {
    const Network n = daily_network({{1.0}, {2.0}}, 24);
    EXPECT_THROW(cluster_periods(build_feature_matrix(n, 24), 3, 0, 24), std::invalid_argument);
}

TEST(ClusterPeriods, SameSeedIsBitIdentical) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::vector<std::vector<double>> days(10, std::vector<double>(24));
    for (auto& d : days)
        for (auto& v : d) v = u(rng);
    const Network n = daily_network(days, 24);
    const FeatureMatrix f = build_feature_matrix(n, 24);
    const auto a = cluster_periods(f, 3, 42, 24);
    const auto b = cluster_periods(f, 3, 42, 24);
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_EQ(a.representatives, b.representatives);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.iterations, b.iterations);
}

TEST(ClusterPeriods, RepresentativesAreMembers) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::vector<double>> days(8, std::vector<double>(6));
        for (auto& d : days)
            for (auto& v : d) v = u(rng);
        const Network n = daily_network(days, 6);
        const auto c = cluster_periods(build_feature_matrix(n, 6), 3, trial, 6);
        for (std::size_t k = 0; k < c.k(); ++k) EXPECT_EQ(c.assignment[c.representatives[k]], k);
        EXPECT_TRUE(std::is_sorted(c.representatives.begin(), c.representatives.end()));
        EXPECT_DOUBLE_EQ(std::accumulate(c.weights.begin(), c.weights.end(), 0.0), 48.0);
    }
}

TEST(ApplyClustering, IdentityKeepsSnapshots) {
    const Network n = daily_network({{1.0}, {2.0}}, 3);
    const auto c = cluster_periods(build_feature_matrix(n, 3), 2, 0, 3);
    const Network out = apply_clustering(n, c);
    EXPECT_EQ(out.snapshots, n.snapshots);
    EXPECT_EQ(out.loads, n.loads);
}

TEST(ApplyClustering, WeightsSumToHorizonAndEnergyIsClose) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(50.0, 150.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::vector<double>> days(10, std::vector<double>(24));
        for (auto& d : days) {
            const double level = u(rng);
            for (std::size_t h = 0; h < 24; ++h) d[h] = level * (1.0 + 0.3 * std::sin(static_cast<double>(h) / 4.0));
        }
        Network n = daily_network(days, 24);
        for (auto& w : n.snapshots.weights) w = 8760.0 / 240.0;
        const auto c = cluster_periods(build_feature_matrix(n, 24), 3, trial, 24);
        const Network out = apply_clustering(n, c);
        EXPECT_EQ(out.snapshots.size(), 72u);
        EXPECT_NEAR(out.snapshots.total_hours(), 8760.0, 1e-9);
        const double before = weighted_energy(n, 0), after = weighted_energy(out, 0);
        EXPECT_LT(std::abs(after - before), 0.2 * before);
    }
}

TEST(ApplyClustering, SingleClusterOfIdenticalDays) {
    const Network n = daily_network({{3.0, 1.0}, {3.0, 1.0}}, 24);
    const auto c = cluster_periods(build_feature_matrix(n, 24), 1, 5, 24);
    const Network out = apply_clustering(n, c);
    EXPECT_EQ(out.snapshots.size(), 24u);
    EXPECT_NEAR(out.snapshots.total_hours(), 48.0, 1e-12);
}

TEST(ApplyClustering, NineBusToTwoDays) {
    const Network n = load_network(fig1_dir()).network;
    const auto c = cluster_periods(build_feature_matrix(n, 24), 2, 7, 24);
    const Network out = apply_clustering(n, c);
    EXPECT_EQ(out.snapshots.size(), 48u);
    EXPECT_NEAR(out.snapshots.total_hours(), 8760.0, 1e-9);
    EXPECT_TRUE(validate(out).empty());
}

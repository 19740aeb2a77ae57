#include "fixtures.hpp"

#include "gridagg/errors.hpp"
#include "gridagg/ingest.hpp"
#include "gridagg/powerflow.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <queue>
#include <random>

using namespace gridagg;
using namespace gridagg::testing;

namespace {

Network triangle() {
    Network n = empty_network();
    add_bus(n, "b1", 220.0, 47.0, 15.0);
    add_bus(n, "b2", 220.0, 47.1, 15.0);
    add_bus(n, "b3", 220.0, 47.0, 15.1);
    add_line(n, "l12", "b1", "b2", 100.0, 48.4);
    add_line(n, "l13", "b1", "b3", 100.0, 48.4);
    add_line(n, "l23", "b2", "b3", 100.0, 48.4);
    add_generator(n, "g", "b1", 10.0, 1.0);
    add_load(n, "d", "b3", 3.0);
    return n;
}

double flow_of(const DispatchResult& r, std::size_t t, const std::string& id) {
    for (std::size_t b = 0; b < r.branch_ids.size(); ++b)
        if (r.branch_ids[b] == id) return r.flow[t][b];
    ADD_FAILURE() << "no branch " << id;
    return 0.0;
}

// Sum of f * x_pu around every fundamental cycle of a BFS spanning tree.
double worst_cycle_residual(const Network& n, const DispatchResult& r) {
    const auto refs = branches(n);
    const auto index = n.bus_index();
    const std::size_t nb = n.buses.size();
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(nb);
    for (std::size_t b = 0; b < refs.size(); ++b) {
        adj[index.at(refs[b].bus_from)].push_back({index.at(refs[b].bus_to), b});
        adj[index.at(refs[b].bus_to)].push_back({index.at(refs[b].bus_from), b});
    }
    std::vector<std::size_t> parent(nb, nb), parent_edge(nb, refs.size()), depth(nb, 0);
    std::vector<bool> tree_edge(refs.size(), false), seen(nb, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (auto [v, b] : adj[u]) {
            if (seen[v]) continue;
            seen[v] = true;
            parent[v] = u;
            parent_edge[v] = b;
            depth[v] = depth[u] + 1;
            tree_edge[b] = true;
            q.push(v);
        }
    }
    // Voltage drop f * x along branch b traversed from bus u.
    auto drop = [&](std::size_t t, std::size_t b, std::size_t u) {
        const double d = r.flow[t][b] * refs[b].x_pu;
        return index.at(refs[b].bus_from) == u ? d : -d;
    };
    double worst = 0.0;
    for (std::size_t t = 0; t < r.flow.size(); ++t) {
        for (std::size_t b = 0; b < refs.size(); ++b) {
            if (tree_edge[b]) continue;
            std::size_t u = index.at(refs[b].bus_from), v = index.at(refs[b].bus_to);
            double sum = drop(t, b, u);  // u -> v along the chord
            // Walk v and u up to their common ancestor: v -> ... -> lca -> ... -> u.
            std::vector<std::pair<std::size_t, std::size_t>> up_from_u;
            while (depth[v] > depth[u]) {
                sum += drop(t, parent_edge[v], v);
                v = parent[v];
            }
            while (depth[u] > depth[v]) {
                up_from_u.push_back({parent_edge[u], u});
                u = parent[u];
            }
            while (u != v) {
                sum += drop(t, parent_edge[v], v);
                v = parent[v];
                up_from_u.push_back({parent_edge[u], u});
                u = parent[u];
            }
            for (auto it = up_from_u.rbegin(); it != up_from_u.rend(); ++it) {
                const auto [edge, child] = *it;
                sum += drop(t, edge, parent[child]);
            }
            worst = std::max(worst, std::abs(sum));
        }
    }
    return worst;
}

}  // namespace

TEST(Dispatch, TwoBusHandSolution) {
    Network n = two_bus();
    n.snapshots.weights = {3.0};
    add_generator(n, "g", "b1", 200.0, 10.0);
    add_load(n, "d", "b2", 50.0);
    const auto r = solve_dispatch(n);
    EXPECT_NEAR(r.flow[0][0], 50.0, 1e-7);
    EXPECT_NEAR(r.dispatch[0][0], 50.0, 1e-7);
    EXPECT_NEAR(r.objective, 500.0 * 3.0, 1e-6);
}

TEST(Dispatch, TriangleMatchesHandSolvedAngles) {
    const auto r = solve_dispatch(triangle());
    // B theta = P with b1 as slack: [[2,-1],[-1,2]] [t2,t3] = [0,-3] / (s_base * b)
    EXPECT_NEAR(flow_of(r, 0, "l13"), 2.0, 1e-6);
    EXPECT_NEAR(flow_of(r, 0, "l12"), 1.0, 1e-6);
    EXPECT_NEAR(flow_of(r, 0, "l23"), 1.0, 1e-6);
    EXPECT_NEAR(r.angle[0][0], 0.0, 1e-12);
    EXPECT_NEAR(r.angle[0][1], -0.001, 1e-9);
    EXPECT_NEAR(r.angle[0][2], -0.002, 1e-9);
}

TEST(Dispatch, ZeroLoad) {
    Network n = two_bus();
    add_generator(n, "g", "b1", 200.0, 10.0);
    add_load(n, "d", "b2", 0.0);
    const auto r = solve_dispatch(n);
    EXPECT_NEAR(r.dispatch[0][0], 0.0, 1e-9);
    EXPECT_NEAR(r.objective, 0.0, 1e-9);
}

TEST(Dispatch, ShedsWhenCapacityIsShort) {
    Network n = two_bus(40.0);
    add_generator(n, "g", "b1", 200.0, 10.0);
    add_load(n, "d", "b2", 50.0);
    const auto r = solve_dispatch(n);
    EXPECT_NEAR(r.flow[0][0], 40.0, 1e-7);
    EXPECT_NEAR(r.shed[0][1], 10.0, 1e-7);
    EXPECT_NEAR(r.objective, 400.0 + 10.0 * kLoadSheddingPenalty, 1e-5);
}

TEST(Dispatch, DisconnectedNetworkIsDataError) {
    Network n = two_bus();
    add_bus(n, "island", 220.0);
    EXPECT_THROW(build_dispatch_lp(n), DataError);
}

TEST(Dispatch, KvlOnRandomMeshes) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const Network n = random_network(rng, {.min_buses = 5, .max_buses = 8, .extra_edge_probability = 3.0});
        const auto r = solve_dispatch(n);
        EXPECT_LT(worst_cycle_residual(n, r), 1e-6);
    }
}

TEST(Dispatch, EnergyBalanceAndLimits) {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        const Network n = random_network(rng);
        const auto r = solve_dispatch(n);
        for (std::size_t t = 0; t < n.snapshots.size(); ++t) {
            double gen = std::accumulate(r.dispatch[t].begin(), r.dispatch[t].end(), 0.0);
            double shed = std::accumulate(r.shed[t].begin(), r.shed[t].end(), 0.0);
            double load = 0.0;
            for (const auto& l : n.loads) load += l.profile[t];
            EXPECT_NEAR(gen + shed, load, 1e-6 * std::max(1.0, load));
        }
        for (const auto& row : loading(r, n))
            for (double v : row) EXPECT_LE(v, 1.0 + kLoadingTolerance);
    }
}

TEST(Dispatch, RadialFlowsIgnoreReactance) {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 5; ++trial) {
        Network n = random_network(rng, {.two_levels = false, .extra_edge_probability = 0.0});
        // Distinct costs, ample capacity and no congestion make the dispatch unique.
        for (auto& l : n.lines) l.s_nom = 1e5;
        for (std::size_t g = 0; g < n.generators.size(); ++g) n.generators[g].marginal_cost = 1.0 + static_cast<double>(g);
        add_generator(n, "backstop", n.buses[0].id, 1e5, 1000.0);
        const auto a = solve_dispatch(n);
        for (auto& l : n.lines) l.x *= 2.0;
        const auto b = solve_dispatch(n);
        for (std::size_t t = 0; t < a.flow.size(); ++t)
            for (std::size_t k = 0; k < a.flow[t].size(); ++k) EXPECT_NEAR(a.flow[t][k], b.flow[t][k], 1e-6);
    }
}

TEST(Dispatch, FlowsIndependentOfSlackChoice) {
    Network n = triangle();
    Network renamed = n;
    // Rename so the load bus has the lowest id and becomes the slack.
    auto rename = [](std::string& id) { id = id == "b3" ? "a3" : id; };
    for (auto& b : renamed.buses) rename(b.id);
    for (auto& l : renamed.lines) {
        rename(l.bus_from);
        rename(l.bus_to);
    }
    for (auto& d : renamed.loads) rename(d.bus);
    const auto a = solve_dispatch(n), b = solve_dispatch(renamed);
    for (std::size_t k = 0; k < a.flow[0].size(); ++k) EXPECT_NEAR(a.flow[0][k], b.flow[0][k], 1e-7);
}

TEST(Loading, AbsoluteFlowOverRating) {
    const Network n = two_bus();
    DispatchResult r;
    r.branch_ids = {"l12"};
    r.flow = {{50.0}, {-95.0}, {0.0}};
    const auto l = loading(r, n);
    ASSERT_EQ(l.size(), 1u);
    EXPECT_DOUBLE_EQ(l[0][0], 0.5);
    EXPECT_DOUBLE_EQ(l[0][1], 0.95);
    EXPECT_DOUBLE_EQ(l[0][2], 0.0);
    EXPECT_DOUBLE_EQ(loading(r, n, {100.0})[0][1], 0.475);
}

TEST(Screen, RuleExamples) {
    const auto c = screen_candidates({{0.75, 0.72, 0.71}, {0.50, 0.95, 0.40}, {0.69, 0.89}}, {"a", "b", "c"});
    EXPECT_EQ(c.is_candidate, (std::vector<bool>{true, true, false}));
    EXPECT_DOUBLE_EQ(c.max_loading[1], 0.95);
    EXPECT_DOUBLE_EQ(c.frac_above[0], 1.0);
    EXPECT_DOUBLE_EQ(c.frac_above[1], 1.0 / 3.0);
}

TEST(Screen, StrictComparison) {
    const auto c = screen_candidates({{0.70, 0.80}, {0.70, 0.90}}, {"a", "b"});
    EXPECT_FALSE(c.is_candidate[0]);
    EXPECT_FALSE(c.is_candidate[1]);
}

TEST(Screen, ThresholdsValidated) {
    EXPECT_THROW(screen_candidates({{0.5}}, {"a"}, 0.0, 0.9), std::invalid_argument);
    EXPECT_THROW(screen_candidates({{0.5}}, {"a"}, 0.7, 1.5), std::invalid_argument);
}

TEST(Screen, MonotoneInThresholds) {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> v(1 + trial % 12);
        for (auto& x : v) x = u(rng);
        const double a = 0.05 + 0.9 * u(rng), b = 0.05 + 0.9 * u(rng);
        const double a2 = std::min(1.0, a + 0.3 * u(rng)), b2 = std::min(1.0, b + 0.3 * u(rng));
        const bool low = screen_candidates({v}, {"x"}, a, b).is_candidate[0];
        const bool high = screen_candidates({v}, {"x"}, a2, b2).is_candidate[0];
        EXPECT_TRUE(low || !high);
    }
}

TEST(Candidates, CsvRoundTripAndFlags) {
    const Network n = load_network(fig1_dir()).network;
    const auto r = solve_dispatch(n);
    const auto c = screen_candidates(loading(r, n), r.branch_ids);
    EXPECT_TRUE(c.contains("L_R2_R5"));
    EXPECT_TRUE(c.contains("T1"));
    const auto dir = scratch_dir("candidates");
    write_candidates(c, dir / "candidates.csv");
    const auto back = read_candidates(dir / "candidates.csv");
    EXPECT_EQ(back.branch_ids, c.branch_ids);
    EXPECT_EQ(back.is_candidate, c.is_candidate);
    const Network flagged = apply_candidates(n, c);
    EXPECT_EQ(candidates_from_network(flagged).is_candidate, c.is_candidate);
}

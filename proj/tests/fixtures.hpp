#pragma once

#include "gridagg/network.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace gridagg::testing {

inline std::filesystem::path data_dir() { return GRIDAGG_DATA_DIR; }
inline std::filesystem::path fig1_dir() { return data_dir() / "fig1"; }

inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::path(GRIDAGG_SCRATCH_DIR) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline Network empty_network(std::size_t snapshots = 1, double weight = 1.0) {
    Network n;
    for (std::size_t t = 0; t < snapshots; ++t) {
        n.snapshots.labels.push_back("t" + std::to_string(t));
        n.snapshots.weights.push_back(weight);
    }
    return n;
}

inline void add_bus(Network& n, const std::string& id, double kv, double lat = 0.0, double lon = 0.0) {
    n.buses.push_back({id, kv, lat, lon});
    n.voltage_levels.insert(kv);
}

inline void add_line(Network& n, const std::string& id, const std::string& from, const std::string& to, double s_nom,
                     double x, double length = 1.0, double cost = 0.0, bool expandable = false) {
    n.lines.push_back({id, from, to, n.find_bus(from)->voltage_kv, s_nom, x, length, cost, expandable});
}

inline void add_transformer(Network& n, const std::string& id, const std::string& hv, const std::string& lv,
                            double s_nom, double x, double cost = 0.0, bool expandable = false) {
    n.transformers.push_back({id, hv, lv, s_nom, x, cost, expandable});
}

inline void add_generator(Network& n, const std::string& id, const std::string& bus, double p_nom, double mc,
                          std::vector<double> cf = {}) {
    if (cf.empty()) cf.assign(n.snapshots.size(), 1.0);
    n.generators.push_back({id, bus, p_nom, mc, std::move(cf)});
}

inline void add_load(Network& n, const std::string& id, const std::string& bus, std::vector<double> profile) {
    n.loads.push_back({id, bus, std::move(profile)});
}

inline void add_load(Network& n, const std::string& id, const std::string& bus, double mw) {
    add_load(n, id, bus, std::vector<double>(n.snapshots.size(), mw));
}

/// Bus b1 (generator side) and b2 (load side) joined by one line whose
/// per-unit reactance is 0.1 on a 100 MVA base.
inline Network two_bus(double line_mva = 100.0) {
    Network n = empty_network();
    add_bus(n, "b1", 220.0, 47.0, 15.0);
    add_bus(n, "b2", 220.0, 47.1, 15.1);
    add_line(n, "l12", "b1", "b2", line_mva, 48.4, 10.0);
    return n;
}

struct RandomNetworkOptions {
    std::size_t min_buses = 4;
    std::size_t max_buses = 10;
    bool two_levels = true;
    std::size_t snapshots = 3;
    double extra_edge_probability = 0.3;
};

/// Connected random network: a random spanning tree per voltage level plus
/// extra lines, transformers between the levels, generators with a few
/// shared marginal costs, and one load on roughly half of the buses.
inline Network random_network(std::mt19937_64& rng, const RandomNetworkOptions& opt = {}) {
    std::uniform_int_distribution<std::size_t> count(opt.min_buses, opt.max_buses);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n_buses = count(rng);
    Network n = empty_network(opt.snapshots, 8760.0 / static_cast<double>(opt.snapshots));

    std::vector<std::vector<std::string>> by_level(2);
    for (std::size_t i = 0; i < n_buses; ++i) {
        const bool high = !opt.two_levels || i % 2 == 0 || n_buses < 2;
        const double kv = high ? 380.0 : 220.0;
        const std::string id = "n" + std::to_string(i);
        add_bus(n, id, kv, 46.0 + 2.0 * unit(rng), 14.0 + 3.0 * unit(rng));
        by_level[high ? 0 : 1].push_back(id);
    }

    std::size_t edge = 0;
    auto connect = [&](const std::string& a, const std::string& b) {
        const double len = 5.0 + 95.0 * unit(rng);
        add_line(n, "e" + std::to_string(edge++), a, b, 200.0 + 1800.0 * unit(rng), 0.05 + 0.5 * len * unit(rng),
                 len, 100.0 + 400.0 * unit(rng), unit(rng) < 0.5);
    };
    for (const auto& ids : by_level) {
        for (std::size_t i = 1; i < ids.size(); ++i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            connect(ids[pick(rng)], ids[i]);
        }
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = i + 2; j < ids.size(); ++j)
                if (unit(rng) < opt.extra_edge_probability / static_cast<double>(ids.size())) connect(ids[i], ids[j]);
    }
    if (!by_level[1].empty()) {
        const std::size_t trafos = 1 + static_cast<std::size_t>(unit(rng) * 2.0);
        for (std::size_t k = 0; k < trafos; ++k) {
            std::uniform_int_distribution<std::size_t> hi(0, by_level[0].size() - 1), lo(0, by_level[1].size() - 1);
            add_transformer(n, "tr" + std::to_string(k), by_level[0][hi(rng)], by_level[1][lo(rng)],
                            300.0 + 600.0 * unit(rng), 10.0 + 40.0 * unit(rng), 5000.0 + 10000.0 * unit(rng),
                            unit(rng) < 0.5);
        }
    }

    const double costs[] = {5.0, 20.0, 60.0};
    for (std::size_t i = 0; i < n_buses; ++i) {
        if (unit(rng) < 0.6) {
            std::vector<double> cf(opt.snapshots);
            for (auto& v : cf) v = unit(rng);
            add_generator(n, "g" + std::to_string(i), n.buses[i].id, 100.0 + 900.0 * unit(rng),
                          costs[static_cast<std::size_t>(unit(rng) * 3.0) % 3], cf);
        }
        if (unit(rng) < 0.5) {
            std::vector<double> p(opt.snapshots);
            for (auto& v : p) v = 50.0 + 450.0 * unit(rng);
            add_load(n, "d" + std::to_string(i), n.buses[i].id, p);
        }
    }
    return n;
}

}  // namespace gridagg::testing

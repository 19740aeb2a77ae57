#include "gridagg/partition.hpp"

#include "gridagg/csv.hpp"
#include "gridagg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

namespace gridagg {

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    for (double lat : {lat1, lat2})
        if (!(lat >= -90.0 && lat <= 90.0)) throw std::domain_error("latitude out of range");
    for (double lon : {lon1, lon2})
        if (!(lon >= -180.0 && lon <= 180.0)) throw std::domain_error("longitude out of range");
    constexpr double rad = std::numbers::pi / 180.0;
    const double dlat = (lat2 - lat1) * rad;
    const double dlon = (lon2 - lon1) * rad;
    const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

DistanceMatrix build_distance_matrix(const Network& network) {
    std::vector<const Bus*> sorted;
    for (const auto& b : network.buses) sorted.push_back(&b);
    std::sort(sorted.begin(), sorted.end(), [](const Bus* a, const Bus* b) { return a->id < b->id; });

    DistanceMatrix dm;
    const std::size_t n = sorted.size();
    for (const Bus* b : sorted) dm.node_order.push_back(b->id);
    dm.d.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = haversine_km(sorted[i]->lat, sorted[i]->lon, sorted[j]->lat, sorted[j]->lon);
            dm(i, j) = d;
            dm(j, i) = d;
        }
    }
    return dm;
}

namespace {

std::vector<double> voltages_in_order(const DistanceMatrix& dm, const Network& network) {
    const auto index = network.bus_index();
    std::vector<double> v;
    v.reserve(dm.size());
    for (const auto& id : dm.node_order) {
        auto it = index.find(id);
        if (it == index.end()) throw std::invalid_argument("distance matrix node '" + id + "' not in network");
        v.push_back(network.buses[it->second].voltage_kv);
    }
    if (dm.size() != network.buses.size())
        throw std::invalid_argument("distance matrix does not cover the network's buses");
    return v;
}

}  // namespace

DistanceMatrix mask_voltage_aware(const DistanceMatrix& dm, const Network& network) {
    const auto voltage = voltages_in_order(dm, network);
    if (dm.sentinel) return dm;
    const std::size_t n = dm.size();
    double max_entry = 0.0;
    bool any_cross = false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            max_entry = std::max(max_entry, dm(i, j));
            any_cross = any_cross || voltage[i] != voltage[j];
        }
    }
    DistanceMatrix out = dm;
    if (!any_cross) return out;
    const double sentinel = 10.0 * max_entry + 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (voltage[i] != voltage[j]) out(i, j) = sentinel;
    out.sentinel = sentinel;
    return out;
}

void write_distance_matrix(const DistanceMatrix& dm, const std::filesystem::path& path) {
    csv::Writer w;
    std::vector<std::string> header{"bus_id"};
    header.insert(header.end(), dm.node_order.begin(), dm.node_order.end());
    w.row(header);
    for (std::size_t i = 0; i < dm.size(); ++i) {
        std::vector<std::string> row{dm.node_order[i]};
        for (std::size_t j = 0; j < dm.size(); ++j) row.push_back(csv::format_number(dm(i, j)));
        w.row(row);
    }
    w.save(path);
}

std::map<double, std::size_t> allocate_clusters_per_level(const Network& network, std::size_t k) {
    std::map<double, std::size_t> size_of;
    for (const auto& b : network.buses) ++size_of[b.voltage_kv];
    const std::size_t n = network.buses.size();
    if (k < size_of.size() || k > n) {
        throw std::invalid_argument("cannot allocate k=" + std::to_string(k) + " clusters over " +
                                    std::to_string(size_of.size()) + " voltage levels and " + std::to_string(n) +
                                    " buses");
    }

    struct Level {
        double kv;
        std::size_t size;
        std::size_t count;
        double remainder;
    };
    std::vector<Level> levels;
    for (auto it = size_of.rbegin(); it != size_of.rend(); ++it) {
        const double quota = static_cast<double>(k) * static_cast<double>(it->second) / static_cast<double>(n);
        const auto base = static_cast<std::size_t>(std::floor(quota));
        levels.push_back({it->first, it->second, std::clamp<std::size_t>(base, 1, it->second), quota - static_cast<double>(base)});
    }
    auto total = [&] {
        std::size_t s = 0;
        for (const auto& l : levels) s += l.count;
        return s;
    };
    // Largest remainder first; ties go to the higher voltage (earlier entry).
    std::vector<std::size_t> by_remainder(levels.size());
    std::iota(by_remainder.begin(), by_remainder.end(), 0);
    std::stable_sort(by_remainder.begin(), by_remainder.end(),
                     [&](std::size_t a, std::size_t b) { return levels[a].remainder > levels[b].remainder; });
    while (total() < k) {
        bool progressed = false;
        for (std::size_t i : by_remainder) {
            if (total() == k) break;
            if (levels[i].count < levels[i].size) {
                ++levels[i].count;
                progressed = true;
            }
        }
        if (!progressed) break;
    }
    // The minimum of one per level can overshoot; take back from the
    // smallest remainders among levels that can spare a cluster.
    while (total() > k) {
        for (auto it = by_remainder.rbegin(); it != by_remainder.rend() && total() > k; ++it)
            if (levels[*it].count > 1) --levels[*it].count;
    }

    std::map<double, std::size_t> out;
    for (const auto& l : levels) out[l.kv] = l.count;
    return out;
}

std::string_view to_string(PartitionMode mode) { return mode == PartitionMode::VoltageAware ? "va" : "vu"; }

PartitionMode parse_partition_mode(std::string_view text) {
    if (text == "va" || text == "VA") return PartitionMode::VoltageAware;
    if (text == "vu" || text == "VU") return PartitionMode::VoltageUnaware;
    throw std::invalid_argument("unknown partition mode '" + std::string(text) + "' (expected vu or va)");
}

std::size_t PartitionMapping::cluster_count() const {
    std::set<int> ids;
    for (const auto& [bus, c] : assignment) ids.insert(c);
    return ids.size();
}

std::vector<std::vector<std::string>> PartitionMapping::clusters() const {
    int max_id = -1;
    for (const auto& [bus, c] : assignment) max_id = std::max(max_id, c);
    std::vector<std::vector<std::string>> out(static_cast<std::size_t>(max_id + 1));
    for (const auto& [bus, c] : assignment) out[static_cast<std::size_t>(c)].push_back(bus);
    return out;
}

double medoid_cost(const DistanceMatrix& dm, const std::vector<std::size_t>& medoids) {
    double cost = 0.0;
    for (std::size_t j = 0; j < dm.size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t m : medoids) best = std::min(best, dm(j, m));
        cost += best;
    }
    return cost;
}

PamResult pam(const DistanceMatrix& dm, std::size_t k) {
    const std::size_t n = dm.size();
    if (k == 0) throw std::invalid_argument("kmedoids: k must be positive");
    if (k > n) throw std::invalid_argument("kmedoids: k=" + std::to_string(k) + " exceeds node count " + std::to_string(n));

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<bool> is_medoid(n, false);
    std::vector<std::size_t> medoids;
    std::vector<double> nearest(n, inf);

    // BUILD: greedily add the node that lowers total cost the most.
    while (medoids.size() < k) {
        std::size_t best_node = n;
        double best_cost = inf;
        for (std::size_t c = 0; c < n; ++c) {
            if (is_medoid[c]) continue;
            double cost = 0.0;
            for (std::size_t j = 0; j < n; ++j) cost += std::min(nearest[j], dm(j, c));
            if (cost < best_cost) {
                best_cost = cost;
                best_node = c;
            }
        }
        is_medoid[best_node] = true;
        medoids.push_back(best_node);
        for (std::size_t j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], dm(j, best_node));
    }

    PamResult result;
    auto current_cost = [&] { return std::accumulate(nearest.begin(), nearest.end(), 0.0); };
    result.cost_history.push_back(current_cost());

    // SWAP with nearest/second-nearest bookkeeping: O(k (n-k) n) per pass.
    std::vector<double> second(n, inf);
    std::vector<std::size_t> nearest_pos(n, 0);
    auto refresh = [&] {
        for (std::size_t j = 0; j < n; ++j) {
            nearest[j] = inf;
            second[j] = inf;
            for (std::size_t p = 0; p < medoids.size(); ++p) {
                const double d = dm(j, medoids[p]);
                if (d < nearest[j] || (d == nearest[j] && medoids[p] < medoids[nearest_pos[j]])) {
                    second[j] = nearest[j];
                    nearest[j] = d;
                    nearest_pos[j] = p;
                } else if (d < second[j]) {
                    second[j] = d;
                }
            }
        }
    };
    refresh();
    const double scale = std::max(1.0, result.cost_history.front());
    for (;;) {
        double best_delta = 0.0;
        std::size_t best_pos = 0, best_in = n;
        for (std::size_t p = 0; p < medoids.size(); ++p) {
            for (std::size_t o = 0; o < n; ++o) {
                if (is_medoid[o]) continue;
                double delta = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double djo = dm(j, o);
                    if (nearest_pos[j] == p) delta += std::min(djo, second[j]) - nearest[j];
                    else if (djo < nearest[j]) delta += djo - nearest[j];
                }
                if (delta < best_delta - 1e-12 * scale) {
                    best_delta = delta;
                    best_pos = p;
                    best_in = o;
                }
            }
        }
        if (best_in == n) break;
        is_medoid[medoids[best_pos]] = false;
        is_medoid[best_in] = true;
        medoids[best_pos] = best_in;
        refresh();
        result.cost_history.push_back(current_cost());
    }

    std::sort(medoids.begin(), medoids.end());
    result.medoids = medoids;
    result.label.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        double best = inf;
        for (std::size_t p = 0; p < medoids.size(); ++p) {
            const double d = dm(j, medoids[p]);
            if (d < best) {
                best = d;
                result.label[j] = p;
            }
        }
        if (is_medoid[j]) result.label[j] = static_cast<std::size_t>(
            std::find(medoids.begin(), medoids.end(), j) - medoids.begin());
    }
    result.cost = medoid_cost(dm, medoids);
    return result;
}

PartitionMapping kmedoids(const DistanceMatrix& dm, std::size_t k, std::uint64_t /*seed*/) {
    const PamResult r = pam(dm, k);
    PartitionMapping mapping;
    for (std::size_t j = 0; j < dm.size(); ++j) mapping.assignment[dm.node_order[j]] = static_cast<int>(r.label[j]);
    for (std::size_t p = 0; p < r.medoids.size(); ++p) mapping.medoids[static_cast<int>(p)] = dm.node_order[r.medoids[p]];
    return mapping;
}

PartitionMapping partition_vu(const Network& network, std::size_t k, std::uint64_t seed) {
    PartitionMapping mapping = kmedoids(build_distance_matrix(network), k, seed);
    mapping.mode = PartitionMode::VoltageUnaware;
    return mapping;
}

PartitionMapping partition_va(const Network& network, std::size_t k, std::uint64_t seed) {
    const auto allocation = allocate_clusters_per_level(network, k);
    const DistanceMatrix full = build_distance_matrix(network);
    const auto voltage = voltages_in_order(full, network);

    PartitionMapping mapping;
    mapping.mode = PartitionMode::VoltageAware;
    int offset = 0;
    for (auto it = allocation.rbegin(); it != allocation.rend(); ++it) {
        const double kv = it->first;
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < full.size(); ++i)
            if (voltage[i] == kv) members.push_back(i);

        DistanceMatrix sub;
        for (std::size_t i : members) sub.node_order.push_back(full.node_order[i]);
        sub.d.resize(members.size() * members.size());
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = 0; b < members.size(); ++b) sub(a, b) = full(members[a], members[b]);

        const PartitionMapping level = kmedoids(sub, it->second, seed);
        for (const auto& [bus, c] : level.assignment) mapping.assignment[bus] = c + offset;
        for (const auto& [c, bus] : level.medoids) {
            mapping.medoids[c + offset] = bus;
            mapping.cluster_voltage[c + offset] = kv;
        }
        offset += static_cast<int>(it->second);
    }
    return mapping;
}

void write_mapping(const PartitionMapping& mapping, const std::filesystem::path& path) {
    csv::Writer w;
    w.row({"bus_id", "cluster_id", "cluster_voltage_kv"});
    for (const auto& [bus, c] : mapping.assignment) {
        std::string kv;
        if (mapping.mode == PartitionMode::VoltageAware) kv = csv::format_number(mapping.cluster_voltage.at(c));
        w.row({bus, std::to_string(c), kv});
    }
    w.save(path);
}

PartitionMapping read_mapping(const std::filesystem::path& path) {
    auto t = csv::Table::read(path);
    const auto bus = t.column("bus_id"), cluster = t.column("cluster_id"), kv = t.column("cluster_voltage_kv");
    PartitionMapping mapping;
    bool any_voltage = false, any_empty = false;
    for (std::size_t r = 0; r < t.rows().size(); ++r) {
        const int c = static_cast<int>(t.number(r, cluster));
        if (!mapping.assignment.emplace(t.cell(r, bus), c).second)
            throw DataError(t.source() + ": bus '" + t.cell(r, bus) + "' assigned twice");
        if (t.cell(r, kv).empty()) {
            any_empty = true;
            continue;
        }
        any_voltage = true;
        const double v = t.number(r, kv);
        auto [it, inserted] = mapping.cluster_voltage.emplace(c, v);
        if (!inserted && it->second != v)
            throw DataError(t.source() + ": cluster " + std::to_string(c) + " has more than one voltage");
    }
    if (any_voltage && any_empty) throw DataError(t.source() + ": cluster_voltage_kv must be set for all rows or none");
    mapping.mode = any_voltage ? PartitionMode::VoltageAware : PartitionMode::VoltageUnaware;
    // Medoids are not serialised; the lowest member id stands in.
    for (const auto& [b, c] : mapping.assignment) mapping.medoids.emplace(c, b);
    return mapping;
}

}  // namespace gridagg

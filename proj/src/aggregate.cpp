#include "gridagg/aggregate.hpp"

#include "gridagg/csv.hpp"
#include "gridagg/errors.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace gridagg {

BranchParams merge_parallel(std::span<const BranchParams> members) {
    if (members.empty()) throw std::invalid_argument("merge_parallel: no branches to merge");
    if (members.size() == 1) return members.front();
    BranchParams out;
    double admittance = 0.0, length = 0.0, cost = 0.0;
    for (const auto& m : members) {
        out.s_nom += m.s_nom;
        admittance += 1.0 / m.x;
        length += m.s_nom * m.length_km;
        cost += m.s_nom * m.cost_rate;
        out.expandable = out.expandable || m.expandable;
    }
    out.x = 1.0 / admittance;
    out.length_km = length / out.s_nom;
    out.cost_rate = cost / out.s_nom;
    return out;
}

std::string cluster_bus_id(int cluster) { return "cluster_" + std::to_string(cluster); }

namespace {

struct Member {
    std::string id;
    BranchKind kind;
    BranchParams params;  // x in per unit
};

double uniform_level(const Network& network) {
    std::map<double, double> capacity;
    for (double kv : network.voltage_levels) capacity[kv] = 0.0;
    for (const auto& l : network.lines) capacity[l.voltage_kv] += l.s_nom;
    double best_kv = 0.0, best_cap = -1.0;
    for (const auto& [kv, cap] : capacity) {
        if (cap >= best_cap) {  // ascending kv: ties go to the higher level
            best_cap = cap;
            best_kv = kv;
        }
    }
    return best_kv;
}

}  // namespace

AggregationResult aggregate_network(const Network& network, const PartitionMapping& mapping) {
    for (const auto& b : network.buses)
        if (!mapping.assignment.contains(b.id)) throw DataError("mapping does not assign bus '" + b.id + "'");
    if (mapping.assignment.size() != network.buses.size())
        throw DataError("mapping assigns buses that are not in the network");
    const bool va = mapping.mode == PartitionMode::VoltageAware;

    std::set<int> cluster_ids;
    for (const auto& [bus, c] : mapping.assignment) cluster_ids.insert(c);

    AggregationResult result;
    Network& out = result.network;
    out.s_base = network.s_base;
    out.snapshots = network.snapshots;

    const double uniform_kv = va ? 0.0 : uniform_level(network);
    std::map<int, double> voltage_of;
    for (int c : cluster_ids) {
        double kv = uniform_kv;
        if (va) {
            auto it = mapping.cluster_voltage.find(c);
            if (it == mapping.cluster_voltage.end())
                throw DataError("VA mapping has no voltage for cluster " + std::to_string(c));
            kv = it->second;
        }
        voltage_of[c] = kv;
    }
    for (const auto& b : network.buses) {
        const int c = mapping.assignment.at(b.id);
        if (va && b.voltage_kv != voltage_of[c])
            throw DataError("VA mapping puts bus '" + b.id + "' in a cluster of a different voltage");
    }

    // Buses at member centroids.
    std::map<int, std::pair<double, double>> coord_sum;
    std::map<int, std::size_t> member_count;
    for (const auto& b : network.buses) {
        const int c = mapping.assignment.at(b.id);
        coord_sum[c].first += b.lat;
        coord_sum[c].second += b.lon;
        ++member_count[c];
    }
    for (int c : cluster_ids) {
        const double n = static_cast<double>(member_count[c]);
        out.buses.push_back({cluster_bus_id(c), voltage_of[c], coord_sum[c].first / n, coord_sum[c].second / n});
        out.voltage_levels.insert(voltage_of[c]);
    }
    auto cluster_of_bus = [&](const std::string& bus) { return mapping.assignment.at(bus); };

    // Generators: one per (cluster, marginal cost), in merit order.
    const std::size_t n_snap = network.snapshots.size();
    std::map<int, std::map<double, std::vector<const Generator*>>> gen_groups;
    for (const auto& g : network.generators) gen_groups[cluster_of_bus(g.bus)][g.marginal_cost].push_back(&g);
    for (const auto& [c, by_cost] : gen_groups) {
        std::size_t i = 0;
        for (const auto& [mc, gens] : by_cost) {
            Generator merged;
            merged.id = cluster_bus_id(c) + "_gen" + std::to_string(i++);
            merged.bus = cluster_bus_id(c);
            merged.marginal_cost = mc;
            merged.profile.assign(n_snap, 0.0);
            for (const Generator* g : gens) merged.p_nom += g->p_nom;
            for (const Generator* g : gens) {
                const double w = merged.p_nom > 0.0 ? g->p_nom / merged.p_nom : 1.0 / static_cast<double>(gens.size());
                for (std::size_t t = 0; t < n_snap; ++t) merged.profile[t] += w * g->profile[t];
            }
            for (double& cf : merged.profile) cf = std::clamp(cf, 0.0, 1.0);
            out.generators.push_back(std::move(merged));
        }
    }

    // Loads: summed per cluster.
    std::map<int, std::vector<const Load*>> load_groups;
    for (const auto& l : network.loads) load_groups[cluster_of_bus(l.bus)].push_back(&l);
    for (const auto& [c, loads] : load_groups) {
        Load merged{cluster_bus_id(c) + "_load", cluster_bus_id(c), std::vector<double>(n_snap, 0.0)};
        for (const Load* l : loads)
            for (std::size_t t = 0; t < n_snap; ++t) merged.profile[t] += l->profile[t];
        out.loads.push_back(std::move(merged));
    }

    // Branches grouped by unordered cluster pair.
    std::map<std::pair<int, int>, std::vector<Member>> groups;
    const auto refs = branches(network);
    for (const auto& ref : refs) {
        const int ca = cluster_of_bus(ref.bus_from);
        const int cb = cluster_of_bus(ref.bus_to);
        if (ca == cb) {
            ++result.report.dropped_intra_cluster;
            if (ref.expandable) ++result.report.dropped_candidates;
            continue;
        }
        Member m{ref.id, ref.kind, {ref.s_nom, ref.x_pu, 0.0, 0.0, ref.expandable}};
        if (ref.kind == BranchKind::Line) {
            const auto& l = network.lines[ref.index];
            m.params.length_km = l.length_km;
            m.params.cost_rate = l.cost_per_mva_km;
        } else {
            m.params.cost_rate = network.transformers[ref.index].cost_per_mva;
        }
        groups[{std::min(ca, cb), std::max(ca, cb)}].push_back(std::move(m));
    }

    for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end(), [](const Member& a, const Member& b) { return a.id < b.id; });
        std::vector<BranchParams> all, lines_only;
        for (const auto& m : members) {
            all.push_back(m.params);
            if (m.kind == BranchKind::Line) lines_only.push_back(m.params);
        }
        BranchParams merged = merge_parallel(all);
        if (members.size() > 1) ++result.report.merged_groups;

        const auto [ca, cb] = key;
        const double va_kv = voltage_of[ca];
        const double vb_kv = voltage_of[cb];
        const bool as_transformer = va && va_kv != vb_kv;
        const std::string bus_a = cluster_bus_id(ca);
        const std::string bus_b = cluster_bus_id(cb);

        if (as_transformer) {
            const bool a_high = va_kv > vb_kv;
            const double hv_kv = a_high ? va_kv : vb_kv;
            Transformer t;
            t.id = members.size() == 1 ? members.front().id : "trafo_" + bus_a + "_" + bus_b;
            t.bus_hv = a_high ? bus_a : bus_b;
            t.bus_lv = a_high ? bus_b : bus_a;
            t.s_nom = merged.s_nom;
            t.x = merged.x * hv_kv * hv_kv / out.s_base;
            t.cost_per_mva = merged.cost_rate;
            t.expandable = merged.expandable;
            out.transformers.push_back(std::move(t));
        } else {
            // Transformer members of a VU merge contribute capacity and
            // reactance only; length and cost come from the line members.
            if (lines_only.size() != all.size()) {
                if (lines_only.empty()) {
                    merged.length_km = 0.0;
                    merged.cost_rate = 0.0;
                    merged.expandable = false;
                } else {
                    const BranchParams line_part = merge_parallel(lines_only);
                    merged.length_km = line_part.length_km;
                    merged.cost_rate = line_part.cost_rate;
                    merged.expandable = line_part.expandable;
                }
            }
            Line l;
            l.id = members.size() == 1 ? members.front().id : "line_" + bus_a + "_" + bus_b;
            l.bus_from = bus_a;
            l.bus_to = bus_b;
            l.voltage_kv = va_kv;
            l.s_nom = merged.s_nom;
            l.x = merged.x * va_kv * va_kv / out.s_base;
            l.length_km = merged.length_km;
            l.cost_per_mva_km = merged.cost_rate;
            l.expandable = merged.expandable;
            out.lines.push_back(std::move(l));
        }
        if (merged.expandable) ++result.report.candidate_carryover;
    }

    result.report.cluster_count = cluster_ids.size();
    result.report.line_count = out.lines.size();
    result.report.transformer_count = out.transformers.size();
    return result;
}

void write_aggregation_report(const AggregationReport& r, const std::filesystem::path& path) {
    csv::Writer w;
    w.row({"metric", "value"});
    w.row({"cluster_count", std::to_string(r.cluster_count)});
    w.row({"line_count", std::to_string(r.line_count)});
    w.row({"transformer_count", std::to_string(r.transformer_count)});
    w.row({"dropped_intra_cluster", std::to_string(r.dropped_intra_cluster)});
    w.row({"dropped_candidates", std::to_string(r.dropped_candidates)});
    w.row({"candidate_carryover", std::to_string(r.candidate_carryover)});
    w.row({"merged_groups", std::to_string(r.merged_groups)});
    w.save(path);
}

}  // namespace gridagg

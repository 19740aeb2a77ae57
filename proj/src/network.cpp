#include "gridagg/network.hpp"

#include "gridagg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace gridagg {

double SnapshotSet::total_hours() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

std::unordered_map<std::string, std::size_t> Network::bus_index() const {
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(buses.size());
    for (std::size_t i = 0; i < buses.size(); ++i) index.emplace(buses[i].id, i);
    return index;
}

const Bus* Network::find_bus(std::string_view id) const {
    auto it = std::find_if(buses.begin(), buses.end(), [&](const Bus& b) { return b.id == id; });
    return it == buses.end() ? nullptr : &*it;
}

namespace {

bool same_voltage(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

bool declared_level(const std::set<double>& levels, double kv) {
    return std::any_of(levels.begin(), levels.end(), [&](double v) { return same_voltage(v, kv); });
}

}  // namespace

std::vector<Violation> validate(const Network& network, const ValidateOptions& options) {
    std::vector<Violation> out;
    auto flag = [&](const std::string& id, const char* rule) { out.push_back({id, rule}); };

    if (!(network.s_base > 0.0)) flag("network", "s_base-nonpositive");

    std::unordered_map<std::string, double> bus_voltage;
    for (const auto& bus : network.buses) {
        if (!bus_voltage.emplace(bus.id, bus.voltage_kv).second) flag(bus.id, "duplicate-id");
        if (!(bus.voltage_kv > 0.0)) flag(bus.id, "voltage-nonpositive");
        else if (!declared_level(network.voltage_levels, bus.voltage_kv)) flag(bus.id, "voltage-level-undeclared");
        if (!(bus.lat >= -90.0 && bus.lat <= 90.0)) flag(bus.id, "lat-out-of-range");
        if (!(bus.lon >= -180.0 && bus.lon <= 180.0)) flag(bus.id, "lon-out-of-range");
    }
    auto voltage_of = [&](const std::string& id) -> const double* {
        auto it = bus_voltage.find(id);
        return it == bus_voltage.end() ? nullptr : &it->second;
    };

    std::unordered_set<std::string> branch_ids;
    for (const auto& line : network.lines) {
        if (!branch_ids.insert(line.id).second) flag(line.id, "duplicate-id");
        if (line.bus_from == line.bus_to) flag(line.id, "self-loop");
        const double* vf = voltage_of(line.bus_from);
        const double* vt = voltage_of(line.bus_to);
        if (!vf || !vt) {
            flag(line.id, "unknown-bus");
        } else if (!same_voltage(*vf, line.voltage_kv) || !same_voltage(*vt, line.voltage_kv)) {
            flag(line.id, "voltage-mismatch");
        }
        if (!(line.s_nom > 0.0)) flag(line.id, "s_nom-nonpositive");
        if (!(line.x > 0.0)) flag(line.id, "x-nonpositive");
        if (!(line.length_km >= 0.0)) flag(line.id, "length-negative");
        if (!(line.cost_per_mva_km >= 0.0)) flag(line.id, "cost-negative");
    }
    for (const auto& tr : network.transformers) {
        if (!branch_ids.insert(tr.id).second) flag(tr.id, "duplicate-id");
        if (tr.bus_hv == tr.bus_lv) flag(tr.id, "self-loop");
        const double* vh = voltage_of(tr.bus_hv);
        const double* vl = voltage_of(tr.bus_lv);
        if (!vh || !vl) {
            flag(tr.id, "unknown-bus");
        } else if (!(*vh > *vl) || same_voltage(*vh, *vl)) {
            flag(tr.id, "hv-not-above-lv");
        }
        if (!(tr.s_nom > 0.0)) flag(tr.id, "s_nom-nonpositive");
        if (!(tr.x > 0.0)) flag(tr.id, "x-nonpositive");
        if (!(tr.cost_per_mva >= 0.0)) flag(tr.id, "cost-negative");
    }

    const std::size_t n_snap = network.snapshots.size();
    if (network.snapshots.weights.size() != n_snap) flag("snapshots", "weight-count-mismatch");
    for (double w : network.snapshots.weights) {
        if (!(w >= 0.0)) {
            flag("snapshots", "weight-negative");
            break;
        }
    }

    std::unordered_set<std::string> device_ids;
    for (const auto& gen : network.generators) {
        if (!device_ids.insert(gen.id).second) flag(gen.id, "duplicate-id");
        if (!voltage_of(gen.bus)) flag(gen.id, "unknown-bus");
        if (!(gen.p_nom >= 0.0)) flag(gen.id, "p_nom-negative");
        if (gen.profile.size() != n_snap) flag(gen.id, "profile-length");
        if (std::any_of(gen.profile.begin(), gen.profile.end(), [](double cf) { return !(cf >= 0.0 && cf <= 1.0); }))
            flag(gen.id, "capacity-factor-out-of-range");
    }
    for (const auto& load : network.loads) {
        if (!device_ids.insert(load.id).second) flag(load.id, "duplicate-id");
        if (!voltage_of(load.bus)) flag(load.id, "unknown-bus");
        if (load.profile.size() != n_snap) flag(load.id, "profile-length");
        if (std::any_of(load.profile.begin(), load.profile.end(), [](double p) { return !(p >= 0.0); }))
            flag(load.id, "demand-negative");
    }

    // Connectivity only makes sense once all branch endpoints resolve.
    const bool endpoints_ok = std::none_of(out.begin(), out.end(), [](const Violation& v) {
        return v.rule == "unknown-bus" || v.rule == "duplicate-id";
    });
    if (!options.allow_islands && endpoints_ok && !network.buses.empty()) {
        Adjacency adjacency(network);
        const auto labels = adjacency.component_labels();
        std::vector<bool> reported(adjacency.component_count(), false);
        reported[0] = true;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (!reported[labels[i]]) {
                reported[labels[i]] = true;
                flag(network.buses[i].id, "disconnected");
            }
        }
    }

    std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        return std::tie(a.element_id, a.rule) < std::tie(b.element_id, b.rule);
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void require_valid(const Network& network, const ValidateOptions& options) {
    const auto violations = validate(network, options);
    if (violations.empty()) return;
    std::ostringstream msg;
    msg << "network validation failed:";
    for (const auto& v : violations) msg << ' ' << v.element_id << " (" << v.rule << ")";
    throw DataError(msg.str());
}

double per_unit_reactance(double x_ohm, double voltage_kv, double s_base) {
    if (!(voltage_kv > 0.0)) throw std::domain_error("per_unit_reactance: voltage must be positive");
    if (!(s_base > 0.0)) throw std::domain_error("per_unit_reactance: s_base must be positive");
    if (!(x_ohm >= 0.0)) throw std::domain_error("per_unit_reactance: reactance must be nonnegative");
    return x_ohm * s_base / (voltage_kv * voltage_kv);
}

std::string_view to_string(BranchKind kind) {
    return kind == BranchKind::Line ? "line" : "transformer";
}

std::vector<BranchRef> branches(const Network& network) {
    std::vector<BranchRef> out;
    out.reserve(network.lines.size() + network.transformers.size());
    for (std::size_t i = 0; i < network.lines.size(); ++i) {
        const auto& l = network.lines[i];
        out.push_back({BranchKind::Line, i, l.id, l.bus_from, l.bus_to, l.s_nom,
                       per_unit_reactance(l.x, l.voltage_kv, network.s_base), l.expandable});
    }
    for (std::size_t i = 0; i < network.transformers.size(); ++i) {
        const auto& t = network.transformers[i];
        const Bus* hv = network.find_bus(t.bus_hv);
        const double kv = hv ? hv->voltage_kv : 0.0;
        out.push_back({BranchKind::Transformer, i, t.id, t.bus_hv, t.bus_lv, t.s_nom,
                       per_unit_reactance(t.x, kv, network.s_base), t.expandable});
    }
    return out;
}

Adjacency::Adjacency(const Network& network) : neighbors_(network.buses.size()) {
    const auto index = network.bus_index();
    auto add = [&](const std::string& a, const std::string& b, std::size_t branch) {
        auto ia = index.find(a);
        auto ib = index.find(b);
        if (ia == index.end() || ib == index.end()) return;
        neighbors_[ia->second].push_back(edges_.size());
        if (ib->second != ia->second) neighbors_[ib->second].push_back(edges_.size());
        edges_.push_back({ia->second, ib->second, branch});
    };
    std::size_t branch = 0;
    for (const auto& l : network.lines) add(l.bus_from, l.bus_to, branch++);
    for (const auto& t : network.transformers) add(t.bus_hv, t.bus_lv, branch++);
}

std::vector<std::size_t> Adjacency::neighbors(std::size_t bus) const {
    std::vector<std::size_t> out;
    for (std::size_t e : neighbors_[bus]) out.push_back(edges_[e].from == bus ? edges_[e].to : edges_[e].from);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::size_t> Adjacency::component_labels() const {
    constexpr auto unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> label(node_count(), unset);
    std::size_t next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < node_count(); ++start) {
        if (label[start] != unset) continue;
        label[start] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t e : neighbors_[u]) {
                const std::size_t v = edges_[e].from == u ? edges_[e].to : edges_[e].from;
                if (label[v] == unset) {
                    label[v] = next;
                    stack.push_back(v);
                }
            }
        }
        ++next;
    }
    return label;
}

std::size_t Adjacency::component_count() const {
    const auto labels = component_labels();
    return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

IslandPruning keep_largest_component(const Network& network) {
    IslandPruning result{network, {}};
    Adjacency adjacency(network);
    const auto labels = adjacency.component_labels();
    const std::size_t count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    if (count <= 1) return result;

    std::vector<std::size_t> sizes(count, 0);
    for (std::size_t l : labels) ++sizes[l];
    const std::size_t keep = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

    std::unordered_set<std::string> kept;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == keep) kept.insert(network.buses[i].id);

    Network& out = result.network;
    auto dropped = [&](const std::string& bus) { return !kept.contains(bus); };
    const std::size_t n_before = out.buses.size();
    std::erase_if(out.buses, [&](const Bus& b) { return dropped(b.id); });
    std::erase_if(out.lines, [&](const Line& l) { return dropped(l.bus_from); });
    std::erase_if(out.transformers, [&](const Transformer& t) { return dropped(t.bus_hv); });
    std::erase_if(out.generators, [&](const Generator& g) { return dropped(g.bus); });
    std::erase_if(out.loads, [&](const Load& l) { return dropped(l.bus); });

    std::ostringstream msg;
    msg << "dropped " << (count - 1) << " island(s) with " << (n_before - out.buses.size())
        << " bus(es); kept component of " << out.buses.size() << " buses";
    result.warnings.push_back(msg.str());
    return result;
}

}  // namespace gridagg

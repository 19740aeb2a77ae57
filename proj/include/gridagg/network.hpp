#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gridagg {

struct Bus {
    std::string id;
    double voltage_kv = 0.0;
    double lat = 0.0;
    double lon = 0.0;

    bool operator==(const Bus&) const = default;
};

struct Line {
    std::string id;
    std::string bus_from;
    std::string bus_to;
    double voltage_kv = 0.0;
    double s_nom = 0.0;            // MVA
    double x = 0.0;                // ohm
    double length_km = 0.0;
    double cost_per_mva_km = 0.0;  // EUR/(MVA km)
    bool expandable = false;

    bool operator==(const Line&) const = default;
};

/// Reactance is in ohm referred to the high-voltage side.
struct Transformer {
    std::string id;
    std::string bus_hv;
    std::string bus_lv;
    double s_nom = 0.0;         // MVA
    double x = 0.0;             // ohm
    double cost_per_mva = 0.0;  // EUR/MVA
    bool expandable = false;

    bool operator==(const Transformer&) const = default;
};

struct Generator {
    std::string id;
    std::string bus;
    double p_nom = 0.0;          // MW
    double marginal_cost = 0.0;  // EUR/MWh
    std::vector<double> profile; // capacity factor per snapshot

    bool operator==(const Generator&) const = default;
};

struct Load {
    std::string id;
    std::string bus;
    std::vector<double> profile;  // MW per snapshot

    bool operator==(const Load&) const = default;
};

struct SnapshotSet {
    std::vector<std::string> labels;
    std::vector<double> weights;  // hours represented by each snapshot

    std::size_t size() const { return labels.size(); }
    double total_hours() const;

    bool operator==(const SnapshotSet&) const = default;
};

/// Multi-voltage transmission network. Treated as an immutable value once
/// built; every pipeline stage produces a new Network.
struct Network {
    std::set<double> voltage_levels;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Transformer> transformers;
    std::vector<Generator> generators;
    std::vector<Load> loads;
    SnapshotSet snapshots;
    double s_base = 100.0;  // MVA

    bool operator==(const Network&) const = default;

    std::unordered_map<std::string, std::size_t> bus_index() const;
    const Bus* find_bus(std::string_view id) const;
};

struct Violation {
    std::string element_id;
    std::string rule;

    bool operator==(const Violation&) const = default;
};

struct ValidateOptions {
    bool allow_islands = false;
};

/// Checks every type invariant and cross-reference. Violations are sorted
/// by (element id, rule) so the result does not depend on collection order.
std::vector<Violation> validate(const Network& network, const ValidateOptions& options = {});

/// Throws DataError listing the violations if the network is not valid.
void require_valid(const Network& network, const ValidateOptions& options = {});

/// x_ohm * s_base / voltage_kv^2. Throws std::domain_error on nonpositive
/// voltage or base, or negative reactance.
double per_unit_reactance(double x_ohm, double voltage_kv, double s_base);

enum class BranchKind { Line, Transformer };

std::string_view to_string(BranchKind kind);

/// Uniform view over lines and transformers, lines first, in network order.
struct BranchRef {
    BranchKind kind = BranchKind::Line;
    std::size_t index = 0;  // into Network::lines or Network::transformers
    std::string id;
    std::string bus_from;   // hv side for transformers
    std::string bus_to;
    double s_nom = 0.0;
    double x_pu = 0.0;
    bool expandable = false;
};

std::vector<BranchRef> branches(const Network& network);

/// Undirected multigraph over the buses with one edge per branch.
class Adjacency {
public:
    struct Edge {
        std::size_t from = 0;
        std::size_t to = 0;
        std::size_t branch = 0;  // index into branches(network)
    };

    explicit Adjacency(const Network& network);

    std::size_t node_count() const { return neighbors_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Edge indices incident to a bus.
    const std::vector<std::size_t>& incident(std::size_t bus) const { return neighbors_[bus]; }
    std::vector<std::size_t> neighbors(std::size_t bus) const;

    /// Component label per bus; components numbered in order of their
    /// lowest-index bus.
    std::vector<std::size_t> component_labels() const;
    std::size_t component_count() const;

private:
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> neighbors_;
};

struct IslandPruning {
    Network network;
    std::vector<std::string> warnings;
};

/// Keeps the largest connected component (ties: the one holding the lowest
/// bus index) and drops every element attached to the rest.
IslandPruning keep_largest_component(const Network& network);

}  // namespace gridagg

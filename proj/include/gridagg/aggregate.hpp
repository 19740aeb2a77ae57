#pragma once

#include "gridagg/network.hpp"
#include "gridagg/partition.hpp"

#include <filesystem>
#include <span>

namespace gridagg {

/// Electrical and economic parameters of one branch for merging. Reactance
/// units are the caller's choice but must agree across the members.
struct BranchParams {
    double s_nom = 0.0;
    double x = 0.0;
    double length_km = 0.0;
    double cost_rate = 0.0;  // EUR/(MVA km) for lines, EUR/MVA for transformers
    bool expandable = false;

    bool operator==(const BranchParams&) const = default;
};

/// Parallel equivalent: capacities add, admittances add, length and cost
/// rate are capacity-weighted means, expandable if any member is.
/// Throws std::invalid_argument on an empty list.
BranchParams merge_parallel(std::span<const BranchParams> members);

struct AggregationReport {
    std::size_t cluster_count = 0;
    std::size_t line_count = 0;
    std::size_t transformer_count = 0;
    std::size_t dropped_intra_cluster = 0;
    std::size_t dropped_candidates = 0;   // expandable branches lost inside clusters
    std::size_t candidate_carryover = 0;  // expandable branches in the output
    std::size_t merged_groups = 0;        // output branches built from >1 member

    bool operator==(const AggregationReport&) const = default;
};

struct AggregationResult {
    Network network;
    AggregationReport report;
};

/// Copperplate aggregation. Each cluster becomes one bus at the centroid of
/// its members; intra-cluster branches are dropped; branches between two
/// clusters merge into one. In VA mode a merge across voltage levels is a
/// transformer. In VU mode every output bus sits on one uniform level (the
/// level with the most line capacity) and every merged branch is a line.
AggregationResult aggregate_network(const Network& network, const PartitionMapping& mapping);

/// Bus id used for a cluster in the aggregated network.
std::string cluster_bus_id(int cluster);

void write_aggregation_report(const AggregationReport& report, const std::filesystem::path& path);

}  // namespace gridagg

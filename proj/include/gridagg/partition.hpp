#pragma once

#include "gridagg/geo.hpp"
#include "gridagg/network.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gridagg {

/// Symmetric pairwise distances (km) over buses in sorted-id order.
struct DistanceMatrix {
    std::vector<std::string> node_order;
    std::vector<double> d;            // row-major n x n
    std::optional<double> sentinel;   // set once voltage-masked

    std::size_t size() const { return node_order.size(); }
    double operator()(std::size_t i, std::size_t j) const { return d[i * size() + j]; }
    double& operator()(std::size_t i, std::size_t j) { return d[i * size() + j]; }
};

DistanceMatrix build_distance_matrix(const Network& network);

/// Replaces every entry between buses of different voltage levels with a
/// finite sentinel of 10 x (largest entry of the unmasked matrix) + 1 km.
/// Same-level entries are untouched. A matrix that already carries a
/// sentinel is returned as is.
DistanceMatrix mask_voltage_aware(const DistanceMatrix& dm, const Network& network);

/// Debug export: header row of ids, one row per node.
void write_distance_matrix(const DistanceMatrix& dm, const std::filesystem::path& path);

/// Clusters per voltage level, proportional to level size with
/// largest-remainder rounding, each level getting between 1 and |N_v|.
/// Throws std::invalid_argument if k < level count or k > bus count.
std::map<double, std::size_t> allocate_clusters_per_level(const Network& network, std::size_t k);

enum class PartitionMode { VoltageUnaware, VoltageAware };

std::string_view to_string(PartitionMode mode);
PartitionMode parse_partition_mode(std::string_view text);

struct PartitionMapping {
    PartitionMode mode = PartitionMode::VoltageUnaware;
    std::map<std::string, int> assignment;  // bus id -> cluster id
    std::map<int, double> cluster_voltage;  // VA only
    std::map<int, std::string> medoids;

    std::size_t cluster_count() const;
    std::vector<std::vector<std::string>> clusters() const;  // members per cluster id, sorted
};

/// Result of a PAM run on an index-addressed distance matrix.
struct PamResult {
    std::vector<std::size_t> medoids;   // node indices, ascending
    std::vector<std::size_t> label;     // node -> position in medoids
    double cost = 0.0;                  // sum of distances to assigned medoid
    std::vector<double> cost_history;   // after BUILD, then after each SWAP
};

/// PAM: greedy BUILD followed by best-improvement SWAP until no single swap
/// lowers the cost. All ties go to the lowest node index, so the result is
/// fully determined by the matrix.
PamResult pam(const DistanceMatrix& dm, std::size_t k);

/// Sum over nodes of the distance to the nearest of the given medoids.
double medoid_cost(const DistanceMatrix& dm, const std::vector<std::size_t>& medoids);

/// PAM run wrapped as a mapping. Clusters are numbered by ascending medoid
/// index. The seed is accepted for interface stability; PAM with BUILD
/// initialisation and lowest-index tie-breaking consumes no randomness.
PartitionMapping kmedoids(const DistanceMatrix& dm, std::size_t k, std::uint64_t seed);

PartitionMapping partition_vu(const Network& network, std::size_t k, std::uint64_t seed);

/// Independent PAM runs per voltage level (highest voltage first) with the
/// cluster counts from allocate_clusters_per_level.
PartitionMapping partition_va(const Network& network, std::size_t k, std::uint64_t seed);

/// bus_id,cluster_id,cluster_voltage_kv (empty for VU).
void write_mapping(const PartitionMapping& mapping, const std::filesystem::path& path);
PartitionMapping read_mapping(const std::filesystem::path& path);

}  // namespace gridagg

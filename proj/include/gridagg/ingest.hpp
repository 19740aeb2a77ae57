#pragma once

#include "gridagg/network.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gridagg {

struct LoadOptions {
    bool allow_islands = false;  // keep the largest component instead of rejecting
};

struct LoadedNetwork {
    Network network;
    std::vector<std::string> warnings;
};

/// Reads the CSV directory layout (buses.csv, lines.csv, ...). Throws
/// DataError naming the offending file/row, or listing validation failures.
LoadedNetwork load_network(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Writes the CSV directory layout, creating the directory if needed.
/// Numbers are written with six significant figures.
void save_network(const Network& network, const std::filesystem::path& dir);

struct SubstationRecord {
    std::string name;
    double lat = 0.0;
    double lon = 0.0;
    double hv_kv = 0.0;
    double lv_kv = 0.0;
    double s_nom = 0.0;  // MVA
    double x = 0.0;      // ohm, hv side
};

std::vector<SubstationRecord> load_substations(const std::filesystem::path& csv_path);

struct MatchOptions {
    double max_dist_km = 5.0;
    double name_weight = 0.4;
    double dist_weight = 0.6;
    double threshold = 0.5;
};

struct MatchResult {
    std::string transformer_id;
    std::vector<std::size_t> record_indices;  // ascending
    double score = 0.0;                       // best score among candidate records
    bool matched = false;
};

/// Token-set Jaccard similarity of two names after case folding and
/// replacing punctuation with whitespace. Two empty names score 0.
double name_similarity(const std::string& a, const std::string& b);

/// dist_weight * (1 - d / max_dist) + name_weight * similarity.
double match_score(double distance_km, double similarity, const MatchOptions& options);

/// Matches each transformer to every record with the same voltage pair,
/// within max_dist_km of the transformer's hv bus, scoring at least the
/// threshold. The transformer name is the better of its own id and its hv
/// bus id. One result per transformer, in network order.
std::vector<MatchResult> match_transformers(const Network& network, const std::vector<SubstationRecord>& records,
                                            const MatchOptions& options = {});

struct RepairResult {
    Network network;
    std::vector<std::string> warnings;
};

/// Matched transformers take the summed capacity and parallel reactance of
/// their records; unmatched transformers take the median capacity and
/// reactance of the matched records sharing their voltage pair.
RepairResult repair_transformer_parameters(const Network& network, const std::vector<MatchResult>& matches,
                                           const std::vector<SubstationRecord>& records);

double median(std::vector<double> values);

}  // namespace gridagg

#pragma once

#include "gridagg/expansion.hpp"
#include "gridagg/network.hpp"
#include "gridagg/partition.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gridagg {

/// Investment metrics of one expansion run, the inputs of a deviation table.
struct RunMetrics {
    std::string label;
    std::size_t k = 0;  // 0 for the full grid
    double line_capacity_length_gvakm = 0.0;
    double line_cost_eur = 0.0;
    double transformer_capacity_gva = 0.0;
    double transformer_cost_eur = 0.0;
    double operational_cost_eur = 0.0;
    LpStats stats;
};

RunMetrics run_metrics(std::string label, std::size_t k, const ExpansionResult& result, const Network& network);

/// 100 * (agg - fg) / fg. Both zero gives 0; fg zero with agg nonzero has
/// no defined deviation and gives nullopt.
std::optional<double> deviation_percent(double agg, double fg);

struct DeviationRow {
    RunMetrics run;
    std::optional<double> line_deviation_pct;
    std::optional<double> transformer_deviation_pct;
    bool is_reference = false;
};

/// Reference row first (no deviations), then one row per run in order.
std::vector<DeviationRow> deviation_table(const RunMetrics& fg, const std::vector<RunMetrics>& runs);

/// "-61.9", "0.0" or "n/a".
std::string format_deviation(const std::optional<double>& pct);

/// label,k,line_capacity_length_gvakm,line_cost_eur,line_deviation_pct,
/// transformer_capacity_gva,transformer_cost_eur,transformer_deviation_pct,
/// operational_cost_eur,lp_rows,lp_cols,lp_nonzeros,lp_iterations
void write_summary(const std::vector<DeviationRow>& table, const std::filesystem::path& path);
std::string deviation_markdown(const std::vector<DeviationRow>& table);
void write_deviation_markdown(const std::vector<DeviationRow>& table, const std::filesystem::path& path);

struct LevelSummary {
    std::size_t buses = 0;
    std::size_t lines = 0;
    std::size_t transformers = 0;  // counted at their high-voltage side
    double line_length_km = 0.0;
};

struct TopologySummary {
    std::size_t buses = 0;
    std::size_t lines = 0;
    std::size_t transformers = 0;
    std::size_t generators = 0;
    std::size_t loads = 0;
    double line_length_km = 0.0;
    std::map<double, LevelSummary> levels;
    std::vector<int> noncontiguous_clusters;  // mapping given: clusters whose members are not connected
};

TopologySummary topology_summary(const Network& network, const PartitionMapping* mapping = nullptr);

/// metric,value rows followed by per-level rows level_<kv>_<metric>.
void write_topology_summary(const TopologySummary& summary, const std::filesystem::path& path);

/// RFC 7946 FeatureCollection: buses as Points, lines and transformers as
/// LineStrings from the first to the second bus, coordinates lon-first.
std::string geojson(const Network& network, const ExpansionResult* result = nullptr);
void export_geojson(const Network& network, const ExpansionResult* result, const std::filesystem::path& path);

}  // namespace gridagg

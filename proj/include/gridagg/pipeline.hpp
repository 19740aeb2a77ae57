#pragma once

#include "gridagg/expansion.hpp"
#include "gridagg/ingest.hpp"
#include "gridagg/partition.hpp"
#include "gridagg/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridagg {

enum class Stage { Ingest, Repair, Temporal, Screen, Partition, Aggregate, Expand, Report };

inline constexpr Stage kStageOrder[] = {Stage::Ingest,    Stage::Repair,    Stage::Temporal, Stage::Screen,
                                        Stage::Partition, Stage::Aggregate, Stage::Expand,   Stage::Report};

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);

/// Error raised inside a stage; the message is prefixed with the stage name
/// and exit_code follows the error category (2 config, 3 data, 4 solver).
class StageError : public std::runtime_error {
public:
    StageError(Stage stage, int exit_code, const std::string& message);
    Stage stage() const { return stage_; }
    int exit_code() const { return exit_code_; }

private:
    Stage stage_;
    int exit_code_;
};

struct ScenarioSpec {
    PartitionMode mode = PartitionMode::VoltageAware;
    std::size_t k = 0;
    std::string label() const;  // "va_k5"
};

struct PipelineConfig {
    std::filesystem::path network_dir;
    std::filesystem::path out_dir;
    std::vector<Stage> stages;  // in pipeline order
    bool allow_islands = false;
    std::size_t threads = 0;    // 0: one job per scenario

    std::optional<std::filesystem::path> substations;
    MatchOptions match;

    std::size_t temporal_periods = 0;  // 0 keeps every snapshot
    std::size_t period_length = 24;
    std::uint64_t temporal_seed = 0;

    double screen_all_threshold = 0.70;
    double screen_any_threshold = 0.90;

    std::vector<std::size_t> k_values;
    std::vector<PartitionMode> modes;
    std::uint64_t seed = 0;

    CostTable costs = CostTable::defaults();
    bool export_mps = false;

    std::string source_text;  // raw config file, hashed into the manifest

    bool enabled(Stage stage) const;
    std::vector<ScenarioSpec> scenarios() const;
};

/// Parses an INI-style file ([run], [repair], [temporal], [screen],
/// [partition], [costs], [expansion]). Relative paths resolve against the
/// file's directory. Throws ConfigError.
PipelineConfig parse_config(const std::filesystem::path& path);
PipelineConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir);

/// Cost table from a [costs]/[expansion] section of a config file; the
/// defaults when path is empty.
CostTable load_cost_table(const std::filesystem::path& path);

struct PipelineRun {
    std::vector<std::string> scenario_labels;
    std::vector<DeviationRow> table;
    std::filesystem::path manifest;
};

/// Runs the enabled stages. Outputs go to <out>/<scenario>/<stage>/, with
/// the full grid as scenario "fg", the comparison in <out>/report/, and
/// <out>/manifest.json. Throws StageError.
PipelineRun run_pipeline(const PipelineConfig& config);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

/// Metrics of one expansion run as JSON, the interchange between the
/// expand and report subcommands.
void write_metrics(const RunMetrics& metrics, const std::filesystem::path& path);
RunMetrics read_metrics(const std::filesystem::path& path);

}  // namespace gridagg

#include "gridagg/aggregate.hpp"
#include "gridagg/errors.hpp"
#include "gridagg/ingest.hpp"
#include "gridagg/partition.hpp"
#include "gridagg/pipeline.hpp"
#include "gridagg/powerflow.hpp"
#include "gridagg/report.hpp"
#include "gridagg/temporal.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace gridagg;

namespace {

struct Args {
    fs::path network;
    fs::path out;
    fs::path config;
    fs::path mapping;
    fs::path candidates;
    fs::path substations;
    fs::path export_mps;
    fs::path fg;
    std::vector<fs::path> runs;
    std::size_t k = 0;
    std::size_t period_length = 24;
    std::string mode = "va";
    std::uint64_t seed = 0;
    bool allow_islands = false;
    std::string label;
};

Network load(const Args& a) {
    LoadedNetwork loaded = load_network(a.network, {a.allow_islands});
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    return loaded.network;
}

void cmd_ingest(const Args& a) {
    save_network(load(a), a.out / "network");
}

void cmd_repair(const Args& a) {
    const Network net = load(a);
    const auto records = load_substations(a.substations);
    const auto matches = match_transformers(net, records);
    RepairResult repaired = repair_transformer_parameters(net, matches, records);
    for (const auto& w : repaired.warnings) std::cerr << "warning: " << w << "\n";
    save_network(repaired.network, a.out / "network");
}

void cmd_temporal(const Args& a) {
    const Network net = load(a);
    const auto clustering = cluster_periods(build_feature_matrix(net, a.period_length), a.k, a.seed, a.period_length);
    save_network(apply_clustering(net, clustering), a.out / "network");
}

void cmd_screen(const Args& a) {
    const Network net = load(a);
    const DispatchResult dispatch = solve_dispatch(net);
    const CandidateSet candidates = screen_candidates(loading(dispatch, net), dispatch.branch_ids);
    fs::create_directories(a.out);
    write_candidates(candidates, a.out / "candidates.csv");
    save_network(apply_candidates(net, candidates), a.out / "network");
    std::cout << candidates.count() << " of " << candidates.branch_ids.size() << " branches are candidates\n";
}

void cmd_partition(const Args& a) {
    const Network net = load(a);
    const PartitionMode mode = parse_partition_mode(a.mode);
    const PartitionMapping mapping =
        mode == PartitionMode::VoltageAware ? partition_va(net, a.k, a.seed) : partition_vu(net, a.k, a.seed);
    fs::create_directories(a.out);
    write_mapping(mapping, a.out / "mapping.csv");
}

void cmd_aggregate(const Args& a) {
    const Network net = load(a);
    const fs::path mapping_path = a.mapping.empty() ? a.network.parent_path() / "mapping.csv" : a.mapping;
    const AggregationResult agg = aggregate_network(net, read_mapping(mapping_path));
    save_network(agg.network, a.out / "network");
    write_aggregation_report(agg.report, a.out / "aggregation_report.csv");
    write_topology_summary(topology_summary(agg.network), a.out / "topology.csv");
}

void cmd_expand(const Args& a) {
    const Network net = load(a);
    const CostTable costs = load_cost_table(a.config);
    const CandidateSet candidates = a.candidates.empty() ? candidates_from_network(net) : read_candidates(a.candidates);
    const ExpansionResult result = solve_tep(net, candidates, costs, {}, a.export_mps);
    fs::create_directories(a.out);
    write_expansion_result(result, a.out / "expansion_result.csv");
    export_geojson(net, &result, a.out / "map.geojson");
    write_metrics(run_metrics(a.label.empty() ? "FG" : a.label, a.k, result, net), a.out / "metrics.json");
    std::cout << "objective " << result.objective << " EUR, lines " << result.line_investment
              << " EUR/yr, transformers " << result.transformer_investment << " EUR/yr\n";
}

fs::path metrics_path(const fs::path& p) { return fs::is_directory(p) ? p / "metrics.json" : p; }

void cmd_report(const Args& a) {
    const RunMetrics fg = read_metrics(metrics_path(a.fg));
    std::vector<RunMetrics> runs;
    for (const auto& r : a.runs) runs.push_back(read_metrics(metrics_path(r)));
    const auto table = deviation_table(fg, runs);
    fs::create_directories(a.out);
    write_summary(table, a.out / "summary.csv");
    write_deviation_markdown(table, a.out / "deviation.md");
    std::cout << deviation_markdown(table);
}

void cmd_run(const Args& a) {
    PipelineConfig cfg = parse_config(a.config);
    if (!a.out.empty()) cfg.out_dir = a.out;
    const PipelineRun run = run_pipeline(cfg);
    if (!run.table.empty()) std::cout << deviation_markdown(run.table);
    std::cout << "manifest: " << run.manifest.string() << "\n";
}

int exit_code_for(const std::exception& e) {
    if (auto* s = dynamic_cast<const StageError*>(&e)) return s->exit_code();
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e)) return 2;
    if (dynamic_cast<const SolverError*>(&e)) return 4;
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Voltage-aware grid partitioning, aggregation and expansion planning"};
    app.require_subcommand(1);
    Args a;

    auto network_opt = [&](CLI::App* cmd) {
        cmd->add_option("--network", a.network, "network CSV directory")->required();
        cmd->add_flag("--allow-islands", a.allow_islands, "keep only the largest connected component");
    };
    auto out_opt = [&](CLI::App* cmd) { cmd->add_option("--out", a.out, "output directory")->required(); };

    std::string stage_name;
    auto add = [&](const std::string& name, const std::string& help) {
        CLI::App* cmd = app.add_subcommand(name, help);
        cmd->callback([&stage_name, name] { stage_name = name; });
        return cmd;
    };

    auto* ingest = add("ingest", "validate a network directory and write it back normalized");
    network_opt(ingest);
    out_opt(ingest);

    auto* repair = add("repair", "match transformers to substation records and repair their parameters");
    network_opt(repair);
    out_opt(repair);
    repair->add_option("--substations", a.substations, "substation records CSV")->required();

    auto* temporal = add("temporal", "reduce snapshots to k representative periods");
    network_opt(temporal);
    out_opt(temporal);
    temporal->add_option("--k", a.k, "number of representative periods")->required();
    temporal->add_option("--period-length", a.period_length, "snapshots per period");
    temporal->add_option("--seed", a.seed, "k-means seed");

    auto* screen = add("screen", "flag congested branches as investment candidates");
    network_opt(screen);
    out_opt(screen);

    auto* partition = add("partition", "cluster buses with k-medoids");
    network_opt(partition);
    out_opt(partition);
    partition->add_option("--k", a.k, "number of clusters")->required();
    partition->add_option("--mode", a.mode, "vu or va")->check(CLI::IsMember({"vu", "va"}));
    partition->add_option("--seed", a.seed, "clustering seed");

    auto* aggregate = add("aggregate", "collapse each cluster into one bus");
    network_opt(aggregate);
    out_opt(aggregate);
    aggregate->add_option("--mapping", a.mapping, "mapping CSV from the partition step");

    auto* expand = add("expand", "solve the continuous expansion LP");
    network_opt(expand);
    out_opt(expand);
    expand->add_option("--candidates", a.candidates, "candidates CSV (default: expandable flags)");
    expand->add_option("--config", a.config, "config file with [costs] and [expansion]");
    expand->add_option("--export-mps", a.export_mps, "also write the LP in MPS format");
    expand->add_option("--label", a.label, "run label for the report");
    expand->add_option("--k", a.k, "cluster count recorded in the metrics");

    auto* report = add("report", "compare expansion runs against the full grid");
    out_opt(report);
    report->add_option("--fg", a.fg, "full-grid expand directory or metrics.json")->required();
    report->add_option("--run", a.runs, "aggregated expand directories or metrics.json");

    auto* run = add("run", "run the configured pipeline");
    run->add_option("--config", a.config, "pipeline config file")->required();
    run->add_option("--out", a.out, "override [run] out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (stage_name == "ingest") cmd_ingest(a);
        else if (stage_name == "repair") cmd_repair(a);
        else if (stage_name == "temporal") cmd_temporal(a);
        else if (stage_name == "screen") cmd_screen(a);
        else if (stage_name == "partition") cmd_partition(a);
        else if (stage_name == "aggregate") cmd_aggregate(a);
        else if (stage_name == "expand") cmd_expand(a);
        else if (stage_name == "report") cmd_report(a);
        else if (stage_name == "run") cmd_run(a);
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        const std::string where = stage_name == "run" ? "config" : stage_name;
        std::cerr << "error: " << where << ": " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 0;
}

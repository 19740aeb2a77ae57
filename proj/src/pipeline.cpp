#include "gridagg/pipeline.hpp"

#include "gridagg/aggregate.hpp"
#include "gridagg/csv.hpp"
#include "gridagg/errors.hpp"
#include "gridagg/powerflow.hpp"
#include "gridagg/temporal.hpp"

#include "json.hpp"

#include <Eigen/Core>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>

namespace gridagg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + text + "'");
}

fs::path resolve(const fs::path& base, const std::string& text) {
    fs::path p(trim(text));
    return p.is_absolute() ? p : base / p;
}

void apply_cost_key(CostTable& costs, const std::string& key, const std::string& value) {
    const std::string full = "costs." + key;
    auto level = [&](std::string_view prefix) { return parse_double(full, key.substr(prefix.size())); };
    if (key == "line_default") {
        costs.default_line_cost_per_mva_km = parse_double(full, value);
    } else if (key == "transformer_default") {
        costs.default_transformer_cost_per_mva = parse_double(full, value);
    } else if (key.starts_with("line_")) {
        costs.line_cost_per_mva_km[level("line_")] = parse_double(full, value);
    } else if (key.starts_with("transformer_")) {
        costs.transformer_cost_per_mva[level("transformer_")] = parse_double(full, value);
    } else {
        throw ConfigError("unknown key '" + full + "'");
    }
}

void apply_expansion_key(PipelineConfig* cfg, CostTable& costs, const std::string& key, const std::string& value) {
    const std::string full = "expansion." + key;
    if (key == "annuity_rate") {
        costs.annuity_rate = parse_double(full, value);
    } else if (key == "lifetime_years") {
        costs.lifetime_years = parse_double(full, value);
    } else if (key == "export_mps" && cfg) {
        cfg->export_mps = parse_bool(full, value);
    } else if (key != "export_mps") {
        throw ConfigError("unknown key '" + full + "'");
    }
}

boost::property_tree::ptree read_ini_text(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream is(text);
    try {
        boost::property_tree::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("malformed config at line " + std::to_string(e.line()) + ": " + e.message());
    }
    return tree;
}

void check_costs(const CostTable& costs) {
    try {
        costs.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::Ingest: return "ingest";
        case Stage::Repair: return "repair";
        case Stage::Temporal: return "temporal";
        case Stage::Screen: return "screen";
        case Stage::Partition: return "partition";
        case Stage::Aggregate: return "aggregate";
        case Stage::Expand: return "expand";
        case Stage::Report: return "report";
    }
    return "unknown";
}

Stage parse_stage(std::string_view text) {
    for (Stage s : kStageOrder)
        if (to_string(s) == text) return s;
    throw ConfigError("unknown stage '" + std::string(text) + "'");
}

StageError::StageError(Stage stage, int exit_code, const std::string& message)
    : std::runtime_error(std::string(to_string(stage)) + ": " + message), stage_(stage), exit_code_(exit_code) {}

std::string ScenarioSpec::label() const { return std::string(to_string(mode)) + "_k" + std::to_string(k); }

bool PipelineConfig::enabled(Stage stage) const {
    return std::find(stages.begin(), stages.end(), stage) != stages.end();
}

std::vector<ScenarioSpec> PipelineConfig::scenarios() const {
    std::vector<ScenarioSpec> out;
    for (PartitionMode m : modes)
        for (std::size_t k : k_values) out.push_back({m, k});
    return out;
}

PipelineConfig parse_config_text(const std::string& text, const fs::path& base_dir) {
    PipelineConfig cfg;
    cfg.source_text = text;
    cfg.stages.assign(std::begin(kStageOrder), std::end(kStageOrder));
    const auto tree = read_ini_text(text);

    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside of a section");
        for (const auto& [key, node] : body) {
            const std::string value = node.data();
            const std::string full = section + "." + key;
            if (section == "run") {
                if (key == "network") cfg.network_dir = resolve(base_dir, value);
                else if (key == "out") cfg.out_dir = resolve(base_dir, value);
                else if (key == "allow_islands") cfg.allow_islands = parse_bool(full, value);
                else if (key == "threads") cfg.threads = parse_unsigned(full, value);
                else if (key == "stages") {
                    std::set<Stage> chosen;
                    for (const auto& s : split_list(value)) chosen.insert(parse_stage(s));
                    cfg.stages.clear();
                    for (Stage s : kStageOrder)
                        if (chosen.count(s)) cfg.stages.push_back(s);
                } else throw ConfigError("unknown key '" + full + "'");
            } else if (section == "repair") {
                if (key == "substations") cfg.substations = resolve(base_dir, value);
                else if (key == "max_dist_km") cfg.match.max_dist_km = parse_double(full, value);
                else if (key == "name_weight") cfg.match.name_weight = parse_double(full, value);
                else if (key == "dist_weight") cfg.match.dist_weight = parse_double(full, value);
                else if (key == "threshold") cfg.match.threshold = parse_double(full, value);
                else throw ConfigError("unknown key '" + full + "'");
            } else if (section == "temporal") {
                if (key == "periods") cfg.temporal_periods = parse_unsigned(full, value);
                else if (key == "period_length") cfg.period_length = parse_unsigned(full, value);
                else if (key == "seed") cfg.temporal_seed = parse_unsigned(full, value);
                else throw ConfigError("unknown key '" + full + "'");
            } else if (section == "screen") {
                if (key == "all_threshold") cfg.screen_all_threshold = parse_double(full, value);
                else if (key == "any_threshold") cfg.screen_any_threshold = parse_double(full, value);
                else throw ConfigError("unknown key '" + full + "'");
            } else if (section == "partition") {
                if (key == "k") {
                    cfg.k_values.clear();
                    for (const auto& s : split_list(value)) cfg.k_values.push_back(parse_unsigned(full, s));
                } else if (key == "modes") {
                    cfg.modes.clear();
                    for (const auto& s : split_list(value)) {
                        try {
                            cfg.modes.push_back(parse_partition_mode(s));
                        } catch (const std::invalid_argument& e) {
                            throw ConfigError(e.what());
                        }
                    }
                } else if (key == "seed") cfg.seed = parse_unsigned(full, value);
                else throw ConfigError("unknown key '" + full + "'");
            } else if (section == "costs") {
                apply_cost_key(cfg.costs, key, value);
            } else if (section == "expansion") {
                apply_expansion_key(&cfg, cfg.costs, key, value);
            } else {
                throw ConfigError("unknown section [" + section + "]");
            }
        }
    }

    if (cfg.network_dir.empty()) throw ConfigError("[run] network is required");
    if (cfg.out_dir.empty()) throw ConfigError("[run] out is required");
    if (cfg.period_length == 0) throw ConfigError("temporal.period_length must be positive");
    if (cfg.enabled(Stage::Partition) && (cfg.k_values.empty() || cfg.modes.empty()))
        throw ConfigError("partition stage needs [partition] k and modes");
    for (std::size_t k : cfg.k_values)
        if (k == 0) throw ConfigError("partition.k must be positive");
    if (cfg.enabled(Stage::Aggregate) && !cfg.enabled(Stage::Partition))
        throw ConfigError("aggregate stage requires the partition stage");
    if (cfg.enabled(Stage::Report) && !cfg.enabled(Stage::Expand))
        throw ConfigError("report stage requires the expand stage");
    if (!(cfg.screen_all_threshold > 0.0 && cfg.screen_all_threshold <= 1.0 && cfg.screen_any_threshold > 0.0 &&
          cfg.screen_any_threshold <= 1.0))
        throw ConfigError("screen thresholds must lie in (0, 1]");
    check_costs(cfg.costs);
    return cfg;
}

PipelineConfig parse_config(const fs::path& path) {
    return parse_config_text(read_file(path), path.parent_path());
}

CostTable load_cost_table(const fs::path& path) {
    CostTable costs = CostTable::defaults();
    if (path.empty()) return costs;
    const auto tree = read_ini_text(read_file(path));
    for (const auto& [section, body] : tree) {
        for (const auto& [key, node] : body) {
            if (section == "costs") apply_cost_key(costs, key, node.data());
            else if (section == "expansion") apply_expansion_key(nullptr, costs, key, node.data());
        }
    }
    check_costs(costs);
    return costs;
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_metrics(const RunMetrics& m, const fs::path& path) {
    json j = {{"label", m.label},
              {"k", m.k},
              {"line_capacity_length_gvakm", m.line_capacity_length_gvakm},
              {"line_cost_eur", m.line_cost_eur},
              {"transformer_capacity_gva", m.transformer_capacity_gva},
              {"transformer_cost_eur", m.transformer_cost_eur},
              {"operational_cost_eur", m.operational_cost_eur},
              {"lp_rows", m.stats.rows},
              {"lp_cols", m.stats.cols},
              {"lp_nonzeros", m.stats.nonzeros},
              {"lp_iterations", m.stats.iterations},
              {"solve_seconds", m.stats.seconds}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

RunMetrics read_metrics(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    try {
        const json j = json::parse(in);
        RunMetrics m;
        m.label = j.at("label").get<std::string>();
        m.k = j.at("k").get<std::size_t>();
        m.line_capacity_length_gvakm = j.at("line_capacity_length_gvakm").get<double>();
        m.line_cost_eur = j.at("line_cost_eur").get<double>();
        m.transformer_capacity_gva = j.at("transformer_capacity_gva").get<double>();
        m.transformer_cost_eur = j.at("transformer_cost_eur").get<double>();
        m.operational_cost_eur = j.at("operational_cost_eur").get<double>();
        m.stats.rows = j.at("lp_rows").get<std::size_t>();
        m.stats.cols = j.at("lp_cols").get<std::size_t>();
        m.stats.nonzeros = j.at("lp_nonzeros").get<std::size_t>();
        m.stats.iterations = j.at("lp_iterations").get<std::size_t>();
        m.stats.seconds = j.at("solve_seconds").get<double>();
        return m;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

namespace {

template <class F>
auto in_stage(Stage stage, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const ConfigError& e) {
        throw StageError(stage, 2, e.what());
    } catch (const DataError& e) {
        throw StageError(stage, 3, e.what());
    } catch (const SolverError& e) {
        throw StageError(stage, 4, e.what());
    } catch (const std::invalid_argument& e) {
        throw StageError(stage, 2, e.what());
    } catch (const std::exception& e) {
        throw StageError(stage, 3, e.what());
    }
}

void write_lines(const std::vector<std::string>& lines, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& l : lines) out << l << "\n";
}

void write_matches(const std::vector<MatchResult>& matches, const std::vector<SubstationRecord>& records,
                   const fs::path& path) {
    csv::Writer w;
    w.row({"transformer_id", "matched", "score", "records"});
    for (const auto& m : matches) {
        std::string names;
        for (std::size_t i : m.record_indices) names += (names.empty() ? "" : ";") + records[i].name;
        w.row({m.transformer_id, m.matched ? "true" : "false", csv::format_number(m.score), names});
    }
    w.save(path);
}

void write_periods(const PeriodClustering& c, const fs::path& path) {
    csv::Writer w;
    w.row({"period", "cluster", "representative_period", "cluster_weight_hours"});
    for (std::size_t p = 0; p < c.period_count; ++p) {
        const std::size_t cl = c.assignment[p];
        w.row({std::to_string(p), std::to_string(cl), std::to_string(c.representatives[cl]),
               csv::format_number(c.weights[cl])});
    }
    w.save(path);
}

struct ScenarioOutput {
    std::optional<RunMetrics> metrics;
};

RunMetrics expand_and_write(const Network& network, const std::string& label, std::size_t k,
                            const PipelineConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    const CandidateSet candidates = candidates_from_network(network);
    const ExpansionResult result =
        solve_tep(network, candidates, cfg.costs, {}, cfg.export_mps ? dir / "model.mps" : fs::path{});
    write_expansion_result(result, dir / "expansion_result.csv");
    export_geojson(network, &result, dir / "map.geojson");
    RunMetrics m = run_metrics(label, k, result, network);
    write_metrics(m, dir / "metrics.json");
    return m;
}

}  // namespace

PipelineRun run_pipeline(const PipelineConfig& cfg) {
    using clock = std::chrono::steady_clock;
    const auto run_start = clock::now();
    const fs::path fg_dir = cfg.out_dir / "fg";
    json timings = json::object();
    auto timed = [&](Stage s, auto&& body) {
        const auto t0 = clock::now();
        auto r = in_stage(s, body);
        timings[std::string(to_string(s))] = std::chrono::duration<double>(clock::now() - t0).count();
        return r;
    };

    Network net = timed(Stage::Ingest, [&] {
        LoadedNetwork loaded = load_network(cfg.network_dir, {cfg.allow_islands});
        if (cfg.enabled(Stage::Ingest)) {
            const fs::path dir = fg_dir / "ingest";
            save_network(loaded.network, dir / "network");
            write_lines(loaded.warnings, dir / "warnings.txt");
        }
        return loaded.network;
    });

    if (cfg.enabled(Stage::Repair)) {
        net = timed(Stage::Repair, [&] {
            const fs::path dir = fg_dir / "repair";
            fs::create_directories(dir);
            Network out = net;
            std::vector<std::string> warnings;
            if (cfg.substations) {
                const auto records = load_substations(*cfg.substations);
                const auto matches = match_transformers(net, records, cfg.match);
                RepairResult repaired = repair_transformer_parameters(net, matches, records);
                write_matches(matches, records, dir / "matches.csv");
                out = std::move(repaired.network);
                warnings = std::move(repaired.warnings);
            } else {
                warnings.push_back("no substation records configured; transformer parameters unchanged");
            }
            save_network(out, dir / "network");
            write_lines(warnings, dir / "warnings.txt");
            return out;
        });
    }

    if (cfg.enabled(Stage::Temporal) && cfg.temporal_periods > 0) {
        net = timed(Stage::Temporal, [&] {
            const fs::path dir = fg_dir / "temporal";
            const FeatureMatrix features = build_feature_matrix(net, cfg.period_length);
            PeriodClustering clustering =
                cluster_periods(features, cfg.temporal_periods, cfg.temporal_seed, cfg.period_length);
            Network out = apply_clustering(net, clustering);
            save_network(out, dir / "network");
            write_periods(clustering, dir / "periods.csv");
            return out;
        });
    }

    if (cfg.enabled(Stage::Screen)) {
        net = timed(Stage::Screen, [&] {
            const fs::path dir = fg_dir / "screen";
            fs::create_directories(dir);
            const DispatchResult dispatch = solve_dispatch(net);
            const CandidateSet candidates =
                screen_candidates(loading(dispatch, net), dispatch.branch_ids, cfg.screen_all_threshold,
                                  cfg.screen_any_threshold);
            write_candidates(candidates, dir / "candidates.csv");
            Network out = apply_candidates(net, candidates);
            save_network(out, dir / "network");
            return out;
        });
    }

    const auto specs = cfg.scenarios();
    const bool partitioning = cfg.enabled(Stage::Partition);
    const bool expanding = cfg.enabled(Stage::Expand);
    const auto policy = cfg.threads == 1 ? std::launch::deferred : std::launch::async;

    std::future<RunMetrics> fg_job;
    if (expanding) {
        fg_job = std::async(policy, [&] {
            return in_stage(Stage::Expand, [&] { return expand_and_write(net, "FG", 0, cfg, fg_dir / "expand"); });
        });
    }

    std::vector<std::future<ScenarioOutput>> jobs;
    if (partitioning) {
        for (const auto& spec : specs) {
            jobs.push_back(std::async(policy, [&, spec] {
                ScenarioOutput out;
                const fs::path dir = cfg.out_dir / spec.label();
                const PartitionMapping mapping = in_stage(Stage::Partition, [&] {
                    PartitionMapping m = spec.mode == PartitionMode::VoltageAware
                                             ? partition_va(net, spec.k, cfg.seed)
                                             : partition_vu(net, spec.k, cfg.seed);
                    fs::create_directories(dir / "partition");
                    write_mapping(m, dir / "partition" / "mapping.csv");
                    return m;
                });
                if (!cfg.enabled(Stage::Aggregate)) return out;
                const Network aggregated = in_stage(Stage::Aggregate, [&] {
                    const fs::path adir = dir / "aggregate";
                    AggregationResult agg = aggregate_network(net, mapping);
                    save_network(agg.network, adir / "network");
                    write_aggregation_report(agg.report, adir / "aggregation_report.csv");
                    write_topology_summary(topology_summary(agg.network), adir / "topology.csv");
                    write_topology_summary(topology_summary(net, &mapping), adir / "partition_topology.csv");
                    return agg.network;
                });
                if (!expanding) return out;
                out.metrics = in_stage(Stage::Expand, [&] {
                    std::string label = spec.mode == PartitionMode::VoltageAware ? "VA" : "VU";
                    return expand_and_write(aggregated, label, spec.k, cfg, dir / "expand");
                });
                return out;
            }));
        }
    }

    PipelineRun run;
    std::vector<RunMetrics> agg_metrics;
    std::exception_ptr first_error;
    RunMetrics fg_metrics;
    if (expanding) {
        try {
            fg_metrics = fg_job.get();
        } catch (...) {
            first_error = std::current_exception();
        }
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            ScenarioOutput out = jobs[i].get();
            run.scenario_labels.push_back(specs[i].label());
            if (out.metrics) agg_metrics.push_back(*out.metrics);
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);

    if (cfg.enabled(Stage::Report)) {
        run.table = timed(Stage::Report, [&] {
            const fs::path dir = cfg.out_dir / "report";
            fs::create_directories(dir);
            auto table = deviation_table(fg_metrics, agg_metrics);
            write_summary(table, dir / "summary.csv");
            write_deviation_markdown(table, dir / "deviation.md");
            write_topology_summary(topology_summary(net), dir / "topology_fg.csv");
            return table;
        });
    }

    json manifest = {
        {"tool", "gridagg"},
        {"version", kVersion},
        {"config_hash_fnv1a64", fnv1a_hex(cfg.source_text)},
        {"network", cfg.network_dir.string()},
        {"seed", cfg.seed},
        {"temporal_seed", cfg.temporal_seed},
        {"stages", json::array()},
        {"scenarios", run.scenario_labels},
        {"libraries",
         {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                        std::to_string(BOOST_VERSION % 100)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
        {"stage_seconds", timings},
        {"total_seconds", std::chrono::duration<double>(clock::now() - run_start).count()}};
    for (Stage s : cfg.stages) manifest["stages"].push_back(std::string(to_string(s)));
    fs::create_directories(cfg.out_dir);
    run.manifest = cfg.out_dir / "manifest.json";
    std::ofstream out(run.manifest, std::ios::binary);
    out << manifest.dump(2) << "\n";
    return run;
}

}  // namespace gridagg

#include "fixtures.hpp"

#include "gridagg/errors.hpp"
#include "gridagg/pipeline.hpp"

#include <gtest/gtest.h>

#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace gridagg;
using namespace gridagg::testing;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string base_config(const fs::path& out, const std::string& stages, const std::string& extra = "") {
    return "[run]\nnetwork = " + fig1_dir().string() + "\nout = " + out.string() + "\nstages = " + stages +
           "\n[partition]\nk = 5\nmodes = va, vu\nseed = 1\n" + extra;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + GRIDAGG_CLI + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesSectionsAndDefaults) {
    const auto cfg = parse_config_text(
        "[run]\nnetwork = net\nout = o\nstages = partition, aggregate\n"
        "[partition]\nk = 3, 5\nmodes = vu\nseed = 9\n[costs]\nline_220 = 12.5\n"
        "[expansion]\nannuity_rate = 0.05\nlifetime_years = 30\n",
        "/base");
    EXPECT_EQ(cfg.network_dir, fs::path("/base/net"));
    EXPECT_EQ(cfg.stages, (std::vector<Stage>{Stage::Partition, Stage::Aggregate}));
    EXPECT_EQ(cfg.k_values, (std::vector<std::size_t>{3, 5}));
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_DOUBLE_EQ(cfg.costs.line_cost(220.0), 12.5);
    EXPECT_DOUBLE_EQ(cfg.costs.annuity_rate, 0.05);
    EXPECT_DOUBLE_EQ(cfg.screen_all_threshold, 0.70);
    ASSERT_EQ(cfg.scenarios().size(), 2u);
    EXPECT_EQ(cfg.scenarios()[0].label(), "vu_k3");
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(parse_config_text("[run]\nnetwork = n\nout = o\nstages = ingest\nbogus = 1\n", "/"), ConfigError);
    EXPECT_THROW(parse_config_text("[mystery]\nx = 1\n", "/"), ConfigError);
    EXPECT_THROW(parse_config_text("[run]\nnetwork = n\nout = o\nstages = sideways\n", "/"), ConfigError);
    EXPECT_THROW(parse_config_text("[run]\nnetwork = n\nout = o\nstages = aggregate\n", "/"), ConfigError);
    EXPECT_THROW(parse_config_text("[run]\nnetwork = n\nout = o\nstages = partition\n[partition]\nk = 0\n", "/"),
                 ConfigError);
    EXPECT_THROW(
        parse_config_text("[run]\nnetwork = n\nout = o\nstages = screen\n[screen]\nall_threshold = 1.5\n", "/"),
        ConfigError);
}

TEST(Pipeline, PartitionOnlyWritesMappings) {
    const auto out = scratch_dir("pipe_partition");
    run_pipeline(parse_config_text(base_config(out, "partition"), out));
    EXPECT_TRUE(fs::exists(out / "va_k5" / "partition" / "mapping.csv"));
    EXPECT_TRUE(fs::exists(out / "vu_k5" / "partition" / "mapping.csv"));
    EXPECT_FALSE(fs::exists(out / "va_k5" / "aggregate"));
    EXPECT_FALSE(fs::exists(out / "fg" / "expand"));
    EXPECT_FALSE(fs::exists(out / "report"));
}

TEST(Pipeline, BadClusterCountNamesPartitionStage) {
    const auto out = scratch_dir("pipe_bad_k");
    auto cfg = parse_config_text(base_config(out, "partition"), out);
    cfg.k_values = {50};
    try {
        run_pipeline(cfg);
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), Stage::Partition);
        EXPECT_NE(e.exit_code(), 0);
        EXPECT_EQ(std::string(e.what()).rfind("partition: ", 0), 0u);
    }
}

TEST(Pipeline, FullRunIsByteDeterministic) {
    const auto a = scratch_dir("pipe_det_a"), b = scratch_dir("pipe_det_b");
    const std::string stages = "ingest, screen, partition, aggregate, expand, report";
    const auto run_a = run_pipeline(parse_config_text(base_config(a, stages), a));
    run_pipeline(parse_config_text(base_config(b, stages), b));
    ASSERT_EQ(run_a.table.size(), 3u);
    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        const auto rel = fs::relative(entry.path(), a);
        EXPECT_EQ(read_file(entry.path()), read_file(b / rel)) << rel;
        ++compared;
    }
    EXPECT_GT(compared, 10u);
    const auto manifest = nlohmann::json::parse(read_file(a / "manifest.json"));
    EXPECT_EQ(manifest.at("seed"), 1);
    EXPECT_EQ(manifest.at("scenarios"), nlohmann::json({"va_k5", "vu_k5"}));
    EXPECT_EQ(manifest.at("config_hash_fnv1a64"), fnv1a_hex(base_config(a, stages)));
}

TEST(Pipeline, MetricsRoundTrip) {
    RunMetrics m;
    m.label = "va_k5";
    m.k = 5;
    m.line_capacity_length_gvakm = 1.25;
    m.line_cost_eur = 1.0 / 3.0;
    m.stats.rows = 7;
    const auto dir = scratch_dir("metrics");
    write_metrics(m, dir / "metrics.json");
    const auto back = read_metrics(dir / "metrics.json");
    EXPECT_EQ(back.label, m.label);
    EXPECT_EQ(back.k, 5u);
    EXPECT_DOUBLE_EQ(back.line_cost_eur, m.line_cost_eur);
    EXPECT_EQ(back.stats.rows, 7u);
}

TEST(Pipeline, Fnv1aKnownVectors) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Cli, StagesComposeThroughFiles) {
    const auto out = scratch_dir("cli_chain");
    const std::string net = fig1_dir().string();
    const std::string o = out.string();
    ASSERT_EQ(run_cli("ingest --network " + net + " --out " + o + "/ingest"), 0);
    ASSERT_EQ(run_cli("repair --network " + o + "/ingest/network --substations " + net +
                      "/substations.csv --out " + o + "/repair"),
              0);
    ASSERT_EQ(run_cli("screen --network " + o + "/repair/network --out " + o + "/screen"), 0);
    ASSERT_EQ(run_cli("partition --network " + o + "/screen/network --k 5 --mode va --seed 1 --out " + o +
                      "/partition"),
              0);
    ASSERT_EQ(run_cli("aggregate --network " + o + "/screen/network --mapping " + o +
                      "/partition/mapping.csv --out " + o + "/aggregate"),
              0);
    ASSERT_EQ(run_cli("expand --network " + o + "/screen/network --out " + o + "/expand_fg"), 0);
    ASSERT_EQ(run_cli("expand --network " + o + "/aggregate/network --label va_k5 --k 5 --out " + o + "/expand_va"),
              0);
    ASSERT_EQ(run_cli("report --fg " + o + "/expand_fg --run " + o + "/expand_va --out " + o + "/report"), 0);
    EXPECT_TRUE(fs::exists(out / "report" / "summary.csv"));
    EXPECT_NE(read_file(out / "report" / "summary.csv").find("va_k5"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    const auto out = scratch_dir("cli_codes");
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("partition --network " + fig1_dir().string() + " --k 5 --mode sideways --out " + out.string()),
              2);
    EXPECT_EQ(run_cli("ingest --network " + (out / "missing").string() + " --out " + out.string()), 3);
    EXPECT_EQ(run_cli("partition --network " + fig1_dir().string() + " --k 99 --out " + out.string()), 2);
}

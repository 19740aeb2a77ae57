#include "gridagg/report.hpp"

#include "gridagg/csv.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gridagg {

RunMetrics run_metrics(std::string label, std::size_t k, const ExpansionResult& result, const Network& network) {
    RunMetrics m;
    m.label = std::move(label);
    m.k = k;
    m.line_capacity_length_gvakm = capacity_length(result, network);
    m.line_cost_eur = result.line_investment;
    m.transformer_capacity_gva = transformer_capacity(result);
    m.transformer_cost_eur = result.transformer_investment;
    m.operational_cost_eur = result.operational_cost;
    m.stats = result.stats;
    return m;
}

std::optional<double> deviation_percent(double agg, double fg) {
    if (fg == 0.0) {
        if (agg == 0.0) return 0.0;
        return std::nullopt;
    }
    return 100.0 * (agg - fg) / fg;
}

std::vector<DeviationRow> deviation_table(const RunMetrics& fg, const std::vector<RunMetrics>& runs) {
    std::vector<DeviationRow> table;
    table.push_back({fg, std::nullopt, std::nullopt, true});
    for (const auto& run : runs) {
        table.push_back({run, deviation_percent(run.line_cost_eur, fg.line_cost_eur),
                         deviation_percent(run.transformer_cost_eur, fg.transformer_cost_eur), false});
    }
    return table;
}

std::string format_deviation(const std::optional<double>& pct) {
    if (!pct) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *pct);
    std::string s = buf;
    if (s == "-0.0") s = "0.0";
    return s;
}

namespace {

std::string optional_exact(const std::optional<double>& v, bool reference) {
    if (reference) return "";
    return v ? csv::format_exact(*v) : "n/a";
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s = buf;
    if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

}  // namespace

void write_summary(const std::vector<DeviationRow>& table, const std::filesystem::path& path) {
    csv::Writer w;
    w.row({"label", "k", "line_capacity_length_gvakm", "line_cost_eur", "line_deviation_pct",
           "transformer_capacity_gva", "transformer_cost_eur", "transformer_deviation_pct", "operational_cost_eur",
           "lp_rows", "lp_cols", "lp_nonzeros", "lp_iterations"});
    for (const auto& row : table) {
        const auto& r = row.run;
        w.row({r.label, std::to_string(r.k), csv::format_exact(r.line_capacity_length_gvakm),
               csv::format_exact(r.line_cost_eur), optional_exact(row.line_deviation_pct, row.is_reference),
               csv::format_exact(r.transformer_capacity_gva), csv::format_exact(r.transformer_cost_eur),
               optional_exact(row.transformer_deviation_pct, row.is_reference),
               csv::format_exact(r.operational_cost_eur), std::to_string(r.stats.rows), std::to_string(r.stats.cols),
               std::to_string(r.stats.nonzeros), std::to_string(r.stats.iterations)});
    }
    w.save(path);
}

std::string deviation_markdown(const std::vector<DeviationRow>& table) {
    std::ostringstream os;
    os << "| Model | k | Line cap.-length (GVA km) | Line cost in MEUR (%) | Transformer cap. (GVA) "
          "| Transformer cost in MEUR (%) | LP rows x cols (nnz) | Solve (s) |\n";
    os << "|---|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& row : table) {
        const auto& r = row.run;
        auto cost = [&](double eur, const std::optional<double>& dev) {
            std::string s = fixed(eur / 1e6, 3);
            if (!row.is_reference) s += " (" + format_deviation(dev) + ")";
            return s;
        };
        os << "| " << r.label << " | " << (row.is_reference ? std::string("-") : std::to_string(r.k)) << " | "
           << fixed(r.line_capacity_length_gvakm, 3) << " | " << cost(r.line_cost_eur, row.line_deviation_pct)
           << " | " << fixed(r.transformer_capacity_gva, 3) << " | "
           << cost(r.transformer_cost_eur, row.transformer_deviation_pct) << " | " << r.stats.rows << " x "
           << r.stats.cols << " (" << r.stats.nonzeros << ") | " << fixed(r.stats.seconds, 3) << " |\n";
    }
    return os.str();
}

void write_deviation_markdown(const std::vector<DeviationRow>& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << deviation_markdown(table);
}

TopologySummary topology_summary(const Network& network, const PartitionMapping* mapping) {
    TopologySummary s;
    s.buses = network.buses.size();
    s.lines = network.lines.size();
    s.transformers = network.transformers.size();
    s.generators = network.generators.size();
    s.loads = network.loads.size();
    for (const auto& b : network.buses) ++s.levels[b.voltage_kv].buses;
    for (const auto& l : network.lines) {
        auto& level = s.levels[l.voltage_kv];
        ++level.lines;
        level.line_length_km += l.length_km;
        s.line_length_km += l.length_km;
    }
    for (const auto& t : network.transformers) {
        const Bus* hv = network.find_bus(t.bus_hv);
        if (hv) ++s.levels[hv->voltage_kv].transformers;
    }

    if (mapping) {
        const auto index = network.bus_index();
        const Adjacency adj(network);
        for (const auto& members : mapping->clusters()) {
            if (members.size() < 2) continue;
            std::set<std::size_t> inside;
            for (const auto& id : members) {
                auto it = index.find(id);
                if (it != index.end()) inside.insert(it->second);
            }
            if (inside.empty()) continue;
            std::set<std::size_t> seen{*inside.begin()};
            std::vector<std::size_t> stack{*inside.begin()};
            while (!stack.empty()) {
                const std::size_t u = stack.back();
                stack.pop_back();
                for (std::size_t v : adj.neighbors(u)) {
                    if (inside.count(v) && seen.insert(v).second) stack.push_back(v);
                }
            }
            if (seen.size() != inside.size()) s.noncontiguous_clusters.push_back(mapping->assignment.at(members.front()));
        }
    }
    return s;
}

void write_topology_summary(const TopologySummary& s, const std::filesystem::path& path) {
    csv::Writer w;
    w.row({"metric", "value"});
    w.row({"buses", std::to_string(s.buses)});
    w.row({"lines", std::to_string(s.lines)});
    w.row({"transformers", std::to_string(s.transformers)});
    w.row({"generators", std::to_string(s.generators)});
    w.row({"loads", std::to_string(s.loads)});
    w.row({"line_length_km", csv::format_number(s.line_length_km)});
    w.row({"noncontiguous_clusters", std::to_string(s.noncontiguous_clusters.size())});
    for (const auto& [kv, level] : s.levels) {
        const std::string prefix = "level_" + csv::format_number(kv) + "_";
        w.row({prefix + "buses", std::to_string(level.buses)});
        w.row({prefix + "lines", std::to_string(level.lines)});
        w.row({prefix + "transformers", std::to_string(level.transformers)});
        w.row({prefix + "line_length_km", csv::format_number(level.line_length_km)});
    }
    w.save(path);
}

std::string geojson(const Network& network, const ExpansionResult* result) {
    using nlohmann::json;
    json features = json::array();
    const auto index = network.bus_index();
    auto point = [&](const std::string& id) {
        const Bus& b = network.buses.at(index.at(id));
        return json::array({b.lon, b.lat});
    };

    for (const auto& b : network.buses) {
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Point"}, {"coordinates", json::array({b.lon, b.lat})}}},
                            {"properties", {{"id", b.id}, {"element", "bus"}, {"voltage_kv", b.voltage_kv}}}});
    }
    auto branch_feature = [&](const std::string& id, const std::string& from, const std::string& to, json props) {
        if (result) {
            for (std::size_t k = 0; k < result->branch_ids.size(); ++k) {
                if (result->branch_ids[k] == id) {
                    props["delta_s"] = result->delta_s[k];
                    break;
                }
            }
        }
        props["id"] = id;
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "LineString"}, {"coordinates", json::array({point(from), point(to)})}}},
                            {"properties", std::move(props)}});
    };
    for (const auto& l : network.lines) {
        branch_feature(l.id, l.bus_from, l.bus_to,
                       {{"element", "branch"},
                        {"kind", "line"},
                        {"voltage_kv", l.voltage_kv},
                        {"s_nom", l.s_nom},
                        {"length_km", l.length_km}});
    }
    for (const auto& t : network.transformers) {
        const double hv = network.buses.at(index.at(t.bus_hv)).voltage_kv;
        const double lv = network.buses.at(index.at(t.bus_lv)).voltage_kv;
        branch_feature(t.id, t.bus_hv, t.bus_lv,
                       {{"element", "branch"}, {"kind", "transformer"}, {"voltage_kv", hv}, {"voltage_lv_kv", lv},
                        {"s_nom", t.s_nom}});
    }
    json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
    return doc.dump(1) + "\n";
}

void export_geojson(const Network& network, const ExpansionResult* result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << geojson(network, result);
}

}  // namespace gridagg

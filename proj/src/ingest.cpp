#include "gridagg/ingest.hpp"

#include "gridagg/csv.hpp"
#include "gridagg/errors.hpp"
#include "gridagg/geo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace gridagg {

namespace fs = std::filesystem;

namespace {

const char* bool_text(bool b) { return b ? "true" : "false"; }

/// Maps snapshot label -> column values for a profile table.
std::vector<std::vector<double>> read_profiles(const csv::Table& table, const std::vector<std::string>& ids,
                                               const SnapshotSet& snapshots, bool default_to_one) {
    const std::size_t snap_col = table.column("snapshot");
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t r = 0; r < table.rows().size(); ++r) {
        if (!row_of.emplace(table.cell(r, snap_col), r).second)
            throw DataError(table.source() + ": duplicate snapshot '" + table.cell(r, snap_col) + "'");
    }
    std::vector<std::vector<double>> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        const auto& header = table.header();
        auto it = std::find(header.begin(), header.end(), id);
        if (it == header.end()) {
            if (!default_to_one) throw DataError(table.source() + ": missing profile column for '" + id + "'");
            out.emplace_back(snapshots.size(), 1.0);
            continue;
        }
        const std::size_t col = static_cast<std::size_t>(it - header.begin());
        std::vector<double> profile;
        profile.reserve(snapshots.size());
        for (const auto& label : snapshots.labels) {
            auto row = row_of.find(label);
            if (row == row_of.end())
                throw DataError(table.source() + ": no row for snapshot '" + label + "'");
            profile.push_back(table.number(row->second, col));
        }
        out.push_back(std::move(profile));
    }
    return out;
}

}  // namespace

LoadedNetwork load_network(const fs::path& dir, const LoadOptions& options) {
    if (!fs::is_directory(dir)) throw DataError("network directory not found: " + dir.string());
    for (const char* name : {"buses.csv", "lines.csv", "transformers.csv", "generators.csv", "generator_profiles.csv",
                             "loads.csv", "load_profiles.csv", "snapshots.csv"}) {
        if (!fs::exists(dir / name)) throw DataError("missing file: " + std::string(name) + " in " + dir.string());
    }

    Network net;
    {
        auto t = csv::Table::read(dir / "buses.csv");
        const auto id = t.column("id"), kv = t.column("voltage_kv"), lat = t.column("lat"), lon = t.column("lon");
        for (std::size_t r = 0; r < t.rows().size(); ++r) {
            net.buses.push_back({t.cell(r, id), t.number(r, kv), t.number(r, lat), t.number(r, lon)});
            net.voltage_levels.insert(net.buses.back().voltage_kv);
        }
    }
    {
        auto t = csv::Table::read(dir / "lines.csv");
        const auto id = t.column("id"), from = t.column("bus_from"), to = t.column("bus_to"),
                   kv = t.column("voltage_kv"), s = t.column("s_nom_mva"), x = t.column("x_ohm"),
                   len = t.column("length_km"), cost = t.column("cost_eur_per_mva_km"),
                   exp = t.column("expandable");
        for (std::size_t r = 0; r < t.rows().size(); ++r) {
            net.lines.push_back({t.cell(r, id), t.cell(r, from), t.cell(r, to), t.number(r, kv), t.number(r, s),
                                 t.number(r, x), t.number(r, len), t.number(r, cost), t.boolean(r, exp)});
        }
    }
    {
        auto t = csv::Table::read(dir / "transformers.csv");
        const auto id = t.column("id"), hv = t.column("bus_hv"), lv = t.column("bus_lv"), s = t.column("s_nom_mva"),
                   x = t.column("x_ohm"), cost = t.column("cost_eur_per_mva"), exp = t.column("expandable");
        for (std::size_t r = 0; r < t.rows().size(); ++r) {
            net.transformers.push_back({t.cell(r, id), t.cell(r, hv), t.cell(r, lv), t.number(r, s), t.number(r, x),
                                        t.number(r, cost), t.boolean(r, exp)});
        }
    }
    {
        auto t = csv::Table::read(dir / "snapshots.csv");
        const auto snap = t.column("snapshot"), w = t.column("weight_hours");
        for (std::size_t r = 0; r < t.rows().size(); ++r) {
            net.snapshots.labels.push_back(t.cell(r, snap));
            net.snapshots.weights.push_back(t.number(r, w));
        }
    }
    {
        auto t = csv::Table::read(dir / "generators.csv");
        const auto id = t.column("id"), bus = t.column("bus"), p = t.column("p_nom_mw"),
                   mc = t.column("marginal_cost_eur_mwh");
        for (std::size_t r = 0; r < t.rows().size(); ++r)
            net.generators.push_back({t.cell(r, id), t.cell(r, bus), t.number(r, p), t.number(r, mc), {}});
        std::vector<std::string> ids;
        for (const auto& g : net.generators) ids.push_back(g.id);
        auto profiles = read_profiles(csv::Table::read(dir / "generator_profiles.csv"), ids, net.snapshots, true);
        for (std::size_t i = 0; i < ids.size(); ++i) net.generators[i].profile = std::move(profiles[i]);
    }
    {
        auto t = csv::Table::read(dir / "loads.csv");
        const auto id = t.column("id"), bus = t.column("bus");
        for (std::size_t r = 0; r < t.rows().size(); ++r) net.loads.push_back({t.cell(r, id), t.cell(r, bus), {}});
        std::vector<std::string> ids;
        for (const auto& l : net.loads) ids.push_back(l.id);
        auto profiles = read_profiles(csv::Table::read(dir / "load_profiles.csv"), ids, net.snapshots, false);
        for (std::size_t i = 0; i < ids.size(); ++i) net.loads[i].profile = std::move(profiles[i]);
    }

    LoadedNetwork result;
    if (options.allow_islands) {
        require_valid(net, {.allow_islands = true});
        auto pruned = keep_largest_component(net);
        result.network = std::move(pruned.network);
        result.warnings = std::move(pruned.warnings);
    } else {
        require_valid(net);
        result.network = std::move(net);
    }
    return result;
}

void save_network(const Network& net, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
    using csv::format_number;

    csv::Writer buses;
    buses.row({"id", "voltage_kv", "lat", "lon"});
    for (const auto& b : net.buses)
        buses.row({b.id, format_number(b.voltage_kv), format_number(b.lat), format_number(b.lon)});
    buses.save(dir / "buses.csv");

    csv::Writer lines;
    lines.row({"id", "bus_from", "bus_to", "voltage_kv", "s_nom_mva", "x_ohm", "length_km", "cost_eur_per_mva_km",
               "expandable"});
    for (const auto& l : net.lines) {
        lines.row({l.id, l.bus_from, l.bus_to, format_number(l.voltage_kv), format_number(l.s_nom), format_number(l.x),
                   format_number(l.length_km), format_number(l.cost_per_mva_km), bool_text(l.expandable)});
    }
    lines.save(dir / "lines.csv");

    csv::Writer trafos;
    trafos.row({"id", "bus_hv", "bus_lv", "s_nom_mva", "x_ohm", "cost_eur_per_mva", "expandable"});
    for (const auto& t : net.transformers) {
        trafos.row({t.id, t.bus_hv, t.bus_lv, format_number(t.s_nom), format_number(t.x),
                    format_number(t.cost_per_mva), bool_text(t.expandable)});
    }
    trafos.save(dir / "transformers.csv");

    csv::Writer snaps;
    snaps.row({"snapshot", "weight_hours"});
    for (std::size_t t = 0; t < net.snapshots.size(); ++t)
        snaps.row({net.snapshots.labels[t], format_number(net.snapshots.weights[t])});
    snaps.save(dir / "snapshots.csv");

    csv::Writer gens;
    gens.row({"id", "bus", "p_nom_mw", "marginal_cost_eur_mwh"});
    for (const auto& g : net.generators)
        gens.row({g.id, g.bus, format_number(g.p_nom), format_number(g.marginal_cost)});
    gens.save(dir / "generators.csv");

    auto write_profiles = [&](const auto& devices, const fs::path& path) {
        csv::Writer w;
        std::vector<std::string> header{"snapshot"};
        for (const auto& d : devices) header.push_back(d.id);
        w.row(header);
        for (std::size_t t = 0; t < net.snapshots.size(); ++t) {
            std::vector<std::string> fields{net.snapshots.labels[t]};
            for (const auto& d : devices) fields.push_back(format_number(d.profile.at(t)));
            w.row(fields);
        }
        w.save(path);
    };
    write_profiles(net.generators, dir / "generator_profiles.csv");

    csv::Writer loads;
    loads.row({"id", "bus"});
    for (const auto& l : net.loads) loads.row({l.id, l.bus});
    loads.save(dir / "loads.csv");
    write_profiles(net.loads, dir / "load_profiles.csv");
}

std::vector<SubstationRecord> load_substations(const fs::path& csv_path) {
    auto t = csv::Table::read(csv_path);
    const auto name = t.column("name"), lat = t.column("lat"), lon = t.column("lon"), hv = t.column("hv_kv"),
               lv = t.column("lv_kv"), s = t.column("s_nom_mva"), x = t.column("x_ohm");
    std::vector<SubstationRecord> out;
    for (std::size_t r = 0; r < t.rows().size(); ++r) {
        SubstationRecord rec{t.cell(r, name), t.number(r, lat), t.number(r, lon), t.number(r, hv),
                             t.number(r, lv), t.number(r, s), t.number(r, x)};
        if (!(rec.hv_kv > rec.lv_kv)) {
            throw DataError(t.source() + " row " + std::to_string(r + 1) + ": hv_kv must exceed lv_kv");
        }
        if (!(rec.s_nom > 0.0)) throw DataError(t.source() + " row " + std::to_string(r + 1) + ": s_nom_mva must be positive");
        out.push_back(std::move(rec));
    }
    return out;
}

namespace {

std::set<std::string> name_tokens(const std::string& name) {
    std::set<std::string> tokens;
    std::string current;
    for (unsigned char c : name) {
        if (std::isalnum(c) || c >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.insert(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.insert(std::move(current));
    return tokens;
}

bool same_kv(double a, double b) { return std::abs(a - b) <= 1e-6; }

}  // namespace

double name_similarity(const std::string& a, const std::string& b) {
    const auto ta = name_tokens(a);
    const auto tb = name_tokens(b);
    if (ta.empty() && tb.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& tok : ta) common += tb.count(tok);
    const std::size_t unite = ta.size() + tb.size() - common;
    return static_cast<double>(common) / static_cast<double>(unite);
}

double match_score(double distance_km, double similarity, const MatchOptions& options) {
    const double closeness = options.max_dist_km > 0.0 ? 1.0 - distance_km / options.max_dist_km : 1.0;
    return options.dist_weight * closeness + options.name_weight * similarity;
}

std::vector<MatchResult> match_transformers(const Network& network, const std::vector<SubstationRecord>& records,
                                            const MatchOptions& options) {
    if (options.name_weight < 0.0 || options.dist_weight < 0.0 ||
        std::abs(options.name_weight + options.dist_weight - 1.0) > 1e-9) {
        throw std::invalid_argument("match weights must be nonnegative and sum to 1");
    }
    if (options.threshold < 0.0 || options.threshold > 1.0)
        throw std::invalid_argument("match threshold must lie in [0, 1]");

    std::vector<MatchResult> out;
    out.reserve(network.transformers.size());
    for (const auto& tr : network.transformers) {
        MatchResult result{tr.id, {}, 0.0, false};
        const Bus* hv = network.find_bus(tr.bus_hv);
        const Bus* lv = network.find_bus(tr.bus_lv);
        if (hv && lv) {
            for (std::size_t r = 0; r < records.size(); ++r) {
                const auto& rec = records[r];
                if (!same_kv(rec.hv_kv, hv->voltage_kv) || !same_kv(rec.lv_kv, lv->voltage_kv)) continue;
                const double d = haversine_km(hv->lat, hv->lon, rec.lat, rec.lon);
                if (d > options.max_dist_km) continue;
                const double sim = std::max(name_similarity(tr.id, rec.name), name_similarity(tr.bus_hv, rec.name));
                const double score = match_score(d, sim, options);
                if (score + 1e-12 < options.threshold) continue;
                result.record_indices.push_back(r);
                result.score = std::max(result.score, score);
            }
        }
        result.matched = !result.record_indices.empty();
        out.push_back(std::move(result));
    }
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

RepairResult repair_transformer_parameters(const Network& network, const std::vector<MatchResult>& matches,
                                           const std::vector<SubstationRecord>& records) {
    RepairResult result{network, {}};
    std::unordered_map<std::string, const MatchResult*> match_of;
    for (const auto& m : matches) match_of.emplace(m.transformer_id, &m);

    // Matched records per voltage pair, each record counted once.
    std::map<std::pair<double, double>, std::set<std::size_t>> matched_by_pair;
    for (const auto& m : matches) {
        if (!m.matched) continue;
        for (std::size_t r : m.record_indices) {
            const auto& rec = records.at(r);
            matched_by_pair[{rec.hv_kv, rec.lv_kv}].insert(r);
        }
    }

    std::set<std::pair<double, double>> warned;
    for (auto& tr : result.network.transformers) {
        auto it = match_of.find(tr.id);
        if (it != match_of.end() && it->second->matched) {
            double s = 0.0, inv_x = 0.0;
            for (std::size_t r : it->second->record_indices) {
                s += records.at(r).s_nom;
                inv_x += 1.0 / records.at(r).x;
            }
            tr.s_nom = s;
            tr.x = 1.0 / inv_x;
            continue;
        }
        const Bus* hv = network.find_bus(tr.bus_hv);
        const Bus* lv = network.find_bus(tr.bus_lv);
        if (!hv || !lv) continue;
        const std::pair<double, double> pair{hv->voltage_kv, lv->voltage_kv};
        const std::set<std::size_t>* pool = nullptr;
        for (const auto& [key, recs] : matched_by_pair)
            if (same_kv(key.first, pair.first) && same_kv(key.second, pair.second)) pool = &recs;
        if (!pool) {
            if (warned.insert(pair).second) {
                std::ostringstream msg;
                msg << "no matched records for voltage pair " << pair.first << "/" << pair.second
                    << " kV; transformer parameters left unchanged";
                result.warnings.push_back(msg.str());
            }
            continue;
        }
        std::vector<double> s_values, x_values;
        for (std::size_t r : *pool) {
            s_values.push_back(records[r].s_nom);
            x_values.push_back(records[r].x);
        }
        tr.s_nom = median(s_values);
        tr.x = median(x_values);
    }
    return result;
}

}  // namespace gridagg

#include "gridagg/expansion.hpp"

#include "gridagg/csv.hpp"
#include "gridagg/errors.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace gridagg {

namespace {

double lookup(const std::map<double, double>& table, double kv, double fallback) {
    for (const auto& [level, cost] : table)
        if (std::abs(level - kv) <= 1e-6) return cost;
    return fallback;
}

}  // namespace

CostTable CostTable::defaults() {
    CostTable t;
    // 220 kV: mean of 0.44-0.53 MEUR/km at 983.1 MVA.
    const double line_220 = 0.5 * (0.44e6 + 0.53e6) / 983.1;
    // 380/400 kV: mean of the per-MVA costs of the three listed rows.
    const double line_380 = (1.26e6 / 3396.2 + 0.70e6 / 1698.1 + 0.67e6 / 3574.9) / 3.0;
    // 380/220 kV transformer: mean of 4.6 and 8.5 MEUR at 600 MVA.
    const double trafo = 0.5 * (4.6e6 + 8.5e6) / 600.0;
    t.line_cost_per_mva_km = {{220.0, line_220}, {380.0, line_380}, {400.0, line_380}};
    t.transformer_cost_per_mva = {{380.0, trafo}, {400.0, trafo}};
    t.default_line_cost_per_mva_km = line_380;
    t.default_transformer_cost_per_mva = trafo;
    return t;
}

double CostTable::line_cost(double voltage_kv) const {
    return lookup(line_cost_per_mva_km, voltage_kv, default_line_cost_per_mva_km);
}

double CostTable::transformer_cost(double hv_kv) const {
    return lookup(transformer_cost_per_mva, hv_kv, default_transformer_cost_per_mva);
}

double CostTable::annuity() const { return annuity_factor(annuity_rate, lifetime_years); }

void CostTable::check() const {
    for (const auto& [kv, c] : line_cost_per_mva_km)
        if (!(c > 0.0)) throw std::invalid_argument("line cost must be positive");
    for (const auto& [kv, c] : transformer_cost_per_mva)
        if (!(c > 0.0)) throw std::invalid_argument("transformer cost must be positive");
    annuity_factor(annuity_rate, lifetime_years);
}

double annuity_factor(double rate, double years) {
    if (rate < 0.0) throw std::invalid_argument("annuity rate must be nonnegative");
    if (!(years >= 1.0)) throw std::invalid_argument("annuity lifetime must be at least one year");
    if (rate == 0.0) return 1.0 / years;
    return rate / (1.0 - std::pow(1.0 + rate, -years));
}

Network apply_cost_table(const Network& network, const CostTable& costs) {
    Network out = network;
    for (auto& l : out.lines)
        if (l.cost_per_mva_km == 0.0) l.cost_per_mva_km = costs.line_cost(l.voltage_kv);
    for (auto& t : out.transformers) {
        if (t.cost_per_mva != 0.0) continue;
        const Bus* hv = out.find_bus(t.bus_hv);
        t.cost_per_mva = costs.transformer_cost(hv ? hv->voltage_kv : 0.0);
    }
    return out;
}

TepModel build_tep_model(const Network& network, const CandidateSet& candidates, const CostTable& costs) {
    TepModel model;
    model.dispatch = build_dispatch_model(network);
    const Network priced = apply_cost_table(network, costs);
    const auto& refs = model.dispatch.branch_refs;
    const double annuity = costs.annuity();

    std::vector<bool> is_candidate(refs.size(), false);
    for (std::size_t k = 0; k < candidates.branch_ids.size(); ++k) {
        if (!candidates.is_candidate[k]) continue;
        bool found = false;
        for (std::size_t b = 0; b < refs.size(); ++b) {
            if (refs[b].id == candidates.branch_ids[k]) {
                is_candidate[b] = true;
                found = true;
            }
        }
        if (!found) throw DataError("candidate '" + candidates.branch_ids[k] + "' is not a branch of the network");
    }

    auto& lp = model.dispatch.lp;
    model.expansion.assign(refs.size(), std::nullopt);
    model.annualized_unit_cost.assign(refs.size(), 0.0);
    for (std::size_t b = 0; b < refs.size(); ++b) {
        const auto& br = refs[b];
        const double unit = br.kind == BranchKind::Line
                                ? priced.lines[br.index].cost_per_mva_km * priced.lines[br.index].length_km
                                : priced.transformers[br.index].cost_per_mva;
        model.annualized_unit_cost[b] = annuity * unit;
        if (!is_candidate[b]) continue;

        const std::size_t ds = lp.add_variable("ds|" + br.id, 0.0, lp::kInf, model.annualized_unit_cost[b]);
        model.expansion[b] = ds;
        for (std::size_t t = 0; t < model.dispatch.flow.size(); ++t) {
            const std::size_t f = model.dispatch.flow[t][b];
            const std::string& label = network.snapshots.labels[t];
            lp.set_bounds(f, -lp::kInf, lp::kInf);
            lp.add_constraint("cap+|" + br.id + "|" + label, {{f, 1.0}, {ds, -1.0}}, lp::Relation::LessEqual, br.s_nom);
            lp.add_constraint("cap-|" + br.id + "|" + label, {{f, 1.0}, {ds, 1.0}}, lp::Relation::GreaterEqual,
                              -br.s_nom);
        }
    }
    return model;
}

double ExpansionResult::delta_for(const std::string& branch_id) const {
    for (std::size_t k = 0; k < branch_ids.size(); ++k)
        if (branch_ids[k] == branch_id) return delta_s[k];
    throw std::out_of_range("no branch '" + branch_id + "' in expansion result");
}

ExpansionResult solve_tep(const Network& network, const CandidateSet& candidates, const CostTable& costs,
                          const lp::SolveOptions& options, const std::filesystem::path& mps_path) {
    const TepModel model = build_tep_model(network, candidates, costs);
    const auto& lp = model.dispatch.lp;
    if (!mps_path.empty()) lp::write_mps(lp, mps_path, "TEP");

    const auto start = std::chrono::steady_clock::now();
    const lp::LpSolution sol = lp::solve(lp, options);
    const auto stop = std::chrono::steady_clock::now();
    if (sol.status != lp::SolveStatus::Optimal)
        throw SolverError("expansion LP not solved to optimality: " + std::string(lp::to_string(sol.status)));

    ExpansionResult r;
    r.dispatch = extract_dispatch(model.dispatch, sol);
    r.objective = sol.objective;
    r.stats = {lp.constraint_count(), lp.variable_count(), lp.nonzeros(), sol.iterations,
               std::chrono::duration<double>(stop - start).count()};
    const auto& refs = model.dispatch.branch_refs;
    for (std::size_t b = 0; b < refs.size(); ++b) {
        r.branch_ids.push_back(refs[b].id);
        r.branch_kinds.push_back(refs[b].kind);
        const double ds = model.expansion[b] ? std::max(0.0, sol.values[*model.expansion[b]]) : 0.0;
        r.delta_s.push_back(ds);
        const double cost = ds * model.annualized_unit_cost[b];
        r.annualized_cost.push_back(cost);
        (refs[b].kind == BranchKind::Line ? r.line_investment : r.transformer_investment) += cost;
    }
    for (std::size_t t = 0; t < r.dispatch.dispatch.size(); ++t) {
        const double w = network.snapshots.weights[t];
        for (std::size_t g = 0; g < network.generators.size(); ++g)
            r.operational_cost += w * network.generators[g].marginal_cost * r.dispatch.dispatch[t][g];
        for (double s : r.dispatch.shed[t]) r.shedding_cost += w * kLoadSheddingPenalty * s;
    }
    return r;
}

double capacity_length(const ExpansionResult& result, const Network& network) {
    double total = 0.0;
    for (std::size_t k = 0; k < result.branch_ids.size(); ++k) {
        if (result.branch_kinds[k] != BranchKind::Line) continue;
        for (const auto& l : network.lines) {
            if (l.id == result.branch_ids[k]) {
                total += result.delta_s[k] * l.length_km;
                break;
            }
        }
    }
    return total / 1000.0;
}

double transformer_capacity(const ExpansionResult& result) {
    double total = 0.0;
    for (std::size_t k = 0; k < result.branch_ids.size(); ++k)
        if (result.branch_kinds[k] == BranchKind::Transformer) total += result.delta_s[k];
    return total / 1000.0;
}

void write_expansion_result(const ExpansionResult& r, const std::filesystem::path& path) {
    csv::Writer w;
    w.row({"branch_id", "kind", "delta_s_mva", "annualized_cost_eur"});
    for (std::size_t k = 0; k < r.branch_ids.size(); ++k) {
        w.row({r.branch_ids[k], std::string(to_string(r.branch_kinds[k])), csv::format_number(r.delta_s[k]),
               csv::format_number(r.annualized_cost[k])});
    }
    w.save(path);
}

}  // namespace gridagg

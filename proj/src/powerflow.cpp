#include "gridagg/powerflow.hpp"

#include "gridagg/csv.hpp"
#include "gridagg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace gridagg {

DispatchModel build_dispatch_model(const Network& network) {
    if (network.buses.empty()) throw DataError("dispatch: network has no buses");
    if (Adjacency(network).component_count() != 1) throw DataError("dispatch: network is not connected");

    DispatchModel model;
    model.branch_refs = branches(network);
    const auto bus_index = network.bus_index();
    const std::size_t n_bus = network.buses.size();
    const std::size_t n_snap = network.snapshots.size();

    model.slack_bus = 0;
    for (std::size_t b = 1; b < n_bus; ++b)
        if (network.buses[b].id < network.buses[model.slack_bus].id) model.slack_bus = b;

    std::vector<std::vector<double>> bus_load(n_snap, std::vector<double>(n_bus, 0.0));
    for (const auto& l : network.loads)
        for (std::size_t t = 0; t < n_snap; ++t) bus_load[t][bus_index.at(l.bus)] += l.profile[t];

    auto& lp = model.lp;
    model.gen.resize(n_snap);
    model.shed.resize(n_snap);
    model.angle.resize(n_snap);
    model.flow.resize(n_snap);
    for (std::size_t t = 0; t < n_snap; ++t) {
        const double w = network.snapshots.weights[t];
        const std::string& label = network.snapshots.labels[t];
        for (const auto& g : network.generators) {
            model.gen[t].push_back(
                lp.add_variable("g|" + g.id + "|" + label, 0.0, g.p_nom * g.profile[t], w * g.marginal_cost));
        }
        for (std::size_t b = 0; b < n_bus; ++b) {
            model.shed[t].push_back(lp.add_variable("shed|" + network.buses[b].id + "|" + label, 0.0, bus_load[t][b],
                                                    w * kLoadSheddingPenalty));
        }
        for (std::size_t b = 0; b < n_bus; ++b) {
            const double bound = b == model.slack_bus ? 0.0 : lp::kInf;
            model.angle[t].push_back(lp.add_variable("theta|" + network.buses[b].id + "|" + label, -bound, bound));
        }
        for (const auto& br : model.branch_refs)
            model.flow[t].push_back(lp.add_variable("f|" + br.id + "|" + label, -br.s_nom, br.s_nom));

        for (std::size_t k = 0; k < model.branch_refs.size(); ++k) {
            const auto& br = model.branch_refs[k];
            const double susceptance = network.s_base / br.x_pu;
            lp.add_constraint("flow|" + br.id + "|" + label,
                              {{model.flow[t][k], 1.0},
                               {model.angle[t][bus_index.at(br.bus_from)], -susceptance},
                               {model.angle[t][bus_index.at(br.bus_to)], susceptance}},
                              lp::Relation::Equal, 0.0);
        }

        std::vector<std::vector<lp::Term>> balance(n_bus);
        for (std::size_t b = 0; b < n_bus; ++b) balance[b].push_back({model.shed[t][b], 1.0});
        for (std::size_t g = 0; g < network.generators.size(); ++g)
            balance[bus_index.at(network.generators[g].bus)].push_back({model.gen[t][g], 1.0});
        for (std::size_t k = 0; k < model.branch_refs.size(); ++k) {
            const auto& br = model.branch_refs[k];
            balance[bus_index.at(br.bus_from)].push_back({model.flow[t][k], -1.0});
            balance[bus_index.at(br.bus_to)].push_back({model.flow[t][k], 1.0});
        }
        for (std::size_t b = 0; b < n_bus; ++b) {
            lp.add_constraint("balance|" + network.buses[b].id + "|" + label, std::move(balance[b]),
                              lp::Relation::Equal, bus_load[t][b]);
        }
    }
    return model;
}

DispatchResult extract_dispatch(const DispatchModel& model, const lp::LpSolution& solution) {
    DispatchResult r;
    auto pick = [&](const std::vector<std::vector<std::size_t>>& idx) {
        std::vector<std::vector<double>> out(idx.size());
        for (std::size_t t = 0; t < idx.size(); ++t)
            for (std::size_t j : idx[t]) out[t].push_back(solution.values[j]);
        return out;
    };
    r.dispatch = pick(model.gen);
    r.flow = pick(model.flow);
    r.angle = pick(model.angle);
    r.shed = pick(model.shed);
    r.objective = solution.objective;
    for (const auto& br : model.branch_refs) r.branch_ids.push_back(br.id);
    return r;
}

DispatchResult solve_dispatch(const Network& network, const lp::SolveOptions& options) {
    const DispatchModel model = build_dispatch_model(network);
    const lp::LpSolution sol = lp::solve(model.lp, options);
    if (sol.status != lp::SolveStatus::Optimal)
        throw SolverError("dispatch LP not solved to optimality: " + std::string(lp::to_string(sol.status)));
    return extract_dispatch(model, sol);
}

std::vector<std::vector<double>> loading(const DispatchResult& dispatch, const Network& network,
                                         const std::vector<double>& extra_capacity) {
    const auto refs = branches(network);
    std::vector<std::vector<double>> out(refs.size(), std::vector<double>(dispatch.flow.size(), 0.0));
    for (std::size_t k = 0; k < refs.size(); ++k) {
        const double cap = refs[k].s_nom + (extra_capacity.empty() ? 0.0 : extra_capacity[k]);
        for (std::size_t t = 0; t < dispatch.flow.size(); ++t) out[k][t] = std::abs(dispatch.flow[t][k]) / cap;
    }
    return out;
}

std::size_t CandidateSet::count() const {
    return static_cast<std::size_t>(std::count(is_candidate.begin(), is_candidate.end(), true));
}

bool CandidateSet::contains(const std::string& branch_id) const {
    for (std::size_t k = 0; k < branch_ids.size(); ++k)
        if (branch_ids[k] == branch_id) return is_candidate[k];
    return false;
}

CandidateSet screen_candidates(const std::vector<std::vector<double>>& loadings,
                               const std::vector<std::string>& branch_ids, double all_threshold,
                               double any_threshold) {
    for (double th : {all_threshold, any_threshold})
        if (!(th > 0.0 && th <= 1.0)) throw std::invalid_argument("screening thresholds must lie in (0, 1]");
    if (loadings.size() != branch_ids.size()) throw std::invalid_argument("one loading series per branch expected");

    CandidateSet set;
    set.branch_ids = branch_ids;
    for (const auto& series : loadings) {
        double lo = series.empty() ? 0.0 : *std::min_element(series.begin(), series.end());
        double hi = series.empty() ? 0.0 : *std::max_element(series.begin(), series.end());
        const auto above = std::count_if(series.begin(), series.end(), [&](double v) { return v > all_threshold; });
        set.is_candidate.push_back(!series.empty() && (lo > all_threshold || hi > any_threshold));
        set.max_loading.push_back(hi);
        set.frac_above.push_back(series.empty() ? 0.0 : static_cast<double>(above) / static_cast<double>(series.size()));
    }
    return set;
}

Network apply_candidates(const Network& network, const CandidateSet& candidates) {
    std::unordered_map<std::string, bool> flag;
    for (std::size_t k = 0; k < candidates.branch_ids.size(); ++k)
        flag[candidates.branch_ids[k]] = candidates.is_candidate[k];
    Network out = network;
    auto lookup = [&](const std::string& id) {
        auto it = flag.find(id);
        return it != flag.end() && it->second;
    };
    for (auto& l : out.lines) l.expandable = l.expandable && lookup(l.id);
    for (auto& t : out.transformers) t.expandable = t.expandable && lookup(t.id);
    return out;
}

CandidateSet candidates_from_network(const Network& network) {
    CandidateSet set;
    for (const auto& br : branches(network)) {
        set.branch_ids.push_back(br.id);
        set.is_candidate.push_back(br.expandable);
        set.max_loading.push_back(0.0);
        set.frac_above.push_back(0.0);
    }
    return set;
}

void write_candidates(const CandidateSet& c, const std::filesystem::path& path) {
    csv::Writer w;
    w.row({"branch_id", "is_candidate", "max_loading", "frac_above_70"});
    for (std::size_t k = 0; k < c.branch_ids.size(); ++k) {
        w.row({c.branch_ids[k], c.is_candidate[k] ? "true" : "false", csv::format_number(c.max_loading[k]),
               csv::format_number(c.frac_above[k])});
    }
    w.save(path);
}

CandidateSet read_candidates(const std::filesystem::path& path) {
    auto t = csv::Table::read(path);
    const auto id = t.column("branch_id"), flag = t.column("is_candidate"), maxl = t.column("max_loading"),
               frac = t.column("frac_above_70");
    CandidateSet c;
    for (std::size_t r = 0; r < t.rows().size(); ++r) {
        c.branch_ids.push_back(t.cell(r, id));
        c.is_candidate.push_back(t.boolean(r, flag));
        c.max_loading.push_back(t.number(r, maxl));
        c.frac_above.push_back(t.number(r, frac));
    }
    return c;
}

}  // namespace gridagg

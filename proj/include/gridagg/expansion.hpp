#pragma once

#include "gridagg/lp.hpp"
#include "gridagg/network.hpp"
#include "gridagg/powerflow.hpp"

#include <filesystem>
#include <map>
#include <optional>

namespace gridagg {

/// Reinforcement costs per voltage level plus annuity parameters. Costs
/// are overnight values; TEP objectives use cost * annuity_factor.
struct CostTable {
    std::map<double, double> line_cost_per_mva_km;  // by line voltage (kV)
    std::map<double, double> transformer_cost_per_mva;  // by hv voltage (kV)
    double default_line_cost_per_mva_km = 0.0;
    double default_transformer_cost_per_mva = 0.0;
    double annuity_rate = 0.07;
    double lifetime_years = 40.0;

    /// Averages of the published reinforcement cost ranges for 220 kV and
    /// 380/400 kV double-circuit lines and 380/220 kV transformers.
    static CostTable defaults();

    double line_cost(double voltage_kv) const;
    double transformer_cost(double hv_kv) const;
    double annuity() const;
    void check() const;
};

/// r / (1 - (1 + r)^-n); 1/n when r = 0. Throws std::invalid_argument for
/// r < 0 or n < 1.
double annuity_factor(double rate, double years);

/// Fills branch cost fields that are zero from the table (by voltage).
Network apply_cost_table(const Network& network, const CostTable& costs);

struct TepModel {
    DispatchModel dispatch;
    std::vector<std::optional<std::size_t>> expansion;  // Δs column per branch, candidates only
    std::vector<double> annualized_unit_cost;           // EUR/(MVA yr) per branch
};

/// Dispatch LP plus one Δs >= 0 column per candidate branch priced at
/// annuity * unit cost (cost_per_mva_km * length for lines, cost_per_mva
/// for transformers) and flow limits |f| <= s_nom + Δs. Branch costs that
/// are zero are taken from the cost table first. Reactances stay
/// at their original values.
TepModel build_tep_model(const Network& network, const CandidateSet& candidates, const CostTable& costs);

inline lp::LinearProgram build_tep_lp(const Network& network, const CandidateSet& candidates, const CostTable& costs) {
    return build_tep_model(network, candidates, costs).dispatch.lp;
}

struct LpStats {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t nonzeros = 0;
    std::size_t iterations = 0;
    double seconds = 0.0;
};

struct ExpansionResult {
    std::vector<std::string> branch_ids;
    std::vector<BranchKind> branch_kinds;
    std::vector<double> delta_s;          // MVA, zero for non-candidates
    std::vector<double> annualized_cost;  // EUR/yr per branch
    double line_investment = 0.0;         // EUR/yr
    double transformer_investment = 0.0;  // EUR/yr
    double operational_cost = 0.0;        // EUR/yr, generation only
    double shedding_cost = 0.0;           // EUR/yr at the shedding penalty
    double objective = 0.0;
    DispatchResult dispatch;
    LpStats stats;

    double delta_for(const std::string& branch_id) const;
};

/// Builds, solves, and extracts; throws SolverError unless optimal.
/// A non-empty mps_path also writes the LP there before solving.
ExpansionResult solve_tep(const Network& network, const CandidateSet& candidates, const CostTable& costs,
                          const lp::SolveOptions& options = {}, const std::filesystem::path& mps_path = {});

/// Σ over lines of Δs * length, in GVA km.
double capacity_length(const ExpansionResult& result, const Network& network);

/// Σ over transformers of Δs, in GVA.
double transformer_capacity(const ExpansionResult& result);

/// branch_id,kind,delta_s_mva,annualized_cost_eur
void write_expansion_result(const ExpansionResult& result, const std::filesystem::path& path);

}  // namespace gridagg

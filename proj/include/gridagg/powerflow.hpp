#pragma once

#include "gridagg/lp.hpp"
#include "gridagg/network.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gridagg {

inline constexpr double kLoadSheddingPenalty = 10000.0;  // EUR/MWh
inline constexpr double kLoadingTolerance = 1e-6;

/// Column indices of a DC dispatch model inside a LinearProgram; index
/// [t][element] with elements in network order (branches as in branches()).
struct DispatchModel {
    lp::LinearProgram lp;
    std::vector<BranchRef> branch_refs;
    std::vector<std::vector<std::size_t>> gen;    // [t][generator]
    std::vector<std::vector<std::size_t>> shed;   // [t][bus]
    std::vector<std::vector<std::size_t>> angle;  // [t][bus]
    std::vector<std::vector<std::size_t>> flow;   // [t][branch]
    std::size_t slack_bus = 0;
};

/// Lossless DC dispatch over every snapshot: generator output bounded by
/// p_nom * capacity factor, flows tied to angle differences, nodal balance
/// with penalised load shedding, flow limits as variable bounds. The slack
/// bus is the lowest bus id. Throws DataError on a disconnected network.
DispatchModel build_dispatch_model(const Network& network);

inline lp::LinearProgram build_dispatch_lp(const Network& network) { return build_dispatch_model(network).lp; }

struct DispatchResult {
    std::vector<std::vector<double>> dispatch;  // [t][generator], MW
    std::vector<std::vector<double>> flow;      // [t][branch], MW, from -> to
    std::vector<std::vector<double>> angle;     // [t][bus], rad
    std::vector<std::vector<double>> shed;      // [t][bus], MW
    double objective = 0.0;                     // EUR over the weighted horizon
    std::vector<std::string> branch_ids;
};

DispatchResult extract_dispatch(const DispatchModel& model, const lp::LpSolution& solution);

/// Builds and solves the dispatch LP; throws SolverError unless optimal.
DispatchResult solve_dispatch(const Network& network, const lp::SolveOptions& options = {});

/// |flow| / s_nom, indexed [branch][t]. Optional extra capacity per branch
/// (expansion) is added to s_nom.
std::vector<std::vector<double>> loading(const DispatchResult& dispatch, const Network& network,
                                         const std::vector<double>& extra_capacity = {});

struct CandidateSet {
    std::vector<std::string> branch_ids;
    std::vector<bool> is_candidate;
    std::vector<double> max_loading;
    std::vector<double> frac_above;  // share of snapshots strictly above all_threshold

    std::size_t count() const;
    bool contains(const std::string& branch_id) const;
};

/// Candidate iff loading exceeds all_threshold in every snapshot or
/// any_threshold in at least one (strict comparisons).
CandidateSet screen_candidates(const std::vector<std::vector<double>>& loadings,
                               const std::vector<std::string>& branch_ids, double all_threshold = 0.70,
                               double any_threshold = 0.90);

/// Candidate flags onto the network: expandable = expandable && candidate.
Network apply_candidates(const Network& network, const CandidateSet& candidates);

/// Candidate set read back from expandable flags (no loadings).
CandidateSet candidates_from_network(const Network& network);

/// branch_id,is_candidate,max_loading,frac_above_70
void write_candidates(const CandidateSet& candidates, const std::filesystem::path& path);
CandidateSet read_candidates(const std::filesystem::path& path);

}  // namespace gridagg

#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace gridagg::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    double cost = 0.0;
};

struct Term {
    std::size_t var = 0;
    double coef = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

/// Minimisation LP with bounded variables and sparse rows.
class LinearProgram {
public:
    std::size_t add_variable(std::string name, double lower = 0.0, double upper = kInf, double cost = 0.0);
    std::size_t add_constraint(std::string name, std::vector<Term> terms, Relation relation, double rhs);

    void set_cost(std::size_t var, double cost) { variables_.at(var).cost = cost; }
    void set_bounds(std::size_t var, double lower, double upper);

    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    std::size_t variable_count() const { return variables_.size(); }
    std::size_t constraint_count() const { return constraints_.size(); }
    std::size_t nonzeros() const;

    /// Throws std::invalid_argument on lower > upper, NaNs, or dangling
    /// variable references.
    void check() const;

private:
    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string_view to_string(SolveStatus status);

struct LpSolution {
    SolveStatus status = SolveStatus::IterationLimit;
    double objective = 0.0;
    std::vector<double> values;  // per variable
    std::vector<double> duals;   // per constraint: d objective / d rhs
    std::size_t iterations = 0;
    std::size_t phase_one_iterations = 0;
    std::size_t bland_pivots = 0;
    std::vector<std::size_t> entering;  // entering column per iteration
};

struct SolveOptions {
    double tolerance = 1e-7;               // primal feasibility
    double optimality_tolerance = 1e-9;    // reduced costs, relative to cost scale
    std::size_t max_iterations = 200000;
    std::size_t refactor_interval = 64;
    std::size_t degenerate_limit = 50;     // consecutive zero steps before Bland's rule
};

/// Bounded-variable primal revised simplex. Each row gets a bounded
/// logical variable; phase one minimises the sum of bound violations of
/// the basic variables. Dantzig pricing with a Harris ratio test, switching
/// to Bland's rule after a run of degenerate pivots.
LpSolution solve(const LinearProgram& lp, const SolveOptions& options = {});

/// Lagrangian dual bound implied by the solution's duals; never exceeds the
/// optimal primal objective (weak duality) and equals it at an optimal basis.
double dual_objective(const LinearProgram& lp, const LpSolution& solution, double zero_tolerance = 1e-9);

/// Largest violation of any constraint or variable bound by the values.
double max_primal_violation(const LinearProgram& lp, const std::vector<double>& values);

/// Fixed-format MPS (NAME/ROWS/COLUMNS/RHS/BOUNDS/ENDATA), minimisation.
/// Names longer than eight characters or containing blanks are replaced by
/// generated R#######/C####### names for the whole model.
std::string to_mps(const LinearProgram& lp, const std::string& model_name = "GRIDAGG");
void write_mps(const LinearProgram& lp, const std::filesystem::path& path, const std::string& model_name = "GRIDAGG");

}  // namespace gridagg::lp

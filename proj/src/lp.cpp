#include "gridagg/lp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace gridagg::lp {

std::size_t LinearProgram::add_variable(std::string name, double lower, double upper, double cost) {
    variables_.push_back({std::move(name), lower, upper, cost});
    return variables_.size() - 1;
}

std::size_t LinearProgram::add_constraint(std::string name, std::vector<Term> terms, Relation relation, double rhs) {
    constraints_.push_back({std::move(name), std::move(terms), relation, rhs});
    return constraints_.size() - 1;
}

void LinearProgram::set_bounds(std::size_t var, double lower, double upper) {
    auto& v = variables_.at(var);
    v.lower = lower;
    v.upper = upper;
}

std::size_t LinearProgram::nonzeros() const {
    std::size_t nnz = 0;
    for (const auto& c : constraints_) nnz += c.terms.size();
    return nnz;
}

void LinearProgram::check() const {
    for (const auto& v : variables_) {
        if (std::isnan(v.lower) || std::isnan(v.upper) || std::isnan(v.cost) || std::isinf(v.cost))
            throw std::invalid_argument("variable '" + v.name + "' has a non-finite cost or NaN bound");
        if (v.lower > v.upper) throw std::invalid_argument("variable '" + v.name + "' has lower bound above upper");
        if (v.lower == kInf || v.upper == -kInf)
            throw std::invalid_argument("variable '" + v.name + "' has an infinite bound on the wrong side");
    }
    for (const auto& c : constraints_) {
        if (!std::isfinite(c.rhs)) throw std::invalid_argument("constraint '" + c.name + "' has a non-finite rhs");
        for (const auto& t : c.terms) {
            if (t.var >= variables_.size())
                throw std::invalid_argument("constraint '" + c.name + "' references an unknown variable");
            if (!std::isfinite(t.coef))
                throw std::invalid_argument("constraint '" + c.name + "' has a non-finite coefficient");
        }
    }
}

std::string_view to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

namespace {

enum class State : std::uint8_t { Basic, AtLower, AtUpper, Free };

/// Columns 0..n-1 are the structural variables, n..n+m-1 the row logicals:
/// row i reads a_i x - r_i = 0 with r_i bounded by the row's relation.
class Simplex {
public:
    Simplex(const LinearProgram& lp, const SolveOptions& options);
    LpSolution run();

private:
    using SpMat = Eigen::SparseMatrix<double>;

    template <typename Fn>
    void for_column(std::size_t j, Fn&& fn) const {
        if (j < n_) {
            for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) fn(row_idx_[k], values_[k]);
        } else {
            fn(j - n_, -1.0);
        }
    }

    double ptol(double bound) const { return options_.tolerance * std::max(1.0, std::abs(bound)); }
    bool below(std::size_t j) const { return x_[j] < lb_[j] - ptol(lb_[j]); }
    bool above(std::size_t j) const { return x_[j] > ub_[j] + ptol(ub_[j]); }

    void factorize();
    void ftran(std::vector<double>& v) const;
    void btran(std::vector<double>& v) const;
    void compute_primal();
    double infeasibility() const;

    const LinearProgram& lp_;
    SolveOptions options_;
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<std::size_t> col_start_;
    std::vector<std::size_t> row_idx_;
    std::vector<double> values_;
    std::vector<double> lb_, ub_, cost_;
    double cost_scale_ = 1.0;

    std::vector<std::size_t> head_;
    std::vector<State> state_;
    std::vector<double> x_;

    mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
    struct Eta {
        std::size_t row;
        double pivot;
        std::vector<std::pair<std::size_t, double>> entries;  // off-pivot
    };
    std::vector<Eta> etas_;
};

Simplex::Simplex(const LinearProgram& lp, const SolveOptions& options)
    : lp_(lp), options_(options), n_(lp.variable_count()), m_(lp.constraint_count()) {
    // Structural columns in compressed column form; duplicate terms summed.
    std::vector<std::vector<std::pair<std::size_t, double>>> cols(n_);
    for (std::size_t i = 0; i < m_; ++i)
        for (const auto& t : lp.constraints()[i].terms) cols[t.var].push_back({i, t.coef});
    col_start_.assign(n_ + 1, 0);
    for (std::size_t j = 0; j < n_; ++j) {
        auto& c = cols[j];
        std::sort(c.begin(), c.end());
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (!row_idx_.empty() && k > 0 && c[k].first == c[k - 1].first) {
                values_.back() += c[k].second;
                continue;
            }
            row_idx_.push_back(c[k].first);
            values_.push_back(c[k].second);
        }
        col_start_[j + 1] = row_idx_.size();
    }

    lb_.resize(n_ + m_);
    ub_.resize(n_ + m_);
    cost_.assign(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        const auto& v = lp.variables()[j];
        lb_[j] = v.lower;
        ub_[j] = v.upper;
        cost_[j] = v.cost;
        cost_scale_ = std::max(cost_scale_, std::abs(v.cost));
    }
    for (std::size_t i = 0; i < m_; ++i) {
        const auto& c = lp.constraints()[i];
        const std::size_t j = n_ + i;
        switch (c.relation) {
            case Relation::LessEqual: lb_[j] = -kInf; ub_[j] = c.rhs; break;
            case Relation::GreaterEqual: lb_[j] = c.rhs; ub_[j] = kInf; break;
            case Relation::Equal: lb_[j] = c.rhs; ub_[j] = c.rhs; break;
        }
    }

    state_.resize(n_ + m_);
    x_.assign(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        if (std::isfinite(lb_[j])) {
            state_[j] = State::AtLower;
            x_[j] = lb_[j];
        } else if (std::isfinite(ub_[j])) {
            state_[j] = State::AtUpper;
            x_[j] = ub_[j];
        } else {
            state_[j] = State::Free;
        }
    }
    head_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
        head_[i] = n_ + i;
        state_[n_ + i] = State::Basic;
    }
}

void Simplex::factorize() {
    etas_.clear();
    if (m_ == 0) return;
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t p = 0; p < m_; ++p)
        for_column(head_[p], [&](std::size_t i, double v) {
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(p), v);
        });
    SpMat basis(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    basis.setFromTriplets(triplets.begin(), triplets.end());
    basis.makeCompressed();
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    if (lu_.info() != Eigen::Success) throw std::runtime_error("simplex: basis factorization failed: " + lu_.lastErrorMessage());
}

void Simplex::ftran(std::vector<double>& v) const {
    if (m_ == 0) return;
    Eigen::Map<Eigen::VectorXd> vec(v.data(), static_cast<Eigen::Index>(m_));
    Eigen::VectorXd sol = lu_.solve(vec);
    vec = sol;
    for (const auto& eta : etas_) {
        const double pivot_value = v[eta.row] / eta.pivot;
        v[eta.row] = pivot_value;
        if (pivot_value == 0.0) continue;
        for (const auto& [i, a] : eta.entries) v[i] -= a * pivot_value;
    }
}

void Simplex::btran(std::vector<double>& v) const {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double acc = v[it->row];
        for (const auto& [i, a] : it->entries) acc -= a * v[i];
        v[it->row] = acc / it->pivot;
    }
    Eigen::Map<Eigen::VectorXd> vec(v.data(), static_cast<Eigen::Index>(m_));
    Eigen::VectorXd sol = lu_.transpose().solve(vec);
    vec = sol;
}

void Simplex::compute_primal() {
    std::vector<double> rhs(m_, 0.0);
    for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (state_[j] == State::Basic || x_[j] == 0.0) continue;
        for_column(j, [&](std::size_t i, double a) { rhs[i] -= a * x_[j]; });
    }
    ftran(rhs);
    for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] = rhs[p];
}

double Simplex::infeasibility() const {
    double total = 0.0;
    for (std::size_t j : head_) {
        if (below(j)) total += lb_[j] - x_[j];
        else if (above(j)) total += x_[j] - ub_[j];
    }
    return total;
}

LpSolution Simplex::run() {
    LpSolution sol;
    factorize();
    compute_primal();

    const double piv_tol = 1e-9;
    std::size_t since_refactor = 0;
    std::size_t degenerate_run = 0;
    bool bland = false;
    std::vector<double> y(m_), alpha(m_);
    std::vector<double> basic_cost(m_);
    bool phase_one = false;

    for (;;) {
        if (since_refactor >= options_.refactor_interval) {
            factorize();
            compute_primal();
            since_refactor = 0;
        }
        phase_one = infeasibility() > 0.0;

        for (std::size_t p = 0; p < m_; ++p) {
            const std::size_t j = head_[p];
            if (phase_one) basic_cost[p] = below(j) ? -1.0 : (above(j) ? 1.0 : 0.0);
            else basic_cost[p] = cost_[j];
        }
        y = basic_cost;
        btran(y);

        // Pricing.
        const double dtol = phase_one ? options_.optimality_tolerance
                                      : options_.optimality_tolerance * cost_scale_;
        std::size_t entering = n_ + m_;
        double best_score = 0.0;
        int direction = 0;
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            const State s = state_[j];
            if (s == State::Basic) continue;
            if (s != State::Free && lb_[j] == ub_[j]) continue;
            double d = phase_one ? 0.0 : cost_[j];
            for_column(j, [&](std::size_t i, double a) { d -= y[i] * a; });
            int dir = 0;
            if (s == State::AtLower && d < -dtol) dir = 1;
            else if (s == State::AtUpper && d > dtol) dir = -1;
            else if (s == State::Free && std::abs(d) > dtol) dir = d < 0 ? 1 : -1;
            if (dir == 0) continue;
            if (bland) {
                entering = j;
                direction = dir;
                break;
            }
            if (std::abs(d) > best_score) {
                best_score = std::abs(d);
                entering = j;
                direction = dir;
            }
        }

        if (entering == n_ + m_) {
            sol.status = phase_one ? SolveStatus::Infeasible : SolveStatus::Optimal;
            break;
        }
        if (sol.iterations >= options_.max_iterations) {
            sol.status = SolveStatus::IterationLimit;
            break;
        }

        std::fill(alpha.begin(), alpha.end(), 0.0);
        for_column(entering, [&](std::size_t i, double a) { alpha[i] = a; });
        ftran(alpha);

        // Harris two-pass ratio test. Pass one: largest step with bounds
        // relaxed by the feasibility tolerance.
        struct Candidate {
            std::size_t pos;
            double ratio;
            bool to_lower;
        };
        std::vector<Candidate> candidates;
        double theta_max = kInf;
        for (std::size_t p = 0; p < m_; ++p) {
            const double a = alpha[p];
            if (std::abs(a) <= piv_tol) continue;
            const std::size_t j = head_[p];
            const double rate = -direction * a;  // d x_j / d theta
            double target;
            bool to_lower;
            if (phase_one && below(j)) {
                if (rate <= 0.0) continue;
                target = lb_[j];
                to_lower = true;
            } else if (phase_one && above(j)) {
                if (rate >= 0.0) continue;
                target = ub_[j];
                to_lower = false;
            } else if (rate < 0.0) {
                if (!std::isfinite(lb_[j])) continue;
                target = lb_[j];
                to_lower = true;
            } else {
                if (!std::isfinite(ub_[j])) continue;
                target = ub_[j];
                to_lower = false;
            }
            const double tol = ptol(target);
            const double relaxed = (target + (rate > 0.0 ? tol : -tol) - x_[j]) / rate;
            theta_max = std::min(theta_max, std::max(0.0, relaxed));
            candidates.push_back({p, std::max(0.0, (target - x_[j]) / rate), to_lower});
        }

        const double flip = (std::isfinite(lb_[entering]) && std::isfinite(ub_[entering]))
                                ? ub_[entering] - lb_[entering]
                                : kInf;
        const Candidate* leave = nullptr;
        if (bland) {
            double best_ratio = kInf;
            for (const auto& c : candidates) best_ratio = std::min(best_ratio, c.ratio);
            for (const auto& c : candidates) {
                if (c.ratio > best_ratio + 1e-12 * std::max(1.0, best_ratio)) continue;
                if (!leave || head_[c.pos] < head_[leave->pos]) leave = &c;
            }
        } else {
            double best_alpha = 0.0;
            for (const auto& c : candidates) {
                if (c.ratio > theta_max) continue;
                if (std::abs(alpha[c.pos]) > best_alpha) {
                    best_alpha = std::abs(alpha[c.pos]);
                    leave = &c;
                }
            }
        }

        double theta;
        bool bound_flip = false;
        if (leave && !(flip <= leave->ratio)) {
            theta = leave->ratio;
        } else if (std::isfinite(flip)) {
            theta = flip;
            bound_flip = true;
            leave = nullptr;
        } else {
            if (phase_one) {
                // A phase-one ray cannot be unbounded; the basis is numerically
                // stale. Refactor and retry.
                if (since_refactor == 0) {
                    sol.status = SolveStatus::IterationLimit;
                    break;
                }
                since_refactor = options_.refactor_interval;
                continue;
            }
            sol.status = SolveStatus::Unbounded;
            break;
        }

        ++sol.iterations;
        if (phase_one) ++sol.phase_one_iterations;
        if (bland) ++sol.bland_pivots;
        sol.entering.push_back(entering);

        if (theta > 0.0) {
            x_[entering] += direction * theta;
            for (std::size_t p = 0; p < m_; ++p)
                if (alpha[p] != 0.0) x_[head_[p]] -= direction * theta * alpha[p];
        }

        if (theta <= 1e-12) {
            if (++degenerate_run >= options_.degenerate_limit) bland = true;
        } else {
            degenerate_run = 0;
            bland = false;
        }

        if (bound_flip) {
            state_[entering] = direction > 0 ? State::AtUpper : State::AtLower;
            x_[entering] = direction > 0 ? ub_[entering] : lb_[entering];
            continue;
        }

        const std::size_t r = leave->pos;
        const std::size_t out = head_[r];
        x_[out] = leave->to_lower ? lb_[out] : ub_[out];
        state_[out] = leave->to_lower ? State::AtLower : State::AtUpper;
        head_[r] = entering;
        state_[entering] = State::Basic;

        Eta eta{r, alpha[r], {}};
        for (std::size_t p = 0; p < m_; ++p)
            if (p != r && alpha[p] != 0.0) eta.entries.push_back({p, alpha[p]});
        etas_.push_back(std::move(eta));
        ++since_refactor;
    }

    // Clean up the final iterate and report duals for the phase-two costs.
    if (sol.status == SolveStatus::Optimal) {
        factorize();
        compute_primal();
        for (std::size_t p = 0; p < m_; ++p) basic_cost[p] = cost_[head_[p]];
        y = basic_cost;
        btran(y);
    }
    sol.values.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    sol.duals = y;
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sol.objective += cost_[j] * x_[j];
    return sol;
}

}  // namespace

LpSolution solve(const LinearProgram& lp, const SolveOptions& options) {
    lp.check();
    Simplex simplex(lp, options);
    return simplex.run();
}

double dual_objective(const LinearProgram& lp, const LpSolution& solution, double zero_tolerance) {
    const auto& vars = lp.variables();
    const auto& cons = lp.constraints();
    std::vector<double> reduced(vars.size());
    for (std::size_t j = 0; j < vars.size(); ++j) reduced[j] = vars[j].cost;
    for (std::size_t i = 0; i < cons.size(); ++i)
        for (const auto& t : cons[i].terms) reduced[t.var] -= solution.duals[i] * t.coef;

    double scale = 1.0;
    for (const auto& v : vars) scale = std::max(scale, std::abs(v.cost));
    const double tol = zero_tolerance * scale;
    auto bound_term = [&](double d, double lower, double upper) {
        if (std::abs(d) <= tol) return 0.0;
        const double bound = d > 0.0 ? lower : upper;
        return std::isfinite(bound) ? d * bound : -kInf;
    };

    double total = 0.0;
    for (std::size_t j = 0; j < vars.size(); ++j) total += bound_term(reduced[j], vars[j].lower, vars[j].upper);
    for (std::size_t i = 0; i < cons.size(); ++i) {
        double lower = -kInf, upper = kInf;
        switch (cons[i].relation) {
            case Relation::LessEqual: upper = cons[i].rhs; break;
            case Relation::GreaterEqual: lower = cons[i].rhs; break;
            case Relation::Equal: lower = upper = cons[i].rhs; break;
        }
        total += bound_term(solution.duals[i], lower, upper);
    }
    return total;
}

double max_primal_violation(const LinearProgram& lp, const std::vector<double>& values) {
    double worst = 0.0;
    const auto& vars = lp.variables();
    for (std::size_t j = 0; j < vars.size(); ++j) {
        worst = std::max(worst, vars[j].lower - values[j]);
        worst = std::max(worst, values[j] - vars[j].upper);
    }
    for (const auto& c : lp.constraints()) {
        double lhs = 0.0;
        for (const auto& t : c.terms) lhs += t.coef * values[t.var];
        switch (c.relation) {
            case Relation::LessEqual: worst = std::max(worst, lhs - c.rhs); break;
            case Relation::GreaterEqual: worst = std::max(worst, c.rhs - lhs); break;
            case Relation::Equal: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
        }
    }
    return worst;
}

}  // namespace gridagg::lp

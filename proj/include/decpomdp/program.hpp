#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace decpomdp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when a requested construction would exceed a configured size cap.
/// Carries the offending dimension so callers can report it.
struct SizeCapError : std::runtime_error {
    SizeCapError(const std::string& what, const std::string& dimension_, std::uint64_t requested_,
                 std::uint64_t cap_)
        : std::runtime_error(what), dimension(dimension_), requested(requested_), cap(cap_) {}
    std::string dimension;
    std::uint64_t requested;
    std::uint64_t cap;
};

enum class VarKind { continuous, binary, free_var };
enum class Relation { less_equal, equal, greater_equal };
enum class Sense { maximize, minimize };

struct Variable {
    std::string label;
    double lower = 0.0;
    double upper = kInf;
    VarKind kind = VarKind::continuous;
};

/// Sparse constraint row: sum(coeff * var) REL rhs.
struct ConstraintRow {
    std::string label;
    std::vector<std::pair<int, double>> coeffs;
    Relation rel = Relation::equal;
    double rhs = 0.0;
};

/// Ties a program variable back to the domain object it stands for.
/// role: 'x' history weight, 'z' joint history weight, 'w' regret slack,
/// 'y' information-set value, 'b' support indicator. agent/id are the
/// owning agent and history / information-set / joint index.
struct VarMeta {
    char role = '?';
    int agent = -1;
    long id = -1;
};

/// Solver-agnostic mixed 0-1 linear program.
struct MixedIntegerProgram {
    std::string name;
    Sense sense = Sense::maximize;
    std::vector<Variable> vars;
    std::vector<VarMeta> meta;
    std::vector<std::pair<int, double>> objective;
    std::vector<ConstraintRow> rows;

    int add_variable(const std::string& label, double lower, double upper, VarKind kind,
                     VarMeta m = {}) {
        if (kind == VarKind::binary) {
            lower = 0.0;
            upper = 1.0;
        }
        if (kind == VarKind::free_var) {
            lower = -kInf;
            upper = kInf;
        }
        vars.push_back(Variable{label, lower, upper, kind});
        meta.push_back(m);
        index_.emplace(vars.back().label, static_cast<int>(vars.size()) - 1);
        return static_cast<int>(vars.size()) - 1;
    }

    void add_row(ConstraintRow row) { rows.push_back(std::move(row)); }

    void set_objective_coeff(int var, double coeff) { objective.emplace_back(var, coeff); }

    int variable(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end()) throw std::out_of_range("no variable named " + label);
        return it->second;
    }

    bool has_variable(const std::string& label) const { return index_.count(label) > 0; }

    std::size_t num_binaries() const {
        std::size_t n = 0;
        for (const auto& v : vars)
            if (v.kind == VarKind::binary) ++n;
        return n;
    }

    /// Structural sanity: every row references declared variables, binary
    /// variables carry [0,1] bounds, metadata is total.
    void check_well_formed() const {
        if (meta.size() != vars.size()) throw std::logic_error("metadata not total over variables");
        for (const auto& row : rows)
            for (const auto& [v, c] : row.coeffs) {
                (void)c;
                if (v < 0 || v >= static_cast<int>(vars.size()))
                    throw std::logic_error("row " + row.label + " references undeclared variable");
            }
        for (const auto& v : vars)
            if (v.kind == VarKind::binary && (v.lower != 0.0 || v.upper != 1.0))
                throw std::logic_error("binary variable " + v.label + " lacks [0,1] bounds");
    }

  private:
    std::unordered_map<std::string, int> index_;
};

enum class SolveStatus { optimal, infeasible, unbounded, node_limit, time_limit };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::node_limit: return "node-limit";
        case SolveStatus::time_limit: return "time-limit";
    }
    return "?";
}

struct SolveStats {
    long simplex_iterations = 0;
    long nodes_explored = 0;
    double wall_seconds = 0.0;
    double dual_value = 0.0;   // dual objective reconstructed from the final basis
    bool rhs_perturbed = false;
    int refactorizations = 0;
};

struct SolveReport {
    SolveStatus status = SolveStatus::infeasible;
    double value = 0.0;
    std::vector<double> assignment;  // by variable index; empty if no solution
    /// Reduced costs at the final basis in maximization space (zero for
    /// basic variables); filled by LP solves, used for reduced-cost fixing.
    std::vector<double> reduced_costs;
    SolveStats stats;

    double value_of(const MixedIntegerProgram& prog, const std::string& label) const {
        return assignment.at(static_cast<std::size_t>(prog.variable(label)));
    }
};

/// Largest violation of any row/bound by `assignment`, for post-solve checks.
double max_violation(const MixedIntegerProgram& prog, const std::vector<double>& assignment);

}  // namespace decpomdp

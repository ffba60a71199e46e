#include "decpomdp/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "decpomdp/program.hpp"

namespace decpomdp {

namespace {
constexpr double kExtraneousTol = 1e-9;  // numerical slack on the eps* >= 0 certificate
constexpr double kEqualRowTol = 1e-12;
}

bool PrunedSpace::anything_removed() const { return !log.empty(); }

std::vector<int> PrunedSpace::surviving(int agent) const {
    std::vector<int> out;
    const auto& a = alive[agent];
    for (int h = 0; h < static_cast<int>(a.size()); ++h)
        if (a[h]) out.push_back(h);
    return out;
}

std::vector<int> PrunedSpace::surviving_terminals(int agent) const {
    std::vector<int> out;
    const AgentHistorySpace& sp = space->agents[agent];
    for (int h = sp.first_terminal(); h < sp.num_histories(); ++h)
        if (alive[agent][h]) out.push_back(h);
    return out;
}

int PrunedSpace::removed_terminal_count(int agent) const {
    const AgentHistorySpace& sp = space->agents[agent];
    int removed = 0;
    for (int h = sp.first_terminal(); h < sp.num_histories(); ++h)
        if (!alive[agent][h]) ++removed;
    return removed;
}

bool PrunedSpace::live_branch(int agent, int h, int o) const {
    const AgentHistorySpace& sp = space->agents[agent];
    int iset = sp.child_iset[static_cast<std::size_t>(h) * sp.num_obs + o];
    for (int c : sp.info_sets[iset].members)
        if (alive[agent][c]) return true;
    return false;
}

PrunedSpace full_view(const HistorySpace& space) {
    PrunedSpace ps;
    ps.space = &space;
    ps.alive.resize(space.agents.size());
    for (std::size_t i = 0; i < space.agents.size(); ++i)
        ps.alive[i].assign(space.agents[i].num_histories(), 1);
    return ps;
}

namespace {

// Odometer over the other agents' surviving terminal locals. parts[] holds
// per-agent local indices for all agents; the fixed agent's slot is set by
// the caller.
struct ReducedIter {
    const std::vector<std::vector<int>>* lists;  // per agent, locals (fixed agent unused)
    int fixed_agent;
    std::vector<std::size_t> pick;
    bool done = false;

    ReducedIter(const std::vector<std::vector<int>>& lists_, int fixed)
        : lists(&lists_), fixed_agent(fixed), pick(lists_.size(), 0) {
        for (std::size_t i = 0; i < lists_.size(); ++i)
            if (static_cast<int>(i) != fixed && lists_[i].empty()) done = true;
    }
    void fill(std::vector<int>& parts) const {
        for (std::size_t i = 0; i < pick.size(); ++i)
            if (static_cast<int>(i) != fixed_agent) parts[i] = (*lists)[i][pick[i]];
    }
    void next() {
        int i = static_cast<int>(pick.size()) - 1;
        while (i >= 0) {
            if (i == fixed_agent) {
                --i;
                continue;
            }
            if (++pick[i] < (*lists)[i].size()) return;
            pick[i--] = 0;
        }
        done = true;
    }
};

std::vector<std::vector<int>> surviving_terminal_locals(const PrunedSpace& pruned) {
    const HistorySpace& space = *pruned.space;
    std::vector<std::vector<int>> locals(space.agents.size());
    for (std::size_t i = 0; i < space.agents.size(); ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        for (int h = sp.first_terminal(); h < sp.num_histories(); ++h)
            if (pruned.alive[i][h]) locals[i].push_back(sp.local_index(h));
    }
    return locals;
}

}  // namespace

int zero_prob_filter(const JointHistoryTable& table, PrunedSpace& pruned, int iteration) {
    const HistorySpace& space = *pruned.space;
    const int n = static_cast<int>(space.agents.size());
    const int T = space.horizon;
    // One pass over the surviving terminal joints marks which histories still
    // occur with positive probability.
    auto locals = surviving_terminal_locals(pruned);
    std::vector<std::vector<char>> seen(n);
    for (int i = 0; i < n; ++i) seen[i].assign(space.agents[i].count_of_length(T), 0);

    std::vector<std::size_t> pick(n, 0);
    std::vector<int> parts(n);
    bool any_empty = false;
    for (int i = 0; i < n; ++i) any_empty |= locals[i].empty();
    if (!any_empty) {
        while (true) {
            for (int i = 0; i < n; ++i) parts[i] = locals[i][pick[i]];
            if (table.psi_at(T, table.hist_indexer[T].flatten(parts)) > 0.0)
                for (int i = 0; i < n; ++i) seen[i][parts[i]] = 1;
            int i = n - 1;
            while (i >= 0 && ++pick[i] == locals[i].size()) pick[i--] = 0;
            if (i < 0) break;
        }
    }
    int removed = 0;
    for (int i = 0; i < n; ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        for (int local : locals[i]) {
            if (seen[i][local]) continue;
            int h = sp.first_terminal() + local;
            pruned.alive[i][h] = 0;
            pruned.log.push_back({i, h, PruneRecord::zero_prob, iteration});
            ++removed;
        }
    }
    return removed;
}

ExtraneousDecision is_locally_extraneous(int agent, int history, const PrunedSpace& pruned,
                                         const JointHistoryTable& table,
                                         const SimplexOptions& lp) {
    const HistorySpace& space = *pruned.space;
    const AgentHistorySpace& sp = space.agents[agent];
    const int T = space.horizon;
    if (!sp.is_terminal(history))
        throw std::invalid_argument("the dominance test applies to terminal histories");
    std::vector<int> cos;
    for (int c : sp.co_histories(history))
        if (pruned.alive[agent][c]) cos.push_back(c);
    if (cos.empty())
        throw std::invalid_argument("the dominance test needs a surviving co-history");

    auto locals = surviving_terminal_locals(pruned);
    // value rows over the surviving reduced joints, one per candidate history
    std::vector<long> joint_of_reduced;
    std::vector<int> parts(space.agents.size());
    parts[agent] = sp.local_index(history);
    for (ReducedIter it(locals, agent); !it.done; it.next()) {
        it.fill(parts);
        joint_of_reduced.push_back(table.hist_indexer[T].flatten(parts));
    }
    const std::size_t R = joint_of_reduced.size();
    const long stride = table.hist_indexer[T].strides[agent];
    const int base_local = sp.local_index(history);

    MixedIntegerProgram prog;
    prog.name = "dominance-test";
    prog.sense = Sense::minimize;
    int eps = prog.add_variable("eps", -kInf, kInf, VarKind::free_var);
    prog.set_objective_coeff(eps, 1.0);
    std::vector<int> yvars(R);
    for (std::size_t r = 0; r < R; ++r)
        yvars[r] = prog.add_variable("y[" + std::to_string(r) + "]", 0.0, kInf,
                                     VarKind::continuous);
    for (int c : cos) {
        ConstraintRow row;
        row.label = "dom[" + std::to_string(c) + "]";
        long shift = (static_cast<long>(sp.local_index(c)) - base_local) * stride;
        for (std::size_t r = 0; r < R; ++r) {
            double diff = table.value_at(T, joint_of_reduced[r] + shift) -
                          table.value_at(T, joint_of_reduced[r]);
            if (std::abs(diff) >= 1e-12) row.coeffs.emplace_back(yvars[r], diff);
        }
        row.coeffs.emplace_back(eps, -1.0);
        row.rel = Relation::less_equal;
        row.rhs = 0.0;
        prog.add_row(std::move(row));
    }
    ConstraintRow sum;
    sum.label = "simplex";
    for (std::size_t r = 0; r < R; ++r) sum.coeffs.emplace_back(yvars[r], 1.0);
    sum.rel = Relation::equal;
    sum.rhs = 1.0;
    prog.add_row(std::move(sum));

    SolveReport rep = solve_lp(prog, lp);
    if (rep.status != SolveStatus::optimal)
        throw std::runtime_error("dominance LP did not solve to optimality");
    ExtraneousDecision out;
    out.epsilon = rep.value;
    out.extraneous = rep.value >= -kExtraneousTol;
    out.witness.resize(R);
    for (std::size_t r = 0; r < R; ++r) out.witness[r] = rep.assignment[yvars[r]];
    return out;
}

namespace {

// Removal choice for equal-value groups: when h tests extraneous, the victim
// is the highest id among h and its surviving co-histories with identical
// value rows.
int equal_group_victim(int agent, int history, const PrunedSpace& pruned,
                       const JointHistoryTable& table) {
    const HistorySpace& space = *pruned.space;
    const AgentHistorySpace& sp = space.agents[agent];
    const int T = space.horizon;
    auto locals = surviving_terminal_locals(pruned);
    std::vector<int> parts(space.agents.size());
    parts[agent] = sp.local_index(history);
    std::vector<long> joints;
    for (ReducedIter it(locals, agent); !it.done; it.next()) {
        it.fill(parts);
        joints.push_back(table.hist_indexer[T].flatten(parts));
    }
    const long stride = table.hist_indexer[T].strides[agent];
    int victim = history;
    for (int c : sp.co_histories(history)) {
        if (!pruned.alive[agent][c] || c <= victim) continue;
        long shift = (static_cast<long>(sp.local_index(c)) - sp.local_index(history)) * stride;
        bool equal = true;
        for (long j : joints) {
            if (std::abs(table.value_at(T, j + shift) - table.value_at(T, j)) > kEqualRowTol) {
                equal = false;
                break;
            }
        }
        if (equal) victim = c;
    }
    return victim;
}

}  // namespace

PrunedSpace prune(const JointHistoryTable& table, const HistorySpace& space,
                  const PruneOptions& options) {
    PrunedSpace ps = full_view(space);
    const int n = static_cast<int>(space.agents.size());
    int iteration = 0;
    bool changed = true;
    while (changed) {
        ++iteration;
        changed = false;
        if (options.zero_prob && zero_prob_filter(table, ps, iteration) > 0) changed = true;
        if (!options.lp_test) continue;
        for (int i = 0; i < n; ++i) {
            const AgentHistorySpace& sp = space.agents[i];
            for (int h = sp.first_terminal(); h < sp.num_histories(); ++h) {
                if (!ps.alive[i][h]) continue;
                bool has_co = false;
                for (int c : sp.co_histories(h))
                    if (ps.alive[i][c]) has_co = true;
                if (!has_co) continue;
                ExtraneousDecision dec = is_locally_extraneous(i, h, ps, table, options.lp);
                if (!dec.extraneous) continue;
                int victim = equal_group_victim(i, h, ps, table);
                ps.alive[i][victim] = 0;
                ps.log.push_back({i, victim, PruneRecord::lp_dominated, iteration});
                changed = true;
            }
        }
    }
    // orphan pass: drop non-terminal histories with no surviving descendant
    ++iteration;
    for (int i = 0; i < n; ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        for (int t = space.horizon - 1; t >= 1; --t) {
            int first = sp.first_of_length(t);
            for (int h = first; h < first + sp.count_of_length(t); ++h) {
                if (!ps.alive[i][h]) continue;
                bool any_child = false;
                for (int o = 0; o < sp.num_obs && !any_child; ++o)
                    any_child = ps.live_branch(i, h, o);
                if (!any_child) {
                    ps.alive[i][h] = 0;
                    ps.log.push_back({i, h, PruneRecord::orphaned, iteration});
                }
            }
        }
    }
    return ps;
}

PolicyValidationReport validate_policy_over(const AgentHistorySpace& space,
                                            const PrunedSpace* pruned,
                                            const SequencePolicy& policy, double tol) {
    if (!pruned) return validate_policy(space, policy, tol);
    PolicyValidationReport rep;
    const auto& alive = pruned->alive[space.agent];
    double root = 0.0;
    for (int a = 0; a < space.num_actions; ++a)
        if (alive[a]) root += policy.weights[a];
    if (std::abs(root - 1.0) > tol)
        rep.violations.push_back({PolicyViolation::root_sum, 0, -1, root - 1.0});
    for (int h = 0; h < space.num_histories(); ++h) {
        if (!alive[h]) {
            if (std::abs(policy.weights[h]) > tol)
                rep.violations.push_back({PolicyViolation::negative, -1, h, policy.weights[h]});
            continue;
        }
        if (policy.weights[h] < -tol)
            rep.violations.push_back({PolicyViolation::negative, -1, h, policy.weights[h]});
        if (space.is_terminal(h)) continue;
        for (int o = 0; o < space.num_obs; ++o) {
            if (!pruned->live_branch(space.agent, h, o)) continue;
            int iset = space.child_iset[static_cast<std::size_t>(h) * space.num_obs + o];
            double sum = -policy.weights[h];
            for (int c : space.info_sets[iset].members)
                if (alive[c]) sum += policy.weights[c];
            if (std::abs(sum) > tol)
                rep.violations.push_back({PolicyViolation::flow, iset, -1, sum});
        }
    }
    return rep;
}

}  // namespace decpomdp

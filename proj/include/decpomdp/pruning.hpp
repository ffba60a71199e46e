#pragma once

#include <string>
#include <vector>

#include "decpomdp/seqform.hpp"
#include "decpomdp/simplex.hpp"

namespace decpomdp {

struct PruneRecord {
    int agent = -1;
    int history = -1;
    enum Reason { zero_prob, lp_dominated, orphaned } reason = zero_prob;
    int iteration = 0;
};

inline const char* to_string(PruneRecord::Reason r) {
    switch (r) {
        case PruneRecord::zero_prob: return "zero-prob";
        case PruneRecord::lp_dominated: return "lp-dominated";
        case PruneRecord::orphaned: return "orphaned";
    }
    return "?";
}

/// Surviving history sets after iterated elimination, plus the prune log.
/// A non-terminal history survives as long as it keeps at least one
/// surviving terminal descendant; an observation branch (h,o) may die
/// entirely, in which case the policy constraints drop its flow row.
struct PrunedSpace {
    const HistorySpace* space = nullptr;
    std::vector<std::vector<char>> alive;  // [agent][history id]
    std::vector<PruneRecord> log;

    bool is_alive(int agent, int h) const {
        return alive[static_cast<std::size_t>(agent)][static_cast<std::size_t>(h)] != 0;
    }
    bool anything_removed() const;
    std::vector<int> surviving(int agent) const;
    std::vector<int> surviving_terminals(int agent) const;
    int removed_terminal_count(int agent) const;
    /// True when some surviving child h.o.a exists for this branch.
    bool live_branch(int agent, int h, int o) const;
};

/// All-alive view of a space (the identity pruning).
PrunedSpace full_view(const HistorySpace& space);

struct PruneOptions {
    bool zero_prob = true;
    bool lp_test = true;
    SimplexOptions lp;
};

/// Step 2: removes every surviving terminal history whose joint occurrence
/// probability is zero against every surviving reduced joint history.
/// Returns the number of removals.
int zero_prob_filter(const JointHistoryTable& table, PrunedSpace& pruned, int iteration = 1);

struct ExtraneousDecision {
    bool extraneous = false;
    double epsilon = 0.0;          // the LP optimum
    std::vector<double> witness;   // distribution over surviving reduced joints
};

/// The dominance LP: minimize eps subject to, for every surviving co-history
/// h', sum_j' y(j') (value(h',j') - value(h,j')) <= eps, with y a probability
/// distribution over the surviving reduced terminal joints. Extraneous iff
/// eps* >= -1e-9. Requires a surviving co-history.
ExtraneousDecision is_locally_extraneous(int agent, int history, const PrunedSpace& pruned,
                                         const JointHistoryTable& table,
                                         const SimplexOptions& lp = {});

/// The full procedure: cache values, repeat zero-probability and dominance
/// sweeps (agents round-robin, histories ascending, removals applied
/// immediately) until a fixed point, then remove non-terminal histories with
/// no surviving terminal descendant, bottom-up.
PrunedSpace prune(const JointHistoryTable& table, const HistorySpace& space,
                  const PruneOptions& options = {});

/// Policy-constraint check over a possibly pruned space: root and flow rows
/// are restricted to surviving histories and live branches.
PolicyValidationReport validate_policy_over(const AgentHistorySpace& space,
                                            const PrunedSpace* pruned,
                                            const SequencePolicy& policy, double tol);

}  // namespace decpomdp

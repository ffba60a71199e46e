#pragma once

#include "decpomdp/program.hpp"
#include "decpomdp/simplex.hpp"

namespace decpomdp {

struct MilpOptions {
    long node_cap = -1;         // < 0: unlimited
    double time_cap_secs = -1;  // < 0: unlimited
    /// Seeds the incumbent objective value without an attached solution
    /// (the shorter-horizon lower-bound cut workflow).
    double warm_bound = -kInf;
    bool use_warm_bound = false;
    /// Depth-first search re-anchors on the best-bound open node this often.
    long best_bound_restart = 10000;
    /// Progress line to stderr every this many nodes (0 = quiet).
    long log_every = 0;
    SimplexOptions lp;
};

/// Depth-first branch and bound over the binary variables of `prog`.
/// Node relaxations are solved by solve_lp; branching picks the most
/// fractional binary (ties toward the lowest variable index); nodes whose
/// relaxation value is at most incumbent - 1e-9 are pruned; integrality
/// tolerance is 1e-6.
SolveReport solve_milp(const MixedIntegerProgram& prog, const MilpOptions& options = {});

}  // namespace decpomdp

#include "decpomdp/seqform.hpp"

namespace decpomdp {

struct AltMaxResult {
    JointSequencePolicy policy;
    double value = 0.0;
    int rounds = 0;  // full best-response cycles performed
};

/// Cycles through the agents, replacing each policy by a best response to
/// the others (a vertex of the policy polytope, hence pure), until a full
/// cycle improves the value by less than 1e-9. The result is a Nash
/// equilibrium of the identical-interest game.
AltMaxResult alternating_maximization(const JointHistoryTable& table, const HistorySpace& space,
                                      const JointSequencePolicy& start, int max_rounds = 1000,
                                      const SimplexOptions& lp = {});

}  // namespace decpomdp

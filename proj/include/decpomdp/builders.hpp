#pragma once

#include <optional>
#include <string>

#include "decpomdp/program.hpp"
#include "decpomdp/pruning.hpp"
#include "decpomdp/seqform.hpp"

namespace decpomdp {

// Deterministic variable labels; hid and iid are global history/info-set
// ids, jid is the full-space terminal joint index.
std::string x_label(int agent, int hid);
std::string z_label(long jid);
std::string w_label(int agent, int hid);
std::string y_label(int agent, int iid);
std::string b_label(int agent, int iid);

/// Adds the policy-constraint block of one agent: x variables (binary
/// terminals when `binary_terminals`), the root row, and one flow row per
/// live observation branch. Dead branches of a pruned space get no row.
void append_policy_constraints(MixedIntegerProgram& prog, const AgentHistorySpace& space,
                               const PrunedSpace* pruned, bool binary_terminals);

/// The combinatorial MILP: x per history, z per surviving terminal joint
/// history, value objective over z, per-history linking rows and the joint
/// count row. Throws SizeCapError when the z count would exceed `z_cap`.
MixedIntegerProgram build_milp(const JointHistoryTable& table, const HistorySpace& space,
                               const PrunedSpace* pruned = nullptr, long z_cap = 2000000);

/// Per-history upper bounds on regret, clipped below at zero.
struct RegretBounds {
    std::vector<std::vector<double>> bound;  // [agent][history id]
};

RegretBounds compute_regret_bounds(const JointHistoryTable& table, const HistorySpace& space,
                                   const PrunedSpace* pruned = nullptr);

/// The game-theoretic MILP for exactly two agents: x/w/b per history, y per
/// information set, objective y_1({}), best-response rows and linearized
/// complementarity. Solutions may be stochastic.
MixedIntegerProgram build_milp2(const JointHistoryTable& table, const HistorySpace& space,
                                const RegretBounds& bounds, const PrunedSpace* pruned = nullptr);

/// The n-agent variant: adds z variables with linking/count rows and states
/// each agent's terminal best-response row through z.
MixedIntegerProgram build_milpn(const JointHistoryTable& table, const HistorySpace& space,
                                const RegretBounds& bounds, const PrunedSpace* pruned = nullptr,
                                long z_cap = 2000000);

/// The model seen by a single centralized controller (joint alphabets).
DecPomdp centralized_view(const DecPomdp& model);

/// Pure LP whose optimum is the centralized (POMDP) value, an upper bound on
/// the decentralized optimum. Variables are the joint-history weights.
MixedIntegerProgram build_pomdp_lp(const DecPomdp& model, long per_agent_cap = 10000000,
                                   long joint_cap = 50000000);

/// objective <= bound; +infinity leaves the program unchanged.
void add_upper_bound_cut(MixedIntegerProgram& prog, double bound);
/// objective >= v_prev + min_{s,a} R(s,a).
void add_lower_bound_cut(MixedIntegerProgram& prog, double v_prev, const DecPomdp& model);
double min_reward(const DecPomdp& model);

/// Optimistic value of each information set against any opponent policy:
/// terminal sets are bounded through the fixed opponent support mass, inner
/// sets aggregate their best member's observation sum. y_i(phi) <= cap rows
/// cut only unreached information sets whose value floats freely in the
/// relaxation, so the optimum and every optimal policy survive; they let
/// branch and bound prune the regret programs at realistic values.
std::vector<std::vector<double>> info_set_value_caps(const JointHistoryTable& table,
                                                     const HistorySpace& space,
                                                     const PrunedSpace* pruned = nullptr);

/// Adds the cap rows to a program with y variables (a no-op otherwise).
void add_value_cap_cuts(MixedIntegerProgram& prog, const JointHistoryTable& table,
                        const HistorySpace& space, const PrunedSpace* pruned = nullptr);

/// Best response of one agent to the other agents' fixed sequence-form
/// policies: the policy polytope with the induced linear objective.
MixedIntegerProgram build_best_response_lp(const JointHistoryTable& table,
                                           const HistorySpace& space, int agent,
                                           const JointSequencePolicy& others,
                                           const PrunedSpace* pruned = nullptr);

/// Post-pruning constraint adjustments: the joint count row and the
/// per-history linking rows become <=.
void apply_pruned_adjustments(MixedIntegerProgram& prog, const PrunedSpace& pruned);

struct ExtractedPolicy {
    JointSequencePolicy policy;
    double value = 0.0;  // re-evaluated through the joint history table
};

/// Reads the x variables of a solved program back into per-agent policies,
/// rounding binaries (within 1e-6) and rebuilding non-terminal weights for
/// pure programs; validates the policy constraints and re-evaluates the
/// value, which must match the solver objective within 1e-6.
ExtractedPolicy extract_joint_policy(const MixedIntegerProgram& prog, const SolveReport& report,
                                     const JointHistoryTable& table, const HistorySpace& space,
                                     const PrunedSpace* pruned = nullptr);

}  // namespace decpomdp

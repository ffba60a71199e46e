#pragma once

#include <string>
#include <vector>

#include "decpomdp/model.hpp"

namespace decpomdp {

/// One agent history: alternating action/observation sequence ending in an
/// action. Ids are dense ranks in (length, lexicographic) order.
struct History {
    int id = -1;
    int length = 0;            // number of actions
    int parent = -1;           // id of the length-1 prefix; -1 for length-1 histories
    int last_action = -1;
    int obs_from_parent = -1;  // observation between parent and this; -1 for length 1
    int info_set = -1;         // id of the information set this history extends
};

/// History minus its last action; id 0 is the null information set.
struct InfoSet {
    int id = -1;
    int length = 0;            // actions it contains
    int parent_history = -1;   // history it extends; -1 for the null set
    int obs = -1;              // observation appended to the parent history
    std::vector<int> members;  // histories h with phi(h) == this
};

struct AgentHistorySpace {
    int agent = -1;
    int num_actions = 0;
    int num_obs = 0;
    int horizon = 0;
    std::vector<History> histories;
    std::vector<InfoSet> info_sets;
    std::vector<int> length_offset;          // first history id per length (index 1..T)
    std::vector<int> iset_length_offset;     // first info-set id per length (index 0..T-1)
    std::vector<int> child_iset;             // [h * num_obs + o] -> info set id of h.o

    int num_histories() const { return static_cast<int>(histories.size()); }
    int first_of_length(int t) const { return length_offset[t]; }
    int count_of_length(int t) const { return length_offset[t + 1] - length_offset[t]; }
    int local_index(int h) const { return h - length_offset[histories[h].length]; }
    bool is_terminal(int h) const { return histories[h].length == horizon; }
    int num_terminal() const { return count_of_length(horizon); }
    int first_terminal() const { return first_of_length(horizon); }

    int iset_first_of_length(int t) const { return iset_length_offset[t]; }
    int iset_count_of_length(int t) const {
        return iset_length_offset[t + 1] - iset_length_offset[t];
    }
    int iset_local_index(int i) const { return i - iset_length_offset[info_sets[i].length]; }

    /// Histories in the same information set with a different last action.
    std::vector<int> co_histories(int h) const;
    /// Action/observation element sequence a1.o2.a2...ot.at of history h.
    std::vector<int> elements(int h) const;
    std::string history_label(const DecPomdp& model, int h) const;
    std::string infoset_label(const DecPomdp& model, int i) const;
};

struct HistorySpace {
    int horizon = 0;
    std::vector<AgentHistorySpace> agents;
};

/// Enumerates every history of length 1..T per agent, with parent/child,
/// information-set and co-history structure. Throws SizeCapError when an
/// agent's history count would exceed `per_agent_cap`.
HistorySpace enumerate_histories(const DecPomdp& model, long per_agent_cap = 10000000);

/// Per joint history: occurrence probability Psi, accumulated expected
/// reward Rbar, and value (their product), for every length 1..T. Beliefs
/// are memoized per joint prefix node (one belief per joint information
/// set), since they depend only on the prefix.
struct JointHistoryTable {
    int horizon = 0;
    int num_agents = 0;
    int num_states = 0;
    std::vector<JointIndexer> hist_indexer;  // [t] over per-agent local history ids
    std::vector<JointIndexer> iset_indexer;  // [t] over per-agent local info-set ids
    std::vector<std::vector<double>> psi;    // [t][joint local]
    std::vector<std::vector<double>> rbar;   // [t][joint local]
    std::vector<std::vector<double>> value;  // [t][joint local]; zero whenever psi is zero
    std::vector<std::vector<double>> node_belief;  // [t][joint iset local * S + s]
    std::vector<std::vector<char>> node_reachable; // [t][joint iset local]

    long num_joint(int t) const { return hist_indexer[t].total; }
    double psi_at(int t, long j) const { return psi[t][static_cast<std::size_t>(j)]; }
    double value_at(int t, long j) const { return value[t][static_cast<std::size_t>(j)]; }
    double rbar_at(int t, long j) const { return rbar[t][static_cast<std::size_t>(j)]; }
    /// Belief sequence beta^0..beta^(t-1) of a joint history given per-agent
    /// local indices at length t.
    std::vector<Belief> belief_sequence(int t, std::vector<int> locals) const;
};

JointHistoryTable build_joint_table(const DecPomdp& model, const HistorySpace& space,
                                    long joint_cap = 50000000);

/// Realization weights over one agent's histories.
struct SequencePolicy {
    int agent = -1;
    std::vector<double> weights;  // by history id

    bool is_pure(double tol = 1e-6) const;
};

struct JointSequencePolicy {
    std::vector<SequencePolicy> agents;
};

/// Value of a joint policy: sum over terminal joint histories of the joint
/// weight times the history value.
double policy_value(const JointHistoryTable& table, const HistorySpace& space,
                    const JointSequencePolicy& policy);

/// Realization weights of a pure tree policy: the product of indicators that
/// each action in the history matches the tree at its observation prefix.
SequencePolicy policy_from_tree(const TreePolicy& tree, const AgentHistorySpace& space);

/// Recovers the action-observation tree of a pure sequence-form policy.
/// Observation sequences whose realization weight is zero everywhere (they
/// only exist over pruned spaces) fall back to action 0. Throws
/// std::invalid_argument on strictly stochastic policies.
TreePolicy tree_from_policy(const SequencePolicy& policy, const AgentHistorySpace& space);

struct PolicyViolation {
    enum Kind { root_sum, flow, negative } kind;
    int info_set = -1;  // labeling constraint (flow/root); -1 for bound violations
    int history = -1;   // offending history for bound violations
    double residual = 0.0;
};

struct PolicyValidationReport {
    std::vector<PolicyViolation> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks the policy constraint system (root sum, flow conservation,
/// nonnegativity) within 1e-9, reporting each violated constraint with its
/// information-set label.
PolicyValidationReport validate_policy(const AgentHistorySpace& space,
                                       const SequencePolicy& policy, double tol = 1e-9);

/// Sum of terminal weights (equals |O_i|^(T-1) for a valid policy).
double terminal_weight_sum(const AgentHistorySpace& space, const SequencePolicy& policy);

}  // namespace decpomdp

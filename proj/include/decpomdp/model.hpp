#pragma once

#include <span>
#include <string>
#include <vector>

namespace decpomdp {

/// Mixed-radix flattening of per-agent indices into a single joint index,
/// row-major with agent 1 slowest.
struct JointIndexer {
    std::vector<int> sizes;
    std::vector<long> strides;
    long total = 1;

    JointIndexer() = default;
    explicit JointIndexer(std::vector<int> sizes_) : sizes(std::move(sizes_)) {
        strides.assign(sizes.size(), 1);
        for (int i = static_cast<int>(sizes.size()) - 2; i >= 0; --i)
            strides[i] = strides[i + 1] * sizes[i + 1];
        total = sizes.empty() ? 1 : strides[0] * sizes[0];
    }
    long flatten(std::span<const int> parts) const {
        long idx = 0;
        for (std::size_t i = 0; i < sizes.size(); ++i) idx += strides[i] * parts[i];
        return idx;
    }
    void unflatten(long idx, std::span<int> parts) const {
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            parts[i] = static_cast<int>(idx / strides[i]);
            idx %= strides[i];
        }
    }
    int part(long idx, std::size_t agent) const {
        return static_cast<int>(idx / strides[agent] % sizes[agent]);
    }
};

struct AgentSpec {
    std::vector<std::string> actions;
    std::vector<std::string> observations;
};

/// Finite-horizon DEC-POMDP with dense stochastic tables. Joint actions and
/// observations are flattened row-major over agents (agent 1 slowest).
/// Immutable in practice once validated.
struct DecPomdp {
    std::string name;
    std::vector<AgentSpec> agents;
    std::vector<std::string> states;
    std::vector<double> initial_belief;
    int horizon = 1;

    std::vector<double> transition;   // [s][ja][s']
    std::vector<double> observation;  // [ja][s'][jo]
    std::vector<double> reward;       // [s][ja]

    JointIndexer action_indexer;
    JointIndexer obs_indexer;

    int num_agents() const { return static_cast<int>(agents.size()); }
    int num_states() const { return static_cast<int>(states.size()); }
    long num_joint_actions() const { return action_indexer.total; }
    long num_joint_obs() const { return obs_indexer.total; }

    double p(int s, long ja, int s2) const {
        return transition[(static_cast<long>(s) * num_joint_actions() + ja) * num_states() + s2];
    }
    double& p(int s, long ja, int s2) {
        return transition[(static_cast<long>(s) * num_joint_actions() + ja) * num_states() + s2];
    }
    double g(long ja, int s2, long jo) const {
        return observation[(ja * num_states() + s2) * num_joint_obs() + jo];
    }
    double& g(long ja, int s2, long jo) {
        return observation[(ja * num_states() + s2) * num_joint_obs() + jo];
    }
    double r(int s, long ja) const { return reward[static_cast<long>(s) * num_joint_actions() + ja]; }
    double& r(int s, long ja) { return reward[static_cast<long>(s) * num_joint_actions() + ja]; }

    /// Allocates zeroed tables once agents/states are set.
    void allocate();
};

/// Creates an empty model shell with the given alphabets.
DecPomdp make_model(std::string name, int horizon, std::vector<std::string> states,
                    std::vector<AgentSpec> agents);

/// Probability vector over states; the all-zero vector flagged `unreachable`
/// stands for a branch of observation probability zero.
struct Belief {
    std::vector<double> probs;
    bool unreachable = false;

    static Belief point_mass(int num_states, int s) {
        Belief b;
        b.probs.assign(num_states, 0.0);
        b.probs[s] = 1.0;
        return b;
    }
    static Belief unreachable_belief(int num_states) {
        Belief b;
        b.probs.assign(num_states, 0.0);
        b.unreachable = true;
        return b;
    }
};

/// Pure policy of one agent as an action-observation tree: an action for
/// every own-observation sequence of length 0..T-1. Nodes are indexed by
/// (length, lexicographic) rank of the observation sequence.
struct TreePolicy {
    int num_obs = 1;
    int horizon = 1;
    std::vector<long> level_offset;  // node id of the first sequence of each length
    std::vector<int> actions;        // -1 = unassigned

    TreePolicy() = default;
    TreePolicy(int num_obs_, int horizon_);

    long num_nodes() const { return static_cast<long>(actions.size()); }
    long child(long node, int length, int obs) const {
        // node holds a sequence of `length` observations; child appends obs
        long rank = node - level_offset[length];
        return level_offset[length + 1] + rank * num_obs + obs;
    }
    long node_of(std::span<const int> obs_seq) const;
    int action_at(std::span<const int> obs_seq) const { return actions[node_of(obs_seq)]; }
    void set_action(std::span<const int> obs_seq, int action) {
        actions[node_of(obs_seq)] = action;
    }
};

struct ValidationIssue {
    std::string table;        // "transition", "observation_fn", "start", ...
    std::vector<long> index;  // offending indices, table-specific
    double value = 0.0;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

/// Checks the stochasticity invariants (rows sum to one within 1e-9, entries
/// in [0,1], belief over S sums to one) and reports every violation.
ValidationReport validate_model(const DecPomdp& model);

/// Renormalizes rows that are within tolerance of stochastic; throws
/// std::invalid_argument when validate_model fails.
void normalize_model(DecPomdp& model);

/// T(o | beta, a) = sum_s beta(s) sum_s' P(s,a,s') G(a,s',o).
double obs_prob(const DecPomdp& model, const Belief& belief, long ja, long jo);

/// Bayes update of `belief` under (a, o); the all-zero `unreachable` belief
/// when the observation has probability zero.
Belief belief_update(const DecPomdp& model, const Belief& belief, long ja, long jo);

/// R(beta, a) = sum_s beta(s) R(s, a).
double expected_reward(const DecPomdp& model, const Belief& belief, long ja);

/// Value of a pure joint policy by the finite-horizon Bellman recursion;
/// zero-probability observation branches contribute nothing and are not
/// expanded.
double evaluate_tree_policy(const DecPomdp& model, const std::vector<TreePolicy>& policy);

}  // namespace decpomdp

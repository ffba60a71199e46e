#include "decpomdp/model.hpp"

#include <cmath>
#include <stdexcept>

namespace decpomdp {

namespace {
constexpr double kProbTol = 1e-9;
}

void DecPomdp::allocate() {
    std::vector<int> asz, osz;
    for (const auto& a : agents) {
        asz.push_back(static_cast<int>(a.actions.size()));
        osz.push_back(static_cast<int>(a.observations.size()));
    }
    action_indexer = JointIndexer(asz);
    obs_indexer = JointIndexer(osz);
    transition.assign(static_cast<std::size_t>(num_states()) * num_joint_actions() * num_states(),
                      0.0);
    observation.assign(static_cast<std::size_t>(num_joint_actions()) * num_states() * num_joint_obs(),
                       0.0);
    reward.assign(static_cast<std::size_t>(num_states()) * num_joint_actions(), 0.0);
    initial_belief.assign(num_states(), 0.0);
}

DecPomdp make_model(std::string name, int horizon, std::vector<std::string> states,
                    std::vector<AgentSpec> agents) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (agents.size() < 1) throw std::invalid_argument("at least one agent required");
    DecPomdp m;
    m.name = std::move(name);
    m.horizon = horizon;
    m.states = std::move(states);
    m.agents = std::move(agents);
    m.allocate();
    return m;
}

TreePolicy::TreePolicy(int num_obs_, int horizon_) : num_obs(num_obs_), horizon(horizon_) {
    level_offset.assign(horizon + 1, 0);
    long count = 1;
    for (int t = 0; t < horizon; ++t) {
        level_offset[t + 1] = level_offset[t] + count;
        count *= num_obs;
    }
    actions.assign(level_offset[horizon], -1);
}

long TreePolicy::node_of(std::span<const int> obs_seq) const {
    int len = static_cast<int>(obs_seq.size());
    if (len >= horizon) throw std::out_of_range("observation sequence too long for the horizon");
    long rank = 0;
    for (int o : obs_seq) rank = rank * num_obs + o;
    return level_offset[len] + rank;
}

ValidationReport validate_model(const DecPomdp& model) {
    ValidationReport rep;
    const int S = model.num_states();
    const long A = model.num_joint_actions();
    const long O = model.num_joint_obs();

    for (int s = 0; s < S; ++s)
        for (long a = 0; a < A; ++a) {
            double sum = 0.0;
            for (int s2 = 0; s2 < S; ++s2) {
                double v = model.p(s, a, s2);
                if (v < -kProbTol || v > 1.0 + kProbTol)
                    rep.issues.push_back({"transition",
                                          {s, a, s2},
                                          v,
                                          "P entry out of [0,1] at (s=" + std::to_string(s) +
                                              ", a=" + std::to_string(a) +
                                              ", s'=" + std::to_string(s2) + ")"});
                sum += v;
            }
            if (std::abs(sum - 1.0) > kProbTol)
                rep.issues.push_back({"transition",
                                      {s, a},
                                      sum,
                                      "P row (s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                                          ") sums to " + std::to_string(sum)});
        }

    for (long a = 0; a < A; ++a)
        for (int s2 = 0; s2 < S; ++s2) {
            double sum = 0.0;
            for (long o = 0; o < O; ++o) {
                double v = model.g(a, s2, o);
                if (v < -kProbTol || v > 1.0 + kProbTol)
                    rep.issues.push_back({"observation_fn",
                                          {a, s2, o},
                                          v,
                                          "G entry out of [0,1] at (a=" + std::to_string(a) +
                                              ", s'=" + std::to_string(s2) +
                                              ", o=" + std::to_string(o) + ")"});
                sum += v;
            }
            if (std::abs(sum - 1.0) > kProbTol)
                rep.issues.push_back({"observation_fn",
                                      {a, s2},
                                      sum,
                                      "G row (a=" + std::to_string(a) + ", s'=" +
                                          std::to_string(s2) + ") sums to " + std::to_string(sum)});
        }

    double asum = 0.0;
    for (int s = 0; s < S; ++s) {
        double v = model.initial_belief[s];
        if (v < -kProbTol || v > 1.0 + kProbTol)
            rep.issues.push_back(
                {"start", {s}, v, "alpha entry out of [0,1] at s=" + std::to_string(s)});
        asum += v;
    }
    if (std::abs(asum - 1.0) > kProbTol)
        rep.issues.push_back({"start", {}, asum, "alpha sums to " + std::to_string(asum)});
    return rep;
}

void normalize_model(DecPomdp& model) {
    ValidationReport rep = validate_model(model);
    if (!rep.ok())
        throw std::invalid_argument("model rejected: " + rep.issues.front().message +
                                    (rep.issues.size() > 1
                                         ? " (and " + std::to_string(rep.issues.size() - 1) +
                                               " more issues)"
                                         : ""));
    const int S = model.num_states();
    const long A = model.num_joint_actions();
    const long O = model.num_joint_obs();
    for (int s = 0; s < S; ++s)
        for (long a = 0; a < A; ++a) {
            double sum = 0.0;
            for (int s2 = 0; s2 < S; ++s2) sum += model.p(s, a, s2);
            for (int s2 = 0; s2 < S; ++s2) model.p(s, a, s2) /= sum;
        }
    for (long a = 0; a < A; ++a)
        for (int s2 = 0; s2 < S; ++s2) {
            double sum = 0.0;
            for (long o = 0; o < O; ++o) sum += model.g(a, s2, o);
            for (long o = 0; o < O; ++o) model.g(a, s2, o) /= sum;
        }
    double asum = 0.0;
    for (double v : model.initial_belief) asum += v;
    for (double& v : model.initial_belief) v /= asum;
}

double obs_prob(const DecPomdp& model, const Belief& belief, long ja, long jo) {
    if (static_cast<int>(belief.probs.size()) != model.num_states())
        throw std::invalid_argument("belief dimension does not match the state space");
    const int S = model.num_states();
    double total = 0.0;
    for (int s = 0; s < S; ++s) {
        double bs = belief.probs[s];
        if (bs == 0.0) continue;
        double inner = 0.0;
        for (int s2 = 0; s2 < S; ++s2) inner += model.p(s, ja, s2) * model.g(ja, s2, jo);
        total += bs * inner;
    }
    return total;
}

Belief belief_update(const DecPomdp& model, const Belief& belief, long ja, long jo) {
    if (static_cast<int>(belief.probs.size()) != model.num_states())
        throw std::invalid_argument("belief dimension does not match the state space");
    const int S = model.num_states();
    Belief out;
    out.probs.assign(S, 0.0);
    double total = 0.0;
    for (int s2 = 0; s2 < S; ++s2) {
        double pred = 0.0;
        for (int s = 0; s < S; ++s) pred += belief.probs[s] * model.p(s, ja, s2);
        double v = model.g(ja, s2, jo) * pred;
        out.probs[s2] = v;
        total += v;
    }
    if (total <= 0.0) return Belief::unreachable_belief(S);
    for (double& v : out.probs) v /= total;
    return out;
}

double expected_reward(const DecPomdp& model, const Belief& belief, long ja) {
    const int S = model.num_states();
    double v = 0.0;
    for (int s = 0; s < S; ++s) v += belief.probs[s] * model.r(s, ja);
    return v;
}

namespace {

double tree_value_rec(const DecPomdp& model, const std::vector<TreePolicy>& policy,
                      const Belief& belief, std::vector<long>& nodes, int period) {
    const int n = model.num_agents();
    std::vector<int> acts(n);
    for (int i = 0; i < n; ++i) {
        int a = policy[i].actions[nodes[i]];
        if (a < 0)
            throw std::invalid_argument("tree policy of agent " + std::to_string(i) +
                                        " has no action for a reachable observation sequence");
        acts[i] = a;
    }
    long ja = model.action_indexer.flatten(acts);
    double value = expected_reward(model, belief, ja);
    if (period == model.horizon) return value;

    const long O = model.num_joint_obs();
    std::vector<int> obs(n);
    std::vector<long> child_nodes(n);
    for (long jo = 0; jo < O; ++jo) {
        double tp = obs_prob(model, belief, ja, jo);
        if (tp <= 0.0) continue;
        model.obs_indexer.unflatten(jo, obs);
        Belief next = belief_update(model, belief, ja, jo);
        for (int i = 0; i < n; ++i)
            child_nodes[i] = policy[i].child(nodes[i], period - 1, obs[i]);
        value += tp * tree_value_rec(model, policy, next, child_nodes, period + 1);
    }
    return value;
}

}  // namespace

double evaluate_tree_policy(const DecPomdp& model, const std::vector<TreePolicy>& policy) {
    if (static_cast<int>(policy.size()) != model.num_agents())
        throw std::invalid_argument("one tree policy per agent required");
    for (int i = 0; i < model.num_agents(); ++i)
        if (policy[i].horizon != model.horizon ||
            policy[i].num_obs != static_cast<int>(model.agents[i].observations.size()))
            throw std::invalid_argument("tree policy of agent " + std::to_string(i) +
                                        " does not cover this model/horizon");
    Belief alpha;
    alpha.probs = model.initial_belief;
    std::vector<long> roots(model.num_agents(), 0);
    return tree_value_rec(model, policy, alpha, roots, 1);
}

}  // namespace decpomdp

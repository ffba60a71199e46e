#include "decpomdp/seqform.hpp"

#include <cmath>
#include <stdexcept>

#include "decpomdp/program.hpp"

namespace decpomdp {

std::vector<int> AgentHistorySpace::co_histories(int h) const {
    std::vector<int> out;
    for (int m : info_sets[histories[h].info_set].members)
        if (m != h) out.push_back(m);
    return out;
}

std::vector<int> AgentHistorySpace::elements(int h) const {
    std::vector<int> rev;
    int cur = h;
    while (cur >= 0) {
        rev.push_back(histories[cur].last_action);
        if (histories[cur].obs_from_parent >= 0) rev.push_back(histories[cur].obs_from_parent);
        cur = histories[cur].parent;
    }
    return {rev.rbegin(), rev.rend()};
}

std::string AgentHistorySpace::history_label(const DecPomdp& model, int h) const {
    auto els = elements(h);
    std::string out;
    for (std::size_t k = 0; k < els.size(); ++k) {
        if (k) out += '.';
        out += k % 2 == 0 ? model.agents[agent].actions[els[k]]
                          : model.agents[agent].observations[els[k]];
    }
    return out;
}

std::string AgentHistorySpace::infoset_label(const DecPomdp& model, int i) const {
    const InfoSet& is = info_sets[i];
    if (is.parent_history < 0) return "{}";
    return history_label(model, is.parent_history) + "." +
           model.agents[agent].observations[is.obs];
}

HistorySpace enumerate_histories(const DecPomdp& model, long per_agent_cap) {
    HistorySpace out;
    out.horizon = model.horizon;
    const int T = model.horizon;
    out.agents.resize(model.num_agents());
    for (int i = 0; i < model.num_agents(); ++i) {
        AgentHistorySpace& sp = out.agents[i];
        sp.agent = i;
        sp.num_actions = static_cast<int>(model.agents[i].actions.size());
        sp.num_obs = static_cast<int>(model.agents[i].observations.size());
        sp.horizon = T;

        // size check against the closed form before materializing
        long double total = 0, level = sp.num_actions;
        for (int t = 1; t <= T; ++t) {
            total += level;
            level *= static_cast<long double>(sp.num_obs) * sp.num_actions;
        }
        if (total > static_cast<long double>(per_agent_cap))
            throw SizeCapError("history cap exceeded for agent " + std::to_string(i),
                               "histories per agent", static_cast<std::uint64_t>(total),
                               static_cast<std::uint64_t>(per_agent_cap));

        sp.length_offset.assign(T + 2, 0);
        sp.iset_length_offset.assign(T + 1, 0);
        sp.info_sets.push_back(InfoSet{0, 0, -1, -1, {}});
        sp.iset_length_offset[0] = 0;

        sp.length_offset[1] = 0;
        for (int a = 0; a < sp.num_actions; ++a) {
            History h;
            h.id = static_cast<int>(sp.histories.size());
            h.length = 1;
            h.last_action = a;
            h.info_set = 0;
            sp.info_sets[0].members.push_back(h.id);
            sp.histories.push_back(h);
        }
        sp.length_offset[2] = static_cast<int>(sp.histories.size());

        for (int t = 1; t < T; ++t) {
            if (sp.iset_length_offset.size() > static_cast<std::size_t>(t))
                sp.iset_length_offset[t] = static_cast<int>(sp.info_sets.size());
            int first = sp.first_of_length(t);
            int count = sp.count_of_length(t);
            sp.child_iset.resize(static_cast<std::size_t>(sp.length_offset[t + 1]) * sp.num_obs,
                                 -1);
            for (int hh = first; hh < first + count; ++hh) {
                for (int o = 0; o < sp.num_obs; ++o) {
                    InfoSet is;
                    is.id = static_cast<int>(sp.info_sets.size());
                    is.length = t;
                    is.parent_history = hh;
                    is.obs = o;
                    sp.child_iset[static_cast<std::size_t>(hh) * sp.num_obs + o] = is.id;
                    sp.info_sets.push_back(is);
                    for (int a = 0; a < sp.num_actions; ++a) {
                        History h;
                        h.id = static_cast<int>(sp.histories.size());
                        h.length = t + 1;
                        h.parent = hh;
                        h.last_action = a;
                        h.obs_from_parent = o;
                        h.info_set = is.id;
                        sp.info_sets[is.id].members.push_back(h.id);
                        sp.histories.push_back(h);
                    }
                }
            }
            sp.length_offset[t + 2] = static_cast<int>(sp.histories.size());
        }
        sp.iset_length_offset[T] = static_cast<int>(sp.info_sets.size());
        for (int t = 1; t < T; ++t)
            if (sp.iset_length_offset[t] == 0 && t > 0)
                sp.iset_length_offset[t] = sp.iset_length_offset[t - 1];
    }
    return out;
}

JointHistoryTable build_joint_table(const DecPomdp& model, const HistorySpace& space,
                                    long joint_cap) {
    const int T = model.horizon;
    const int n = model.num_agents();
    const int S = model.num_states();
    JointHistoryTable tab;
    tab.horizon = T;
    tab.num_agents = n;
    tab.num_states = S;
    tab.hist_indexer.resize(T + 1);
    tab.iset_indexer.resize(T + 1);
    tab.psi.resize(T + 1);
    tab.rbar.resize(T + 1);
    tab.value.resize(T + 1);
    tab.node_belief.resize(T + 1);
    tab.node_reachable.resize(T + 1);

    long double total_joint = 0;
    for (int t = 1; t <= T; ++t) {
        long double prod = 1;
        for (int i = 0; i < n; ++i) prod *= space.agents[i].count_of_length(t);
        total_joint += prod;
    }
    if (total_joint > static_cast<long double>(joint_cap))
        throw SizeCapError("joint history table exceeds the configured cap", "joint histories",
                           static_cast<std::uint64_t>(total_joint),
                           static_cast<std::uint64_t>(joint_cap));

    for (int t = 1; t <= T; ++t) {
        std::vector<int> hsz(n), isz(n);
        for (int i = 0; i < n; ++i) {
            hsz[i] = space.agents[i].count_of_length(t);
            isz[i] = space.agents[i].iset_count_of_length(t - 1);
        }
        tab.hist_indexer[t] = JointIndexer(hsz);
        tab.iset_indexer[t] = JointIndexer(isz);
        tab.psi[t].assign(tab.hist_indexer[t].total, 0.0);
        tab.rbar[t].assign(tab.hist_indexer[t].total, 0.0);
        tab.value[t].assign(tab.hist_indexer[t].total, 0.0);
        tab.node_belief[t].assign(tab.iset_indexer[t].total * S, 0.0);
        tab.node_reachable[t].assign(tab.iset_indexer[t].total, 0);
    }

    // root node: the joint null information set holds alpha
    for (int s = 0; s < S; ++s) tab.node_belief[1][s] = model.initial_belief[s];
    tab.node_reachable[1][0] = 1;
    std::vector<double> node_psi{1.0};   // per joint iset node of the current length
    std::vector<double> node_rbar{0.0};  // reward accumulated over the node's prefix actions

    const long JA = model.num_joint_actions();
    const long JO = model.num_joint_obs();
    std::vector<int> acts(n), obs(n), iset_parts(n), hist_parts(n), child_iset_parts(n),
        child_hist_parts(n);

    for (int t = 1; t <= T; ++t) {
        const JointIndexer& isets = tab.iset_indexer[t];
        const JointIndexer& hists = tab.hist_indexer[t];
        std::vector<double> next_psi;
        std::vector<double> next_rbar;
        if (t < T) {
            next_psi.assign(tab.iset_indexer[t + 1].total, 0.0);
            next_rbar.assign(tab.iset_indexer[t + 1].total, 0.0);
        }
        for (long node = 0; node < isets.total; ++node) {
            isets.unflatten(node, iset_parts);
            bool reachable = tab.node_reachable[t][node] != 0;
            Belief beta;
            beta.probs.assign(tab.node_belief[t].begin() + node * S,
                              tab.node_belief[t].begin() + (node + 1) * S);
            beta.unreachable = !reachable;
            for (long ja = 0; ja < JA; ++ja) {
                model.action_indexer.unflatten(ja, acts);
                // joint history j = (node, ja)
                for (int i = 0; i < n; ++i) {
                    const AgentHistorySpace& sp = space.agents[i];
                    hist_parts[i] = iset_parts[i] * sp.num_actions + acts[i];
                }
                long j = hists.flatten(hist_parts);
                double jpsi = reachable ? node_psi[node] : 0.0;
                double jrbar = node_rbar[node] + (reachable ? expected_reward(model, beta, ja) : 0.0);
                tab.psi[t][j] = jpsi;
                tab.rbar[t][j] = jrbar;
                tab.value[t][j] = jpsi == 0.0 ? 0.0 : jpsi * jrbar;
                if (t == T) continue;
                for (long jo = 0; jo < JO; ++jo) {
                    model.obs_indexer.unflatten(jo, obs);
                    for (int i = 0; i < n; ++i) {
                        const AgentHistorySpace& sp = space.agents[i];
                        child_iset_parts[i] = hist_parts[i] * sp.num_obs + obs[i];
                    }
                    long child = tab.iset_indexer[t + 1].flatten(child_iset_parts);
                    if (!reachable) continue;  // child stays unreachable
                    double tp = obs_prob(model, beta, ja, jo);
                    if (tp <= 0.0) continue;
                    Belief next = belief_update(model, beta, ja, jo);
                    next_psi[child] = jpsi * tp;
                    next_rbar[child] = jrbar;
                    tab.node_reachable[t + 1][child] = 1;
                    for (int s = 0; s < S; ++s)
                        tab.node_belief[t + 1][child * S + s] = next.probs[s];
                }
            }
        }
        if (t < T) {
            node_psi = std::move(next_psi);
            node_rbar = std::move(next_rbar);
        }
    }
    return tab;
}

std::vector<Belief> JointHistoryTable::belief_sequence(int t, std::vector<int> locals) const {
    std::vector<Belief> seq(t);
    // walk back: history local at length k -> its info-set local -> parent
    std::vector<int> iset_parts(num_agents);
    for (int k = t; k >= 1; --k) {
        for (int i = 0; i < num_agents; ++i)
            iset_parts[i] = locals[i] / (hist_indexer[k].sizes[i] / iset_indexer[k].sizes[i]);
        long node = iset_indexer[k].flatten(iset_parts);
        Belief b;
        b.probs.assign(node_belief[k].begin() + node * num_states,
                       node_belief[k].begin() + (node + 1) * num_states);
        b.unreachable = node_reachable[k][node] == 0;
        seq[k - 1] = std::move(b);
        if (k > 1)
            for (int i = 0; i < num_agents; ++i) {
                int obs_sz = iset_indexer[k].sizes[i] / hist_indexer[k - 1].sizes[i];
                locals[i] = iset_parts[i] / obs_sz;
            }
    }
    return seq;
}

bool SequencePolicy::is_pure(double tol) const {
    for (double w : weights)
        if (std::abs(w - std::round(w)) > tol) return false;
    return true;
}

double policy_value(const JointHistoryTable& table, const HistorySpace& space,
                    const JointSequencePolicy& policy) {
    const int n = static_cast<int>(space.agents.size());
    if (static_cast<int>(policy.agents.size()) != n)
        throw std::invalid_argument("policy does not cover every agent of this table");
    const int T = space.horizon;
    std::vector<std::vector<std::pair<int, double>>> support(n);  // (local id, weight)
    for (int i = 0; i < n; ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        if (static_cast<int>(policy.agents[i].weights.size()) != sp.num_histories())
            throw std::invalid_argument("policy of agent " + std::to_string(i) +
                                        " does not match the history space");
        for (int h = sp.first_terminal(); h < sp.num_histories(); ++h)
            if (policy.agents[i].weights[h] != 0.0)
                support[i].emplace_back(sp.local_index(h), policy.agents[i].weights[h]);
        if (support[i].empty()) return 0.0;
    }
    std::vector<std::size_t> pick(n, 0);
    std::vector<int> locals(n);
    double total = 0.0;
    while (true) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) {
            locals[i] = support[i][pick[i]].first;
            w *= support[i][pick[i]].second;
        }
        total += w * table.value_at(T, table.hist_indexer[T].flatten(locals));
        int i = n - 1;
        while (i >= 0 && ++pick[i] == support[i].size()) pick[i--] = 0;
        if (i < 0) break;
    }
    return total;
}

SequencePolicy policy_from_tree(const TreePolicy& tree, const AgentHistorySpace& space) {
    if (tree.horizon != space.horizon || tree.num_obs != space.num_obs)
        throw std::invalid_argument("tree does not cover this agent's horizon");
    SequencePolicy p;
    p.agent = space.agent;
    p.weights.assign(space.num_histories(), 0.0);
    std::vector<long> node(space.num_histories(), -1);  // tree node of each history's obs prefix
    for (int h = 0; h < space.num_histories(); ++h) {
        const History& rec = space.histories[h];
        if (rec.length == 1) {
            node[h] = 0;
            p.weights[h] = tree.actions[0] == rec.last_action ? 1.0 : 0.0;
        } else {
            node[h] = tree.child(node[rec.parent], rec.length - 2, rec.obs_from_parent);
            int want = tree.actions[node[h]];
            if (want < 0)
                throw std::invalid_argument("tree policy has an unassigned decision node");
            p.weights[h] = p.weights[rec.parent] * (want == rec.last_action ? 1.0 : 0.0);
        }
    }
    return p;
}

TreePolicy tree_from_policy(const SequencePolicy& policy, const AgentHistorySpace& space) {
    if (!policy.is_pure())
        throw std::invalid_argument("tree recovery is only supported for pure policies");
    TreePolicy tree(space.num_obs, space.horizon);
    std::fill(tree.actions.begin(), tree.actions.end(), 0);
    // every observation-sequence node takes the action of its positive-weight
    // history, when one exists
    std::vector<long> node(space.num_histories(), -1);
    for (int h = 0; h < space.num_histories(); ++h) {
        const History& rec = space.histories[h];
        node[h] = rec.length == 1 ? 0 : tree.child(node[rec.parent], rec.length - 2,
                                                   rec.obs_from_parent);
        if (std::round(policy.weights[h]) >= 1.0) tree.actions[node[h]] = rec.last_action;
    }
    return tree;
}

PolicyValidationReport validate_policy(const AgentHistorySpace& space,
                                       const SequencePolicy& policy, double tol) {
    PolicyValidationReport rep;
    if (static_cast<int>(policy.weights.size()) != space.num_histories())
        throw std::invalid_argument("policy does not match the history space");
    double root = 0.0;
    for (int a = 0; a < space.num_actions; ++a) root += policy.weights[a];
    if (std::abs(root - 1.0) > tol)
        rep.violations.push_back({PolicyViolation::root_sum, 0, -1, root - 1.0});
    for (int h = 0; h < space.num_histories(); ++h) {
        if (policy.weights[h] < -tol)
            rep.violations.push_back({PolicyViolation::negative, -1, h, policy.weights[h]});
        if (space.is_terminal(h)) continue;
        for (int o = 0; o < space.num_obs; ++o) {
            int iset = space.child_iset[static_cast<std::size_t>(h) * space.num_obs + o];
            double sum = -policy.weights[h];
            for (int c : space.info_sets[iset].members) sum += policy.weights[c];
            if (std::abs(sum) > tol)
                rep.violations.push_back({PolicyViolation::flow, iset, -1, sum});
        }
    }
    return rep;
}

double terminal_weight_sum(const AgentHistorySpace& space, const SequencePolicy& policy) {
    double sum = 0.0;
    for (int h = space.first_terminal(); h < space.num_histories(); ++h)
        sum += policy.weights[h];
    return sum;
}

}  // namespace decpomdp

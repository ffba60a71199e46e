#include "decpomdp/builders.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace decpomdp {

namespace {
constexpr double kCoeffDrop = 1e-12;  // dropped from sparse rows
constexpr double kRoundTol = 1e-6;

double obs_power(const AgentHistorySpace& sp, int exponent) {
    double v = 1.0;
    for (int k = 0; k < exponent; ++k) v *= sp.num_obs;
    return v;
}

// product over k != i of |O_k|^(T-1)
double others_obs_product(const HistorySpace& space, int agent) {
    double v = 1.0;
    for (std::size_t k = 0; k < space.agents.size(); ++k)
        if (static_cast<int>(k) != agent)
            v *= obs_power(space.agents[k], space.horizon - 1);
    return v;
}

struct TerminalJoints {
    // surviving terminal joints in odometer order (agent 1 slowest), with
    // their full-space joint index and per-agent locals
    std::vector<long> joint;             // full-space local index at length T
    std::vector<std::vector<int>> locals;  // per agent: surviving terminal locals

    static TerminalJoints collect(const HistorySpace& space, const PrunedSpace* pruned,
                                  const JointHistoryTable& table, long cap,
                                  const char* cap_dimension) {
        TerminalJoints out;
        const int n = static_cast<int>(space.agents.size());
        const int T = space.horizon;
        out.locals.resize(n);
        long double count = 1;
        for (int i = 0; i < n; ++i) {
            const AgentHistorySpace& sp = space.agents[i];
            for (int h = sp.first_terminal(); h < sp.num_histories(); ++h)
                if (!pruned || pruned->is_alive(i, h)) out.locals[i].push_back(sp.local_index(h));
            count *= static_cast<long double>(out.locals[i].size());
        }
        if (count > static_cast<long double>(cap))
            throw SizeCapError("terminal joint variables exceed the configured cap",
                               cap_dimension, static_cast<std::uint64_t>(count),
                               static_cast<std::uint64_t>(cap));
        std::vector<std::size_t> pick(n, 0);
        std::vector<int> parts(n);
        bool empty = false;
        for (int i = 0; i < n; ++i) empty |= out.locals[i].empty();
        if (!empty) {
            while (true) {
                for (int i = 0; i < n; ++i) parts[i] = out.locals[i][pick[i]];
                out.joint.push_back(table.hist_indexer[T].flatten(parts));
                int i = n - 1;
                while (i >= 0 && ++pick[i] == out.locals[i].size()) pick[i--] = 0;
                if (i < 0) break;
            }
        }
        return out;
    }
};

}  // namespace

std::string x_label(int agent, int hid) {
    return "x[" + std::to_string(agent) + "][" + std::to_string(hid) + "]";
}
std::string z_label(long jid) { return "z[" + std::to_string(jid) + "]"; }
std::string w_label(int agent, int hid) {
    return "w[" + std::to_string(agent) + "][" + std::to_string(hid) + "]";
}
std::string y_label(int agent, int iid) {
    return "y[" + std::to_string(agent) + "][" + std::to_string(iid) + "]";
}
std::string b_label(int agent, int hid) {
    return "b[" + std::to_string(agent) + "][" + std::to_string(hid) + "]";
}

void append_policy_constraints(MixedIntegerProgram& prog, const AgentHistorySpace& space,
                               const PrunedSpace* pruned, bool binary_terminals) {
    const int i = space.agent;
    auto alive = [&](int h) { return !pruned || pruned->is_alive(i, h); };
    for (int h = 0; h < space.num_histories(); ++h) {
        if (!alive(h)) continue;
        VarKind kind = binary_terminals && space.is_terminal(h) ? VarKind::binary
                                                                : VarKind::continuous;
        prog.add_variable(x_label(i, h), 0.0, kind == VarKind::binary ? 1.0 : kInf, kind,
                          VarMeta{'x', i, h});
    }
    ConstraintRow root;
    root.label = "root[" + std::to_string(i) + "]";
    for (int a = 0; a < space.num_actions; ++a)
        if (alive(a)) root.coeffs.emplace_back(prog.variable(x_label(i, a)), 1.0);
    root.rel = Relation::equal;
    root.rhs = 1.0;
    prog.add_row(std::move(root));
    for (int h = 0; h < space.num_histories(); ++h) {
        if (!alive(h) || space.is_terminal(h)) continue;
        for (int o = 0; o < space.num_obs; ++o) {
            if (pruned && !pruned->live_branch(i, h, o)) continue;
            int iset = space.child_iset[static_cast<std::size_t>(h) * space.num_obs + o];
            ConstraintRow row;
            row.label = "flow[" + std::to_string(i) + "][" + std::to_string(iset) + "]";
            row.coeffs.emplace_back(prog.variable(x_label(i, h)), -1.0);
            for (int c : space.info_sets[iset].members)
                if (alive(c)) row.coeffs.emplace_back(prog.variable(x_label(i, c)), 1.0);
            row.rel = Relation::equal;
            row.rhs = 0.0;
            prog.add_row(std::move(row));
        }
    }
}

MixedIntegerProgram build_milp(const JointHistoryTable& table, const HistorySpace& space,
                               const PrunedSpace* pruned, long z_cap) {
    const int n = static_cast<int>(space.agents.size());
    const int T = space.horizon;
    MixedIntegerProgram prog;
    prog.name = "milp";
    prog.sense = Sense::maximize;
    for (int i = 0; i < n; ++i) append_policy_constraints(prog, space.agents[i], pruned, true);

    TerminalJoints tj = TerminalJoints::collect(space, pruned, table, z_cap, "terminal joints");
    std::vector<int> zvar(tj.joint.size());
    for (std::size_t k = 0; k < tj.joint.size(); ++k) {
        zvar[k] = prog.add_variable(z_label(tj.joint[k]), 0.0, 1.0, VarKind::continuous,
                                    VarMeta{'z', -1, tj.joint[k]});
        double v = table.value_at(T, tj.joint[k]);
        if (std::abs(v) >= kCoeffDrop) prog.set_objective_coeff(zvar[k], v);
    }

    // linking rows: the z mass a terminal history carries equals its weight
    // times the number of reduced joints in any pure reduced policy
    for (int i = 0; i < n; ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        double factor = others_obs_product(space, i);
        std::vector<ConstraintRow> rows(tj.locals[i].size());
        std::vector<int> local_rank(sp.count_of_length(T), -1);
        for (std::size_t r = 0; r < tj.locals[i].size(); ++r) {
            int h = sp.first_terminal() + tj.locals[i][r];
            local_rank[tj.locals[i][r]] = static_cast<int>(r);
            rows[r].label = "link[" + std::to_string(i) + "][" + std::to_string(h) + "]";
            rows[r].rel = Relation::equal;
            rows[r].rhs = 0.0;
            rows[r].coeffs.emplace_back(prog.variable(x_label(i, h)), -factor);
        }
        for (std::size_t k = 0; k < tj.joint.size(); ++k) {
            int local = table.hist_indexer[T].part(tj.joint[k], i);
            rows[local_rank[local]].coeffs.emplace_back(zvar[k], 1.0);
        }
        for (auto& row : rows) prog.add_row(std::move(row));
    }

    ConstraintRow count;
    count.label = "count";
    for (int zk : zvar) count.coeffs.emplace_back(zk, 1.0);
    count.rel = Relation::equal;
    count.rhs = 1.0;
    for (int i = 0; i < n; ++i) count.rhs *= obs_power(space.agents[i], T - 1);
    prog.add_row(std::move(count));
    return prog;
}

RegretBounds compute_regret_bounds(const JointHistoryTable& table, const HistorySpace& space,
                                   const PrunedSpace* pruned) {
    const int n = static_cast<int>(space.agents.size());
    const int T = space.horizon;
    RegretBounds out;
    out.bound.resize(n);

    std::vector<std::vector<int>> locals(n);
    for (int i = 0; i < n; ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        out.bound[i].assign(sp.num_histories(), 0.0);
        for (int h = sp.first_terminal(); h < sp.num_histories(); ++h)
            if (!pruned || pruned->is_alive(i, h)) locals[i].push_back(sp.local_index(h));
    }

    for (int i = 0; i < n; ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        auto alive = [&](int h) { return !pruned || pruned->is_alive(i, h); };
        // per surviving terminal: max and min of the value against every
        // surviving reduced joint
        std::vector<double> row_max(sp.num_histories(), -kInf);
        std::vector<double> row_min(sp.num_histories(), kInf);
        std::vector<std::size_t> pick(n, 0);
        std::vector<int> parts(n);
        bool empty = false;
        for (int k = 0; k < n; ++k)
            if (k != i) empty |= locals[k].empty();
        if (!empty) {
            while (true) {
                bool done = false;
                for (int k = 0; k < n; ++k) {
                    if (k == i) continue;
                    parts[k] = locals[k][pick[k]];
                }
                for (int local : locals[i]) {
                    parts[i] = local;
                    double v = table.value_at(T, table.hist_indexer[T].flatten(parts));
                    int h = sp.first_terminal() + local;
                    row_max[h] = std::max(row_max[h], v);
                    row_min[h] = std::min(row_min[h], v);
                }
                int k = n - 1;
                while (k >= 0) {
                    if (k == i) {
                        --k;
                        continue;
                    }
                    if (++pick[k] < locals[k].size()) break;
                    pick[k--] = 0;
                }
                if (k < 0) done = true;
                if (done) break;
            }
        }
        // descendant aggregates, bottom-up
        std::vector<double> desc_max(row_max), desc_min(row_min);
        for (int t = T - 1; t >= 1; --t) {
            int first = sp.first_of_length(t);
            for (int h = first; h < first + sp.count_of_length(t); ++h) {
                if (!alive(h)) continue;
                double mx = -kInf, mn = kInf;
                for (int o = 0; o < sp.num_obs; ++o) {
                    int iset = sp.child_iset[static_cast<std::size_t>(h) * sp.num_obs + o];
                    for (int c : sp.info_sets[iset].members) {
                        if (!alive(c)) continue;
                        mx = std::max(mx, desc_max[c]);
                        mn = std::min(mn, desc_min[c]);
                    }
                }
                desc_max[h] = mx;
                desc_min[h] = mn;
            }
        }
        double others = others_obs_product(space, i);
        for (int h = 0; h < sp.num_histories(); ++h) {
            if (!alive(h)) continue;
            const History& rec = sp.histories[h];
            double iset_max = -kInf;
            for (int m : sp.info_sets[rec.info_set].members)
                if (alive(m)) iset_max = std::max(iset_max, desc_max[m]);
            double li = obs_power(sp, T - rec.length) * others;
            double u = li * (iset_max - desc_min[h]);
            out.bound[i][h] = std::max(u, 0.0);
        }
    }
    return out;
}

namespace {

// Shared by MILP-2 and MILP-n: x/w/b variables, y per surviving information
// set, policy rows, the w-definition rows for non-terminal histories, and
// the complementarity pairs.
void append_regret_skeleton(MixedIntegerProgram& prog, const HistorySpace& space,
                            const RegretBounds& bounds, const PrunedSpace* pruned,
                            bool binary_terminal_x) {
    const int n = static_cast<int>(space.agents.size());
    for (int i = 0; i < n; ++i)
        append_policy_constraints(prog, space.agents[i], pruned, binary_terminal_x);
    for (int i = 0; i < n; ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        auto alive = [&](int h) { return !pruned || pruned->is_alive(i, h); };
        auto iset_alive = [&](int is) {
            for (int m : space.agents[i].info_sets[is].members)
                if (alive(m)) return true;
            return false;
        };
        for (int h = 0; h < sp.num_histories(); ++h) {
            if (!alive(h)) continue;
            prog.add_variable(w_label(i, h), 0.0, kInf, VarKind::continuous, VarMeta{'w', i, h});
            prog.add_variable(b_label(i, h), 0.0, 1.0, VarKind::binary, VarMeta{'b', i, h});
        }
        for (int is = 0; is < static_cast<int>(sp.info_sets.size()); ++is)
            if (iset_alive(is))
                prog.add_variable(y_label(i, is), -kInf, kInf, VarKind::free_var,
                                  VarMeta{'y', i, is});
        // value recursion rows for non-terminal histories
        for (int h = 0; h < sp.num_histories(); ++h) {
            if (!alive(h) || sp.is_terminal(h)) continue;
            ConstraintRow row;
            row.label = "wdef[" + std::to_string(i) + "][" + std::to_string(h) + "]";
            row.coeffs.emplace_back(prog.variable(y_label(i, sp.histories[h].info_set)), 1.0);
            for (int o = 0; o < sp.num_obs; ++o) {
                if (pruned && !pruned->live_branch(i, h, o)) continue;
                int is = sp.child_iset[static_cast<std::size_t>(h) * sp.num_obs + o];
                row.coeffs.emplace_back(prog.variable(y_label(i, is)), -1.0);
            }
            row.coeffs.emplace_back(prog.variable(w_label(i, h)), -1.0);
            row.rel = Relation::equal;
            row.rhs = 0.0;
            prog.add_row(std::move(row));
        }
        // complementarity pairs
        for (int h = 0; h < sp.num_histories(); ++h) {
            if (!alive(h)) continue;
            ConstraintRow sup;
            sup.label = "supp[" + std::to_string(i) + "][" + std::to_string(h) + "]";
            sup.coeffs.emplace_back(prog.variable(x_label(i, h)), 1.0);
            sup.coeffs.emplace_back(prog.variable(b_label(i, h)), 1.0);
            sup.rel = Relation::less_equal;
            sup.rhs = 1.0;
            prog.add_row(std::move(sup));
            ConstraintRow reg;
            reg.label = "regb[" + std::to_string(i) + "][" + std::to_string(h) + "]";
            reg.coeffs.emplace_back(prog.variable(w_label(i, h)), 1.0);
            double u = bounds.bound[i][h];
            if (std::abs(u) >= kCoeffDrop)
                reg.coeffs.emplace_back(prog.variable(b_label(i, h)), -u);
            reg.rel = Relation::less_equal;
            reg.rhs = 0.0;
            prog.add_row(std::move(reg));
        }
    }
    prog.set_objective_coeff(prog.variable(y_label(0, 0)), 1.0);
}

}  // namespace

MixedIntegerProgram build_milp2(const JointHistoryTable& table, const HistorySpace& space,
                                const RegretBounds& bounds, const PrunedSpace* pruned) {
    if (space.agents.size() != 2)
        throw std::invalid_argument("this program is defined for exactly 2 agents");
    const int T = space.horizon;
    MixedIntegerProgram prog;
    prog.name = "milp2";
    prog.sense = Sense::maximize;
    append_regret_skeleton(prog, space, bounds, pruned, /*binary_terminal_x=*/false);

    // terminal best-response rows against the other agent's weights
    for (int i = 0; i < 2; ++i) {
        const int other = 1 - i;
        const AgentHistorySpace& sp = space.agents[i];
        const AgentHistorySpace& so = space.agents[other];
        auto alive = [&](int agent, int h) { return !pruned || pruned->is_alive(agent, h); };
        for (int h = sp.first_terminal(); h < sp.num_histories(); ++h) {
            if (!alive(i, h)) continue;
            ConstraintRow row;
            row.label = "wterm[" + std::to_string(i) + "][" + std::to_string(h) + "]";
            row.coeffs.emplace_back(prog.variable(y_label(i, sp.histories[h].info_set)), 1.0);
            std::vector<int> parts(2);
            parts[i] = sp.local_index(h);
            for (int g = so.first_terminal(); g < so.num_histories(); ++g) {
                if (!alive(other, g)) continue;
                parts[other] = so.local_index(g);
                double v = table.value_at(T, table.hist_indexer[T].flatten(parts));
                if (std::abs(v) >= kCoeffDrop)
                    row.coeffs.emplace_back(prog.variable(x_label(other, g)), -v);
            }
            row.coeffs.emplace_back(prog.variable(w_label(i, h)), -1.0);
            row.rel = Relation::equal;
            row.rhs = 0.0;
            prog.add_row(std::move(row));
        }
    }
    return prog;
}

MixedIntegerProgram build_milpn(const JointHistoryTable& table, const HistorySpace& space,
                                const RegretBounds& bounds, const PrunedSpace* pruned,
                                long z_cap) {
    const int n = static_cast<int>(space.agents.size());
    const int T = space.horizon;
    MixedIntegerProgram prog;
    prog.name = "milpn";
    prog.sense = Sense::maximize;
    append_regret_skeleton(prog, space, bounds, pruned, /*binary_terminal_x=*/true);

    TerminalJoints tj = TerminalJoints::collect(space, pruned, table, z_cap, "terminal joints");
    std::vector<int> zvar(tj.joint.size());
    for (std::size_t k = 0; k < tj.joint.size(); ++k)
        zvar[k] = prog.add_variable(z_label(tj.joint[k]), 0.0, 1.0, VarKind::continuous,
                                    VarMeta{'z', -1, tj.joint[k]});

    // terminal best-response rows through z: value of (h, j_{-i}) weighted by
    // z(j), scaled by 1/|O_i|^(T-1)
    for (int i = 0; i < n; ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        double inv = 1.0 / obs_power(sp, T - 1);
        const long stride = table.hist_indexer[T].strides[i];
        std::vector<ConstraintRow> rows(tj.locals[i].size());
        for (std::size_t r = 0; r < tj.locals[i].size(); ++r) {
            int h = sp.first_terminal() + tj.locals[i][r];
            rows[r].label = "wterm[" + std::to_string(i) + "][" + std::to_string(h) + "]";
            rows[r].rel = Relation::equal;
            rows[r].rhs = 0.0;
            rows[r].coeffs.emplace_back(prog.variable(y_label(i, sp.histories[h].info_set)), 1.0);
            rows[r].coeffs.emplace_back(prog.variable(w_label(i, h)), -1.0);
        }
        for (std::size_t k = 0; k < tj.joint.size(); ++k) {
            int local = table.hist_indexer[T].part(tj.joint[k], i);
            long base = tj.joint[k] - static_cast<long>(local) * stride;
            for (std::size_t r = 0; r < tj.locals[i].size(); ++r) {
                double v = table.value_at(T, base + static_cast<long>(tj.locals[i][r]) * stride);
                if (std::abs(v) >= kCoeffDrop)
                    rows[r].coeffs.emplace_back(zvar[k], -inv * v);
            }
        }
        for (auto& row : rows) prog.add_row(std::move(row));
    }

    // linking and count rows as in the combinatorial program
    for (int i = 0; i < n; ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        double factor = others_obs_product(space, i);
        std::vector<ConstraintRow> rows(tj.locals[i].size());
        std::vector<int> local_rank(sp.count_of_length(T), -1);
        for (std::size_t r = 0; r < tj.locals[i].size(); ++r) {
            int h = sp.first_terminal() + tj.locals[i][r];
            local_rank[tj.locals[i][r]] = static_cast<int>(r);
            rows[r].label = "link[" + std::to_string(i) + "][" + std::to_string(h) + "]";
            rows[r].rel = Relation::equal;
            rows[r].rhs = 0.0;
            rows[r].coeffs.emplace_back(prog.variable(x_label(i, h)), -factor);
        }
        for (std::size_t k = 0; k < tj.joint.size(); ++k) {
            int local = table.hist_indexer[T].part(tj.joint[k], i);
            rows[local_rank[local]].coeffs.emplace_back(zvar[k], 1.0);
        }
        for (auto& row : rows) prog.add_row(std::move(row));
    }
    ConstraintRow count;
    count.label = "count";
    for (int zk : zvar) count.coeffs.emplace_back(zk, 1.0);
    count.rel = Relation::equal;
    count.rhs = 1.0;
    for (int i = 0; i < n; ++i) count.rhs *= obs_power(space.agents[i], T - 1);
    prog.add_row(std::move(count));
    return prog;
}

DecPomdp centralized_view(const DecPomdp& model) {
    AgentSpec joint;
    std::vector<int> parts(model.num_agents());
    for (long ja = 0; ja < model.num_joint_actions(); ++ja) {
        model.action_indexer.unflatten(ja, parts);
        std::string lbl;
        for (int i = 0; i < model.num_agents(); ++i) {
            if (i) lbl += '+';
            lbl += model.agents[i].actions[parts[i]];
        }
        joint.actions.push_back(lbl);
    }
    for (long jo = 0; jo < model.num_joint_obs(); ++jo) {
        model.obs_indexer.unflatten(jo, parts);
        std::string lbl;
        for (int i = 0; i < model.num_agents(); ++i) {
            if (i) lbl += '+';
            lbl += model.agents[i].observations[parts[i]];
        }
        joint.observations.push_back(lbl);
    }
    DecPomdp out = make_model(model.name + "-centralized", model.horizon, model.states, {joint});
    out.transition = model.transition;
    out.observation = model.observation;
    out.reward = model.reward;
    out.initial_belief = model.initial_belief;
    return out;
}

MixedIntegerProgram build_pomdp_lp(const DecPomdp& model, long per_agent_cap, long joint_cap) {
    DecPomdp joint = centralized_view(model);
    HistorySpace hs = enumerate_histories(joint, per_agent_cap);
    JointHistoryTable tab = build_joint_table(joint, hs, joint_cap);
    const AgentHistorySpace& sp = hs.agents[0];
    MixedIntegerProgram prog;
    prog.name = "pomdp-lp";
    prog.sense = Sense::maximize;
    append_policy_constraints(prog, sp, nullptr, /*binary_terminals=*/false);
    for (int h = sp.first_terminal(); h < sp.num_histories(); ++h) {
        double v = tab.value_at(hs.horizon, sp.local_index(h));
        if (std::abs(v) >= kCoeffDrop)
            prog.set_objective_coeff(prog.variable(x_label(0, h)), v);
    }
    return prog;
}

void add_upper_bound_cut(MixedIntegerProgram& prog, double bound) {
    if (!(bound < kInf)) return;  // vacuous
    ConstraintRow row;
    row.label = "cut-upper";
    row.coeffs = prog.objective;
    row.rel = Relation::less_equal;
    row.rhs = bound;
    prog.add_row(std::move(row));
}

double min_reward(const DecPomdp& model) {
    double mn = kInf;
    for (double v : model.reward) mn = std::min(mn, v);
    return mn;
}

void add_lower_bound_cut(MixedIntegerProgram& prog, double v_prev, const DecPomdp& model) {
    ConstraintRow row;
    row.label = "cut-lower";
    row.coeffs = prog.objective;
    row.rel = Relation::greater_equal;
    row.rhs = v_prev + min_reward(model);
    prog.add_row(std::move(row));
}

std::vector<std::vector<double>> info_set_value_caps(const JointHistoryTable& table,
                                                     const HistorySpace& space,
                                                     const PrunedSpace* pruned) {
    const int n = static_cast<int>(space.agents.size());
    const int T = space.horizon;
    const bool removed = pruned && pruned->anything_removed();
    std::vector<std::vector<double>> caps(n);
    std::vector<std::vector<int>> locals(n);
    for (int i = 0; i < n; ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        for (int h = sp.first_terminal(); h < sp.num_histories(); ++h)
            if (!pruned || pruned->is_alive(i, h)) locals[i].push_back(sp.local_index(h));
    }
    for (int i = 0; i < n; ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        auto alive = [&](int h) { return !pruned || pruned->is_alive(i, h); };
        caps[i].assign(sp.info_sets.size(), 0.0);
        // per surviving terminal: best value against any surviving reduced joint
        std::vector<double> row_max(sp.num_histories(), -kInf);
        std::vector<std::size_t> pick(n, 0);
        std::vector<int> parts(n);
        bool empty = false;
        for (int k = 0; k < n; ++k)
            if (k != i) empty |= locals[k].empty();
        if (!empty) {
            while (true) {
                for (int k = 0; k < n; ++k)
                    if (k != i) parts[k] = locals[k][pick[k]];
                for (int local : locals[i]) {
                    parts[i] = local;
                    double v = table.value_at(T, table.hist_indexer[T].flatten(parts));
                    int h = sp.first_terminal() + local;
                    row_max[h] = std::max(row_max[h], v);
                }
                int k = n - 1;
                while (k >= 0) {
                    if (k == i) {
                        --k;
                        continue;
                    }
                    if (++pick[k] < locals[k].size()) break;
                    pick[k--] = 0;
                }
                if (k < 0) break;
            }
        }
        double mass = others_obs_product(space, i);  // fixed opponent support mass (Eq.-94 style)
        // terminal history value cap, then information sets bottom-up
        std::vector<double> hist_cap(sp.num_histories(), 0.0);
        for (int local : locals[i]) {
            int h = sp.first_terminal() + local;
            double v = mass * row_max[h];
            if (removed && v < 0.0) v = 0.0;  // opponent mass may fall short over pruned spaces
            hist_cap[h] = v;
        }
        for (int t = T - 1; t >= 1; --t) {
            int first = sp.first_of_length(t);
            for (int h = first; h < first + sp.count_of_length(t); ++h) {
                if (!alive(h)) continue;
                double sum = 0.0;
                for (int o = 0; o < sp.num_obs; ++o) {
                    int iset = sp.child_iset[static_cast<std::size_t>(h) * sp.num_obs + o];
                    double best = -kInf;
                    for (int c : sp.info_sets[iset].members)
                        if (alive(c)) best = std::max(best, hist_cap[c]);
                    if (best > -kInf) {
                        caps[i][iset] = best;
                        sum += best;
                    }
                }
                hist_cap[h] = sum;
            }
        }
        double root = -kInf;
        for (int a = 0; a < sp.num_actions; ++a)
            if (alive(a)) root = std::max(root, hist_cap[a]);
        caps[i][0] = root;
    }
    return caps;
}

void add_value_cap_cuts(MixedIntegerProgram& prog, const JointHistoryTable& table,
                        const HistorySpace& space, const PrunedSpace* pruned) {
    bool has_y = false;
    for (const auto& m : prog.meta) has_y |= m.role == 'y';
    if (!has_y) return;
    auto caps = info_set_value_caps(table, space, pruned);
    for (std::size_t j = 0; j < prog.vars.size(); ++j) {
        const VarMeta& m = prog.meta[j];
        if (m.role != 'y') continue;
        ConstraintRow row;
        row.label = "cut-ycap[" + std::to_string(m.agent) + "][" + std::to_string(m.id) + "]";
        row.coeffs.emplace_back(static_cast<int>(j), 1.0);
        row.rel = Relation::less_equal;
        row.rhs = caps[m.agent][static_cast<std::size_t>(m.id)];
        prog.add_row(std::move(row));
    }
}

MixedIntegerProgram build_best_response_lp(const JointHistoryTable& table,
                                           const HistorySpace& space, int agent,
                                           const JointSequencePolicy& others,
                                           const PrunedSpace* pruned) {
    const int n = static_cast<int>(space.agents.size());
    const int T = space.horizon;
    for (int k = 0; k < n; ++k) {
        if (k == agent) continue;
        auto rep = validate_policy_over(space.agents[k], pruned, others.agents[k], 1e-6);
        if (!rep.ok())
            throw std::invalid_argument("fixed policy of agent " + std::to_string(k) +
                                        " violates the policy constraints");
    }
    MixedIntegerProgram prog;
    prog.name = "best-response[" + std::to_string(agent) + "]";
    prog.sense = Sense::maximize;
    append_policy_constraints(prog, space.agents[agent], pruned, /*binary_terminals=*/false);

    // other agents' support terminals with weights
    std::vector<std::vector<std::pair<int, double>>> support(n);
    for (int k = 0; k < n; ++k) {
        if (k == agent) continue;
        const AgentHistorySpace& sk = space.agents[k];
        for (int h = sk.first_terminal(); h < sk.num_histories(); ++h)
            if (others.agents[k].weights[h] != 0.0 && (!pruned || pruned->is_alive(k, h)))
                support[k].emplace_back(sk.local_index(h), others.agents[k].weights[h]);
    }
    const AgentHistorySpace& sp = space.agents[agent];
    std::vector<int> parts(n);
    std::vector<std::size_t> pick(n, 0);
    bool empty = false;
    for (int k = 0; k < n; ++k)
        if (k != agent) empty |= support[k].empty();
    for (int h = sp.first_terminal(); h < sp.num_histories(); ++h) {
        if (pruned && !pruned->is_alive(agent, h)) continue;
        double coeff = 0.0;
        if (!empty) {
            std::fill(pick.begin(), pick.end(), 0);
            parts[agent] = sp.local_index(h);
            while (true) {
                double wq = 1.0;
                for (int k = 0; k < n; ++k) {
                    if (k == agent) continue;
                    parts[k] = support[k][pick[k]].first;
                    wq *= support[k][pick[k]].second;
                }
                coeff += wq * table.value_at(T, table.hist_indexer[T].flatten(parts));
                int k = n - 1;
                while (k >= 0) {
                    if (k == agent) {
                        --k;
                        continue;
                    }
                    if (++pick[k] < support[k].size()) break;
                    pick[k--] = 0;
                }
                if (k < 0) break;
            }
        }
        if (std::abs(coeff) >= kCoeffDrop)
            prog.set_objective_coeff(prog.variable(x_label(agent, h)), coeff);
    }
    return prog;
}

void apply_pruned_adjustments(MixedIntegerProgram& prog, const PrunedSpace& pruned) {
    (void)pruned;
    for (auto& row : prog.rows)
        if (row.label.rfind("link[", 0) == 0 || row.label == "count")
            row.rel = Relation::less_equal;
}

ExtractedPolicy extract_joint_policy(const MixedIntegerProgram& prog, const SolveReport& report,
                                     const JointHistoryTable& table, const HistorySpace& space,
                                     const PrunedSpace* pruned) {
    if (report.assignment.empty())
        throw std::runtime_error("policy extraction needs a solved program with an assignment");
    const int n = static_cast<int>(space.agents.size());
    ExtractedPolicy out;
    out.policy.agents.resize(n);
    std::vector<char> has_binary_x(n, 0);
    for (int i = 0; i < n; ++i) {
        out.policy.agents[i].agent = i;
        out.policy.agents[i].weights.assign(space.agents[i].num_histories(), 0.0);
    }
    for (std::size_t j = 0; j < prog.vars.size(); ++j) {
        const VarMeta& m = prog.meta[j];
        if (m.role != 'x' || m.agent < 0 || m.agent >= n) continue;
        double v = report.assignment[j];
        if (prog.vars[j].kind == VarKind::binary) {
            has_binary_x[m.agent] = 1;
            double r = std::round(v);
            if (std::abs(v - r) > kRoundTol)
                throw std::runtime_error("binary " + prog.vars[j].label +
                                         " is not integral in the solver assignment");
            v = r;
        } else if (v < 0.0 && v > -1e-7) {
            v = 0.0;
        }
        out.policy.agents[m.agent].weights[static_cast<std::size_t>(m.id)] = v;
    }
    for (int i = 0; i < n; ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        if (has_binary_x[i]) {
            // rebuild non-terminal weights bottom-up from the rounded
            // terminals so the pure policy is exactly flow-consistent
            auto& w = out.policy.agents[i].weights;
            for (int t = space.horizon - 1; t >= 1; --t) {
                int first = sp.first_of_length(t);
                for (int h = first; h < first + sp.count_of_length(t); ++h) {
                    if (pruned && !pruned->is_alive(i, h)) continue;
                    int live_o = -1;
                    for (int o = 0; o < sp.num_obs; ++o)
                        if (!pruned || pruned->live_branch(i, h, o)) {
                            live_o = o;
                            break;
                        }
                    if (live_o < 0) continue;
                    int iset = sp.child_iset[static_cast<std::size_t>(h) * sp.num_obs + live_o];
                    double sum = 0.0;
                    for (int c : sp.info_sets[iset].members)
                        if (!pruned || pruned->is_alive(i, c)) sum += w[c];
                    w[h] = sum;
                }
            }
        }
        auto rep = validate_policy_over(sp, pruned, out.policy.agents[i], 1e-6);
        if (!rep.ok())
            throw std::runtime_error("extracted policy of agent " + std::to_string(i) +
                                     " violates the policy constraints (solver bug)");
    }
    out.value = policy_value(table, space, out.policy);
    if (std::abs(out.value - report.value) > 1e-6)
        throw std::runtime_error("re-evaluated policy value " + std::to_string(out.value) +
                                 " does not match the solver objective " +
                                 std::to_string(report.value));
    return out;
}

}  // namespace decpomdp

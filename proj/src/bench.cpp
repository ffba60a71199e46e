#include "decpomdp/bench.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "decpomdp/program.hpp"

namespace decpomdp {

const std::vector<BenchmarkSpec>& benchmark_registry() {
    static const std::vector<BenchmarkSpec> registry = {
        {"mabc",
         "two-node broadcast channel with faulty collision signalling",
         {{3, 2.99, "paper"}, {4, 3.89, "paper"}, {5, 4.79, "paper"}}},
        {"ma-tiger",
         "two-agent tiger problem, reward function A",
         {{3, 5.19, "paper"}, {4, 4.80, "paper"}}},
        {"fire-fighting", "fire fighting team (2 agents, 3 houses, 3 fire levels)", {}},
        {"grid-meeting", "two robots meeting on a 2x2 grid", {}},
        {"random", "seeded random instance (3 agents, 50 states, rewards 1..5)", {}},
    };
    return registry;
}

DecPomdp mabc(int horizon) {
    // state = buffer1 * 2 + buffer2, 0 = empty, 1 = full
    DecPomdp m = make_model("mabc", horizon, {"empty-empty", "empty-full", "full-empty", "full-full"},
                            {AgentSpec{{"use", "dont"}, {"collision", "no-collision"}},
                             AgentSpec{{"use", "dont"}, {"collision", "no-collision"}}});
    const double refill[2] = {0.9, 0.1};
    const int USE = 0;
    auto full1 = [](int s) { return s >> 1 & 1; };
    auto full2 = [](int s) { return s & 1; };

    for (int s = 0; s < 4; ++s) {
        for (int a1 = 0; a1 < 2; ++a1)
            for (int a2 = 0; a2 < 2; ++a2) {
                long ja = a1 * 2 + a2;
                bool send1 = full1(s) && a1 == USE;
                bool send2 = full2(s) && a2 == USE;
                bool collision = send1 && send2;
                // per-buffer next-full probability
                double pf[2];
                int full[2] = {full1(s), full2(s)};
                bool send[2] = {send1, send2};
                for (int i = 0; i < 2; ++i) {
                    if (!full[i])
                        pf[i] = refill[i];  // empty buffers refill regardless of the action
                    else if (send[i] && !collision)
                        pf[i] = refill[i];  // delivered, then possibly refilled
                    else
                        pf[i] = 1.0;  // kept: held back or lost to a collision
                }
                for (int s2 = 0; s2 < 4; ++s2) {
                    double p1 = full1(s2) ? pf[0] : 1.0 - pf[0];
                    double p2 = full2(s2) ? pf[1] : 1.0 - pf[1];
                    m.p(s, ja, s2) = p1 * p2;
                }
                // a lone uncollided send from a full buffer earns the reward
                m.r(s, ja) = (send1 != send2) ? 1.0 : 0.0;
            }
    }
    // observations: collision signals only after (use, use) into (full, full)
    const int CO = 0, NC = 1;
    for (long ja = 0; ja < 4; ++ja)
        for (int s2 = 0; s2 < 4; ++s2) {
            if (ja == 0 && s2 == 3) {
                m.g(ja, s2, CO * 2 + CO) = 0.81;
                m.g(ja, s2, CO * 2 + NC) = 0.09;
                m.g(ja, s2, NC * 2 + CO) = 0.09;
                m.g(ja, s2, NC * 2 + NC) = 0.01;
            } else {
                m.g(ja, s2, NC * 2 + NC) = 1.0;
            }
        }
    m.initial_belief[3] = 1.0;  // (full, full)
    return m;
}

DecPomdp ma_tiger(int horizon) {
    DecPomdp m = make_model("ma-tiger", horizon, {"tiger-left", "tiger-right"},
                            {AgentSpec{{"open-left", "open-right", "listen"},
                                       {"noise-left", "noise-right"}},
                             AgentSpec{{"open-left", "open-right", "listen"},
                                       {"noise-left", "noise-right"}}});
    const int OL = 0, OR = 1, LI = 2;
    const int L = 0, R = 1;
    // reward function "A"
    auto set_r = [&](int a1, int a2, double left, double right) {
        long ja = a1 * 3 + a2;
        m.r(L, ja) = left;
        m.r(R, ja) = right;
    };
    set_r(OR, OR, 20, -50);
    set_r(OL, OL, -50, 20);
    set_r(OR, OL, -100, -100);
    set_r(OL, OR, -100, -100);
    set_r(LI, LI, -2, -2);
    set_r(LI, OR, 9, -101);
    set_r(OR, LI, 9, -101);
    set_r(LI, OL, -101, 9);
    set_r(OL, LI, -101, 9);

    for (int a1 = 0; a1 < 3; ++a1)
        for (int a2 = 0; a2 < 3; ++a2) {
            long ja = a1 * 3 + a2;
            bool both_listen = a1 == LI && a2 == LI;
            for (int s = 0; s < 2; ++s)
                for (int s2 = 0; s2 < 2; ++s2)
                    m.p(s, ja, s2) = both_listen ? (s == s2 ? 1.0 : 0.0) : 0.5;
            for (int s2 = 0; s2 < 2; ++s2)
                for (int o1 = 0; o1 < 2; ++o1)
                    for (int o2 = 0; o2 < 2; ++o2) {
                        double v;
                        if (both_listen) {
                            double p1 = o1 == s2 ? 0.85 : 0.15;  // noise-left matches tiger-left
                            double p2 = o2 == s2 ? 0.85 : 0.15;
                            v = p1 * p2;
                        } else {
                            v = 0.25;
                        }
                        m.g(ja, s2, o1 * 2 + o2) = v;
                    }
        }
    m.initial_belief = {0.5, 0.5};
    return m;
}

DecPomdp fire_fighting(int horizon, int n_agents, int n_houses, int n_fire_levels, long state_cap) {
    long double nstates = 1;
    for (int h = 0; h < n_houses; ++h) nstates *= n_fire_levels;
    if (nstates > static_cast<long double>(state_cap))
        throw SizeCapError("fire-fighting state space exceeds the cap", "states",
                           static_cast<std::uint64_t>(nstates),
                           static_cast<std::uint64_t>(state_cap));
    const int S = static_cast<int>(nstates);

    std::vector<std::string> states(S);
    auto level = [&](int s, int house) {
        for (int h = n_houses - 1; h > house; --h) s /= n_fire_levels;
        return s % n_fire_levels;
    };
    for (int s = 0; s < S; ++s) {
        std::string lbl = "fire";
        for (int h = 0; h < n_houses; ++h) lbl += "-" + std::to_string(level(s, h));
        states[s] = lbl;
    }
    std::vector<AgentSpec> agents(n_agents);
    for (auto& a : agents) {
        for (int h = 1; h <= n_houses; ++h) a.actions.push_back("house-" + std::to_string(h));
        a.observations = {"flames", "no-flames"};
    }
    DecPomdp m = make_model("fire-fighting", horizon, std::move(states), std::move(agents));

    auto flame_prob = [](int f) { return f == 0 ? 0.2 : (f == 1 ? 0.5 : 0.8); };

    std::vector<int> acts(n_agents);
    // per-house next-level distribution, then a product over houses
    std::vector<std::vector<double>> dist(n_houses);
    for (long ja = 0; ja < m.num_joint_actions(); ++ja) {
        m.action_indexer.unflatten(ja, acts);
        std::vector<int> at_house(n_houses, 0);
        for (int a : acts) at_house[a] += 1;
        for (int s = 0; s < S; ++s) {
            for (int h = 0; h < n_houses; ++h) {
                int f = level(s, h);
                bool neighbor_burning = (h > 0 && level(s, h - 1) > 0) ||
                                        (h + 1 < n_houses && level(s, h + 1) > 0);
                auto& d = dist[h];
                d.assign(n_fire_levels, 0.0);
                if (at_house[h] >= 2) {
                    d[0] = 1.0;
                } else if (at_house[h] == 1) {
                    double q = neighbor_burning ? 0.6 : 1.0;
                    int lowered = f > 0 ? f - 1 : 0;
                    d[lowered] += q;
                    d[f] += 1.0 - q;
                } else if (f > 0) {
                    double q = neighbor_burning ? 0.8 : 0.4;
                    int raised = f + 1 < n_fire_levels ? f + 1 : f;
                    d[raised] += q;
                    d[f] += 1.0 - q;
                } else {
                    double q = neighbor_burning ? 0.8 : 0.0;
                    d[1] += q;
                    d[0] += 1.0 - q;
                }
            }
            double expected_fire = 0.0;
            for (int s2 = 0; s2 < S; ++s2) {
                double p = 1.0;
                for (int h = 0; h < n_houses && p > 0.0; ++h) p *= dist[h][level(s2, h)];
                if (p == 0.0) continue;
                m.p(s, ja, s2) = p;
                int total = 0;
                for (int h = 0; h < n_houses; ++h) total += level(s2, h);
                expected_fire += p * total;
            }
            m.r(s, ja) = -expected_fire;
        }
        // observations from the post-transition levels at each agent's house
        for (int s2 = 0; s2 < S; ++s2)
            for (long jo = 0; jo < m.num_joint_obs(); ++jo) {
                double p = 1.0;
                long rem = jo;
                for (int i = n_agents - 1; i >= 0; --i) {
                    int oi = static_cast<int>(rem % 2);
                    rem /= 2;
                    double pf = flame_prob(level(s2, acts[i]));
                    p *= oi == 0 ? pf : 1.0 - pf;
                }
                m.g(ja, s2, jo) = p;
            }
    }
    for (int s = 0; s < S; ++s) m.initial_belief[s] = 1.0 / S;
    return m;
}

DecPomdp grid_meeting(int horizon) {
    // cells: 0 = top-left, 1 = top-right, 2 = bottom-left, 3 = bottom-right
    std::vector<std::string> states;
    const char* cell[4] = {"tl", "tr", "bl", "br"};
    for (int p1 = 0; p1 < 4; ++p1)
        for (int p2 = 0; p2 < 4; ++p2) states.push_back(std::string(cell[p1]) + "-" + cell[p2]);
    std::vector<AgentSpec> agents(2);
    for (auto& a : agents) {
        a.actions = {"up", "down", "left", "right", "stay"};
        a.observations = {"wall-left", "wall-right"};
    }
    DecPomdp m = make_model("grid-meeting", horizon, std::move(states), std::move(agents));

    auto col = [](int c) { return c & 1; };
    auto row = [](int c) { return c >> 1; };
    auto move = [&](int c, int dir) {  // 0 up, 1 down, 2 left, 3 right; walls block
        int x = col(c), y = row(c);
        switch (dir) {
            case 0: y = y > 0 ? y - 1 : y; break;
            case 1: y = y < 1 ? y + 1 : y; break;
            case 2: x = x > 0 ? x - 1 : x; break;
            case 3: x = x < 1 ? x + 1 : x; break;
        }
        return y * 2 + x;
    };
    // per-cell, per-action distribution over next cells
    double step[4][5][4] = {};
    for (int c = 0; c < 4; ++c)
        for (int a = 0; a < 5; ++a) {
            if (a == 4) {
                step[c][a][c] = 1.0;
                continue;
            }
            step[c][a][move(c, a)] += 0.6;
            for (int d = 0; d < 4; ++d)
                if (d != a) step[c][a][move(c, d)] += 0.1;
            step[c][a][c] += 0.1;  // the stray-to-stay share
        }

    for (int s = 0; s < 16; ++s) {
        int p1 = s >> 2, p2 = s & 3;
        for (int a1 = 0; a1 < 5; ++a1)
            for (int a2 = 0; a2 < 5; ++a2) {
                long ja = a1 * 5 + a2;
                double meet = 0.0;
                for (int q1 = 0; q1 < 4; ++q1)
                    for (int q2 = 0; q2 < 4; ++q2) {
                        double p = step[p1][a1][q1] * step[p2][a2][q2];
                        m.p(s, ja, q1 * 4 + q2) = p;
                        if (q1 == q2) meet += p;
                    }
                m.r(s, ja) = meet;
            }
    }
    for (long ja = 0; ja < 25; ++ja)
        for (int s2 = 0; s2 < 16; ++s2) {
            int o1 = col(s2 >> 2), o2 = col(s2 & 3);  // column 0 has the wall on the left
            m.g(ja, s2, o1 * 2 + o2) = 1.0;
        }
    m.initial_belief[0] = 1.0;  // both robots in the top-left corner
    return m;
}

namespace {

// Generator version 1: raw mt19937_64 draws through fixed arithmetic, so
// seeds stay stable across standard libraries.
struct StableRng {
    std::mt19937_64 gen;
    explicit StableRng(std::uint64_t seed) : gen(seed) {}
    double real() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    int integer(int lo, int hi) {
        return lo + static_cast<int>(real() * (hi - lo + 1)) % (hi - lo + 1);
    }
};

}  // namespace

DecPomdp random_problem(std::uint64_t seed, int n_agents, int n_states, int n_actions, int n_obs,
                        int reward_lo, int reward_hi, int horizon) {
    if (reward_hi < reward_lo) throw std::invalid_argument("reward range is empty");
    std::vector<std::string> states(n_states);
    for (int s = 0; s < n_states; ++s) states[s] = "s" + std::to_string(s);
    std::vector<AgentSpec> agents(n_agents);
    for (auto& a : agents) {
        for (int k = 0; k < n_actions; ++k) a.actions.push_back("a" + std::to_string(k));
        for (int k = 0; k < n_obs; ++k) a.observations.push_back("o" + std::to_string(k));
    }
    DecPomdp m = make_model("random-" + std::to_string(seed), horizon, std::move(states),
                            std::move(agents));
    StableRng rng(seed);
    for (int s = 0; s < n_states; ++s)
        for (long ja = 0; ja < m.num_joint_actions(); ++ja) {
            double sum = 0.0;
            for (int s2 = 0; s2 < n_states; ++s2) {
                double v = rng.real();
                m.p(s, ja, s2) = v;
                sum += v;
            }
            for (int s2 = 0; s2 < n_states; ++s2) m.p(s, ja, s2) /= sum;
        }
    for (long ja = 0; ja < m.num_joint_actions(); ++ja)
        for (int s2 = 0; s2 < n_states; ++s2) {
            double sum = 0.0;
            for (long jo = 0; jo < m.num_joint_obs(); ++jo) {
                double v = rng.real();
                m.g(ja, s2, jo) = v;
                sum += v;
            }
            for (long jo = 0; jo < m.num_joint_obs(); ++jo) m.g(ja, s2, jo) /= sum;
        }
    for (int s = 0; s < n_states; ++s)
        for (long ja = 0; ja < m.num_joint_actions(); ++ja)
            m.r(s, ja) = rng.integer(reward_lo, reward_hi);
    for (int s = 0; s < n_states; ++s) m.initial_belief[s] = 1.0 / n_states;
    return m;
}

DecPomdp make_benchmark(const std::string& name, int horizon, std::uint64_t seed) {
    if (name == "mabc") return mabc(horizon);
    if (name == "ma-tiger") return ma_tiger(horizon);
    if (name == "fire-fighting") return fire_fighting(horizon);
    if (name == "grid-meeting") return grid_meeting(horizon);
    if (name == "random") return random_problem(seed, 3, 50, 2, 2, 1, 5, horizon);
    throw std::invalid_argument("unknown benchmark: " + name);
}

BruteForceResult brute_force_optimal(const DecPomdp& model, std::uint64_t cap) {
    const int n = model.num_agents();
    const int T = model.horizon;
    std::vector<TreePolicy> trees;
    long double joint_count = 1;
    for (int i = 0; i < n; ++i) {
        trees.emplace_back(static_cast<int>(model.agents[i].observations.size()), T);
        long double per_agent = 1;
        for (long d = 0; d < trees[i].num_nodes(); ++d)
            per_agent *= static_cast<long double>(model.agents[i].actions.size());
        joint_count *= per_agent;
        if (joint_count > static_cast<long double>(cap) * 2) break;
    }
    if (joint_count > static_cast<long double>(cap))
        throw SizeCapError("brute force refused: too many pure joint policies",
                           "joint pure policies", static_cast<std::uint64_t>(joint_count),
                           cap);

    // one odometer digit per decision node across all agents
    struct Digit {
        int agent;
        long node;
        int radix;
    };
    std::vector<Digit> digits;
    for (int i = 0; i < n; ++i) {
        for (long d = 0; d < trees[i].num_nodes(); ++d) {
            digits.push_back({i, d, static_cast<int>(model.agents[i].actions.size())});
            trees[i].actions[d] = 0;
        }
    }

    BruteForceResult best;
    best.value = -kInf;
    while (true) {
        ++best.policies_evaluated;
        double v = evaluate_tree_policy(model, trees);
        if (v > best.value) {  // ties keep the first maximizer in enumeration order
            best.value = v;
            best.policy = trees;
        }
        // increment the odometer, last digit fastest
        int i = static_cast<int>(digits.size()) - 1;
        while (i >= 0) {
            int& a = trees[digits[i].agent].actions[digits[i].node];
            if (++a < digits[i].radix) break;
            a = 0;
            --i;
        }
        if (i < 0) break;
    }
    return best;
}

}  // namespace decpomdp

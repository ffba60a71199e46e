#include <cmath>
#include <stdexcept>

#include "decpomdp/builders.hpp"
#include "decpomdp/optimize.hpp"

namespace decpomdp {

AltMaxResult alternating_maximization(const JointHistoryTable& table, const HistorySpace& space,
                                      const JointSequencePolicy& start, int max_rounds,
                                      const SimplexOptions& lp) {
    const int n = static_cast<int>(space.agents.size());
    if (static_cast<int>(start.agents.size()) != n)
        throw std::invalid_argument("start policy does not cover every agent");
    for (int i = 0; i < n; ++i)
        if (!validate_policy(space.agents[i], start.agents[i], 1e-6).ok())
            throw std::invalid_argument("start policy of agent " + std::to_string(i) +
                                        " is not a valid sequence-form policy");

    AltMaxResult out;
    out.policy = start;
    out.value = policy_value(table, space, out.policy);
    for (out.rounds = 0; out.rounds < max_rounds; ++out.rounds) {
        double before = out.value;
        for (int i = 0; i < n; ++i) {
            MixedIntegerProgram br = build_best_response_lp(table, space, i, out.policy);
            SolveReport rep = solve_lp(br, lp);
            if (rep.status != SolveStatus::optimal)
                throw std::runtime_error("best-response LP for agent " + std::to_string(i) +
                                         " did not solve to optimality");
            SequencePolicy next;
            next.agent = i;
            next.weights.assign(space.agents[i].num_histories(), 0.0);
            for (std::size_t j = 0; j < br.vars.size(); ++j) {
                const VarMeta& m = br.meta[j];
                if (m.role != 'x') continue;
                double v = rep.assignment[j];
                if (v < 1e-12) v = 0.0;
                next.weights[static_cast<std::size_t>(m.id)] = v;
            }
            out.policy.agents[i] = std::move(next);
            out.value = rep.value;
        }
        if (out.value - before < 1e-9) break;
    }
    // report the exactly re-evaluated value of the final joint policy
    out.value = policy_value(table, space, out.policy);
    return out;
}

}  // namespace decpomdp

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "decpomdp/model.hpp"

namespace decpomdp {

/// Registry entry for a built-in problem. Expected optima carry their
/// provenance: "paper" values are asserted in tests, "internal" ones are
/// validated by cross-method agreement only.
struct BenchmarkSpec {
    std::string name;
    std::string summary;
    struct Expected {
        int horizon;
        double value;
        std::string provenance;  // "paper" or "internal"
    };
    std::vector<Expected> expected;
};

const std::vector<BenchmarkSpec>& benchmark_registry();

/// Two-node broadcast channel: 4 states, 2 actions/2 observations per agent,
/// refill probabilities 0.9 and 0.1, faulty collision signalling
/// 0.81/0.09/0.09/0.01 after a genuine collision. A send from a full buffer
/// that does not collide earns reward 1.
DecPomdp mabc(int horizon = 3);

/// Two-agent tiger problem, reward function "A"; opening any door resets the
/// state to the uniform initial distribution.
DecPomdp ma_tiger(int horizon = 3);

/// Fire fighting team: agents move between houses, fires spread and are
/// extinguished, flames are observed noisily at the agent's own house.
///
/// Ambiguities are resolved as follows: an attended house only follows the
/// extinguish dynamics (never spreads in the same step); neighbor-burning is
/// read off the pre-transition state; houses 1 and n have one neighbor;
/// observations and the reward are drawn from the post-transition state
/// (reward folds the expectation over next states into R(s,a)).
DecPomdp fire_fighting(int horizon = 3, int n_agents = 2, int n_houses = 3, int n_fire_levels = 3,
                       long state_cap = 1000000);

/// Two robots on a 2x2 grid trying to share a square. Moves succeed with
/// probability 0.6 and otherwise scatter 0.1 to each other direction and to
/// staying; moves into walls stay put; `stay` itself is deterministic.
/// The observation is which side wall the robot stands next to. The reward
/// is the probability of sharing a square after the transition.
DecPomdp grid_meeting(int horizon = 2);

/// Seeded random instance: transition and observation rows are normalized
/// uniform draws, rewards are uniform integers in [reward_lo, reward_hi],
/// alpha is uniform. The draw order is fixed (generator version 1), so a
/// seed pins the model across runs and platforms.
DecPomdp random_problem(std::uint64_t seed, int n_agents = 3, int n_states = 50, int n_actions = 2,
                        int n_obs = 2, int reward_lo = 1, int reward_hi = 5, int horizon = 3);

/// Looks a benchmark up by registry name ("mabc", "ma-tiger", "fire-fighting",
/// "grid-meeting", "random").
DecPomdp make_benchmark(const std::string& name, int horizon, std::uint64_t seed = 1);

struct BruteForceResult {
    double value = 0.0;
    std::vector<TreePolicy> policy;  // first maximizer in enumeration order
    std::uint64_t policies_evaluated = 0;
};

/// Exhaustive enumeration of pure joint tree policies, evaluated with
/// evaluate_tree_policy. Refuses (SizeCapError) when the joint count exceeds
/// `cap`; it never samples.
BruteForceResult brute_force_optimal(const DecPomdp& model, std::uint64_t cap = 1000000);

}  // namespace decpomdp

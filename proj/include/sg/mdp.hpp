#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sg/game.hpp"

namespace sg {

struct ViConfig {
    double epsilon = 1e-6;        // max per-state update below this stops
    long max_iterations = 1000000;
};

struct ViResult {
    std::vector<double> values;
    bool converged = true;
    long iterations = 0;
};

/// Bellman iteration on the full game (Maximizer states take the max,
/// Minimizer the min) from V0 = 1 on targets, 0 elsewhere. The iterates grow
/// monotonically from below, so the result is a lower bound on the true
/// values -- but no stopping criterion certifies how tight.
ViResult unguaranteed_vi(const Game& game, const ViConfig& config);

enum class MdpMethod { vi, policy_iteration };

struct BestResponse {
    std::vector<double> values;
    std::vector<Rat> exact_values;  // filled in policy_iteration mode
    Strategy tau;
    long iterations = 0;
    bool exact = false;
};

/// Minimal reachability values of an induced MDP (every Maximizer state has
/// exactly one action), plus a Minimizer strategy attaining them.
///
/// vi: iterate from below until the largest update drops under `precision`.
/// policy_iteration: exact rational values. States from which the Minimizer
/// can avoid the targets entirely are fixed to 0 up front, which keeps every
/// policy-evaluation linear system nonsingular; policies improve by strict
/// exact comparison, all improvable states switch simultaneously.
BestResponse min_best_response(const Game& mdp, MdpMethod method, double precision);

/// Interval dominance: the action whose lower bound beats every other
/// action's upper bound, if one exists. `bounds` holds one (lower, upper)
/// pair per action of s.
std::optional<int> action_dominance_check(const Game& game, StateId s,
                                          std::span<const std::pair<double, double>> bounds);

/// States from which the Minimizer can keep the play out of the target set
/// forever (greatest closed set); exactly the min-reachability-0 states.
std::vector<bool> minimizer_avoid_set(const Game& mdp);

}  // namespace sg

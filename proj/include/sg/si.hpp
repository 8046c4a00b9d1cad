#pragma once

#include <functional>
#include <span>
#include <string>

#include "sg/game.hpp"
#include "sg/mdp.hpp"

namespace sg {

enum class SiInit { attractor, vi_seeded };
enum class Guarantee { exact, epsilon, unguaranteed };

struct SiConfig {
    SiInit init = SiInit::vi_seeded;
    double vi_epsilon = 1e-6;            // precision of the seeding value iteration
    MdpMethod opponent = MdpMethod::policy_iteration;
    double opponent_precision = 1e-8;    // used by the vi opponent
    long max_iterations = 100000;        // safety net; far above the theoretical need

    /// Invoked after every Minimizer best response with the preprocessed
    /// game, the current Maximizer strategy and the response. Used by tests
    /// to observe monotonicity and properness across iterations.
    std::function<void(const Game&, const Strategy&, const BestResponse&)> observer;
};

struct SolveStats {
    long iterations = 0;
    long mdp_solves = 0;
    double wall_ms = 0.0;
    int restarts_used = 0;    // filled by the QP path
    double objective = 0.0;   // filled by the QP path
    bool converged = true;
};

struct SolveResult {
    std::vector<double> values;
    std::vector<Rat> exact_values;  // nonempty iff guarantee == exact
    Strategy maximizer_strategy;
    Strategy minimizer_strategy;
    SolveStats stats;
    std::string method;
    Guarantee guarantee = Guarantee::exact;
};

/// Strategy iteration: starting from a proper Maximizer strategy, repeatedly
/// compute the Minimizer best response and greedily improve, keeping the
/// incumbent action on ties. Terminates when the strategy is stable; the
/// sequence of response values is pointwise non-decreasing.
SolveResult solve_si(const Game& game, const SiConfig& config = {});

/// Greedy strategy from value estimates (argmax of V(s,a), ties to the
/// lowest action id), then repaired to be proper: Maximizer states inside
/// end components of the induced MDP that avoid the targets and sinks are
/// switched to their attractor action until no such component remains.
Strategy initial_strategy_from_estimates(const Game& game, std::span<const double> estimates);

/// Strategy iteration over the MEC decomposition: MECs are processed in
/// depth-first post-order, each expanded to its accessible closure and solved
/// as a sub-game in which already-solved states are frozen as a weighted
/// target/sink lottery; non-MEC states are solved last.
SolveResult topological_si(const Game& game, const SiConfig& config = {});

}  // namespace sg

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sg/game.hpp"

namespace sg {

/// A maximal end component: a set of states T together with the per-state
/// actions that stay inside T, the state-action pairs that can leave T, and
/// the one-step successors outside T reachable through them.
struct Mec {
    std::vector<StateId> states;                       // ascending
    std::vector<std::vector<int>> staying_actions;     // parallel to `states`
    std::vector<std::pair<StateId, int>> exiting_pairs;  // ascending (state, action)
    std::vector<StateId> exit_states;                  // ascending, disjoint from `states`

    bool contains(StateId s) const;
    int index_of(StateId s) const;  // position in `states`, or -1
};

/// MEC decomposition by iterative SCC refinement: actions with a successor
/// outside their SCC are removed and SCCs recomputed until a fixpoint.
/// The result is ordered by smallest member state; every target and sink
/// forms its own singleton MEC.
std::vector<Mec> mec_decomposition(const Game& game);

/// Maximizer strategy from a backwards breadth-first search over the target
/// and sink states: a state discovered in layer i picks an action that
/// reaches layer i-1 with positive probability.
/// Throws ValidationError, naming the offending states, if some state cannot
/// reach a target or sink at all.
Strategy attractor_strategy(const Game& game);

/// True iff the MDP induced by sigma contains no closed end component that
/// avoids the targets and sinks -- no region from which absorption has
/// probability zero no matter what the Minimizer does. Avoiding MECs that
/// still own an exiting pair are the Minimizer's prerogative (staying
/// forfeits with value 0) and do not disqualify sigma; an attractor
/// strategy satisfies this by construction.
bool is_proper(const Game& game, const Strategy& sigma);

/// True iff every MEC is a singleton target or sink, so the game is absorbed
/// almost surely under all strategy pairs.
bool is_stopping(const Game& game);

/// Depth-first-search post-order of the MEC quotient graph from the initial
/// state; MECs not reachable from it are appended last in index order.
/// Note this is not a topological sort: MECs can be mutually reachable
/// through non-staying actions.
std::vector<int> mec_postorder(const Game& game, const std::vector<Mec>& mecs);

/// Forward closure of `from` under all actions (includes `from` itself).
std::vector<StateId> accessible_states(const Game& game, std::span<const StateId> from);

/// Per-state flag: some strategy pair reaches a state in `goal` with positive
/// probability (plain graph reachability over all actions).
std::vector<bool> states_reaching(const Game& game, const std::vector<bool>& goal);

/// Rewrites every state that cannot reach a target under any strategy pair
/// into a sink. Values of all states are unchanged; `dead_out`, when given,
/// receives the rewritten state ids.
Game dead_states_to_sinks(const Game& game, std::vector<StateId>* dead_out = nullptr);

}  // namespace sg

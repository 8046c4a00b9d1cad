#pragma once

#include <optional>
#include <vector>

#include "sg/game.hpp"

namespace sg {

/// A rewritten game plus the correspondence from its states back to the
/// input: origin[new_id] is the originating state id, or nullopt for an
/// auxiliary state introduced by the rewrite. Original states keep their ids.
struct TransformResult {
    Game game;
    std::vector<std::optional<StateId>> origin;
};

/// Caps every state at two actions: a state with k > 2 actions becomes a
/// left-leaning chain of same-owner auxiliary states whose leaves carry the
/// original actions. Values of original states are unchanged.
TransformResult to_2act(const Game& game);

/// Gives every non-absorbing single-action state a second action that never
/// improves it: Maximizer states one to a sink, Minimizer states one to a
/// target (created if the game has none). Values are unchanged.
TransformResult to_no1act(const Game& game);

/// Rewrites every distribution into probabilities {1/2, 1} by a binary tree
/// of single-action auxiliary states encoding the dyadic expansion. Exact:
/// a probability that is not dyadic with at most max_bits bits is an error,
/// never an approximation.
TransformResult to_half_probs(const Game& game, int max_bits = 64);

/// Makes the game stopping: each affected action is rerouted through a chain
/// of m auxiliary states that follows the original distribution with
/// probability 1 - 2^-m and diverts to a sink with probability 2^-m (each
/// chain state continues with 1/2, steps deeper with 1/2, the last one sinks
/// with 1/2). With mec_only, only actions of states inside non-absorbing
/// MECs are treated. Values are perturbed by at most epsilon = 2^-m.
TransformResult to_stopping(const Game& game, int m, bool mec_only = true);

/// Removes a single-action state v that cannot loop back to itself,
/// redistributing incoming probability mass onto v's successors:
/// delta'(s,a,w) = delta(s,a,w) + delta(s,a,v) * delta(v,*,w).
/// Values of all remaining states are unchanged. State ids above v shift
/// down by one.
Game eliminate_single_action_state(const Game& game, StateId v);

/// Inverse of to_half_probs: iteratively eliminates the auxiliary tree
/// states, recovering a game with the original state set and values.
Game undo_half_probs(const TransformResult& result);

/// Full Condon normal form: stopping, then half-probabilities, then two
/// actions, then no single-action states; origin maps composed.
TransformResult to_condon_normal_form(const Game& game, int m, bool mec_only = true);

// Normal-form predicates (is_stopping lives in graph.hpp).
bool is_2act(const Game& game);
bool is_half_probs(const Game& game);
bool is_no1act(const Game& game);

}  // namespace sg

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sg/rational.hpp"

namespace sg {

struct SgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed model text; the message carries the offending line number.
struct ParseError : SgError {
    using SgError::SgError;
};

/// A structurally well-formed input that violates a model invariant.
struct ValidationError : SgError {
    using SgError::SgError;
};

enum class Owner { maximizer, minimizer };
enum class Kind { normal, target, sink };

using StateId = int;

struct TransitionEntry {
    StateId succ;
    Rat prob;
    bool operator==(const TransitionEntry&) const = default;
};

struct GameAction {
    std::string name;
    std::vector<TransitionEntry> dist;  // sorted by successor id, probs in (0,1]
    bool operator==(const GameAction&) const = default;
};

struct GameState {
    Owner owner = Owner::maximizer;
    Kind kind = Kind::normal;
    std::vector<GameAction> actions;
    bool operator==(const GameState&) const = default;
};

/// A simple stochastic game over dense state ids with exact rational
/// transition probabilities. Immutable after construction; safe to share
/// read-only across threads.
///
/// Invariants (checked at construction):
///  - every distribution sums to exactly 1, entries in (0,1], no duplicates
///  - targets and sinks carry exactly one action: a probability-1 self-loop
///  - every state has at least one action; action names unique per state
class Game {
  public:
    Game(std::vector<GameState> states, StateId initial);

    int num_states() const { return static_cast<int>(states_.size()); }
    const GameState& state(StateId s) const { return states_.at(s); }
    StateId initial() const { return initial_; }

    int num_actions(StateId s) const { return static_cast<int>(states_.at(s).actions.size()); }
    const GameAction& action(StateId s, int a) const { return states_.at(s).actions.at(a); }

    bool is_target(StateId s) const { return state(s).kind == Kind::target; }
    bool is_sink(StateId s) const { return state(s).kind == Kind::sink; }
    bool is_absorbing(StateId s) const { return state(s).kind != Kind::normal; }

    const std::vector<StateId>& targets() const { return targets_; }
    const std::vector<StateId>& sinks() const { return sinks_; }

    /// Index of the action named `name` at state s, or -1.
    int find_action(StateId s, std::string_view name) const;

    bool operator==(const Game& other) const {
        return states_ == other.states_ && initial_ == other.initial_;
    }

    /// The implicit self-loop action attached to targets and sinks.
    static GameAction absorbing_loop(StateId s);

  private:
    std::vector<GameState> states_;
    StateId initial_;
    std::vector<StateId> targets_, sinks_;
};

/// Pure memoryless strategy for one player: choice[s] is an action index for
/// every state owned by `player`, -1 elsewhere.
struct Strategy {
    Owner player = Owner::maximizer;
    std::vector<int> choice;

    int operator[](StateId s) const { return choice.at(s); }

    /// Checks the domain against the game; throws ValidationError on mismatch.
    void validate(const Game& game) const;

    /// The lowest-index choice at every owned state.
    static Strategy first_action(const Game& game, Owner player);

    bool operator==(const Strategy&) const = default;
};

/// Parses the `.sg` text format. Throws ParseError / ValidationError.
Game parse_game(std::string_view text);

/// Canonical renderer: states ascending, actions in declaration order,
/// successors ascending, probabilities as reduced fractions.
/// parse_game(render_game(g)) == g for every valid game.
std::string render_game(const Game& game);

/// One-step expected value V(s,a) = sum over successors of delta(s,a,s') * V(s').
Rat action_value(const Game& game, std::span<const Rat> values, StateId s, int a);
double action_value(const Game& game, std::span<const double> values, StateId s, int a);

/// Markov chain induced by fixing both players: every state keeps exactly its
/// chosen action (absorbing states keep their self-loop).
Game induce_mc(const Game& game, const Strategy& sigma, const Strategy& tau);

/// MDP induced by fixing the Maximizer: Maximizer states keep exactly the
/// chosen action, Minimizer states are untouched.
Game induce_mdp(const Game& game, const Strategy& sigma);

/// Greedy strategy pair read off a value vector: argmax of V(s,a) for
/// Maximizer states, argmin for Minimizer states, ties to the lowest index.
std::pair<Strategy, Strategy> greedy_strategies(const Game& game, std::span<const double> values);

}  // namespace sg

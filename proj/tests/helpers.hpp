#pragma once

#include <utility>
#include <vector>

#include "sg/game.hpp"
#include "sg/generator.hpp"

namespace sg::test {

/// Small fluent builder for hand-made games.
struct Builder {
    std::vector<GameState> states;

    StateId add(Owner owner) {
        states.push_back(GameState{owner, Kind::normal, {}});
        return static_cast<StateId>(states.size() - 1);
    }
    StateId add_target() {
        StateId s = static_cast<StateId>(states.size());
        states.push_back(GameState{Owner::maximizer, Kind::target, {Game::absorbing_loop(s)}});
        return s;
    }
    StateId add_sink() {
        StateId s = static_cast<StateId>(states.size());
        states.push_back(GameState{Owner::maximizer, Kind::sink, {Game::absorbing_loop(s)}});
        return s;
    }
    void act(StateId s, std::string name,
             std::vector<std::pair<StateId, Rat>> dist) {
        GameAction a{std::move(name), {}};
        for (auto& [succ, p] : dist) a.dist.push_back({succ, p});
        states[s].actions.push_back(std::move(a));
    }
    Game build(StateId initial) { return Game(states, initial); }
};

/// Fair-coin game: the initial state moves to the target or the sink with
/// probability 1/2 each; its value is exactly 1/2.
inline Game coin_game() {
    Builder b;
    StateId s0 = b.add(Owner::maximizer);
    StateId t = b.add_target(), z = b.add_sink();
    b.act(s0, "a", {{t, Rat(1, 2)}, {z, Rat(1, 2)}});
    return b.build(s0);
}

/// One scalable MEC of 2N Maximizer states in a cycle; the first cycle state
/// owns the only exit, a lottery worth 2/5 through renewal (success odds
/// 1/8 : 3/16). Every state is worth exactly 2/5. Layout: state 0 enters the
/// cycle, states 1..2N form it, then target and sink; |S| = 2N + 3.
inline Game make_bigmec(int cycle_half_length) {
    const int N = cycle_half_length;
    Builder b;
    StateId s0 = b.add(Owner::maximizer);
    std::vector<StateId> cycle;
    for (int i = 0; i < 2 * N; ++i) cycle.push_back(b.add(Owner::maximizer));
    StateId t = b.add_target(), z = b.add_sink();

    b.act(s0, "go", {{cycle.front(), Rat(1)}});
    for (int i = 0; i < 2 * N; ++i)
        b.act(cycle[i], "cyc", {{cycle[(i + 1) % (2 * N)], Rat(1)}});
    b.act(cycle.front(), "exit",
          {{t, Rat(1, 8)}, {z, Rat(3, 16)}, {cycle.front(), Rat(11, 16)}});
    return b.build(s0);
}

/// Deterministic corpus of small random games for cross-validation sweeps.
inline std::vector<Game> small_corpus(int count, std::uint64_t seed_base = 1000,
                                      int max_states = 6, bool dyadic = true) {
    std::vector<Game> games;
    for (int i = 0; i < count; ++i) {
        GeneratorParams params;
        params.states = 2 + static_cast<int>((seed_base + i) % (max_states - 1));
        params.max_actions = 2;
        params.dyadic_only = dyadic;
        params.back_edge_prob = 0.35;
        params.seed = seed_base + i;
        games.push_back(generate_random_game(params));
    }
    return games;
}

}  // namespace sg::test

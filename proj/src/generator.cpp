#include "sg/generator.hpp"

#include <algorithm>
#include <random>

#include "sg/graph.hpp"

namespace sg {

namespace {

// Raw engine draws only; the std distributions are not pinned down by the
// standard, and the corpus must be reproducible everywhere.
int pick(std::mt19937_64& rng, int bound) { return static_cast<int>(rng() % bound); }

bool chance(std::mt19937_64& rng, double p) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
}

/// Random composition of `units` probability quanta into `parts` positive
/// summands.
std::vector<int> compose(std::mt19937_64& rng, int units, int parts) {
    std::vector<int> cuts{0, units};
    while (static_cast<int>(cuts.size()) < parts + 1) {
        int c = 1 + pick(rng, units - 1);
        if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<int> sizes;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) sizes.push_back(cuts[i + 1] - cuts[i]);
    return sizes;
}

}  // namespace

Game generate_random_game(const GeneratorParams& params) {
    if (params.states < 1) throw ValidationError("generator needs at least one state");
    std::mt19937_64 rng(params.seed ^ 0x5367616d65ull);  // distinct stream per seed

    const int n = params.states;
    const StateId target = n, sink = n + 1;
    std::vector<GameState> states(n + 2);
    states[target].kind = Kind::target;
    states[target].actions = {Game::absorbing_loop(target)};
    states[sink].kind = Kind::sink;
    states[sink].actions = {Game::absorbing_loop(sink)};

    for (StateId s = 0; s < n; ++s) {
        states[s].owner = chance(rng, 0.5) ? Owner::maximizer : Owner::minimizer;
        const int actions = 1 + pick(rng, params.max_actions);
        for (int a = 0; a < actions; ++a) {
            std::vector<StateId> succs;
            if (chance(rng, params.back_edge_prob)) {
                // Cycle-forming edge: a sure step to a nearby state. MECs
                // only arise from actions whose whole support stays inside a
                // component, and short-range sure steps close cycles far more
                // often than uniform jumps do.
                succs.push_back((s + n + pick(rng, 3) - 1) % n);
            } else {
                const int want = 1 + pick(rng, params.max_successors);
                for (int tries = 0; tries < 4 * want && static_cast<int>(succs.size()) < want;
                     ++tries) {
                    StateId candidate = s + 1 + pick(rng, n + 1 - s);
                    if (std::find(succs.begin(), succs.end(), candidate) == succs.end())
                        succs.push_back(candidate);
                }
            }
            const int parts = static_cast<int>(succs.size());
            std::vector<int> weights;
            int units;
            if (params.dyadic_only) {
                int bits = 1 + pick(rng, 4);
                while ((1 << bits) < parts) ++bits;
                units = 1 << bits;
            } else {
                units = std::max(parts, 2 + pick(rng, 11));
            }
            weights = parts == 1 ? std::vector<int>{units} : compose(rng, units, parts);

            GameAction act{"a" + std::to_string(a), {}};
            for (int i = 0; i < parts; ++i)
                act.dist.push_back({succs[i], make_rat(weights[i], units)});
            states[s].actions.push_back(std::move(act));
        }
    }

    // Repair passes, interleaved until both properties hold:
    //  1. every state reaches the target and the sink under some pair, and
    //  2. no Minimizer-only closed component avoids the absorbing states
    //     (inside such a trap no Maximizer strategy can be proper).
    // A reach repair adds a permanent direct edge; a trap repair opens one
    // closed action for good, so the loop settles after O(n) fixes.
    auto fix_reachability = [&]() {
        const Game probe(states, 0);
        std::vector<bool> goal_t(n + 2, false), goal_z(n + 2, false);
        goal_t[target] = true;
        goal_z[sink] = true;
        const std::vector<bool> reach_t = states_reaching(probe, goal_t);
        const std::vector<bool> reach_z = states_reaching(probe, goal_z);
        for (StateId s = 0; s < n; ++s) {
            const bool fix_target = !reach_t[s];
            if (!fix_target && reach_z[s]) continue;
            auto& acts = states[s].actions;
            GameAction& act = fix_target ? acts.back() : acts.front();
            if (act.dist.size() >= 2) {
                if (fix_target)
                    act.dist.front().succ = target;
                else
                    act.dist.back().succ = sink;
            } else {
                act.dist = {TransitionEntry{target, Rat(1, 2)},
                            TransitionEntry{sink, Rat(1, 2)}};
            }
            return true;
        }
        return false;
    };
    auto fix_minimizer_trap = [&]() {
        // Greatest set of Minimizer states with a closed action inside it.
        std::vector<bool> in_set(n, false);
        for (StateId s = 0; s < n; ++s) in_set[s] = states[s].owner == Owner::minimizer;
        auto closed = [&](const GameAction& act) {
            for (const auto& entry : act.dist)
                if (entry.succ >= n || !in_set[entry.succ]) return false;
            return true;
        };
        bool shrunk = true;
        while (shrunk) {
            shrunk = false;
            for (StateId s = 0; s < n; ++s) {
                if (!in_set[s]) continue;
                bool has_closed = false;
                for (const auto& act : states[s].actions) has_closed = has_closed || closed(act);
                if (!has_closed) {
                    in_set[s] = false;
                    shrunk = true;
                }
            }
        }
        for (StateId s = 0; s < n; ++s) {
            if (!in_set[s]) continue;
            for (auto& act : states[s].actions)
                if (closed(act)) {
                    act.dist.front().succ = target;
                    return true;
                }
        }
        return false;
    };
    for (int round = 0; round < 8 * n + 8; ++round) {
        if (!fix_reachability() && !fix_minimizer_trap()) break;
    }

    return Game(std::move(states), 0);
}

}  // namespace sg

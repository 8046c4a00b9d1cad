#include "sg/transforms.hpp"

#include <algorithm>
#include <map>

#include "sg/graph.hpp"

namespace sg {

namespace {

std::string unused_name(const GameState& st, std::string base) {
    auto taken = [&](const std::string& name) {
        for (const auto& act : st.actions)
            if (act.name == name) return true;
        return false;
    };
    while (taken(base)) base += "~";
    return base;
}

TransformResult identity_result(const Game& game) {
    TransformResult r{game, {}};
    r.origin.resize(game.num_states());
    for (StateId s = 0; s < game.num_states(); ++s) r.origin[s] = s;
    return r;
}

}  // namespace

bool is_2act(const Game& game) {
    for (StateId s = 0; s < game.num_states(); ++s)
        if (game.num_actions(s) > 2) return false;
    return true;
}

bool is_half_probs(const Game& game) {
    const Rat half(1, 2);
    for (StateId s = 0; s < game.num_states(); ++s)
        for (int a = 0; a < game.num_actions(s); ++a)
            for (const auto& entry : game.action(s, a).dist)
                if (entry.prob != 1 && entry.prob != half) return false;
    return true;
}

bool is_no1act(const Game& game) {
    for (StateId s = 0; s < game.num_states(); ++s)
        if (game.num_actions(s) == 1 && !game.is_absorbing(s)) return false;
    return true;
}

TransformResult to_2act(const Game& game) {
    std::vector<GameState> states;
    std::vector<std::optional<StateId>> origin;
    for (StateId s = 0; s < game.num_states(); ++s) {
        states.push_back(game.state(s));
        origin.push_back(s);
    }

    for (StateId s = 0; s < game.num_states(); ++s) {
        const GameState& orig = game.state(s);
        const int k = static_cast<int>(orig.actions.size());
        if (k <= 2) continue;

        // Chain of k-2 auxiliary states; node i carries original action i
        // plus a hop to the next node, the last node carries the final two.
        std::vector<StateId> aux(k - 2);
        for (int i = 0; i < k - 2; ++i) {
            aux[i] = static_cast<StateId>(states.size());
            states.push_back(GameState{orig.owner, Kind::normal, {}});
            origin.push_back(std::nullopt);
        }
        auto hop = [&](const GameState& st, StateId to) {
            return GameAction{unused_name(st, "~next"), {TransitionEntry{to, Rat(1)}}};
        };
        states[s].actions = {orig.actions[0]};
        states[s].actions.push_back(hop(states[s], aux[0]));
        for (int i = 0; i < k - 2; ++i) {
            states[aux[i]].actions = {orig.actions[i + 1]};
            if (i + 1 < k - 2)
                states[aux[i]].actions.push_back(hop(states[aux[i]], aux[i + 1]));
            else
                states[aux[i]].actions.push_back(orig.actions[k - 1]);
        }
    }
    return TransformResult{Game(std::move(states), game.initial()), std::move(origin)};
}

TransformResult to_no1act(const Game& game) {
    std::vector<GameState> states;
    std::vector<std::optional<StateId>> origin;
    for (StateId s = 0; s < game.num_states(); ++s) {
        states.push_back(game.state(s));
        origin.push_back(s);
    }

    StateId sink = game.sinks().empty() ? -1 : game.sinks().front();
    StateId target = game.targets().empty() ? -1 : game.targets().front();
    auto ensure_absorbing = [&](StateId& id, Kind kind) {
        if (id != -1) return;
        id = static_cast<StateId>(states.size());
        states.push_back(GameState{Owner::maximizer, kind, {Game::absorbing_loop(id)}});
        origin.push_back(std::nullopt);
    };

    for (StateId s = 0; s < game.num_states(); ++s) {
        if (game.is_absorbing(s) || game.num_actions(s) != 1) continue;
        StateId to;
        if (game.state(s).owner == Owner::maximizer) {
            ensure_absorbing(sink, Kind::sink);
            to = sink;
        } else {
            ensure_absorbing(target, Kind::target);
            to = target;
        }
        states[s].actions.push_back(
            GameAction{unused_name(states[s], "~opt"), {TransitionEntry{to, Rat(1)}}});
    }
    return TransformResult{Game(std::move(states), game.initial()), std::move(origin)};
}

TransformResult to_half_probs(const Game& game, int max_bits) {
    const Rat half(1, 2);
    std::vector<GameState> states;
    std::vector<std::optional<StateId>> origin;
    for (StateId s = 0; s < game.num_states(); ++s) {
        states.push_back(game.state(s));
        origin.push_back(s);
    }

    for (StateId s = 0; s < game.num_states(); ++s) {
        for (int a = 0; a < game.num_actions(s); ++a) {
            const GameAction& act = game.action(s, a);
            bool compliant = true;
            int bits = 0;
            for (const auto& entry : act.dist) {
                if (entry.prob != 1 && entry.prob != half) compliant = false;
                int b = 0;
                if (!is_dyadic(entry.prob, &b))
                    throw ValidationError("non-dyadic probability " +
                                          to_fraction_string(entry.prob) + " at (" +
                                          std::to_string(s) + "," + act.name + ")");
                bits = std::max(bits, b);
            }
            if (compliant) continue;
            if (bits > max_bits)
                throw ValidationError("probability denominator exceeds 2^" +
                                      std::to_string(max_bits) + " at (" + std::to_string(s) +
                                      "," + act.name + ")");

            // Cumulative successor segments over 2^bits equal-weight leaves.
            mpz_class total = 1;
            total <<= bits;
            std::vector<mpz_class> cuts{0};
            for (const auto& entry : act.dist)
                cuts.push_back(cuts.back() + mpz_class(entry.prob.get_num() *
                                                       (total / entry.prob.get_den())));

            auto segment_of = [&](const mpz_class& lo, const mpz_class& hi) -> int {
                for (size_t i = 0; i + 1 < cuts.size(); ++i)
                    if (lo >= cuts[i] && hi <= cuts[i + 1]) return static_cast<int>(i);
                return -1;
            };
            // Builds the subtree covering [lo,hi) and returns the state the
            // parent should point at.
            auto build = [&](auto&& self, const mpz_class& lo,
                             const mpz_class& hi) -> StateId {
                int seg = segment_of(lo, hi);
                if (seg >= 0) return act.dist[seg].succ;
                mpz_class mid = (lo + hi) / 2;
                StateId left = self(self, lo, mid);
                StateId right = self(self, mid, hi);
                StateId node = static_cast<StateId>(states.size());
                states.push_back(GameState{
                    game.state(s).owner, Kind::normal,
                    {GameAction{"half",
                                {TransitionEntry{left, half}, TransitionEntry{right, half}}}}});
                origin.push_back(std::nullopt);
                return node;
            };
            mpz_class mid = total / 2;
            StateId left = build(build, mpz_class(0), mid);
            StateId right = build(build, mid, total);
            states[s].actions[a].dist = {TransitionEntry{left, half},
                                         TransitionEntry{right, half}};
        }
    }
    return TransformResult{Game(std::move(states), game.initial()), std::move(origin)};
}

TransformResult to_stopping(const Game& game, int m, bool mec_only) {
    if (m < 1) throw ValidationError("to_stopping requires m >= 1");
    const Rat half(1, 2);

    std::vector<bool> affected(game.num_states(), false);
    if (mec_only) {
        for (const Mec& mec : mec_decomposition(game))
            for (StateId s : mec.states)
                if (!game.is_absorbing(s)) affected[s] = true;
    } else {
        for (StateId s = 0; s < game.num_states(); ++s) affected[s] = !game.is_absorbing(s);
    }

    std::vector<GameState> states;
    std::vector<std::optional<StateId>> origin;
    for (StateId s = 0; s < game.num_states(); ++s) {
        states.push_back(game.state(s));
        origin.push_back(s);
    }

    StateId sink = game.sinks().empty() ? -1 : game.sinks().front();
    bool any = false;
    for (StateId s = 0; s < game.num_states(); ++s) any = any || affected[s];
    if (any && sink == -1) {
        sink = static_cast<StateId>(states.size());
        states.push_back(GameState{Owner::maximizer, Kind::sink, {Game::absorbing_loop(sink)}});
        origin.push_back(std::nullopt);
    }

    for (StateId s = 0; s < game.num_states(); ++s) {
        if (!affected[s]) continue;
        for (int a = 0; a < game.num_actions(s); ++a) {
            const std::vector<TransitionEntry> orig_dist = game.action(s, a).dist;
            std::vector<StateId> chain(m);
            for (int i = 0; i < m; ++i) {
                chain[i] = static_cast<StateId>(states.size());
                states.push_back(GameState{game.state(s).owner, Kind::normal, {}});
                origin.push_back(std::nullopt);
            }
            for (int i = 0; i < m; ++i) {
                std::map<StateId, Rat> dist;
                for (const auto& entry : orig_dist) dist[entry.succ] += half * entry.prob;
                const StateId deeper = i + 1 < m ? chain[i + 1] : sink;
                dist[deeper] += half;
                GameAction act{"eps", {}};
                for (const auto& [succ, prob] : dist) act.dist.push_back({succ, prob});
                states[chain[i]].actions = {std::move(act)};
            }
            states[s].actions[a].dist = {TransitionEntry{chain[0], Rat(1)}};
        }
    }
    return TransformResult{Game(std::move(states), game.initial()), std::move(origin)};
}

Game eliminate_single_action_state(const Game& game, StateId v) {
    if (v < 0 || v >= game.num_states()) throw ValidationError("no such state");
    if (game.is_absorbing(v))
        throw ValidationError("cannot eliminate a target or sink state");
    if (game.num_actions(v) != 1)
        throw ValidationError("state " + std::to_string(v) + " has more than one action");
    if (v == game.initial()) throw ValidationError("cannot eliminate the initial state");
    for (const auto& entry : game.action(v, 0).dist)
        if (entry.succ == v)
            throw ValidationError("state " + std::to_string(v) + " can loop back to itself");

    auto remap = [v](StateId s) { return s > v ? s - 1 : s; };
    std::vector<GameState> states;
    for (StateId s = 0; s < game.num_states(); ++s) {
        if (s == v) continue;
        GameState st{game.state(s).owner, game.state(s).kind, {}};
        for (const GameAction& act : game.state(s).actions) {
            std::map<StateId, Rat> dist;
            for (const auto& entry : act.dist) {
                if (entry.succ == v) {
                    for (const auto& via : game.action(v, 0).dist)
                        dist[remap(via.succ)] += entry.prob * via.prob;
                } else {
                    dist[remap(entry.succ)] += entry.prob;
                }
            }
            GameAction copy{act.name, {}};
            for (const auto& [succ, prob] : dist) copy.dist.push_back({succ, prob});
            st.actions.push_back(std::move(copy));
        }
        states.push_back(std::move(st));
    }
    return Game(std::move(states), remap(game.initial()));
}

Game undo_half_probs(const TransformResult& result) {
    Game game = result.game;
    std::vector<std::optional<StateId>> origin = result.origin;
    while (true) {
        int victim = -1;
        for (int s = static_cast<int>(origin.size()) - 1; s >= 0; --s)
            if (!origin[s].has_value()) {
                victim = s;
                break;
            }
        if (victim == -1) break;
        game = eliminate_single_action_state(game, victim);
        origin.erase(origin.begin() + victim);
    }
    return game;
}

TransformResult to_condon_normal_form(const Game& game, int m, bool mec_only) {
    TransformResult acc = identity_result(game);
    auto compose = [&acc](TransformResult next) {
        std::vector<std::optional<StateId>> origin(next.origin.size());
        for (size_t s = 0; s < next.origin.size(); ++s)
            if (next.origin[s].has_value()) origin[s] = acc.origin[*next.origin[s]];
        acc = TransformResult{std::move(next.game), std::move(origin)};
    };
    compose(to_stopping(acc.game, m, mec_only));
    compose(to_half_probs(acc.game));
    compose(to_2act(acc.game));
    compose(to_no1act(acc.game));
    return acc;
}

}  // namespace sg

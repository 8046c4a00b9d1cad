#include "sg/si.hpp"

#include <algorithm>
#include <chrono>
#include <optional>

#include "sg/graph.hpp"

namespace sg {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// One greedy improvement pass; keeps the incumbent unless an action is
/// strictly better, which both guarantees termination and preserves
/// properness of the iterates.
template <typename Value>
Strategy improve_strategy(const Game& game, const Strategy& sigma,
                          std::span<const Value> values) {
    Strategy next = sigma;
    for (StateId s = 0; s < game.num_states(); ++s) {
        if (game.state(s).owner != Owner::maximizer || game.is_absorbing(s)) continue;
        int best = sigma.choice[s];
        Value best_val = action_value(game, values, s, best);
        for (int a = 0; a < game.num_actions(s); ++a) {
            if (a == best) continue;
            Value v = action_value(game, values, s, a);
            if (v > best_val) {
                best = a;
                best_val = v;
            }
        }
        next.choice[s] = best;
    }
    return next;
}

}  // namespace

Strategy initial_strategy_from_estimates(const Game& game, std::span<const double> estimates) {
    if (static_cast<int>(estimates.size()) != game.num_states())
        throw ValidationError("estimate vector length mismatch");

    Strategy sigma{Owner::maximizer, std::vector<int>(game.num_states(), -1)};
    for (StateId s = 0; s < game.num_states(); ++s) {
        if (game.state(s).owner != Owner::maximizer) continue;
        int best = 0;
        double best_val = action_value(game, estimates, s, 0);
        for (int a = 1; a < game.num_actions(s); ++a) {
            double v = action_value(game, estimates, s, a);
            if (v > best_val) {
                best = a;
                best_val = v;
            }
        }
        sigma.choice[s] = best;
    }

    // Properness repair: switch exactly the Maximizer states sitting inside
    // closed avoiding end components of game[sigma] to their attractor
    // action. Each state is switched at most once, so the loop terminates.
    const Strategy attractor = attractor_strategy(game);
    for (int round = 0; round <= game.num_states(); ++round) {
        std::vector<StateId> offenders;
        const Game mdp = induce_mdp(game, sigma);
        for (const Mec& mec : mec_decomposition(mdp)) {
            bool avoiding = true;
            for (StateId s : mec.states)
                if (mdp.is_absorbing(s)) avoiding = false;
            if (!avoiding || !mec.exiting_pairs.empty()) continue;
            for (StateId s : mec.states)
                if (mdp.state(s).owner == Owner::maximizer) offenders.push_back(s);
        }
        if (offenders.empty()) break;
        for (StateId s : offenders) sigma.choice[s] = attractor.choice[s];
    }
    return sigma;
}

SolveResult solve_si(const Game& game, const SiConfig& config) {
    const auto start = Clock::now();
    const Game pre = dead_states_to_sinks(game);

    Strategy sigma{Owner::maximizer, {}};
    if (config.init == SiInit::attractor) {
        sigma = attractor_strategy(pre);
    } else {
        ViResult estimates = unguaranteed_vi(pre, ViConfig{config.vi_epsilon, 1000000});
        sigma = initial_strategy_from_estimates(pre, estimates.values);
    }

    SolveResult result;
    result.method = "si";
    result.guarantee =
        config.opponent == MdpMethod::policy_iteration ? Guarantee::exact : Guarantee::epsilon;

    BestResponse response;
    while (true) {
        response = min_best_response(induce_mdp(pre, sigma), config.opponent,
                                     config.opponent_precision);
        ++result.stats.mdp_solves;
        if (config.observer) config.observer(pre, sigma, response);

        Strategy next =
            response.exact
                ? improve_strategy<Rat>(pre, sigma, response.exact_values)
                : improve_strategy<double>(pre, sigma, response.values);
        ++result.stats.iterations;
        if (next == sigma) break;
        sigma = std::move(next);
        if (result.stats.iterations >= config.max_iterations) {
            result.stats.converged = false;
            break;
        }
    }

    result.values = response.values;
    if (response.exact) result.exact_values = response.exact_values;
    result.maximizer_strategy = std::move(sigma);
    result.minimizer_strategy = std::move(response.tau);
    result.stats.wall_ms = elapsed_ms(start);
    return result;
}

// ---------------------------------------------------------------------------
// Topological variant

namespace {

struct Frozen {
    double value = 0.0;
    std::optional<Rat> exact;
};

/// Sub-game over `closure`: unknown states keep their actions, already-solved
/// states become a one-action lottery between a fresh target and sink pair
/// weighted by their solved value, original absorbing states keep their kind.
struct SubGame {
    Game game;
    std::vector<StateId> to_original;  // new id -> original id (absorbing pair excluded)
};

SubGame build_sub_game(const Game& game, const std::vector<StateId>& closure,
                       const std::vector<std::optional<Frozen>>& solved, StateId sub_initial) {
    const int k = static_cast<int>(closure.size());
    const StateId fresh_target = k, fresh_sink = k + 1;
    std::vector<int> remap(game.num_states(), -1);
    for (int i = 0; i < k; ++i) remap[closure[i]] = i;

    std::vector<GameState> states(k + 2);
    for (int i = 0; i < k; ++i) {
        const StateId s = closure[i];
        const GameState& orig = game.state(s);
        GameState st;
        st.owner = orig.owner;
        if (orig.kind != Kind::normal) {
            st.kind = orig.kind;
            st.actions = {Game::absorbing_loop(i)};
        } else if (solved[s]) {
            Rat v = solved[s]->exact ? *solved[s]->exact
                                     : dyadic_quantize(solved[s]->value, 40);
            GameAction lottery{"frozen", {}};
            if (v > 0) lottery.dist.push_back({fresh_target, v});
            if (v < 1) lottery.dist.push_back({fresh_sink, Rat(1) - v});
            st.actions = {std::move(lottery)};
        } else {
            for (const GameAction& act : orig.actions) {
                GameAction copy{act.name, {}};
                for (const auto& entry : act.dist)
                    copy.dist.push_back({remap[entry.succ], entry.prob});
                st.actions.push_back(std::move(copy));
            }
        }
        states[i] = std::move(st);
    }
    states[fresh_target].kind = Kind::target;
    states[fresh_target].actions = {Game::absorbing_loop(fresh_target)};
    states[fresh_sink].kind = Kind::sink;
    states[fresh_sink].actions = {Game::absorbing_loop(fresh_sink)};

    SubGame sub{Game(std::move(states), remap[sub_initial]), closure};
    return sub;
}

}  // namespace

SolveResult topological_si(const Game& game, const SiConfig& config) {
    const auto start = Clock::now();
    const bool exact_mode = config.opponent == MdpMethod::policy_iteration;
    const int n = game.num_states();

    std::vector<Mec> mecs = mec_decomposition(game);
    std::vector<int> order = mec_postorder(game, mecs);

    std::vector<std::optional<Frozen>> solved(n);
    Strategy sigma{Owner::maximizer, std::vector<int>(n, -1)};
    Strategy tau{Owner::minimizer, std::vector<int>(n, -1)};
    for (StateId s = 0; s < n; ++s) {
        if (game.state(s).owner == Owner::maximizer)
            sigma.choice[s] = 0;
        else
            tau.choice[s] = 0;
    }

    SolveResult result;
    result.method = "si-topological";
    result.guarantee = exact_mode ? Guarantee::exact : Guarantee::epsilon;

    auto solve_block = [&](const std::vector<StateId>& seeds) {
        std::vector<StateId> closure = accessible_states(game, seeds);
        SubGame sub = build_sub_game(game, closure, solved, seeds.front());
        SiConfig sub_config = config;
        SolveResult sub_result = solve_si(sub.game, sub_config);
        result.stats.iterations += sub_result.stats.iterations;
        result.stats.mdp_solves += sub_result.stats.mdp_solves;
        result.stats.converged = result.stats.converged && sub_result.stats.converged;
        for (size_t i = 0; i < sub.to_original.size(); ++i) {
            const StateId s = sub.to_original[i];
            if (solved[s] || game.is_absorbing(s)) continue;
            Frozen f;
            f.value = sub_result.values[i];
            if (exact_mode) f.exact = sub_result.exact_values[i];
            solved[s] = f;
            if (game.state(s).owner == Owner::maximizer)
                sigma.choice[s] = sub_result.maximizer_strategy.choice[i];
            else
                tau.choice[s] = sub_result.minimizer_strategy.choice[i];
        }
    };

    for (int idx : order) {
        const Mec& mec = mecs[idx];
        if (mec.states.size() == 1 && game.is_absorbing(mec.states.front())) continue;
        bool all_solved = true;
        for (StateId s : mec.states)
            if (!solved[s]) all_solved = false;
        if (all_solved) continue;
        solve_block(mec.states);
    }

    std::vector<StateId> residual;
    for (StateId s = 0; s < n; ++s)
        if (!solved[s] && !game.is_absorbing(s)) residual.push_back(s);
    if (!residual.empty()) solve_block(residual);

    result.values.assign(n, 0.0);
    if (exact_mode) result.exact_values.assign(n, Rat(0));
    for (StateId s = 0; s < n; ++s) {
        if (game.is_target(s)) {
            result.values[s] = 1.0;
            if (exact_mode) result.exact_values[s] = 1;
        } else if (game.is_sink(s)) {
            result.values[s] = 0.0;
        } else {
            result.values[s] = solved[s]->value;
            if (exact_mode) result.exact_values[s] = *solved[s]->exact;
        }
    }
    result.maximizer_strategy = std::move(sigma);
    result.minimizer_strategy = std::move(tau);
    result.stats.wall_ms = elapsed_ms(start);
    return result;
}

}  // namespace sg

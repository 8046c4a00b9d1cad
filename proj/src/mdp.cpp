#include "sg/mdp.hpp"

#include <algorithm>
#include <cmath>

#include "sg/linear.hpp"

namespace sg {

ViResult unguaranteed_vi(const Game& game, const ViConfig& config) {
    const int n = game.num_states();
    std::vector<double> values(n, 0.0), next(n, 0.0);
    for (StateId t : game.targets()) values[t] = 1.0;

    ViResult result;
    for (long it = 0; it < config.max_iterations; ++it) {
        double max_update = 0.0;
        for (StateId s = 0; s < n; ++s) {
            const bool maximize = game.state(s).owner == Owner::maximizer;
            double best = action_value(game, values, s, 0);
            for (int a = 1; a < game.num_actions(s); ++a) {
                double v = action_value(game, values, s, a);
                if (maximize ? v > best : v < best) best = v;
            }
            next[s] = best;
            max_update = std::max(max_update, std::abs(next[s] - values[s]));
        }
        values.swap(next);
        ++result.iterations;
        if (max_update < config.epsilon) {
            result.values = std::move(values);
            return result;
        }
    }
    result.values = std::move(values);
    result.converged = false;
    return result;
}

std::vector<bool> minimizer_avoid_set(const Game& game) {
    const int n = game.num_states();
    std::vector<bool> in_set(n, true);
    for (StateId t : game.targets()) in_set[t] = false;

    bool changed = true;
    while (changed) {
        changed = false;
        for (StateId s = 0; s < n; ++s) {
            if (!in_set[s]) continue;
            auto stays = [&](int a) {
                for (const auto& entry : game.action(s, a).dist)
                    if (!in_set[entry.succ]) return false;
                return true;
            };
            bool ok;
            if (game.state(s).owner == Owner::minimizer) {
                ok = false;
                for (int a = 0; a < game.num_actions(s) && !ok; ++a) ok = stays(a);
            } else {
                ok = true;
                for (int a = 0; a < game.num_actions(s) && ok; ++a) ok = stays(a);
            }
            if (!ok) {
                in_set[s] = false;
                changed = true;
            }
        }
    }
    return in_set;
}

namespace {

void require_induced(const Game& mdp) {
    for (StateId s = 0; s < mdp.num_states(); ++s)
        if (mdp.state(s).owner == Owner::maximizer && !mdp.is_absorbing(s) &&
            mdp.num_actions(s) != 1)
            throw ValidationError("min_best_response expects single-action Maximizer states");
}

/// Exact reachability of the chain picked by tau, with `avoid` states cut off
/// (their min-reach value is 0; dropping their outgoing edges keeps the
/// remaining linear system nonsingular).
std::vector<Rat> evaluate_policy(const Game& mdp, const Strategy& tau,
                                 const std::vector<bool>& avoid,
                                 const std::vector<bool>& target) {
    std::vector<SparseRow> rows(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (avoid[s]) continue;
        const int a = mdp.state(s).owner == Owner::minimizer && !mdp.is_absorbing(s)
                          ? tau.choice[s]
                          : 0;
        for (const auto& entry : mdp.action(s, a).dist)
            rows[s].emplace_back(entry.succ, entry.prob);
    }
    return reach_probabilities(rows, target);
}

}  // namespace

BestResponse min_best_response(const Game& mdp, MdpMethod method, double precision) {
    require_induced(mdp);
    const int n = mdp.num_states();
    BestResponse result;

    if (method == MdpMethod::vi) {
        std::vector<double> values(n, 0.0), next(n, 0.0);
        for (StateId t : mdp.targets()) values[t] = 1.0;
        // Stop one order below the requested precision: the distance to the
        // fixpoint exceeds the last update by the contraction tail.
        const double threshold = precision / 8.0;
        double max_update = 1.0;
        while (max_update >= threshold) {
            max_update = 0.0;
            for (StateId s = 0; s < n; ++s) {
                const bool minimize = mdp.state(s).owner == Owner::minimizer;
                double best = action_value(mdp, values, s, 0);
                if (minimize)
                    for (int a = 1; a < mdp.num_actions(s); ++a)
                        best = std::min(best, action_value(mdp, values, s, a));
                next[s] = best;
                max_update = std::max(max_update, std::abs(next[s] - values[s]));
            }
            values.swap(next);
            ++result.iterations;
        }
        result.values = std::move(values);
    } else {
        const std::vector<bool> avoid = minimizer_avoid_set(mdp);
        std::vector<bool> target(n, false);
        for (StateId t : mdp.targets()) target[t] = true;

        Strategy tau = Strategy::first_action(mdp, Owner::minimizer);
        std::vector<Rat> values = evaluate_policy(mdp, tau, avoid, target);
        ++result.iterations;
        bool improved = true;
        while (improved) {
            improved = false;
            Strategy next_tau = tau;
            for (StateId s = 0; s < n; ++s) {
                if (mdp.state(s).owner != Owner::minimizer || mdp.is_absorbing(s)) continue;
                int best = tau.choice[s];
                Rat best_val = action_value(mdp, std::span<const Rat>(values), s, best);
                for (int a = 0; a < mdp.num_actions(s); ++a) {
                    if (a == best) continue;
                    Rat v = action_value(mdp, std::span<const Rat>(values), s, a);
                    if (v < best_val) {
                        best = a;
                        best_val = v;
                    }
                }
                if (best != tau.choice[s]) {
                    next_tau.choice[s] = best;
                    improved = true;
                }
            }
            if (improved) {
                tau = next_tau;
                values = evaluate_policy(mdp, tau, avoid, target);
                ++result.iterations;
            }
        }
        result.values.resize(n);
        for (int s = 0; s < n; ++s) result.values[s] = to_double(values[s]);
        result.exact_values = std::move(values);
        result.exact = true;
    }

    // Greedy argmin under the final values, lowest action id on ties; for
    // minimal reachability any greedy tie-break attains the values.
    result.tau = Strategy{Owner::minimizer, std::vector<int>(n, -1)};
    for (StateId s = 0; s < n; ++s) {
        if (mdp.state(s).owner != Owner::minimizer) continue;
        int best = 0;
        if (result.exact) {
            Rat best_val = action_value(mdp, std::span<const Rat>(result.exact_values), s, 0);
            for (int a = 1; a < mdp.num_actions(s); ++a) {
                Rat v = action_value(mdp, std::span<const Rat>(result.exact_values), s, a);
                if (v < best_val) {
                    best = a;
                    best_val = v;
                }
            }
        } else {
            double best_val = action_value(mdp, std::span<const double>(result.values), s, 0);
            for (int a = 1; a < mdp.num_actions(s); ++a) {
                double v = action_value(mdp, std::span<const double>(result.values), s, a);
                if (v < best_val) {
                    best = a;
                    best_val = v;
                }
            }
        }
        result.tau.choice[s] = best;
    }
    return result;
}

std::optional<int> action_dominance_check(const Game& game, StateId s,
                                          std::span<const std::pair<double, double>> bounds) {
    const int k = game.num_actions(s);
    if (static_cast<int>(bounds.size()) != k)
        throw ValidationError("action_dominance_check: one bound pair per action required");
    if (k == 1) return 0;
    for (int a = 0; a < k; ++a) {
        bool dominant = true;
        for (int b = 0; b < k && dominant; ++b)
            if (b != a && bounds[a].first <= bounds[b].second) dominant = false;
        if (dominant) return a;
    }
    return std::nullopt;
}

}  // namespace sg

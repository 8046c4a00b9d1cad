#include "sg/oracle.hpp"

#include <algorithm>

#include "sg/linear.hpp"

namespace sg {

namespace {

/// Odometer over the action choices of one player's non-absorbing states,
/// in ascending state order (least-significant digit at the smallest id).
class StrategyEnumerator {
  public:
    StrategyEnumerator(const Game& game, Owner player)
        : current_(Strategy::first_action(game, player)) {
        for (StateId s = 0; s < game.num_states(); ++s)
            if (game.state(s).owner == player && !game.is_absorbing(s) &&
                game.num_actions(s) > 1)
                free_.push_back({s, game.num_actions(s)});
    }

    const Strategy& current() const { return current_; }

    bool advance() {
        for (auto& [s, count] : free_) {
            if (++current_.choice[s] < count) return true;
            current_.choice[s] = 0;
        }
        return false;
    }

    void reset() {
        for (auto& [s, count] : free_) current_.choice[s] = 0;
    }

  private:
    Strategy current_;
    std::vector<std::pair<StateId, int>> free_;
};

std::vector<Rat> induced_chain_values(const Game& game, const Strategy& sigma,
                                      const Strategy& tau, const std::vector<bool>& target) {
    std::vector<SparseRow> rows(game.num_states());
    for (StateId s = 0; s < game.num_states(); ++s) {
        int a = game.state(s).owner == Owner::maximizer ? sigma.choice[s] : tau.choice[s];
        if (game.is_absorbing(s)) a = 0;
        for (const auto& entry : game.action(s, a).dist)
            rows[s].emplace_back(entry.succ, entry.prob);
    }
    return reach_probabilities(rows, target);
}

}  // namespace

OracleResult enumerate_solve(const Game& game, const OracleConfig& config) {
    std::uint64_t pairs = 1;
    for (StateId s = 0; s < game.num_states(); ++s) {
        if (game.is_absorbing(s)) continue;
        const std::uint64_t k = game.num_actions(s);
        if (pairs > config.pair_cap / k)
            throw SgError("oracle: strategy-pair space exceeds cap of " +
                          std::to_string(config.pair_cap));
        pairs *= k;
    }

    const int n = game.num_states();
    std::vector<bool> target(n, false);
    for (StateId t : game.targets()) target[t] = true;

    const Owner outer_player = config.min_major ? Owner::minimizer : Owner::maximizer;
    const bool outer_maximizes = outer_player == Owner::maximizer;

    StrategyEnumerator outer(game, outer_player);
    StrategyEnumerator inner(game, config.min_major ? Owner::maximizer : Owner::minimizer);

    std::vector<Rat> best(n);
    bool have_best = false;
    Strategy best_outer = outer.current();

    do {
        inner.reset();
        std::vector<Rat> inner_vals;
        bool have_inner = false;
        do {
            const Strategy& sigma = outer_maximizes ? outer.current() : inner.current();
            const Strategy& tau = outer_maximizes ? inner.current() : outer.current();
            std::vector<Rat> vals = induced_chain_values(game, sigma, tau, target);
            if (!have_inner) {
                inner_vals = std::move(vals);
                have_inner = true;
            } else {
                for (int s = 0; s < n; ++s)
                    if (outer_maximizes ? vals[s] < inner_vals[s] : vals[s] > inner_vals[s])
                        inner_vals[s] = vals[s];
            }
        } while (inner.advance());

        if (!have_best) {
            best = std::move(inner_vals);
            best_outer = outer.current();
            have_best = true;
        } else {
            for (int s = 0; s < n; ++s)
                if (outer_maximizes ? inner_vals[s] > best[s] : inner_vals[s] < best[s])
                    best[s] = inner_vals[s];
        }
    } while (outer.advance());

    // Lexicographically first outer strategy attaining the value everywhere;
    // memoryless optimal strategies exist, so the scan must succeed.
    outer.reset();
    bool found_outer = false;
    do {
        inner.reset();
        std::vector<Rat> inner_vals(n, outer_maximizes ? Rat(1) : Rat(0));
        do {
            const Strategy& sigma = outer_maximizes ? outer.current() : inner.current();
            const Strategy& tau = outer_maximizes ? inner.current() : outer.current();
            std::vector<Rat> vals = induced_chain_values(game, sigma, tau, target);
            for (int s = 0; s < n; ++s)
                if (outer_maximizes ? vals[s] < inner_vals[s] : vals[s] > inner_vals[s])
                    inner_vals[s] = vals[s];
        } while (inner.advance());
        if (inner_vals == best) {
            best_outer = outer.current();
            found_outer = true;
            break;
        }
    } while (outer.advance());
    if (!found_outer) throw SgError("oracle: no uniformly optimal strategy found");

    // Lexicographically first inner best response against it.
    inner.reset();
    Strategy best_inner = inner.current();
    bool found_inner = false;
    do {
        const Strategy& sigma = outer_maximizes ? best_outer : inner.current();
        const Strategy& tau = outer_maximizes ? inner.current() : best_outer;
        if (induced_chain_values(game, sigma, tau, target) == best) {
            best_inner = inner.current();
            found_inner = true;
            break;
        }
    } while (inner.advance());
    if (!found_inner) throw SgError("oracle: no uniform best response found");

    OracleResult result;
    result.values = std::move(best);
    result.sigma = outer_maximizes ? best_outer : best_inner;
    result.tau = outer_maximizes ? best_inner : best_outer;
    return result;
}

std::vector<Rat> chain_reachability(const Game& chain) {
    std::vector<SparseRow> rows(chain.num_states());
    std::vector<bool> target(chain.num_states(), false);
    for (StateId s = 0; s < chain.num_states(); ++s) {
        if (chain.num_actions(s) != 1)
            throw ValidationError("chain_reachability: state " + std::to_string(s) +
                                  " has more than one action");
        for (const auto& entry : chain.action(s, 0).dist)
            rows[s].emplace_back(entry.succ, entry.prob);
    }
    for (StateId t : chain.targets()) target[t] = true;
    return reach_probabilities(rows, target);
}

}  // namespace sg

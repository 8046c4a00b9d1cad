#pragma once

#include <cstdint>
#include <vector>

#include "sg/game.hpp"

namespace sg {

struct OracleConfig {
    /// Upper bound on the strategy-pair space (product of action counts over
    /// all non-absorbing states). Enumeration refuses to start beyond it.
    std::uint64_t pair_cap = std::uint64_t{1} << 22;
    /// Enumerate Minimizer outside and Maximizer inside. The result must be
    /// identical either way; the flag exists so tests can assert that.
    bool min_major = false;
};

struct OracleResult {
    std::vector<Rat> values;  // exact, per state
    Strategy sigma;           // optimal Maximizer strategy (lexicographically first)
    Strategy tau;             // optimal Minimizer response (lexicographically first)
};

/// Ground-truth solver by exhaustive enumeration of pure memoryless strategy
/// pairs with exact induced-chain solves. Deliberately shares no solution
/// logic with the iterative solvers it validates.
OracleResult enumerate_solve(const Game& game, const OracleConfig& config = {});

/// P(reach targets) per state of a Markov chain (a game where every state has
/// exactly one action), exact.
std::vector<Rat> chain_reachability(const Game& chain);

}  // namespace sg

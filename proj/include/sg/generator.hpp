#pragma once

#include <cstdint>

#include "sg/game.hpp"

namespace sg {

struct GeneratorParams {
    int states = 6;              // normal states; a target and a sink are appended
    int max_actions = 2;         // per-state action count is drawn from 1..max_actions
    int max_successors = 3;      // per-action support size is drawn from 1..max_successors
    bool dyadic_only = true;     // probability denominators are powers of two
    double back_edge_prob = 0.35;  // chance a successor is drawn among all states
    std::uint64_t seed = 0;
};

/// Seeded, reproducible random game (byte-identical rendering across runs
/// and platforms). Successors are forward-biased; back_edge_prob controls
/// how often cycles, and with them MECs, appear. Two repair passes keep the
/// corpus well-behaved:
///  - every state can reach both the target and the sink under some pair,
///  - no Minimizer-only end component avoids the target and sink (such a
///    trap would make proper Maximizer strategies impossible).
Game generate_random_game(const GeneratorParams& params);

}  // namespace sg

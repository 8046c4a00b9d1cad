#pragma once

#include <utility>
#include <vector>

#include "sg/rational.hpp"

namespace sg {

/// One sparse transition row: (column, probability) entries of a stochastic
/// step. Entries are expected to be unique per column.
using SparseRow = std::vector<std::pair<int, Rat>>;

/// Solves A x = b by exact Gaussian elimination (first nonzero pivot per
/// column, row order). Throws std::runtime_error on a singular matrix.
std::vector<Rat> solve_linear_system(std::vector<std::vector<Rat>> a, std::vector<Rat> b);

/// Absorption-style reachability in a Markov chain given by one sparse row
/// per state: returns P(eventually visit `target`) for every state, exactly.
///
/// States with no graph path to the target set are fixed to 0 first; the
/// remaining system (I - Q) x = b is then nonsingular and solved exactly.
std::vector<Rat> reach_probabilities(const std::vector<SparseRow>& rows,
                                     const std::vector<bool>& target);

}  // namespace sg

#pragma once

#include <cstdint>
#include <optional>

#include "sg/game.hpp"
#include "sg/qp.hpp"

namespace sg {

struct QpSolverConfig {
    double objective_tolerance = 1e-9;
    double feasibility_tolerance = 1e-8;
    /// Every product must have one factor this close to zero before a point
    /// counts as solved; the summed objective alone cannot tell a solution
    /// from a near-miss on squared tie pairs.
    double complementarity_tolerance = 1e-7;
    long max_iterations = 100000;  // per restart
    int restarts = 16;
    std::uint64_t seed = 1;
    /// Per-state initial values; used as restart #0 when present. May be
    /// infeasible; it is then simply a bad starting point, never trusted.
    std::optional<std::vector<double>> warm_start;

    int selector_cadence = 50;     // iterations between re-resolving selects
    long stall_window = 500;
    double stall_rel_improvement = 1e-12;
    int projection_passes = 30;    // cyclic constraint-projection sweeps per step
};

struct QpSolveOutcome {
    bool success = false;
    std::vector<double> values;  // state variables of the best point found
    double objective = 0.0;
    double max_violation = 0.0;
    int restarts_used = 0;
    long iterations = 0;
    QpSolutionReport report;
};

/// Certifying local solver: projected descent on the bilinear objective
/// inside the linear feasible region, select branches re-resolved
/// periodically, seeded restarts on stalls. Success means verify_solution
/// passed at the feasibility tolerance with objective at most the objective
/// tolerance -- an honest failure report is a legitimate outcome.
///
/// Deterministic for a fixed program and config. Restarts run in parallel
/// (bounded by SGSOLVE_THREADS); the accepted result is the success with the
/// smallest restart index.
QpSolveOutcome solve_qp(const QuadraticProgram& qp, const QpSolverConfig& config = {});

/// Warm-start vector from unguaranteed value iteration on the full game; a
/// lower bound converging from below, possibly infeasible for the program.
std::vector<double> warm_start_values(const Game& game, double epsilon);

}  // namespace sg

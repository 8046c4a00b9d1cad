#pragma once

#include <string>

#include <json.hpp>

#include "sg/game.hpp"
#include "sg/graph.hpp"
#include "sg/oracle.hpp"
#include "sg/qp_solver.hpp"
#include "sg/si.hpp"

namespace sg {

/// Strategy as a {state id -> action name} object over the owner's
/// non-absorbing states.
nlohmann::json strategy_to_json(const Game& game, const Strategy& strategy);

/// The stable result schema: method, guarantee, values (+ exact fractions
/// when available), both strategies, initial state/value, stats.
nlohmann::json solve_result_to_json(const Game& game, const SolveResult& result);

nlohmann::json oracle_result_to_json(const Game& game, const OracleResult& result);

nlohmann::json mecs_to_json(const Game& game, const std::vector<Mec>& mecs,
                            const std::vector<int>& postorder);

nlohmann::json qp_report_to_json(const QpSolutionReport& report);

/// Checks a solve-result document against the schema; returns false and
/// fills `why` on the first offense.
bool validate_result_json(const nlohmann::json& doc, std::string* why = nullptr);

/// Folds a QP outcome into the common result shape (greedy strategies read
/// off the returned values; guarantee reflects whether the objective-zero
/// certificate was reached).
SolveResult qp_outcome_to_result(const Game& game, const QpSolveOutcome& outcome,
                                 double wall_ms);

}  // namespace sg

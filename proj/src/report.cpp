#include "sg/report.hpp"

#include <cmath>

namespace sg {

using nlohmann::json;

json strategy_to_json(const Game& game, const Strategy& strategy) {
    json obj = json::object();
    for (StateId s = 0; s < game.num_states(); ++s) {
        if (game.state(s).owner != strategy.player || game.is_absorbing(s)) continue;
        if (s < static_cast<StateId>(strategy.choice.size()) && strategy.choice[s] >= 0)
            obj[std::to_string(s)] = game.action(s, strategy.choice[s]).name;
    }
    return obj;
}

namespace {

const char* guarantee_name(Guarantee g) {
    switch (g) {
        case Guarantee::exact: return "exact";
        case Guarantee::epsilon: return "epsilon";
        default: return "unguaranteed";
    }
}

}  // namespace

json solve_result_to_json(const Game& game, const SolveResult& result) {
    json doc;
    doc["method"] = result.method;
    doc["guarantee"] = guarantee_name(result.guarantee);
    doc["initial_state"] = game.initial();
    doc["initial_value"] = result.values[game.initial()];
    doc["values"] = result.values;
    if (!result.exact_values.empty()) {
        json exact = json::array();
        for (const Rat& v : result.exact_values) exact.push_back(to_fraction_string(v));
        doc["values_exact"] = exact;
    }
    doc["maximizer_strategy"] = strategy_to_json(game, result.maximizer_strategy);
    doc["minimizer_strategy"] = strategy_to_json(game, result.minimizer_strategy);
    doc["stats"] = {{"iterations", result.stats.iterations},
                    {"mdp_solves", result.stats.mdp_solves},
                    {"wall_ms", result.stats.wall_ms},
                    {"restarts", result.stats.restarts_used},
                    {"objective", result.stats.objective},
                    {"converged", result.stats.converged}};
    return doc;
}

json oracle_result_to_json(const Game& game, const OracleResult& result) {
    json doc;
    doc["method"] = "oracle";
    doc["guarantee"] = "exact";
    doc["initial_state"] = game.initial();
    doc["initial_value"] = to_double(result.values[game.initial()]);
    json values = json::array(), exact = json::array();
    for (const Rat& v : result.values) {
        values.push_back(to_double(v));
        exact.push_back(to_fraction_string(v));
    }
    doc["values"] = values;
    doc["values_exact"] = exact;
    doc["maximizer_strategy"] = strategy_to_json(game, result.sigma);
    doc["minimizer_strategy"] = strategy_to_json(game, result.tau);
    doc["stats"] = {{"iterations", 0},
                    {"mdp_solves", 0},
                    {"wall_ms", 0.0},
                    {"restarts", 0},
                    {"objective", 0.0},
                    {"converged", true}};
    return doc;
}

json mecs_to_json(const Game& game, const std::vector<Mec>& mecs,
                  const std::vector<int>& postorder) {
    json list = json::array();
    for (const Mec& mec : mecs) {
        json entry;
        entry["states"] = mec.states;
        json staying = json::object();
        for (size_t i = 0; i < mec.states.size(); ++i) {
            json names = json::array();
            for (int a : mec.staying_actions[i])
                names.push_back(game.action(mec.states[i], a).name);
            staying[std::to_string(mec.states[i])] = names;
        }
        entry["staying_actions"] = staying;
        json exits = json::array();
        for (const auto& [s, a] : mec.exiting_pairs)
            exits.push_back({{"state", s}, {"action", game.action(s, a).name}});
        entry["exiting_pairs"] = exits;
        entry["exit_states"] = mec.exit_states;
        entry["absorbing"] =
            mec.states.size() == 1 && game.is_absorbing(mec.states.front());
        list.push_back(entry);
    }
    return json{{"mecs", list}, {"postorder", postorder}};
}

json qp_report_to_json(const QpSolutionReport& report) {
    json residuals = json::object();
    for (const auto& [name, value] : report.residuals)
        if (value > 0) residuals[name] = value;
    return json{{"feasible", report.feasible},
                {"max_violation", report.max_violation},
                {"objective", report.objective},
                {"nonzero_residuals", residuals}};
}

bool validate_result_json(const json& doc, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    for (const char* key : {"method", "guarantee", "initial_state", "initial_value", "values",
                            "maximizer_strategy", "minimizer_strategy", "stats"})
        if (!doc.contains(key)) return fail(std::string("missing field: ") + key);
    if (!doc["method"].is_string()) return fail("method must be a string");
    const std::string g = doc["guarantee"].get<std::string>();
    if (g != "exact" && g != "epsilon" && g != "unguaranteed")
        return fail("guarantee must be exact|epsilon|unguaranteed");
    if (!doc["values"].is_array() || doc["values"].empty())
        return fail("values must be a nonempty array");
    for (const auto& v : doc["values"]) {
        if (!v.is_number()) return fail("values must be numbers");
        const double d = v.get<double>();
        if (d < -1e-9 || d > 1.0 + 1e-9) return fail("values must lie in [0,1]");
    }
    const auto init = doc["initial_state"].get<long>();
    if (init < 0 || init >= static_cast<long>(doc["values"].size()))
        return fail("initial_state out of range");
    if (std::abs(doc["initial_value"].get<double>() - doc["values"][init].get<double>()) > 1e-12)
        return fail("initial_value must equal values[initial_state]");
    if (!doc["maximizer_strategy"].is_object() || !doc["minimizer_strategy"].is_object())
        return fail("strategies must be objects");
    const auto& stats = doc["stats"];
    if (!stats.is_object()) return fail("stats must be an object");
    for (const char* key : {"iterations", "mdp_solves", "wall_ms", "restarts", "objective"})
        if (!stats.contains(key) || !stats[key].is_number())
            return fail(std::string("stats.") + key + " must be a number");
    if (!stats.contains("converged") || !stats["converged"].is_boolean())
        return fail("stats.converged must be a boolean");
    if (doc.contains("values_exact") &&
        doc["values_exact"].size() != doc["values"].size())
        return fail("values_exact length mismatch");
    return true;
}

SolveResult qp_outcome_to_result(const Game& game, const QpSolveOutcome& outcome,
                                 double wall_ms) {
    SolveResult result;
    result.method = "qp";
    result.guarantee = outcome.success ? Guarantee::epsilon : Guarantee::unguaranteed;
    result.values = outcome.values;
    auto [sigma, tau] = greedy_strategies(game, result.values);
    result.maximizer_strategy = std::move(sigma);
    result.minimizer_strategy = std::move(tau);
    result.stats.iterations = outcome.iterations;
    result.stats.restarts_used = outcome.restarts_used;
    result.stats.objective = outcome.objective;
    result.stats.converged = outcome.success;
    result.stats.wall_ms = wall_ms;
    return result;
}

}  // namespace sg

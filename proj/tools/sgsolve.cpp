#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sg/game.hpp"
#include "sg/generator.hpp"
#include "sg/graph.hpp"
#include "sg/mdp.hpp"
#include "sg/oracle.hpp"
#include "sg/qp.hpp"
#include "sg/qp_solver.hpp"
#include "sg/report.hpp"
#include "sg/si.hpp"
#include "sg/transforms.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolveFailure = 1;
constexpr int kExitInputError = 2;

sg::Game load_game(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw sg::SgError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return sg::parse_game(ss.str());
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out.good()) throw sg::SgError("cannot write '" + path + "'");
    out << content;
}

void print_result_text(const sg::Game& game, const sg::SolveResult& result) {
    std::cout << "method: " << result.method << "\n";
    const char* guarantee = result.guarantee == sg::Guarantee::exact ? "exact"
                            : result.guarantee == sg::Guarantee::epsilon ? "epsilon"
                                                                         : "unguaranteed";
    std::cout << "guarantee: " << guarantee << "\n";
    std::cout << "initial value: " << sg::to_roundtrip_decimal(result.values[game.initial()]);
    if (!result.exact_values.empty())
        std::cout << " (" << sg::to_fraction_string(result.exact_values[game.initial()]) << ")";
    std::cout << "\nvalues:\n";
    for (sg::StateId s = 0; s < game.num_states(); ++s) {
        std::cout << "  " << s << ": " << sg::to_roundtrip_decimal(result.values[s]);
        if (!result.exact_values.empty())
            std::cout << " (" << sg::to_fraction_string(result.exact_values[s]) << ")";
        std::cout << "\n";
    }
    auto print_strategy = [&](const char* label, const sg::Strategy& strategy) {
        std::cout << label << ":";
        for (sg::StateId s = 0; s < game.num_states(); ++s)
            if (game.state(s).owner == strategy.player && !game.is_absorbing(s) &&
                strategy.choice[s] >= 0)
                std::cout << " " << s << ":" << game.action(s, strategy.choice[s]).name;
        std::cout << "\n";
    };
    print_strategy("maximizer strategy", result.maximizer_strategy);
    print_strategy("minimizer strategy", result.minimizer_strategy);
    std::cout << "stats: iterations=" << result.stats.iterations
              << " mdp_solves=" << result.stats.mdp_solves
              << " restarts=" << result.stats.restarts_used
              << " objective=" << sg::to_roundtrip_decimal(result.stats.objective)
              << " wall_ms=" << result.stats.wall_ms
              << " converged=" << (result.stats.converged ? "yes" : "no") << "\n";
}

struct SolveOptions {
    std::string method = "si";
    std::string init = "vi";
    std::string opponent = "pi";
    std::string warm_start;
    bool topological = false;
    bool no_preprocess = false;
    double precision = 1e-6;
    int restarts = 16;
    std::uint64_t seed = 1;
};

/// The QP pipeline: optional dead-state preprocessing, the two-action cap,
/// the improved program, the local solver, and values mapped back onto the
/// original states (which keep their ids through both rewrites).
sg::SolveResult run_qp(const sg::Game& game, const SolveOptions& opts, bool* success,
                       sg::QpSolutionReport* report_out = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    sg::Game base = opts.no_preprocess ? game : sg::dead_states_to_sinks(game);
    sg::TransformResult two_act = sg::to_2act(base);

    sg::QuadraticProgram qp =
        sg::build_improved_qp(two_act.game, sg::mec_decomposition(two_act.game));
    sg::QpSolverConfig config;
    config.restarts = opts.restarts;
    config.seed = opts.seed;
    if (opts.warm_start == "vi") config.warm_start = sg::warm_start_values(two_act.game, 1e-6);
    sg::QpSolveOutcome outcome = sg::solve_qp(qp, config);
    *success = outcome.success;
    if (report_out) *report_out = outcome.report;

    outcome.values.resize(game.num_states());
    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    return sg::qp_outcome_to_result(game, outcome, wall_ms);
}

int run_check(const std::vector<sg::Game>& games, const std::vector<std::string>& names,
              bool as_json) {
    int disagreements = 0, qp_failures = 0;
    json reports = json::array();
    for (size_t i = 0; i < games.size(); ++i) {
        const sg::Game& game = games[i];
        auto oracle = sg::enumerate_solve(game);

        sg::SolveResult si_exact = sg::solve_si(game);
        bool si_ok = si_exact.exact_values == oracle.values;

        sg::SiConfig vi_config;
        vi_config.opponent = sg::MdpMethod::vi;
        vi_config.opponent_precision = 1e-8;
        sg::SolveResult si_vi = sg::solve_si(game, vi_config);
        bool vi_ok = true;
        for (sg::StateId s = 0; s < game.num_states(); ++s)
            if (std::abs(si_vi.values[s] - sg::to_double(oracle.values[s])) > 1e-6)
                vi_ok = false;

        SolveOptions qp_opts;
        bool qp_success = false;
        sg::SolveResult qp = run_qp(game, qp_opts, &qp_success);
        bool qp_ok = true;
        if (qp_success) {
            for (sg::StateId s = 0; s < game.num_states(); ++s)
                if (std::abs(qp.values[s] - sg::to_double(oracle.values[s])) > 1e-6)
                    qp_ok = false;
        } else {
            ++qp_failures;
        }

        if (!si_ok || !vi_ok || !qp_ok) ++disagreements;
        if (as_json) {
            reports.push_back({{"model", names[i]},
                               {"si_exact", si_ok},
                               {"si_vi", vi_ok},
                               {"qp_solved", qp_success},
                               {"qp_matches", qp_ok}});
        } else {
            std::cout << names[i] << ": si=" << (si_ok ? "ok" : "MISMATCH")
                      << " si-vi=" << (vi_ok ? "ok" : "MISMATCH")
                      << " qp=" << (qp_success ? (qp_ok ? "ok" : "WRONG") : "unsolved")
                      << "\n";
        }
    }
    if (as_json) {
        std::cout << json{{"models", reports},
                          {"disagreements", disagreements},
                          {"qp_failures", qp_failures}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << games.size() << " models, " << disagreements << " disagreements, "
                  << qp_failures << " unsolved programs\n";
    }
    return disagreements == 0 ? kExitOk : kExitSolveFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reachability solver for simple stochastic games"};
    app.require_subcommand(1);

    std::string file, out_path;
    bool as_json = false;

    auto* solve = app.add_subcommand("solve", "solve a game");
    SolveOptions opts;
    solve->add_option("file", file)->required();
    solve->add_option("--method", opts.method)->check(CLI::IsMember({"si", "qp", "vi"}));
    solve->add_option("--init", opts.init)->check(CLI::IsMember({"attractor", "vi"}));
    solve->add_option("--opponent", opts.opponent)->check(CLI::IsMember({"vi", "pi"}));
    solve->add_flag("--topological", opts.topological);
    solve->add_option("--warm-start", opts.warm_start)->check(CLI::IsMember({"vi"}));
    solve->add_option("--restarts", opts.restarts);
    solve->add_option("--seed", opts.seed);
    solve->add_option("--precision", opts.precision);
    solve->add_flag("--no-preprocess", opts.no_preprocess);
    solve->add_flag("--json", as_json);

    auto* oracle_cmd = app.add_subcommand("oracle", "exact values by enumeration");
    oracle_cmd->add_option("file", file)->required();
    oracle_cmd->add_flag("--json", as_json);

    auto* mec_cmd = app.add_subcommand("mec", "maximal end component decomposition");
    mec_cmd->add_option("file", file)->required();
    mec_cmd->add_flag("--json", as_json);

    auto* transform_cmd = app.add_subcommand("transform", "rewrite a game");
    bool to_cnf = false, all_actions = false;
    int chain_m = 0;
    transform_cmd->add_option("file", file)->required();
    transform_cmd->add_flag("--to-cnf", to_cnf)->required();
    transform_cmd->add_option("--m", chain_m, "epsilon chain length (default 2(|S|-1)+1)");
    transform_cmd->add_flag("--all-actions", all_actions,
                            "insert epsilon chains everywhere, not only inside MECs");
    transform_cmd->add_option("-o,--out", out_path);

    auto* export_cmd = app.add_subcommand("export-qp", "write the program as an LP file");
    std::string variant = "improved", format = "lp";
    export_cmd->add_option("file", file)->required();
    export_cmd->add_option("--variant", variant)->check(CLI::IsMember({"condon", "improved"}));
    export_cmd->add_option("--format", format)->check(CLI::IsMember({"lp"}));
    export_cmd->add_option("-o,--out", out_path);

    auto* gen_cmd = app.add_subcommand("gen", "generate a random game");
    sg::GeneratorParams gen_params;
    bool any_probs = false;
    gen_cmd->add_option("--states", gen_params.states);
    gen_cmd->add_option("--max-actions", gen_params.max_actions);
    gen_cmd->add_option("--max-successors", gen_params.max_successors);
    gen_cmd->add_flag("--any-probs", any_probs, "allow non-dyadic probabilities");
    gen_cmd->add_option("--back-edge-prob", gen_params.back_edge_prob);
    gen_cmd->add_option("--seed", gen_params.seed);
    gen_cmd->add_option("-o,--out", out_path);

    auto* check_cmd = app.add_subcommand("check", "cross-validate solvers against the oracle");
    std::vector<std::string> check_files;
    int check_random = 0;
    std::uint64_t check_seed = 1;
    int check_states = 6;
    check_cmd->add_option("files", check_files);
    check_cmd->add_option("--random", check_random, "additionally check N generated games");
    check_cmd->add_option("--seed", check_seed);
    check_cmd->add_option("--states", check_states);
    check_cmd->add_flag("--json", as_json);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            sg::Game game = load_game(file);
            sg::SolveResult result;
            sg::QpSolutionReport qp_report;
            bool ok = true;
            if (opts.method == "si") {
                sg::SiConfig config;
                config.init = opts.init == "attractor" ? sg::SiInit::attractor
                                                       : sg::SiInit::vi_seeded;
                config.opponent = opts.opponent == "vi" ? sg::MdpMethod::vi
                                                        : sg::MdpMethod::policy_iteration;
                if (opts.opponent == "vi")
                    config.opponent_precision = std::max(opts.precision, 1e-12);
                result = opts.topological ? sg::topological_si(game, config)
                                          : sg::solve_si(game, config);
            } else if (opts.method == "qp") {
                result = run_qp(game, opts, &ok, &qp_report);
            } else {
                const auto start = std::chrono::steady_clock::now();
                sg::ViResult vi =
                    sg::unguaranteed_vi(game, sg::ViConfig{opts.precision, 1000000});
                result.method = "vi";
                result.guarantee = sg::Guarantee::unguaranteed;
                result.values = vi.values;
                auto [sigma, tau] = sg::greedy_strategies(game, result.values);
                result.maximizer_strategy = std::move(sigma);
                result.minimizer_strategy = std::move(tau);
                result.stats.iterations = vi.iterations;
                result.stats.converged = vi.converged;
                result.stats.wall_ms = std::chrono::duration<double, std::milli>(
                                           std::chrono::steady_clock::now() - start)
                                           .count();
            }
            if (as_json) {
                json doc = sg::solve_result_to_json(game, result);
                if (opts.method == "qp" && !ok)
                    doc["qp_report"] = sg::qp_report_to_json(qp_report);
                std::cout << doc.dump(2) << "\n";
            } else {
                print_result_text(game, result);
            }
            if (!ok) {
                std::cerr << "qp: no certified solution found (best objective "
                          << result.stats.objective << ", max violation "
                          << qp_report.max_violation << ")\n";
                return kExitSolveFailure;
            }
            return kExitOk;
        }

        if (oracle_cmd->parsed()) {
            sg::Game game = load_game(file);
            sg::OracleResult result = sg::enumerate_solve(game);
            if (as_json) {
                std::cout << sg::oracle_result_to_json(game, result).dump(2) << "\n";
            } else {
                std::cout << "exact values:\n";
                for (sg::StateId s = 0; s < game.num_states(); ++s)
                    std::cout << "  " << s << ": " << sg::to_fraction_string(result.values[s])
                              << "\n";
            }
            return kExitOk;
        }

        if (mec_cmd->parsed()) {
            sg::Game game = load_game(file);
            auto mecs = sg::mec_decomposition(game);
            auto order = sg::mec_postorder(game, mecs);
            if (as_json) {
                std::cout << sg::mecs_to_json(game, mecs, order).dump(2) << "\n";
            } else {
                for (size_t i = 0; i < mecs.size(); ++i) {
                    std::cout << "mec " << i << ": states";
                    for (sg::StateId s : mecs[i].states) std::cout << " " << s;
                    std::cout << " | staying";
                    for (size_t j = 0; j < mecs[i].states.size(); ++j)
                        for (int a : mecs[i].staying_actions[j])
                            std::cout << " (" << mecs[i].states[j] << ","
                                      << game.action(mecs[i].states[j], a).name << ")";
                    std::cout << " | exits";
                    for (const auto& [s, a] : mecs[i].exiting_pairs)
                        std::cout << " (" << s << "," << game.action(s, a).name << ")";
                    std::cout << " | exit states";
                    for (sg::StateId s : mecs[i].exit_states) std::cout << " " << s;
                    std::cout << "\n";
                }
                std::cout << "postorder:";
                for (int idx : order) std::cout << " " << idx;
                std::cout << "\n";
            }
            return kExitOk;
        }

        if (transform_cmd->parsed()) {
            sg::Game game = load_game(file);
            const int bound = 2 * (game.num_states() - 1);
            if (chain_m == 0) chain_m = bound + 1;
            if (chain_m <= bound)
                std::cerr << "warning: m=" << chain_m << " is at or below 2(|S|-1)=" << bound
                          << "; the value perturbation is no longer negligible\n";
            sg::TransformResult result = sg::to_condon_normal_form(game, chain_m, !all_actions);
            const std::string base = out_path.empty() ? file + ".cnf.sg" : out_path;
            write_file(base, sg::render_game(result.game));
            json origin = json::array();
            for (const auto& o : result.origin)
                origin.push_back(o ? json(*o) : json("auxiliary"));
            write_file(base + ".origin.json", json{{"origin", origin}}.dump(2) + "\n");
            std::cout << "wrote " << base << " (" << result.game.num_states()
                      << " states) and " << base << ".origin.json\n";
            return kExitOk;
        }

        if (export_cmd->parsed()) {
            sg::Game game = load_game(file);
            sg::QuadraticProgram qp;
            if (variant == "condon") {
                qp = sg::build_condon_qp(game);
            } else {
                sg::TransformResult two_act = sg::to_2act(game);
                qp = sg::build_improved_qp(two_act.game, sg::mec_decomposition(two_act.game));
            }
            const std::string path = out_path.empty() ? file + ".lp" : out_path;
            write_file(path, sg::export_lp(qp));
            std::cout << "wrote " << path << "\n";
            return kExitOk;
        }

        if (gen_cmd->parsed()) {
            gen_params.dyadic_only = !any_probs;
            sg::Game game = sg::generate_random_game(gen_params);
            if (out_path.empty())
                std::cout << sg::render_game(game);
            else
                write_file(out_path, sg::render_game(game));
            return kExitOk;
        }

        if (check_cmd->parsed()) {
            std::vector<sg::Game> games;
            std::vector<std::string> names;
            for (const std::string& path : check_files) {
                games.push_back(load_game(path));
                names.push_back(path);
            }
            for (int i = 0; i < check_random; ++i) {
                sg::GeneratorParams params;
                params.states = 2 + static_cast<int>((check_seed + i) % (check_states - 1));
                params.seed = check_seed + i;
                games.push_back(sg::generate_random_game(params));
                names.push_back("random-" + std::to_string(check_seed + i));
            }
            if (games.empty()) throw sg::SgError("check: no models given");
            return run_check(games, names, as_json);
        }
    } catch (const sg::SgError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitOk;
}

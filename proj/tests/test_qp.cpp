#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "sg/oracle.hpp"
#include "sg/qp.hpp"
#include "sg/transforms.hpp"

using namespace sg;
using namespace sg::test;

namespace {

std::vector<double> as_doubles(const std::vector<Rat>& values) {
    std::vector<double> out(values.size());
    for (size_t i = 0; i < values.size(); ++i) out[i] = to_double(values[i]);
    return out;
}

Game mixed_mec_game() {
    // One Maximizer and one Minimizer state cycling through each other, two
    // actions each; exits with distinct values on both sides.
    Builder b;
    StateId u = b.add(Owner::maximizer), v = b.add(Owner::minimizer);
    StateId e1 = b.add(Owner::maximizer), e2 = b.add(Owner::maximizer);
    StateId t = b.add_target(), z = b.add_sink();
    b.act(u, "stay", {{v, Rat(1)}});
    b.act(u, "out", {{e1, Rat(1)}});
    b.act(v, "stay", {{u, Rat(1)}});
    b.act(v, "out", {{e2, Rat(1)}});
    b.act(e1, "a", {{t, Rat(3, 4)}, {z, Rat(1, 4)}});
    b.act(e2, "a", {{t, Rat(1, 4)}, {z, Rat(3, 4)}});
    return b.build(u);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("Condon program on a one-choice normal-form game") {
    Builder b;
    StateId s = b.add(Owner::maximizer);
    StateId t = b.add_target(), z = b.add_sink();
    b.act(s, "a", {{t, Rat(1)}});
    b.act(s, "b", {{z, Rat(1)}});
    Game g = b.build(s);
    QuadraticProgram qp = build_condon_qp(g);
    CHECK(qp.linear.size() == 2);
    CHECK(qp.objective.size() == 1);
    CHECK(qp.fixed[t] == Rat(1));
    CHECK(qp.fixed[z] == Rat(0));
    auto report = verify_solution(qp, std::vector<double>{1.0, 1.0, 0.0}, 1e-9);
    CHECK(report.feasible);
    CHECK(report.objective == 0.0);
}

TEST_CASE("Condon program counts constraints on the transformed coin") {
    TransformResult cnf = to_condon_normal_form(coin_game(), 5, true);
    QuadraticProgram qp = build_condon_qp(cnf.game);
    int two_action = 0;
    for (StateId s = 0; s < cnf.game.num_states(); ++s)
        if (!cnf.game.is_absorbing(s)) {
            REQUIRE(cnf.game.num_actions(s) == 2);
            ++two_action;
        }
    CHECK(qp.linear.size() == static_cast<size_t>(2 * two_action));
    CHECK(qp.objective.size() == static_cast<size_t>(two_action));

    // Oracle values of the normal-form game satisfy it with objective zero.
    auto oracle = enumerate_solve(cnf.game);
    auto report = verify_solution(qp, as_doubles(oracle.values), 1e-9);
    CHECK(report.feasible);
    CHECK(report.objective <= 1e-12);
}

TEST_CASE("Condon program names the violated normal-form predicate") {
    CHECK_THROWS_WITH_AS(static_cast<void>(build_condon_qp(make_bigmec(1))),
                         doctest::Contains("1/2Probs"), ValidationError);
    Builder b;
    StateId s = b.add(Owner::maximizer);
    StateId t = b.add_target(), z = b.add_sink();
    b.act(s, "a", {{t, Rat(1, 2)}, {z, Rat(1, 2)}});
    CHECK_THROWS_WITH_AS(static_cast<void>(build_condon_qp(b.build(s))),
                         doctest::Contains("No1Act"), ValidationError);
}

TEST_CASE("improved program on an acyclic game has no selects") {
    Builder b;
    StateId s = b.add(Owner::minimizer);
    StateId t = b.add_target(), z = b.add_sink();
    b.act(s, "a", {{t, Rat(1, 3)}, {z, Rat(2, 3)}});
    b.act(s, "b", {{t, Rat(1, 2)}, {z, Rat(1, 2)}});
    Game g = b.build(s);
    QuadraticProgram qp = build_improved_qp(g, mec_decomposition(g));
    CHECK(qp.selects.empty());
    CHECK(qp.objective.size() == 1);
    auto oracle = enumerate_solve(g);
    CHECK(oracle.values[s] == Rat(1, 3));
    auto report = verify_solution(qp, as_doubles(oracle.values), 1e-8);
    CHECK(report.feasible);
    CHECK(report.objective <= 1e-9);
}

TEST_CASE("improved program requires only the two-action cap") {
    Builder b;
    StateId s = b.add(Owner::maximizer);
    StateId t = b.add_target(), z = b.add_sink();
    b.act(s, "a", {{t, Rat(1)}});
    b.act(s, "b", {{t, Rat(1, 2)}, {z, Rat(1, 2)}});
    b.act(s, "c", {{z, Rat(1)}});
    Game g = b.build(s);
    CHECK_THROWS_WITH_AS(static_cast<void>(build_improved_qp(g, mec_decomposition(g))),
                         doctest::Contains("2Act"), ValidationError);
}

TEST_CASE("maximizer-only MEC yields best-exit selects satisfied by the oracle") {
    Game g = make_bigmec(1);
    QuadraticProgram qp = build_improved_qp(g, mec_decomposition(g));
    CHECK(qp.selects.size() == 2);  // one per MEC member
    for (const auto& sel : qp.selects) {
        CHECK(sel.kind == SelectKind::max);
        CHECK(sel.exprs.size() == 1);  // single exiting pair
    }
    auto oracle = enumerate_solve(g);
    auto report = verify_solution(qp, as_doubles(oracle.values), 1e-8);
    CHECK(report.feasible);
    CHECK(report.objective <= 1e-9);
}

TEST_CASE("mixed MEC builds one constraint group per strategy pair") {
    Game g = mixed_mec_game();
    auto mecs = mec_decomposition(g);
    REQUIRE(mecs.size() == 3);
    REQUIRE(mecs[0].states == std::vector<StateId>{0, 1});

    auto pairs = enumerate_local_strategy_pairs(g, mecs[0]);
    CHECK(pairs.size() == 4);  // 2 sigma * 2 tau <= 2^|T| as promised

    QuadraticProgram qp = build_improved_qp(g, mecs);
    // 2 sigma groups * 2 member states min-selects + 2 max-selects
    int min_selects = 0, max_selects = 0;
    for (const auto& sel : qp.selects)
        (sel.kind == SelectKind::min ? min_selects : max_selects)++;
    CHECK(min_selects == 4);
    CHECK(max_selects == 2);
    CHECK(qp.num_vars() == qp.num_state_vars + 4);

    auto oracle = enumerate_solve(g);
    CHECK(oracle.values[0] == Rat(3, 4));  // Maximizer takes its own exit
    CHECK(oracle.values[1] == Rat(1, 4));  // Minimizer escapes through e2
    auto report = verify_solution(qp, as_doubles(oracle.values), 1e-8);
    CHECK(report.feasible);
    CHECK(report.objective <= 1e-9);
}

TEST_CASE("mixed MEC strategy-pair cap fails construction loudly") {
    Game g = mixed_mec_game();
    auto mecs = mec_decomposition(g);
    QpBuildConfig config;
    config.mec_pair_cap = 3;
    CHECK_THROWS_AS(static_cast<void>(build_improved_qp(g, mecs, config)), SgError);
}

TEST_CASE("local strategy pairs enumerate deterministically") {
    Game g = mixed_mec_game();
    auto mecs = mec_decomposition(g);
    auto a = enumerate_local_strategy_pairs(g, mecs[0]);
    auto b = enumerate_local_strategy_pairs(g, mecs[0]);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].max_choice == b[i].max_choice);
        CHECK(a[i].min_choice == b[i].min_choice);
    }
    // sigma-major ordering: the Maximizer digit advances last.
    CHECK(a[0].max_choice == std::vector<int>{0, -1});
    CHECK(a[1].max_choice == std::vector<int>{0, -1});
    CHECK(a[2].max_choice == std::vector<int>{1, -1});
    CHECK(a[0].min_choice == std::vector<int>{-1, 0});
    CHECK(a[1].min_choice == std::vector<int>{-1, 1});
}

TEST_CASE("absorption probabilities of local pairs") {
    Game g = mixed_mec_game();
    auto mecs = mec_decomposition(g);
    const Mec& mec = mecs[0];

    SUBCASE("staying choices never exit") {
        LocalStrategyPair stay{{0, -1}, {-1, 0}};
        auto p = mec_reach_probabilities(g, mec, stay);
        for (const auto& row : p.prob)
            for (const Rat& q : row) CHECK(q == Rat(0));
    }
    SUBCASE("direct exits absorb at the matching state") {
        LocalStrategyPair both_out{{1, -1}, {-1, 1}};
        auto p = mec_reach_probabilities(g, mec, both_out);
        REQUIRE(p.exits == std::vector<StateId>{2, 3});
        CHECK(p.prob[0][0] == Rat(1));  // u -> e1
        CHECK(p.prob[0][1] == Rat(0));
        CHECK(p.prob[1][0] == Rat(0));
        CHECK(p.prob[1][1] == Rat(1));  // v -> e2
    }
    SUBCASE("one player stays, the other leaves: everyone exits there") {
        LocalStrategyPair pair{{0, -1}, {-1, 1}};  // u stays toward v, v exits
        auto p = mec_reach_probabilities(g, mec, pair);
        CHECK(p.prob[0][1] == Rat(1));
        CHECK(p.prob[1][1] == Rat(1));
    }
}

TEST_CASE("absorption probabilities through a lossy loop") {
    // u -> v surely; v either loops back or risks the exit with 1/2.
    // Under the risking pair the exit is reached almost surely.
    Builder b2;
    StateId u = b2.add(Owner::maximizer), v = b2.add(Owner::maximizer);
    StateId e = b2.add(Owner::maximizer);
    StateId t2 = b2.add_target(), z2 = b2.add_sink();
    b2.act(u, "go", {{v, Rat(1)}});
    b2.act(v, "loop", {{u, Rat(1)}});
    b2.act(v, "risk", {{u, Rat(1, 2)}, {e, Rat(1, 2)}});
    b2.act(e, "a", {{t2, Rat(1)}});
    (void)z2;
    Game g2 = b2.build(u);
    auto mecs2 = mec_decomposition(g2);
    REQUIRE(mecs2[0].states == std::vector<StateId>{u, v});
    LocalStrategyPair pair{{0, 1}, {-1, -1}};  // u: go, v: risk
    auto p = mec_reach_probabilities(g2, mecs2[0], pair);
    REQUIRE(p.exits == std::vector<StateId>{e});
    CHECK(p.prob[0][0] == Rat(1));
    CHECK(p.prob[1][0] == Rat(1));
}

TEST_CASE("absorption rows sum to at most one, exactly one without staying traps") {
    int rows_checked = 0;
    for (const Game& game : small_corpus(30, 52000)) {
        for (const Mec& mec : mec_decomposition(game)) {
            if (mec.states.size() == 1 && game.is_absorbing(mec.states.front())) continue;
            for (const LocalStrategyPair& pair : enumerate_local_strategy_pairs(game, mec)) {
                auto p = mec_reach_probabilities(game, mec, pair);
                for (size_t i = 0; i < mec.states.size(); ++i) {
                    Rat total(0);
                    for (size_t e = 0; e < p.exits.size(); ++e) total += p.prob[i][e];
                    REQUIRE(total >= 0);
                    REQUIRE(total <= 1);
                    ++rows_checked;
                }
            }
        }
    }
    CHECK(rows_checked > 20);

    // A pair with only staying choices keeps every row at zero; a pair that
    // must leave sums to exactly one.
    Builder b;
    StateId u = b.add(Owner::maximizer);
    StateId t = b.add_target(), z = b.add_sink();
    b.act(u, "loop", {{u, Rat(1)}});
    b.act(u, "out", {{t, Rat(1, 2)}, {z, Rat(1, 2)}});
    Game g = b.build(u);
    auto mecs = mec_decomposition(g);
    auto staying = mec_reach_probabilities(g, mecs[0], LocalStrategyPair{{0}, {-1}});
    CHECK(staying.prob[0][0] + staying.prob[0][1] == Rat(0));
    auto leaving = mec_reach_probabilities(g, mecs[0], LocalStrategyPair{{1}, {-1}});
    CHECK(leaving.prob[0][0] + leaving.prob[0][1] == Rat(1));
}

TEST_CASE("oracle values satisfy the improved program across the corpus") {
    for (const Game& game : small_corpus(40, 51000)) {
        QuadraticProgram qp = build_improved_qp(game, mec_decomposition(game));
        auto oracle = enumerate_solve(game);
        auto report = verify_solution(qp, as_doubles(oracle.values), 1e-8);
        REQUIRE(report.feasible);
        REQUIRE(report.objective <= 1e-9);
    }
    // Arbitrary rational probabilities are first-class, no dyadic assumption.
    for (const Game& game : small_corpus(15, 53000, 6, /*dyadic=*/false)) {
        QuadraticProgram qp = build_improved_qp(game, mec_decomposition(game));
        auto oracle = enumerate_solve(game);
        auto report = verify_solution(qp, as_doubles(oracle.values), 1e-8);
        REQUIRE(report.feasible);
        REQUIRE(report.objective <= 1e-9);
    }
}

TEST_CASE("exit-dependency identity on a mixed MEC") {
    // For each local pair, the absorption-weighted exit values reproduce the
    // frozen-strategy value of every member state, exactly.
    Game g = mixed_mec_game();
    auto mecs = mec_decomposition(g);
    const Mec& mec = mecs[0];
    for (const LocalStrategyPair& pair : enumerate_local_strategy_pairs(g, mec)) {
        // Freeze the pair inside the MEC by dropping the other actions.
        Builder frozen;
        for (StateId s = 0; s < g.num_states(); ++s) {
            GameState st = g.state(s);
            int i = mec.index_of(s);
            if (i >= 0) {
                int choice = st.owner == Owner::maximizer ? pair.max_choice[i]
                                                          : pair.min_choice[i];
                st.actions = {st.actions[choice]};
            }
            frozen.states.push_back(st);
        }
        auto frozen_oracle = enumerate_solve(frozen.build(g.initial()));
        auto p = mec_reach_probabilities(g, mec, pair);
        for (size_t i = 0; i < mec.states.size(); ++i) {
            Rat expected(0);
            for (size_t e = 0; e < p.exits.size(); ++e)
                expected += p.prob[i][e] * frozen_oracle.values[p.exits[e]];
            REQUIRE(frozen_oracle.values[mec.states[i]] == expected);
        }
    }
}

TEST_CASE("verification flags violations and perturbations") {
    Game g = coin_game();
    QuadraticProgram qp = build_improved_qp(g, mec_decomposition(g));
    auto bad = verify_solution(qp, std::vector<double>{0.5, 0.5, 0.5}, 1e-8);
    CHECK(!bad.feasible);
    CHECK(bad.max_violation == doctest::Approx(0.5));

    Builder b;
    StateId s = b.add(Owner::maximizer);
    StateId t = b.add_target(), z = b.add_sink();
    b.act(s, "hi", {{t, Rat(3, 4)}, {z, Rat(1, 4)}});
    b.act(s, "lo", {{t, Rat(1, 4)}, {z, Rat(3, 4)}});
    Game g2 = b.build(s);
    QuadraticProgram qp2 = build_improved_qp(g2, mec_decomposition(g2));
    auto oracle = enumerate_solve(g2);
    std::vector<double> vals = as_doubles(oracle.values);
    auto good = verify_solution(qp2, vals, 1e-8);
    CHECK(good.objective <= 1e-12);
    vals[s] += 0.1;  // stays feasible for the Maximizer but non-complementary
    auto perturbed = verify_solution(qp2, vals, 1e-8);
    CHECK(perturbed.feasible);
    CHECK(perturbed.objective > 0.01);
}

TEST_CASE("big-M lowering matches direct select evaluation") {
    std::mt19937_64 rng(7);
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3;
        std::vector<double> x(n + 1);
        for (double& v : x) v = uniform();
        std::vector<AffineExpr> exprs;
        for (int i = 0; i < n; ++i) {
            AffineExpr e;
            e.constant = dyadic_quantize(uniform() * 0.5, 10);
            e.add_term(i, dyadic_quantize(uniform(), 10));
            exprs.push_back(e);
        }
        const double v = x[n];
        for (bool is_max : {true, false}) {
            double best = exprs[0].eval(x);
            for (int i = 1; i < n; ++i) {
                double val = exprs[i].eval(x);
                best = is_max ? std::max(best, val) : std::min(best, val);
            }
            const double direct = std::abs(v - best);
            // Best boolean completion of the lowering: pick the branch that
            // minimizes the worst residual.
            double lowered = 1e30;
            for (int i = 0; i < n; ++i) {
                double worst = 0.0;
                for (int j = 0; j < n; ++j) {
                    double ej = exprs[j].eval(x);
                    worst = std::max(worst, is_max ? ej - v : v - ej);
                }
                double ei = exprs[i].eval(x);
                worst = std::max(worst, is_max ? v - ei : ei - v);
                lowered = std::min(lowered, worst);
            }
            REQUIRE(std::abs(direct - lowered) < 1e-12);
        }
    }
}

TEST_CASE("LP export matches the golden files and is deterministic") {
    const std::string dir = SG_GOLDEN_DIR;
    auto check_golden = [&](const std::string& name, const Game& game, bool condon) {
        QuadraticProgram qp = condon ? build_condon_qp(game)
                                     : build_improved_qp(game, mec_decomposition(game));
        std::string lp = export_lp(qp);
        CHECK(lp == export_lp(qp));  // byte-identical re-export
        CHECK(lp == read_file(dir + "/" + name));
    };
    check_golden("coin_improved.lp", coin_game(), false);
    check_golden("coin_condon.lp", to_condon_normal_form(coin_game(), 5, true).game, true);
    check_golden("bigmec1_improved.lp", make_bigmec(1), false);
    check_golden("mixed_mec_improved.lp", mixed_mec_game(), false);
    Builder b;
    StateId s = b.add(Owner::minimizer);
    StateId t = b.add_target(), z = b.add_sink();
    b.act(s, "a", {{t, Rat(1, 3)}, {z, Rat(2, 3)}});
    b.act(s, "b", {{t, Rat(1, 2)}, {z, Rat(1, 2)}});
    check_golden("min_choice_improved.lp", b.build(s), false);
}

TEST_CASE("binary count in the lowered export") {
    Game g = mixed_mec_game();
    QuadraticProgram qp = build_improved_qp(g, mec_decomposition(g));
    std::string lp = export_lp(qp);
    // 4 min-selects over 2 branches + 2 max-selects over 2 branches = 12.
    size_t count = 0;
    for (size_t pos = lp.find("Binaries"); pos != std::string::npos && pos < lp.size();) {
        pos = lp.find("\n b", pos);
        if (pos == std::string::npos) break;
        ++count;
        ++pos;
    }
    CHECK(count == 12);
}

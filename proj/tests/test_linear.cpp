#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sg/linear.hpp"

using namespace sg;

TEST_CASE("exact linear solve") {
    // 2x + y = 5, x - y = 1  =>  x = 2, y = 1
    std::vector<std::vector<Rat>> a{{Rat(2), Rat(1)}, {Rat(1), Rat(-1)}};
    std::vector<Rat> b{Rat(5), Rat(1)};
    auto x = solve_linear_system(a, b);
    CHECK(x[0] == Rat(2));
    CHECK(x[1] == Rat(1));
}

TEST_CASE("pivoting handles a zero leading entry") {
    std::vector<std::vector<Rat>> a{{Rat(0), Rat(1)}, {Rat(1), Rat(0)}};
    std::vector<Rat> b{Rat(3), Rat(7)};
    auto x = solve_linear_system(a, b);
    CHECK(x[0] == Rat(7));
    CHECK(x[1] == Rat(3));
}

TEST_CASE("singular matrix is detected") {
    std::vector<std::vector<Rat>> a{{Rat(1), Rat(2)}, {Rat(2), Rat(4)}};
    std::vector<Rat> b{Rat(1), Rat(2)};
    CHECK_THROWS(solve_linear_system(a, b));
}

TEST_CASE("reach probabilities: absorbing target and unreachable component") {
    // 0: target (self loop), 1: sink-ish self loop, 2: 1/2 -> 0, 1/2 -> 1
    std::vector<SparseRow> rows(3);
    rows[0] = {{0, Rat(1)}};
    rows[1] = {{1, Rat(1)}};
    rows[2] = {{0, Rat(1, 2)}, {1, Rat(1, 2)}};
    std::vector<bool> target{true, false, false};
    auto p = reach_probabilities(rows, target);
    CHECK(p[0] == Rat(1));
    CHECK(p[1] == Rat(0));
    CHECK(p[2] == Rat(1, 2));
}

TEST_CASE("reach probabilities solve cyclic mass exactly") {
    // s: 1/2 -> s', 1/2 -> z;  s': 1/2 -> t, 1/2 -> s
    // By hand: x_s = 1/2 x_s', x_s' = 1/2 + 1/2 x_s  =>  x_s = 1/3, x_s' = 2/3.
    enum { S = 0, SP = 1, T = 2, Z = 3 };
    std::vector<SparseRow> rows(4);
    rows[S] = {{SP, Rat(1, 2)}, {Z, Rat(1, 2)}};
    rows[SP] = {{T, Rat(1, 2)}, {S, Rat(1, 2)}};
    rows[T] = {{T, Rat(1)}};
    rows[Z] = {{Z, Rat(1)}};
    std::vector<bool> target{false, false, true, false};
    auto p = reach_probabilities(rows, target);
    CHECK(p[S] == Rat(1, 3));
    CHECK(p[SP] == Rat(2, 3));

    // Cross-check by plain float power iteration.
    std::vector<double> v{0, 0, 1, 0};
    for (int it = 0; it < 200; ++it) {
        std::vector<double> next(4, 0.0);
        for (int s = 0; s < 4; ++s)
            for (const auto& [succ, prob] : rows[s]) next[s] += to_double(prob) * v[succ];
        next[T] = 1.0;
        v = next;
    }
    CHECK(std::abs(v[S] - 1.0 / 3.0) < 1e-12);
    CHECK(std::abs(v[SP] - 2.0 / 3.0) < 1e-12);
}

TEST_CASE("rows that never reach the target yield zero, not a singular solve") {
    // Two states looping into each other, target elsewhere.
    std::vector<SparseRow> rows(3);
    rows[0] = {{1, Rat(1)}};
    rows[1] = {{0, Rat(1)}};
    rows[2] = {{2, Rat(1)}};
    std::vector<bool> target{false, false, true};
    auto p = reach_probabilities(rows, target);
    CHECK(p[0] == Rat(0));
    CHECK(p[1] == Rat(0));
    CHECK(p[2] == Rat(1));
}

#include "sg/linear.hpp"

#include <cassert>
#include <stdexcept>

namespace sg {

std::vector<Rat> solve_linear_system(std::vector<std::vector<Rat>> a, std::vector<Rat> b) {
    const size_t n = a.size();
    assert(b.size() == n);
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;

    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        while (pivot < n && a[perm[pivot]][col] == 0) ++pivot;
        if (pivot == n) throw std::runtime_error("solve_linear_system: singular matrix");
        std::swap(perm[col], perm[pivot]);
        const size_t pr = perm[col];
        const Rat inv = a[pr][col];
        for (size_t row = col + 1; row < n; ++row) {
            const size_t rr = perm[row];
            if (a[rr][col] == 0) continue;
            const Rat factor = a[rr][col] / inv;
            a[rr][col] = 0;
            for (size_t k = col + 1; k < n; ++k)
                if (a[pr][k] != 0) a[rr][k] -= factor * a[pr][k];
            b[rr] -= factor * b[pr];
        }
    }

    std::vector<Rat> x(n);
    for (size_t i = n; i-- > 0;) {
        const size_t rr = perm[i];
        Rat acc = b[rr];
        for (size_t k = i + 1; k < n; ++k)
            if (a[rr][k] != 0) acc -= a[rr][k] * x[k];
        x[i] = acc / a[rr][i];
    }
    return x;
}

std::vector<Rat> reach_probabilities(const std::vector<SparseRow>& rows,
                                     const std::vector<bool>& target) {
    const int n = static_cast<int>(rows.size());

    // Backward closure of the target set over positive-probability edges.
    std::vector<std::vector<int>> preds(n);
    for (int s = 0; s < n; ++s)
        for (const auto& [succ, p] : rows[s])
            if (p > 0) preds[succ].push_back(s);
    std::vector<bool> can_reach(n, false);
    std::vector<int> stack;
    for (int s = 0; s < n; ++s)
        if (target[s]) {
            can_reach[s] = true;
            stack.push_back(s);
        }
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int p : preds[v])
            if (!can_reach[p]) {
                can_reach[p] = true;
                stack.push_back(p);
            }
    }

    std::vector<Rat> result(n, Rat(0));
    std::vector<int> unknown;  // can reach the target but is not in it
    std::vector<int> index(n, -1);
    for (int s = 0; s < n; ++s) {
        if (target[s]) {
            result[s] = 1;
        } else if (can_reach[s]) {
            index[s] = static_cast<int>(unknown.size());
            unknown.push_back(s);
        }
    }
    if (unknown.empty()) return result;

    const size_t m = unknown.size();
    std::vector<std::vector<Rat>> a(m, std::vector<Rat>(m, Rat(0)));
    std::vector<Rat> b(m, Rat(0));
    for (size_t i = 0; i < m; ++i) {
        const int s = unknown[i];
        a[i][i] = 1;
        for (const auto& [succ, p] : rows[s]) {
            if (target[succ])
                b[i] += p;
            else if (index[succ] >= 0)
                a[i][index[succ]] -= p;
            // successors that cannot reach the target contribute 0
        }
    }
    std::vector<Rat> x = solve_linear_system(std::move(a), std::move(b));
    for (size_t i = 0; i < m; ++i) result[unknown[i]] = x[i];
    return result;
}

}  // namespace sg

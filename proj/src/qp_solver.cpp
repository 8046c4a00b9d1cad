#include "sg/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <thread>

#include "sg/mdp.hpp"

namespace sg {

namespace {

int worker_count() {
    if (const char* env = std::getenv("SGSOLVE_THREADS")) {
        long v = std::atol(env);
        if (v > 0) return static_cast<int>(std::min(v, 64L));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

struct DenseAffine {
    double constant = 0.0;
    std::vector<std::pair<int, double>> terms;

    double eval(const std::vector<double>& x) const {
        double acc = constant;
        for (const auto& [v, c] : terms) acc += c * x[v];
        return acc;
    }
};

DenseAffine lower_affine(const AffineExpr& e) {
    DenseAffine d;
    d.constant = to_double(e.constant);
    for (const auto& [v, c] : e.terms) d.terms.emplace_back(v, to_double(c));
    return d;
}

struct Row {
    std::vector<std::pair<int, double>> coef;
    double rhs = 0.0;
    bool equality = true;  // otherwise coef . x <= rhs
    double inv_norm_sq = 0.0;

    void finish() {
        double n = 0.0;
        for (const auto& [v, c] : coef) n += c * c;
        inv_norm_sq = n > 0 ? 1.0 / n : 0.0;
    }
    double value(const std::vector<double>& x) const {
        double acc = 0.0;
        for (const auto& [v, c] : coef) acc += c * x[v];
        return acc;
    }
    void project(std::vector<double>& x) const {
        double d = value(x) - rhs;
        if (equality ? d == 0.0 : d <= 0.0) return;
        const double scale = d * inv_norm_sq;
        for (const auto& [v, c] : coef) x[v] -= scale * c;
    }
    double residual(const std::vector<double>& x) const {
        double d = value(x) - rhs;
        return equality ? std::abs(d) : std::max(0.0, d);
    }
};

Row row_from_difference(int var, const DenseAffine& expr) {
    Row row;
    row.coef.emplace_back(var, 1.0);
    for (const auto& [v, c] : expr.terms) {
        bool merged = false;
        for (auto& [rv, rc] : row.coef)
            if (rv == v) {
                rc -= c;
                merged = true;
            }
        if (!merged) row.coef.emplace_back(v, -c);
    }
    row.rhs = expr.constant;
    row.equality = true;
    row.finish();
    return row;
}

struct Compiled {
    int num_vars = 0;
    int num_state_vars = 0;
    std::vector<std::pair<int, double>> pins;
    std::vector<Row> rows;
    struct Select {
        int var;
        bool is_max;
        std::vector<DenseAffine> exprs;
        std::vector<Row> branch_rows;  // one equality row per branch
    };
    std::vector<Select> selects;
    std::vector<std::pair<DenseAffine, DenseAffine>> objective;
    double base_step = 0.1;
};

Compiled compile(const QuadraticProgram& qp) {
    Compiled c;
    c.num_vars = qp.num_vars();
    c.num_state_vars = qp.num_state_vars;
    for (int v = 0; v < qp.num_vars(); ++v)
        if (qp.fixed[v]) c.pins.emplace_back(v, to_double(*qp.fixed[v]));

    for (const LinearConstraint& lc : qp.linear) {
        DenseAffine lhs = lower_affine(lc.lhs), rhs = lower_affine(lc.rhs);
        Row row;
        const double flip = lc.rel == Rel::ge ? -1.0 : 1.0;
        for (const auto& [v, co] : lhs.terms) row.coef.emplace_back(v, flip * co);
        for (const auto& [v, co] : rhs.terms) {
            bool merged = false;
            for (auto& [rv, rc] : row.coef)
                if (rv == v) {
                    rc -= flip * co;
                    merged = true;
                }
            if (!merged) row.coef.emplace_back(v, -flip * co);
        }
        row.rhs = flip * (rhs.constant - lhs.constant);
        row.equality = lc.rel == Rel::eq;
        row.finish();
        c.rows.push_back(std::move(row));
    }

    for (const SelectConstraint& sel : qp.selects) {
        Compiled::Select s;
        s.var = sel.var;
        s.is_max = sel.kind == SelectKind::max;
        for (const AffineExpr& e : sel.exprs) {
            DenseAffine d = lower_affine(e);
            s.branch_rows.push_back(row_from_difference(sel.var, d));
            s.exprs.push_back(std::move(d));
        }
        c.selects.push_back(std::move(s));
    }

    double curvature = 0.0;
    for (const auto& [a, b] : qp.objective) {
        DenseAffine da = lower_affine(a), db = lower_affine(b);
        double na = 0.0, nb = 0.0;
        for (const auto& [v, co] : da.terms) na += co * co;
        for (const auto& [v, co] : db.terms) nb += co * co;
        curvature += std::sqrt(na * nb);
        c.objective.emplace_back(std::move(da), std::move(db));
    }
    c.base_step = std::clamp(0.5 / std::max(1.0, curvature), 1e-4, 0.25);
    return c;
}

struct Candidate {
    bool feasible = false;
    double objective = std::numeric_limits<double>::infinity();
    // Worst pair measured by its factor closer to zero. The objective alone
    // is a poor certificate: a squared tie pair keeps it under 1e-9 while
    // the variable sits 3e-5 off, and slight infeasibility can even push
    // products negative.
    double complementarity = std::numeric_limits<double>::infinity();
    double violation = std::numeric_limits<double>::infinity();
    std::vector<double> x;

    bool certified(double obj_tol, double comp_tol) const {
        return feasible && std::abs(objective) <= obj_tol && complementarity <= comp_tol;
    }
    bool better_than(const Candidate& other) const {
        if (feasible != other.feasible) return feasible;
        const double mine = std::abs(objective) + complementarity;
        const double theirs = std::abs(other.objective) + other.complementarity;
        if (mine != theirs) return mine < theirs;
        return violation < other.violation;
    }
};

class RestartRun {
  public:
    RestartRun(const Compiled& c, const QpSolverConfig& cfg) : c_(c), cfg_(cfg) {}

    Candidate run(std::vector<double> x, long* iterations_out) {
        x_ = std::move(x);
        apply_pins();
        clip();
        resolve_branches();

        Candidate best;
        double window_best = std::numeric_limits<double>::infinity();
        long window_start = 0;
        long t = 0;
        for (; t < cfg_.max_iterations; ++t) {
            if (t % cfg_.selector_cadence == 0) resolve_branches();
            descend(t);
            project();
            if (t % 16 == 0 || t + 1 == cfg_.max_iterations) {
                Candidate cand = measure();
                if (cand.better_than(best)) best = cand;
                if (cand.certified(cfg_.objective_tolerance, cfg_.complementarity_tolerance))
                    break;

                const double metric = cand.objective + 10.0 * cand.violation;
                if (metric < window_best * (1.0 - cfg_.stall_rel_improvement)) {
                    window_best = metric;
                    window_start = t;
                } else if (t - window_start > cfg_.stall_window) {
                    break;
                }
            }
        }
        // Settle the branches and push feasibility hard, then sharpen by
        // pinning every product to its currently active side: near the
        // solution this lands on the exact complementarity vertex instead
        // of a point that merely clears the tolerance. Reverted when it
        // leaves the feasible region.
        resolve_branches();
        for (int pass = 0; pass < 12; ++pass) project();
        Candidate cand = measure();
        if (cand.better_than(best)) best = cand;
        Candidate polished = complementarity_polish();
        if (polished.better_than(best)) best = polished;
        if (iterations_out) *iterations_out = t;
        return best;
    }

  private:
    void apply_pins() {
        for (const auto& [v, val] : c_.pins) x_[v] = val;
    }
    void clip() {
        for (double& v : x_) v = std::clamp(v, 0.0, 1.0);
    }
    void resolve_branches() {
        branch_.resize(c_.selects.size());
        for (size_t i = 0; i < c_.selects.size(); ++i) {
            const auto& sel = c_.selects[i];
            if (sel.exprs.empty()) {
                branch_[i] = -1;
                continue;
            }
            int best = 0;
            double best_val = sel.exprs[0].eval(x_);
            for (size_t j = 1; j < sel.exprs.size(); ++j) {
                double v = sel.exprs[j].eval(x_);
                if (sel.is_max ? v > best_val : v < best_val) {
                    best = static_cast<int>(j);
                    best_val = v;
                }
            }
            branch_[i] = best;
        }
    }
    void descend(long t) {
        if (c_.objective.empty()) return;
        grad_.assign(c_.num_vars, 0.0);
        for (const auto& [a, b] : c_.objective) {
            const double va = a.eval(x_), vb = b.eval(x_);
            for (const auto& [v, co] : a.terms) grad_[v] += co * vb;
            for (const auto& [v, co] : b.terms) grad_[v] += co * va;
        }
        const double step = c_.base_step / (1.0 + static_cast<double>(t) / 2000.0);
        for (int v = 0; v < c_.num_vars; ++v) x_[v] -= step * grad_[v];
    }
    void project() {
        for (int pass = 0; pass < cfg_.projection_passes; ++pass) {
            for (const Row& row : c_.rows) row.project(x_);
            for (size_t i = 0; i < c_.selects.size(); ++i)
                if (branch_[i] >= 0) c_.selects[i].branch_rows[branch_[i]].project(x_);
            apply_pins();
            clip();
        }
    }
    Candidate complementarity_polish() {
        std::vector<double> saved = x_;
        for (int round = 0; round < 4; ++round) {
            resolve_branches();
            // One equality per objective pair: the factor currently closer
            // to zero is the active side of the complementarity.
            std::vector<Row> active;
            for (const auto& [a, b] : c_.objective) {
                const DenseAffine& tight =
                    std::abs(a.eval(x_)) <= std::abs(b.eval(x_)) ? a : b;
                Row row;
                row.coef = tight.terms;
                row.rhs = -tight.constant;
                row.equality = true;
                row.finish();
                active.push_back(std::move(row));
            }
            for (int pass = 0; pass < 80; ++pass) {
                for (const Row& row : c_.rows) row.project(x_);
                for (size_t i = 0; i < c_.selects.size(); ++i)
                    if (branch_[i] >= 0) c_.selects[i].branch_rows[branch_[i]].project(x_);
                for (const Row& row : active) row.project(x_);
                apply_pins();
                clip();
            }
        }
        Candidate cand = measure();
        if (!cand.feasible) {
            x_ = std::move(saved);
            return measure();
        }
        return cand;
    }

    Candidate measure() const {
        Candidate cand;
        cand.x = x_;
        double viol = 0.0;
        for (const Row& row : c_.rows) viol = std::max(viol, row.residual(x_));
        for (const auto& sel : c_.selects) {
            if (sel.exprs.empty()) continue;
            double best = sel.exprs[0].eval(x_);
            for (size_t j = 1; j < sel.exprs.size(); ++j) {
                double v = sel.exprs[j].eval(x_);
                best = sel.is_max ? std::max(best, v) : std::min(best, v);
            }
            viol = std::max(viol, std::abs(x_[sel.var] - best));
        }
        double obj = 0.0, comp = 0.0;
        for (const auto& [a, b] : c_.objective) {
            const double va = a.eval(x_), vb = b.eval(x_);
            obj += va * vb;
            comp = std::max(comp, std::min(std::abs(va), std::abs(vb)));
        }
        cand.violation = viol;
        cand.objective = obj;
        cand.complementarity = comp;
        cand.feasible = viol <= cfg_.feasibility_tolerance;
        return cand;
    }

    const Compiled& c_;
    const QpSolverConfig& cfg_;
    std::vector<double> x_;
    std::vector<double> grad_;
    std::vector<int> branch_;
};

std::vector<double> start_point(const Compiled& c, const QpSolverConfig& cfg, int restart) {
    std::vector<double> x(c.num_vars, 0.5);
    if (restart == 0 && cfg.warm_start) {
        const auto& warm = *cfg.warm_start;
        for (int v = 0; v < c.num_state_vars && v < static_cast<int>(warm.size()); ++v)
            x[v] = std::clamp(warm[v], 0.0, 1.0);
        // Auxiliary variables start consistent with their selects.
        for (const auto& sel : c.selects) {
            if (sel.var < c.num_state_vars || sel.exprs.empty()) continue;
            double best = sel.exprs[0].eval(x);
            for (size_t j = 1; j < sel.exprs.size(); ++j) {
                double v = sel.exprs[j].eval(x);
                best = sel.is_max ? std::max(best, v) : std::min(best, v);
            }
            x[sel.var] = best;
        }
        return x;
    }
    std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(restart));
    std::uniform_real_distribution<double> interior(0.02, 0.98);
    for (double& v : x) v = interior(rng);
    return x;
}

}  // namespace

QpSolveOutcome solve_qp(const QuadraticProgram& qp, const QpSolverConfig& config) {
    const Compiled compiled = compile(qp);
    const int restarts = std::max(1, config.restarts);
    const int workers = worker_count();

    QpSolveOutcome outcome;
    Candidate global_best;
    long total_iterations = 0;

    // Waves of parallel restarts; accept the smallest-index success so the
    // result does not depend on scheduling.
    for (int wave = 0; wave < restarts && !outcome.success; wave += workers) {
        const int count = std::min(workers, restarts - wave);
        std::vector<Candidate> results(count);
        std::vector<long> iters(count, 0);
        auto job = [&](int k) {
            RestartRun run(compiled, config);
            results[k] = run.run(start_point(compiled, config, wave + k), &iters[k]);
        };
        if (count == 1) {
            job(0);
        } else {
            std::vector<std::thread> pool;
            for (int k = 0; k < count; ++k) pool.emplace_back(job, k);
            for (auto& th : pool) th.join();
        }
        for (int k = 0; k < count; ++k) {
            total_iterations += iters[k];
            if (results[k].better_than(global_best)) global_best = results[k];
            if (outcome.success) continue;
            const Candidate& cand = results[k];
            if (cand.certified(config.objective_tolerance, config.complementarity_tolerance)) {
                std::vector<double> values(cand.x.begin(),
                                           cand.x.begin() + qp.num_state_vars);
                QpSolutionReport report =
                    verify_solution(qp, values, config.feasibility_tolerance);
                if (report.feasible &&
                    std::abs(report.objective) <= config.objective_tolerance) {
                    outcome.success = true;
                    outcome.values = std::move(values);
                    outcome.objective = report.objective;
                    outcome.max_violation = report.max_violation;
                    outcome.restarts_used = wave + k + 1;
                    outcome.report = std::move(report);
                }
            }
        }
    }

    outcome.iterations = total_iterations;
    if (!outcome.success) {
        outcome.restarts_used = restarts;
        outcome.values.assign(global_best.x.begin(),
                              global_best.x.begin() + qp.num_state_vars);
        outcome.report = verify_solution(qp, outcome.values, config.feasibility_tolerance);
        outcome.objective = outcome.report.objective;
        outcome.max_violation = outcome.report.max_violation;
    }
    return outcome;
}

std::vector<double> warm_start_values(const Game& game, double epsilon) {
    return unguaranteed_vi(game, ViConfig{epsilon, 1000000}).values;
}

}  // namespace sg

#include "sg/qp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sg/linear.hpp"
#include "sg/transforms.hpp"

namespace sg {

void AffineExpr::add_term(VarId var, const Rat& coeff) {
    if (coeff == 0) return;
    auto it = std::lower_bound(terms.begin(), terms.end(), var,
                               [](const auto& t, VarId v) { return t.first < v; });
    if (it != terms.end() && it->first == var) {
        it->second += coeff;
        if (it->second == 0) terms.erase(it);
    } else {
        terms.insert(it, {var, coeff});
    }
}

double AffineExpr::eval(std::span<const double> x) const {
    double acc = to_double(constant);
    for (const auto& [var, coeff] : terms) acc += to_double(coeff) * x[var];
    return acc;
}

Rat AffineExpr::eval_exact(std::span<const Rat> x) const {
    Rat acc = constant;
    for (const auto& [var, coeff] : terms) acc += coeff * x[var];
    return acc;
}

AffineExpr AffineExpr::variable(VarId var) {
    AffineExpr e;
    e.add_term(var, Rat(1));
    return e;
}

AffineExpr AffineExpr::constant_expr(const Rat& c) {
    AffineExpr e;
    e.constant = c;
    return e;
}

VarId QuadraticProgram::add_aux(std::string name) {
    var_names.push_back(std::move(name));
    fixed.push_back(std::nullopt);
    return num_vars() - 1;
}

namespace {

/// V(s,a) as an expression over the state variables.
AffineExpr action_expr(const Game& game, StateId s, int a) {
    AffineExpr e;
    for (const auto& entry : game.action(s, a).dist) e.add_term(entry.succ, entry.prob);
    return e;
}

QuadraticProgram fresh_program(const Game& game) {
    QuadraticProgram qp;
    qp.num_state_vars = game.num_states();
    for (StateId s = 0; s < game.num_states(); ++s) {
        qp.var_names.push_back("v" + std::to_string(s));
        if (game.is_target(s))
            qp.fixed.push_back(Rat(1));
        else if (game.is_sink(s))
            qp.fixed.push_back(Rat(0));
        else
            qp.fixed.push_back(std::nullopt);
    }
    return qp;
}

void add_player_constraints(QuadraticProgram& qp, const Game& game, StateId s) {
    const bool maximize = game.state(s).owner == Owner::maximizer;
    const std::string tag = "s" + std::to_string(s);
    if (game.num_actions(s) == 1) {
        qp.linear.push_back({AffineExpr::variable(s), Rel::eq, action_expr(game, s, 0),
                             "eq_" + tag});
        return;
    }
    for (int a = 0; a < game.num_actions(s); ++a)
        qp.linear.push_back({AffineExpr::variable(s), maximize ? Rel::ge : Rel::le,
                             action_expr(game, s, a),
                             (maximize ? "ge_" : "le_") + tag + "_a" + std::to_string(a)});
    AffineExpr da = AffineExpr::variable(s), db = AffineExpr::variable(s);
    const AffineExpr ea = action_expr(game, s, 0), eb = action_expr(game, s, 1);
    da.constant -= ea.constant;
    for (const auto& [v, c] : ea.terms) da.add_term(v, -c);
    db.constant -= eb.constant;
    for (const auto& [v, c] : eb.terms) db.add_term(v, -c);
    qp.objective.emplace_back(std::move(da), std::move(db));
}

}  // namespace

QuadraticProgram build_condon_qp(const Game& game) {
    if (!is_2act(game)) throw ValidationError("normal form violated: 2Act");
    if (!is_half_probs(game)) throw ValidationError("normal form violated: 1/2Probs");
    if (!is_no1act(game)) throw ValidationError("normal form violated: No1Act");
    if (!is_stopping(game)) throw ValidationError("normal form violated: stopping game");

    QuadraticProgram qp = fresh_program(game);
    for (StateId s = 0; s < game.num_states(); ++s) {
        if (game.is_absorbing(s)) continue;
        add_player_constraints(qp, game, s);
    }
    return qp;
}

std::vector<LocalStrategyPair> enumerate_local_strategy_pairs(const Game& game,
                                                              const Mec& mec) {
    const size_t k = mec.states.size();
    auto enumerate_owner = [&](Owner owner) {
        std::vector<std::vector<int>> result;
        std::vector<int> current(k, -1);
        std::vector<size_t> owned;
        for (size_t i = 0; i < k; ++i)
            if (game.state(mec.states[i]).owner == owner) {
                current[i] = 0;
                owned.push_back(i);
            }
        while (true) {
            result.push_back(current);
            size_t pos = 0;
            // Odometer with the most significant digit at the smallest state.
            while (pos < owned.size()) {
                size_t i = owned[owned.size() - 1 - pos];
                if (++current[i] < game.num_actions(mec.states[i])) break;
                current[i] = 0;
                ++pos;
            }
            if (pos == owned.size()) break;
        }
        return result;
    };

    std::vector<LocalStrategyPair> pairs;
    for (const auto& sigma : enumerate_owner(Owner::maximizer))
        for (const auto& tau : enumerate_owner(Owner::minimizer))
            pairs.push_back({sigma, tau});
    return pairs;
}

MecExitProbabilities mec_reach_probabilities(const Game& game, const Mec& mec,
                                             const LocalStrategyPair& pair) {
    const size_t k = mec.states.size();
    if (pair.max_choice.size() != k || pair.min_choice.size() != k)
        throw ValidationError("local strategy pair does not match the MEC");

    MecExitProbabilities result;
    result.exits = mec.exit_states;
    const size_t ne = result.exits.size();

    // Chain over member states followed by absorbing exit states.
    std::vector<SparseRow> rows(k + ne);
    std::vector<int> exit_index(game.num_states(), -1);
    for (size_t e = 0; e < ne; ++e) exit_index[result.exits[e]] = static_cast<int>(e);

    for (size_t i = 0; i < k; ++i) {
        const StateId s = mec.states[i];
        const bool maximize = game.state(s).owner == Owner::maximizer;
        const int choice = maximize ? pair.max_choice[i] : pair.min_choice[i];
        if (choice < 0 || choice >= game.num_actions(s))
            throw ValidationError("local strategy pair picks an unavailable action");
        for (const auto& entry : game.action(s, choice).dist) {
            int member = mec.index_of(entry.succ);
            int col = member >= 0 ? member
                                  : static_cast<int>(k) + exit_index[entry.succ];
            rows[i].emplace_back(col, entry.prob);
        }
    }

    result.prob.assign(k, std::vector<Rat>(ne, Rat(0)));
    for (size_t e = 0; e < ne; ++e) {
        std::vector<bool> target(k + ne, false);
        target[k + e] = true;
        std::vector<Rat> reach = reach_probabilities(rows, target);
        for (size_t i = 0; i < k; ++i) result.prob[i][e] = reach[i];
    }
    return result;
}

QuadraticProgram build_improved_qp(const Game& game, const std::vector<Mec>& mecs,
                                   const QpBuildConfig& config) {
    if (!is_2act(game)) throw ValidationError("improved program requires 2Act");

    QuadraticProgram qp = fresh_program(game);

    std::vector<bool> in_mec(game.num_states(), false);
    std::vector<const Mec*> interesting;
    for (const Mec& mec : mecs) {
        if (mec.states.size() == 1 && game.is_absorbing(mec.states.front()))
            continue;  // targets and sinks are already fixed
        interesting.push_back(&mec);
        for (StateId s : mec.states) in_mec[s] = true;
    }

    for (StateId s = 0; s < game.num_states(); ++s) {
        if (game.is_absorbing(s) || in_mec[s]) continue;
        add_player_constraints(qp, game, s);
    }

    for (size_t mi = 0; mi < interesting.size(); ++mi) {
        const Mec& mec = *interesting[mi];
        const std::string tag = "m" + std::to_string(mi);
        bool has_max = false, has_min = false;
        for (StateId s : mec.states)
            (game.state(s).owner == Owner::maximizer ? has_max : has_min) = true;

        if (!has_max) {
            // The Minimizer can refuse to leave, so every member is worth 0.
            for (StateId s : mec.states)
                qp.linear.push_back({AffineExpr::variable(s), Rel::eq,
                                     AffineExpr::constant_expr(Rat(0)),
                                     tag + "_zero_s" + std::to_string(s)});
            continue;
        }
        if (mec.exiting_pairs.empty()) {
            // No exit at all: the targets are unreachable from inside.
            for (StateId s : mec.states)
                qp.linear.push_back({AffineExpr::variable(s), Rel::eq,
                                     AffineExpr::constant_expr(Rat(0)),
                                     tag + "_noexit_s" + std::to_string(s)});
            continue;
        }

        if (!has_min) {
            // Every member can steer to the best exit.
            std::vector<AffineExpr> exits;
            for (const auto& [s, a] : mec.exiting_pairs) exits.push_back(action_expr(game, s, a));
            for (StateId s : mec.states)
                qp.selects.push_back(SelectConstraint{s, SelectKind::max, exits,
                                                      tag + "_bestexit_s" + std::to_string(s)});
            continue;
        }

        // Mixed MEC: one absorption expression per local strategy pair,
        // folded by a min over Minimizer choices and a max over Maximizer
        // choices.
        std::uint64_t count = 1;
        for (StateId s : mec.states) {
            const std::uint64_t k = game.num_actions(s);
            if (count > config.mec_pair_cap / k)
                throw SgError("mixed MEC strategy-pair family exceeds cap of " +
                              std::to_string(config.mec_pair_cap));
            count *= k;
        }

        std::vector<LocalStrategyPair> pairs = enumerate_local_strategy_pairs(game, mec);
        // Group pairs by their Maximizer component (enumeration is
        // sigma-major with tau nested, so the grouping is contiguous).
        std::vector<std::vector<size_t>> by_sigma;
        for (size_t p = 0; p < pairs.size(); ++p) {
            if (p == 0 || pairs[p].max_choice != pairs[p - 1].max_choice) by_sigma.emplace_back();
            by_sigma.back().push_back(p);
        }

        std::vector<MecExitProbabilities> absorption(pairs.size());
        for (size_t p = 0; p < pairs.size(); ++p)
            absorption[p] = mec_reach_probabilities(game, mec, pairs[p]);

        // y[sigma][member] = min over tau of sum_e p_s(e) * V(e)
        std::vector<std::vector<VarId>> y(by_sigma.size());
        for (size_t si = 0; si < by_sigma.size(); ++si) {
            y[si].resize(mec.states.size());
            for (size_t i = 0; i < mec.states.size(); ++i) {
                VarId var = qp.add_aux("y" + std::to_string(mi) + "_p" + std::to_string(si) +
                                       "_s" + std::to_string(mec.states[i]));
                y[si][i] = var;
                std::vector<AffineExpr> exprs;
                for (size_t p : by_sigma[si]) {
                    AffineExpr e;
                    for (size_t ei = 0; ei < absorption[p].exits.size(); ++ei)
                        e.add_term(absorption[p].exits[ei], absorption[p].prob[i][ei]);
                    exprs.push_back(std::move(e));
                }
                qp.selects.push_back(SelectConstraint{var, SelectKind::min, std::move(exprs),
                                                      tag + "_min_p" + std::to_string(si) +
                                                          "_s" + std::to_string(mec.states[i])});
            }
        }
        for (size_t i = 0; i < mec.states.size(); ++i) {
            std::vector<AffineExpr> exprs;
            for (size_t si = 0; si < by_sigma.size(); ++si)
                exprs.push_back(AffineExpr::variable(y[si][i]));
            qp.selects.push_back(SelectConstraint{mec.states[i], SelectKind::max,
                                                  std::move(exprs),
                                                  tag + "_max_s" +
                                                      std::to_string(mec.states[i])});
        }
    }
    return qp;
}

QpSolutionReport verify_solution(const QuadraticProgram& qp,
                                 std::span<const double> state_values, double tol) {
    QpSolutionReport report;
    std::vector<double> x(qp.num_vars(), 0.0);
    for (int v = 0; v < qp.num_state_vars && v < static_cast<int>(state_values.size()); ++v)
        x[v] = state_values[v];

    // Auxiliary variables are defined by their selects; the emission order
    // guarantees definitions only reference earlier values.
    for (const SelectConstraint& sel : qp.selects) {
        if (sel.var < qp.num_state_vars) continue;
        double best = sel.exprs.empty() ? 0.0 : sel.exprs[0].eval(x);
        for (size_t i = 1; i < sel.exprs.size(); ++i) {
            double v = sel.exprs[i].eval(x);
            best = sel.kind == SelectKind::max ? std::max(best, v) : std::min(best, v);
        }
        x[sel.var] = best;
    }

    auto note = [&](const std::string& name, double residual) {
        report.residuals.emplace_back(name, residual);
        report.max_violation = std::max(report.max_violation, residual);
    };

    double box = 0.0;
    for (int v = 0; v < qp.num_vars(); ++v)
        box = std::max({box, x[v] - 1.0, -x[v]});
    note("box", box);
    for (int v = 0; v < qp.num_vars(); ++v)
        if (qp.fixed[v]) note("fix_" + qp.var_names[v], std::abs(x[v] - to_double(*qp.fixed[v])));

    for (const LinearConstraint& lc : qp.linear) {
        const double d = lc.lhs.eval(x) - lc.rhs.eval(x);
        double residual = lc.rel == Rel::eq ? std::abs(d) : lc.rel == Rel::le ? std::max(0.0, d)
                                                                              : std::max(0.0, -d);
        note(lc.name, residual);
    }
    for (const SelectConstraint& sel : qp.selects) {
        double best = sel.exprs.empty() ? 0.0 : sel.exprs[0].eval(x);
        for (size_t i = 1; i < sel.exprs.size(); ++i) {
            double v = sel.exprs[i].eval(x);
            best = sel.kind == SelectKind::max ? std::max(best, v) : std::min(best, v);
        }
        note(sel.name, std::abs(x[sel.var] - best));
    }

    for (const auto& [a, b] : qp.objective) report.objective += a.eval(x) * b.eval(x);
    report.feasible = report.max_violation <= tol;
    return report;
}

// ---------------------------------------------------------------------------
// LP export

namespace {

std::string lp_number(const Rat& q) { return to_roundtrip_decimal(to_double(q)); }

/// Appends "+ c name" / "- c name" style terms.
void append_term(std::ostringstream& out, bool& first, const Rat& coeff,
                 const std::string& name) {
    if (coeff == 0) return;
    Rat abs = coeff < 0 ? Rat(-coeff) : coeff;
    if (first) {
        if (coeff < 0) out << "- ";
        first = false;
    } else {
        out << (coeff < 0 ? " - " : " + ");
    }
    out << lp_number(abs);
    if (!name.empty()) out << " " << name;
}

struct LinearForm {
    std::map<VarId, Rat> coeffs;
    Rat constant = Rat(0);

    void add(const AffineExpr& e, const Rat& scale) {
        constant += e.constant * scale;
        for (const auto& [v, c] : e.terms) {
            coeffs[v] += c * scale;
            if (coeffs[v] == 0) coeffs.erase(v);
        }
    }
};

void render_constraint(std::ostringstream& out, const std::string& name, const LinearForm& form,
                       const char* rel, const std::vector<std::string>& names) {
    out << " " << name << ": ";
    bool first = true;
    for (const auto& [v, c] : form.coeffs) append_term(out, first, c, names[v]);
    if (first) out << "0 " << names[0];
    out << " " << rel << " " << lp_number(Rat(-form.constant)) << "\n";
}

}  // namespace

std::string export_lp(const QuadraticProgram& qp) {
    std::ostringstream out;
    const auto& names = qp.var_names;

    // Objective: expand the bilinear pairs into constant + linear + quadratic.
    Rat obj_const(0);
    std::map<VarId, Rat> obj_lin;
    std::map<std::pair<VarId, VarId>, Rat> obj_quad;
    for (const auto& [a, b] : qp.objective) {
        obj_const += a.constant * b.constant;
        for (const auto& [v, c] : a.terms) obj_lin[v] += c * b.constant;
        for (const auto& [v, c] : b.terms) obj_lin[v] += c * a.constant;
        for (const auto& [va, ca] : a.terms)
            for (const auto& [vb, cb] : b.terms)
                obj_quad[{std::min(va, vb), std::max(va, vb)}] += ca * cb;
    }

    out << "Minimize\n obj: ";
    bool first = true;
    if (obj_const != 0) {
        out << lp_number(obj_const);
        first = false;
    }
    for (const auto& [v, c] : obj_lin) append_term(out, first, c, names[v]);
    bool any_quad = false;
    for (const auto& [vars, c] : obj_quad)
        if (c != 0) any_quad = true;
    if (any_quad) {
        out << (first ? "[ " : " + [ ");
        first = false;
        bool qfirst = true;
        for (const auto& [vars, c] : obj_quad) {
            if (c == 0) continue;
            // Bracket contents are halved by convention, so double here.
            if (vars.first == vars.second)
                append_term(out, qfirst, Rat(2) * c, names[vars.first] + " ^ 2");
            else
                append_term(out, qfirst, Rat(2) * c, names[vars.first] + " * " + names[vars.second]);
        }
        out << " ] / 2";
    }
    if (first) out << "0 " << names[0];
    out << "\n";

    out << "Subject To\n";
    for (const LinearConstraint& lc : qp.linear) {
        LinearForm form;
        form.add(lc.lhs, Rat(1));
        form.add(lc.rhs, Rat(-1));
        const char* rel = lc.rel == Rel::eq ? "=" : lc.rel == Rel::le ? "<=" : ">=";
        render_constraint(out, lc.name, form, rel, names);
    }

    // Select constraints lowered with binaries; M = 1 is enough on [0,1].
    std::vector<std::string> binaries;
    std::vector<std::string> extended_names = names;
    for (size_t si = 0; si < qp.selects.size(); ++si) {
        const SelectConstraint& sel = qp.selects[si];
        const std::string base = "sel" + std::to_string(si);
        std::vector<VarId> flags;
        for (size_t i = 0; i < sel.exprs.size(); ++i) {
            std::string flag = "b" + std::to_string(si) + "_" + std::to_string(i);
            flags.push_back(static_cast<VarId>(extended_names.size()));
            extended_names.push_back(flag);
            binaries.push_back(flag);
        }
        for (size_t i = 0; i < sel.exprs.size(); ++i) {
            LinearForm bound;  // var - expr_i, >= 0 for max / <= 0 for min
            bound.add(AffineExpr::variable(sel.var), Rat(1));
            bound.add(sel.exprs[i], Rat(-1));
            render_constraint(out, base + "_b" + std::to_string(i), bound,
                              sel.kind == SelectKind::max ? ">=" : "<=", extended_names);

            LinearForm tight;  // attained branch: var = expr_i when flag is 1
            tight.add(AffineExpr::variable(sel.var), Rat(1));
            tight.add(sel.exprs[i], Rat(-1));
            if (sel.kind == SelectKind::max) {
                tight.coeffs[flags[i]] += 1;  // var - expr + b <= 1
                tight.constant += -1;
                render_constraint(out, base + "_t" + std::to_string(i), tight, "<=",
                                  extended_names);
            } else {
                tight.coeffs[flags[i]] += -1;  // var - expr - b >= -1
                tight.constant += 1;
                render_constraint(out, base + "_t" + std::to_string(i), tight, ">=",
                                  extended_names);
            }
        }
        LinearForm pick;
        for (VarId f : flags) pick.coeffs[f] = 1;
        pick.constant = -1;
        render_constraint(out, base + "_pick", pick, "=", extended_names);
    }

    out << "Bounds\n";
    for (int v = 0; v < qp.num_vars(); ++v) {
        if (qp.fixed[v])
            out << " " << names[v] << " = " << lp_number(*qp.fixed[v]) << "\n";
        else
            out << " 0 <= " << names[v] << " <= 1\n";
    }
    if (!binaries.empty()) {
        out << "Binaries\n";
        for (const std::string& b : binaries) out << " " << b << "\n";
    }
    out << "End\n";
    return out.str();
}

}  // namespace sg

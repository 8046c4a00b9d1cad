#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sg/game.hpp"
#include "sg/graph.hpp"

namespace sg {

using VarId = int;

/// constant + sum of coefficient * variable, exact coefficients.
struct AffineExpr {
    Rat constant = Rat(0);
    std::vector<std::pair<VarId, Rat>> terms;  // sorted by variable, coefficients nonzero

    void add_term(VarId var, const Rat& coeff);
    double eval(std::span<const double> x) const;
    Rat eval_exact(std::span<const Rat> x) const;

    static AffineExpr variable(VarId var);
    static AffineExpr constant_expr(const Rat& c);
};

enum class Rel { le, eq, ge };
enum class SelectKind { max, min };

struct LinearConstraint {
    AffineExpr lhs;
    Rel rel;
    AffineExpr rhs;
    std::string name;
};

/// var = max (or min) of the expressions. Verified directly; lowered to a
/// big-M boolean encoding only on LP export.
struct SelectConstraint {
    VarId var;
    SelectKind kind;
    std::vector<AffineExpr> exprs;
    std::string name;
};

/// Quadratic program with box variables in [0,1]: one variable per state
/// (ids 0..num_states-1) plus auxiliary variables, fixed values for targets
/// and sinks, linear and select constraints, and a bilinear objective
/// (sum of expression products) to be minimized.
struct QuadraticProgram {
    int num_state_vars = 0;
    std::vector<std::string> var_names;
    std::vector<std::optional<Rat>> fixed;
    std::vector<LinearConstraint> linear;
    std::vector<SelectConstraint> selects;
    std::vector<std::pair<AffineExpr, AffineExpr>> objective;

    int num_vars() const { return static_cast<int>(var_names.size()); }
    VarId add_aux(std::string name);
};

struct QpBuildConfig {
    /// Strategy-pair budget per mixed MEC; construction fails beyond it
    /// rather than enumerating an exponential family indefinitely.
    std::uint64_t mec_pair_cap = std::uint64_t{1} << 20;
};

/// Condon's program: requires the full normal form (two actions,
/// half probabilities, stopping, no single-action states). Inequalities per
/// two-action state, targets 1, sinks 0, objective
/// sum (V(s)-V(s,a))(V(s)-V(s,b)).
QuadraticProgram build_condon_qp(const Game& game);

/// The relaxed program: requires only the two-action cap. Single-action
/// states become equalities, arbitrary rational probabilities are allowed,
/// and non-absorbing MECs get dedicated constraint families (Minimizer-only:
/// zero; Maximizer-only: best-exit max-selects; mixed: one absorption
/// expression per local strategy pair combined by min- then max-selects).
/// States inside those MECs drop their ordinary per-state constraints.
QuadraticProgram build_improved_qp(const Game& game, const std::vector<Mec>& mecs,
                                   const QpBuildConfig& config = {});

/// One choice per MEC member state, index-parallel to mec.states.
struct LocalStrategyPair {
    std::vector<int> max_choice;  // -1 on Minimizer-owned members
    std::vector<int> min_choice;  // -1 on Maximizer-owned members
};

/// All (sigma_T, tau_T) pairs of a MEC: Maximizer choices enumerated
/// lexicographically over member states ascending, Minimizer choices nested
/// inside. Length is the product of the action counts over the members.
std::vector<LocalStrategyPair> enumerate_local_strategy_pairs(const Game& game, const Mec& mec);

struct MecExitProbabilities {
    std::vector<StateId> exits;            // == mec.exit_states
    std::vector<std::vector<Rat>> prob;    // prob[member][exit], exact
};

/// Absorption probabilities p_s(e) of the chain over the MEC members induced
/// by a local strategy pair, with the exit states made absorbing: one exact
/// linear solve per exit. A row sums below 1 exactly when the pair can keep
/// the play inside the MEC forever.
MecExitProbabilities mec_reach_probabilities(const Game& game, const Mec& mec,
                                             const LocalStrategyPair& pair);

struct QpSolutionReport {
    bool feasible = false;
    double max_violation = 0.0;
    double objective = 0.0;
    std::vector<std::pair<std::string, double>> residuals;
};

/// Evaluates every constraint at the given per-state values (select
/// constraints checked directly as max/min, auxiliary variables derived from
/// their defining selects) and the objective. Feasible iff every residual is
/// at most tol.
QpSolutionReport verify_solution(const QuadraticProgram& qp,
                                 std::span<const double> state_values, double tol);

/// LP-format text. Select constraints are lowered to big-M boolean encodings
/// with M = 1 (all variables live in [0,1]); numbers are rendered as the
/// shortest decimals that round-trip through binary64. Deterministic:
/// re-export is byte-identical.
std::string export_lp(const QuadraticProgram& qp);

}  // namespace sg

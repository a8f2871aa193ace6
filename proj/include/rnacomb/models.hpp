#pragma once

#include "rnacomb/expr.hpp"
#include "rnacomb/series.hpp"
#include "rnacomb/structures.hpp"

#include <map>
#include <string>
#include <vector>

namespace rnacomb::models {

struct StructureClass {
    Family family = Family::General;
    bool dangles = false;
    ModelParams params;
};

// The pair of rational expressions describing one structure class: the
// adjoint series solves f = Q(t, s, [r], f) and the class series is
// g = R(t, s, [r], f). t marks free elements, s marks links, r marks
// dangles. tail collects the link-free structures, to be added to g.
struct GfSystem {
    StructureClass cls;
    ExprPtr Q;
    ExprPtr R;
    ExprPtr tail;
    bool has_dangle_var = false;
};

// Throws for a saturated class with tau > 0, which has no system.
GfSystem build_system(const StructureClass& cls);

// g_p / g_{p,q} as a univariate series in t, weights p, q taken from the
// class parameters. Includes the link-free tail.
TruncatedSeries weighted_series(const StructureClass& cls, int order);

// Same with p (and q for dangle classes) kept symbolic as extra variables
// 'p' and 'q' of the given degree caps.
TruncatedSeries weighted_series_symbolic(const StructureClass& cls, int order, int p_cap,
                                         int q_cap);

// [t^n] of the weighted generating function, tail included.
Rat count(const StructureClass& cls, int n);
std::vector<Rat> count_table(const StructureClass& cls, int n_max);

// Unweighted-in-p counts by number of links; index k. Dangle classes weight
// each structure by q^{#dangles}. Includes the tail at k = 0.
std::vector<Rat> count_by_links(const StructureClass& cls, int n);

// Exact mean number of links at length n under the p, q weights, computed
// from the u-marked system by implicit differentiation of the series.
Rat exact_mean_links(const StructureClass& cls, int n);
std::vector<Rat> exact_mean_links_table(const StructureClass& cls, int n_max);

// Phi(t,[u],y) and Psi(t,[u],y) for the singularity machinery: s is bound to
// p*t^2 (p*u*t^2 when mark_links), r to q, and for theta = 0 the unknown is
// shifted so that Phi(0,0) = 0.
std::pair<ExprPtr, ExprPtr> emit_phi_psi(const StructureClass& cls, bool mark_links);

enum class Grammar {
    Nussinov,        // one nonterminal, u marks pairs
    BaseStacking,    // two nonterminals, u marks pairs, v stacked pairs
    McCaskill,       // loop decomposition, unweighted recount (theta = 1)
    UnafoldDangle,   // annotated dangles, internal ones in multiloops only
    ExternalDangle,  // annotated external dangles everywhere
    SaturatedZuker   // saturated structures (theta = 1)
};

// Derivation counts for lengths 0..n_max. The grammars are unambiguous, so
// these are structure (or annotated-structure) counts.
std::vector<Int> grammar_total(Grammar g, int n_max, int theta);

// Single-length convenience.
Int grammar_count(Grammar g, int n, int theta);

// counts[n][k]: Nussinov by pairs, BaseStacking by stacked pairs,
// SaturatedZuker by pairs.
std::vector<std::vector<Int>> grammar_marked(Grammar g, int n_max, int theta);

// joint[n][pairs][stacked] from the base-stacking grammar.
std::vector<std::vector<std::vector<Int>>> stacking_joint(int n_max, int theta);

// The dangle grammars as algebraic systems for the singularity solver.
// equations[i] gives Phi_i(t, unknowns...); the eliminated single equation
// phi_core (in t and "y") has the same branch point, and psi_total maps the
// core unknown to the full structure count series.
struct GrammarSystem {
    std::vector<std::string> unknowns;
    std::vector<ExprPtr> equations;
    ExprPtr phi_core;
    ExprPtr psi_total;
    std::vector<std::vector<Int>> component_counts;  // aligned with unknowns
    std::vector<Int> total_counts;
};

GrammarSystem build_grammar_system(Grammar g, int seed_order, int theta);

}  // namespace rnacomb::models

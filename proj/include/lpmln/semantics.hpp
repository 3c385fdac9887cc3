// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#pragma once

#include "lpmln/core.hpp"
#include "lpmln/ground.hpp"
#include "lpmln/parser.hpp"
#include "lpmln/solver.hpp"

namespace lpmln {

// ---------------------------------------------------------------------------
// Penalty-based LP^MLN semantics
// ---------------------------------------------------------------------------

struct TableEntry {
    Interpretation model;
    double log_weight = 0.0;
    double probability = 0.0;
};

// Exact distribution over SM[Pi]; probability_i = exp(log_weight_i -
// log_normalizer) and the probabilities sum to 1 within 1e-12.
struct ProbabilityTable {
    std::vector<TableEntry> entries;  // lexicographic model order
    double log_normalizer = 0.0;
    std::uint64_t program_fingerprint = 0;
};

// Every I that satisfies all hard rules and is a stable model of the
// unweighted rules it satisfies.
std::vector<Interpretation> sm_set(const GroundProgram& ground, const SolveLimits& limits = {});

bool sm_member(const GroundProgram& ground, const Interpretation& interp,
               const SolveLimits& limits = {});

// Log-domain weight: -sum over soft instances false in interp of w_i.
// -infinity for interpretations outside SM[Pi]. UsageError when the program
// still carries unbound parameters.
double weight_of(const GroundProgram& ground, const Interpretation& interp,
                 const SolveLimits& limits = {});

// Reward form: sum of the weights of satisfied soft instances. Differs from
// weight_of by the constant sum of all soft instance weights; -infinity
// outside SM[Pi].
double reward_log_weight(const GroundProgram& ground, const Interpretation& interp,
                         const SolveLimits& limits = {});

// SemanticError "no probabilistic stable model" when SM[Pi] is empty.
ProbabilityTable probability_table(const GroundProgram& ground, const SolveLimits& limits = {});

// Sum of probabilities of entries satisfying the ground query. DataError for
// query atoms outside the Herbrand base.
double marginal(const ProbabilityTable& table, const Query& query);

// ---------------------------------------------------------------------------
// Minimal ground MLN evaluator (used to verify the completion reduction)
// ---------------------------------------------------------------------------

struct Formula {
    enum class Kind : std::uint8_t { AtomRef, Not, And, Or, Implies, Iff };
    Kind kind = Kind::AtomRef;
    AtomId atom = 0;
    std::vector<Formula> children;  // Not: 1; Implies/Iff: 2; And/Or: any
                                    // (empty And = true, empty Or = false)

    static Formula atom_ref(AtomId a);
    static Formula negation(Formula f);
    static Formula conjunction(std::vector<Formula> fs);
    static Formula disjunction(std::vector<Formula> fs);
    static Formula implies(Formula lhs, Formula rhs);
    static Formula iff(Formula lhs, Formula rhs);
};

bool eval(const Formula& formula, const Bitset& bits);
std::string to_text(const Formula& formula, const Universe& universe);

struct MlnFormula {
    std::optional<double> weight;  // nullopt = hard
    Formula formula;
};

struct MlnModel {
    UniversePtr universe;
    std::vector<MlnFormula> formulas;
};

// Standard ground MLN distribution restricted to interpretations satisfying
// every hard formula: P(I) proportional to exp(sum of weights of satisfied
// soft formulas). SemanticError when nothing satisfies the hard part;
// ResourceError past 24 atoms.
double mln_probability(const MlnModel& model, const Interpretation& interp);

// The full MLN distribution, for cross-checking against probability_table.
std::vector<std::pair<Interpretation, double>> mln_distribution(const MlnModel& model);

}  // namespace lpmln

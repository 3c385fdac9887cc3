// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#pragma once

#include "lpmln/core.hpp"
#include "lpmln/ground.hpp"
#include "lpmln/semantics.hpp"

namespace lpmln {

// ---------------------------------------------------------------------------
// unsat translation (the lpmln2asp-style rewrite)
// ---------------------------------------------------------------------------

// Each soft rule w_i: Head(x) :- Body(x) becomes two hard rules
//   unsat(i, "w_i", x) :- Body(x), not Head(x).
//   Head(x) :- Body(x), not unsat(i, "w_i", x).
// plus a recorded penalty attaching w_i to every true unsat(i, ., .) atom
// (the weak-constraint analogue). Hard rules pass through unchanged.
struct UnsatTranslation {
    Program program;  // all rules hard

    struct Penalty {
        int origin;     // original rule_index
        double weight;  // w_i
    };
    std::vector<Penalty> penalties;
    int original_rule_count = 0;
};

// UsageError on a parameterized input; SemanticError if the predicate
// `unsat` is already taken.
UnsatTranslation unsat_translation(const Program& program);

// Per-origin counts of true unsat atoms in a model of the translated ground
// program: exactly n_i of the original program on the projected model.
// Indexed by origin 1..original_rule_count at [origin-1].
std::vector<int> penalty_counts(const UnsatTranslation& translation,
                                const GroundProgram& translated_ground, const Bitset& model);

// ---------------------------------------------------------------------------
// Pi^neg (weight-sign normalization for MC-ASP)
// ---------------------------------------------------------------------------

// Every soft rule with w > 0, `w: H(x) :- B(x)`, is replaced by
//   0: H(x) :- B(x).
//   neg(i, x) :- B(x), not H(x).
//   -w: :- dom(x...), not neg(i, x).
// (the dom literals range non-ground constraints over all constants, keeping
// the rule safe without changing the distribution). Rules with w <= 0 and
// hard rules are unchanged; all soft weights in the output are <= 0.
struct NegTranslation {
    Program program;

    struct SoftMap {
        int original_index;         // rule_index in the input program
        bool rewritten;             // true = the w > 0 triple
        int output_soft_index;      // rule_index of `0: H :- B` or the kept rule
        int output_constraint_index = 0;  // rule_index of `-w: :- not neg(i,x)`
    };
    std::vector<SoftMap> soft_map;  // one entry per original soft rule
};

NegTranslation to_negative(const Program& program);

// Recovers original-program n_i counts from per-output-origin false counts
// of the translated program (instance totals from the same grounding).
std::vector<int> original_counts(const NegTranslation& translation,
                                 std::span<const int> output_false_counts,
                                 std::span<const int> output_instance_totals,
                                 int original_rule_count);

// ---------------------------------------------------------------------------
// Multi-example indexing, noise atoms
// ---------------------------------------------------------------------------

// Appends a trailing argument ranging over 1..m (via a fresh domain
// predicate) to every predicate. SemanticError if the index predicate name
// collides.
Program index_for_multi(const Program& program, int m);

// I = union over i of { p(t, i) | p(t) in I_i }, clamps likewise.
Observation merge_observations(std::span<const Observation> observations);

// For each observed predicate p, adds `p(t) :- noise_p(t).` (hard) and
// `-u: noise_p(t).` per ground instance p(t) of the program.
Program noise_augment(const Program& program, std::span<const std::string> observed_predicates,
                      double u);

// Documented heuristic for u: 10 + max |soft weight|.
double default_noise_level(const Program& program);

// ---------------------------------------------------------------------------
// Clark completion (tight programs -> MLN), coherence, ProbLog maps
// ---------------------------------------------------------------------------

// Ground completion: every rule as a weighted implication plus hard
// equivalences making each atom supported. SemanticError naming a cycle when
// the positive dependency graph is not acyclic.
MlnModel completion(const Program& program);

struct CoherenceReport {
    bool is_simple = false;
    std::optional<int> k;                   // present iff coherence verified
    std::vector<WeightedRule> soft_facts;   // merged PF patterns with weights
    std::vector<WeightedRule> hard_rules;
    std::vector<Atom> ground_pf;            // ground PF instances
    std::string failure;                    // empty when coherent
};

// Verifies simplicity syntactically and k-coherence by enumerating, for
// every truth assignment to the ground PF atoms, the stable models
// consistent with it. Duplicate soft atoms are merged by summing weights
// first. ResourceError past 16 ground PF atoms.
CoherenceReport coherence_check(const Program& program, std::optional<int> expected_k = {});

// w_i = ln(p_i / (1 - p_i)); DataError outside (0,1).
std::vector<double> weights_from_probabilities(std::span<const double> probabilities);
// p_i = e^{w_i} / (1 + e^{w_i}).
std::vector<double> probabilities_from_weights(std::span<const double> weights);

}  // namespace lpmln

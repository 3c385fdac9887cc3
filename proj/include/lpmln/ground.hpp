// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#pragma once

#include <span>

#include "lpmln/core.hpp"

namespace lpmln {

// A ground rule over atom ids, tagged with the index of the source rule it
// was instantiated from so n_i(I) counts stay attributable.
struct GroundRule {
    Weight weight;
    std::vector<AtomId> head;
    std::vector<AtomId> body_pos;
    std::vector<AtomId> body_neg;   // `not a`
    std::vector<AtomId> body_dneg;  // `not not a`
    int origin_index = 0;
};

struct GroundProgram {
    UniversePtr universe;  // Herbrand base, first-appearance order
    std::vector<GroundRule> rules;
    int origin_count = 0;

    bool has_disjunctive_head() const;
};

struct GroundOptions {
    // Drop instances whose positive body contains an atom with no potential
    // derivation. Pruning cannot change SM[Pi] or any n_i(I): such instances
    // are satisfied in every interpretation over the resulting base.
    bool prune = true;
};

// Instantiates every rule over the program's constants (sorted
// lexicographically) and collapses duplicate instances per origin.
// SemanticError when a rule has variables but the universe of constants is
// empty.
GroundProgram ground(const Program& program, const GroundOptions& options = {});

// The rule formula (body -> head) is false in interp iff the whole body is
// true and no head atom is.
bool rule_false_in(const GroundRule& rule, const Bitset& bits);

// n_i(I): number of ground instances of source rule i that are false in
// interp. UsageError on an unknown origin index.
int false_count(const GroundProgram& ground, int origin_index, const Interpretation& interp);

// All n_i at once, indexed by origin 1..origin_count at [origin-1].
std::vector<int> false_counts(const GroundProgram& ground, const Interpretation& interp);

// Renders the ground program back to `.lpmln` text with a `% origin i`
// comment per rule.
std::string to_text(const GroundProgram& ground);

}  // namespace lpmln

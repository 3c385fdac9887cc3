// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#pragma once

#include <string_view>
#include <vector>

#include "lpmln/core.hpp"

namespace lpmln {

// Ground query formula for marginals: atoms under classical negation,
// conjunction (","), and disjunction (";").
struct Query {
    enum class Kind : std::uint8_t { AtomRef, Not, And, Or };
    Kind kind = Kind::AtomRef;
    Atom atom;                    // AtomRef only
    std::vector<Query> children;  // Not: 1, And/Or: >= 2

    static Query atom_ref(Atom a);
    static Query negation(Query q);
    static Query conjunction(std::vector<Query> qs);
    static Query disjunction(std::vector<Query> qs);
};

// Parses the `.lpmln` text format:
//   [weight] head :- body.     [weight] fact.     :- body.
// weight: real literal (absent = hard), or @w(i) for parameter i;
// head: `a1 ; ... ; an` or `{a}` (choice, desugared to a :- ..., not not a);
// body: comma-separated literals with `not` / `not not`, plus `X != Y` guards;
// `%` comments to end of line; strings in double quotes are constants.
Program parse_program(std::string_view text);

// Parses the `.evid` format: lines `:- not a.` (clamp a true) and `:- a.`
// (clamp a false); a `#example(id).` directive opens a new observation block.
std::vector<Observation> parse_evidence(std::string_view text);

// Parses a ground query: disjunction of conjunctions of possibly negated
// atoms, e.g. `a ; not b, c`. Parentheses group.
Query parse_query(std::string_view text);

}  // namespace lpmln

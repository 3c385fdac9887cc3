// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpmln {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct SourceSpan {
    int line = 0;  // 1-based; 0 = unknown
    int column = 0;
    std::size_t begin = 0;  // byte offsets into the input text
    std::size_t end = 0;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text; carries the offending location.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, SourceSpan span);
    SourceSpan span;
};

// Violated operation contract (caller bug): parameterized program where a
// bound one is required, wrong mode, and so on.
class UsageError : public Error {
public:
    using Error::Error;
};

// Well-formed but semantically unusable input: empty SM, non-tight program
// handed to completion, name collisions introduced by a rewrite.
class SemanticError : public Error {
public:
    using Error::Error;
};

// Bad data: contradictory or zero-probability evidence, atoms outside the
// Herbrand base, degenerate counts.
class DataError : public Error {
public:
    using Error::Error;
};

// A documented cap was exceeded (disjunctive minimality, coherence PF size).
class ResourceError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Terms, atoms, literals
// ---------------------------------------------------------------------------

enum class TermKind : std::uint8_t { Constant, Variable };

// Constant names start with a lowercase letter, or are quoted strings or
// integers; variable names start with an uppercase letter.
struct Term {
    TermKind kind = TermKind::Constant;
    std::string name;

    static Term constant(std::string name) { return {TermKind::Constant, std::move(name)}; }
    static Term variable(std::string name) { return {TermKind::Variable, std::move(name)}; }
    bool is_variable() const { return kind == TermKind::Variable; }

    auto operator<=>(const Term&) const = default;
};

struct Atom {
    std::string predicate;
    std::vector<Term> args;

    std::size_t arity() const { return args.size(); }
    bool ground() const;

    auto operator<=>(const Atom&) const = default;
};

enum class Sign : std::uint8_t { Positive, Negated, DoublyNegated };

struct Literal {
    Atom atom;
    Sign sign = Sign::Positive;

    auto operator<=>(const Literal&) const = default;
};

// Grounding-time guard `lhs != rhs`; the only built-in comparison.
struct Inequality {
    Term lhs;
    Term rhs;

    auto operator<=>(const Inequality&) const = default;
};

// ---------------------------------------------------------------------------
// Weights, rules, programs
// ---------------------------------------------------------------------------

enum class WeightKind : std::uint8_t { Hard, Soft, Parameter };

// Hard (alpha) is a distinct tag, never a large finite real.
struct Weight {
    WeightKind kind = WeightKind::Hard;
    double value = 0.0;  // soft only
    int index = 0;       // parameter only, 1-based

    static Weight hard() { return {}; }
    static Weight soft(double v) { return {WeightKind::Soft, v, 0}; }
    static Weight parameter(int i) { return {WeightKind::Parameter, 0.0, i}; }

    bool is_hard() const { return kind == WeightKind::Hard; }
    bool is_soft() const { return kind == WeightKind::Soft; }
    bool is_parameter() const { return kind == WeightKind::Parameter; }

    auto operator<=>(const Weight&) const = default;
};

// head is a disjunction; empty head = constraint. Choice syntax {A} <- Body
// is desugared at parse time to A <- Body, not not A; the desugared rule is
// the only internal representation.
struct WeightedRule {
    Weight weight;
    std::vector<Atom> head;
    std::vector<Literal> body;
    std::vector<Inequality> guards;
    int rule_index = 0;  // 1-based position in the source program

    bool is_constraint() const { return head.empty(); }
    bool is_fact() const { return !head.empty() && body.empty() && guards.empty(); }

    auto operator<=>(const WeightedRule&) const = default;
};

struct Program {
    std::vector<WeightedRule> rules;

    bool parameterized() const;
    // Number of distinct parameters; validates density 1..m (UsageError).
    int parameter_count() const;

    auto operator<=>(const Program&) const = default;
};

// Replaces @w(i) with weights[i-1]; UsageError on size mismatch.
Program bind_parameters(const Program& program, std::span<const double> weights);

// ---------------------------------------------------------------------------
// Herbrand base, interpretations
// ---------------------------------------------------------------------------

using AtomId = std::uint32_t;

// Ordered ground atom table. Order is first appearance in the ground program,
// which fixes the deterministic atom ordering used everywhere downstream.
class Universe {
public:
    AtomId add(const Atom& atom);  // returns existing id if already present
    std::optional<AtomId> find(const Atom& atom) const;
    const Atom& atom(AtomId id) const { return atoms_[id]; }
    std::size_t size() const { return atoms_.size(); }
    std::span<const Atom> atoms() const { return atoms_; }

private:
    std::vector<Atom> atoms_;
    std::map<Atom, AtomId> index_;
};

using UniversePtr = std::shared_ptr<const Universe>;

// Dynamic bitset sized to a universe. Comparison is lexicographic in atom
// order with false < true, so sorted model lists match the documented order.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t nbits);

    void set(std::size_t i);
    void reset(std::size_t i);
    void assign(std::size_t i, bool v) { v ? set(i) : reset(i); }
    bool test(std::size_t i) const;
    std::size_t size() const { return nbits_; }
    std::size_t count() const;

    bool is_subset_of(const Bitset& other) const;
    bool intersects(const Bitset& other) const;

    bool operator==(const Bitset& other) const = default;
    bool lex_less(const Bitset& other) const;

    std::span<const std::uint64_t> words() const { return words_; }

private:
    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

// A truth assignment over a Herbrand base. Immutable value after
// construction; cheap to copy (shared universe, owned bits).
class Interpretation {
public:
    Interpretation() = default;
    explicit Interpretation(UniversePtr universe);
    Interpretation(UniversePtr universe, Bitset bits);

    bool contains(AtomId id) const { return bits_.test(id); }
    bool contains(const Atom& atom) const;
    void insert(AtomId id) { bits_.set(id); }
    void insert(const Atom& atom);  // DataError if outside the universe

    const Bitset& bits() const { return bits_; }
    const UniversePtr& universe() const { return universe_; }
    std::size_t true_count() const { return bits_.count(); }
    std::vector<Atom> true_atoms() const;  // in universe order

    bool operator==(const Interpretation& other) const { return bits_ == other.bits_; }
    bool lex_less(const Interpretation& other) const { return bits_.lex_less(other.bits_); }

private:
    UniversePtr universe_;
    Bitset bits_;
};

// ---------------------------------------------------------------------------
// Observations (training data as clamp sets)
// ---------------------------------------------------------------------------

// Constraint-form evidence: `:- not a.` clamps a true, `:- a.` clamps a
// false. Construction rejects overlapping clamp sets and non-ground atoms.
class Observation {
public:
    Observation() = default;
    Observation(std::vector<Atom> clamped_true, std::vector<Atom> clamped_false,
                std::optional<std::string> example_id = std::nullopt);

    const std::vector<Atom>& clamped_true() const { return true_; }
    const std::vector<Atom>& clamped_false() const { return false_; }
    const std::optional<std::string>& example_id() const { return id_; }

    bool operator==(const Observation&) const = default;

private:
    std::vector<Atom> true_;   // sorted, unique
    std::vector<Atom> false_;  // sorted, unique
    std::optional<std::string> id_;
};

// True iff clamped_true ∪ clamped_false covers the base. DataError if the
// observation mentions an atom outside the base.
bool is_complete(const Observation& obs, const Universe& base);

// ---------------------------------------------------------------------------
// Printing (canonical text; parse ∘ print = identity on the AST)
// ---------------------------------------------------------------------------

std::string to_string(const Term& term);
std::string to_string(const Atom& atom);
std::string to_string(const Literal& literal);
std::string to_string(const Weight& weight);
std::string to_string(const WeightedRule& rule);
std::string to_string(const Program& program);

// Shortest decimal text that round-trips to exactly this double.
std::string format_double(double value);

}  // namespace lpmln

// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include "lpmln/core.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace lpmln {

ParseError::ParseError(const std::string& msg, SourceSpan s)
    : Error(msg + " (line " + std::to_string(s.line) + ", column " + std::to_string(s.column) + ")"),
      span(s) {}

bool Atom::ground() const {
    return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

bool Program::parameterized() const {
    return std::any_of(rules.begin(), rules.end(),
                       [](const WeightedRule& r) { return r.weight.is_parameter(); });
}

int Program::parameter_count() const {
    std::vector<int> seen;
    for (const auto& r : rules) {
        if (r.weight.is_parameter()) {
            seen.push_back(r.weight.index);
        }
    }
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (seen[i] != static_cast<int>(i) + 1) {
            throw UsageError("parameter indices are not dense 1.." + std::to_string(seen.size()));
        }
    }
    return static_cast<int>(seen.size());
}

Program bind_parameters(const Program& program, std::span<const double> weights) {
    int m = program.parameter_count();
    if (static_cast<int>(weights.size()) != m) {
        throw UsageError("expected " + std::to_string(m) + " weights, got " +
                         std::to_string(weights.size()));
    }
    Program out = program;
    for (auto& r : out.rules) {
        if (r.weight.is_parameter()) {
            r.weight = Weight::soft(weights[r.weight.index - 1]);
        }
    }
    return out;
}

// --- Universe ---

AtomId Universe::add(const Atom& atom) {
    auto it = index_.find(atom);
    if (it != index_.end()) {
        return it->second;
    }
    AtomId id = static_cast<AtomId>(atoms_.size());
    atoms_.push_back(atom);
    index_.emplace(atom, id);
    return id;
}

std::optional<AtomId> Universe::find(const Atom& atom) const {
    auto it = index_.find(atom);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

// --- Bitset ---

Bitset::Bitset(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

void Bitset::set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
void Bitset::reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
bool Bitset::test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

std::size_t Bitset::count() const {
    std::size_t n = 0;
    for (auto w : words_) {
        n += static_cast<std::size_t>(__builtin_popcountll(w));
    }
    return n;
}

bool Bitset::is_subset_of(const Bitset& other) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (words_[i] & ~other.words_[i]) {
            return false;
        }
    }
    return true;
}

bool Bitset::intersects(const Bitset& other) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (words_[i] & other.words_[i]) {
            return true;
        }
    }
    return false;
}

bool Bitset::lex_less(const Bitset& other) const {
    // atom 0 is the most significant position; false < true
    for (std::size_t i = 0; i < nbits_; ++i) {
        bool a = test(i), b = other.test(i);
        if (a != b) {
            return !a;
        }
    }
    return false;
}

// --- Interpretation ---

Interpretation::Interpretation(UniversePtr universe)
    : universe_(std::move(universe)), bits_(universe_ ? universe_->size() : 0) {}

Interpretation::Interpretation(UniversePtr universe, Bitset bits)
    : universe_(std::move(universe)), bits_(std::move(bits)) {}

bool Interpretation::contains(const Atom& atom) const {
    auto id = universe_->find(atom);
    return id && bits_.test(*id);
}

void Interpretation::insert(const Atom& atom) {
    auto id = universe_->find(atom);
    if (!id) {
        throw DataError("atom " + to_string(atom) + " is outside the Herbrand base");
    }
    bits_.set(*id);
}

std::vector<Atom> Interpretation::true_atoms() const {
    std::vector<Atom> out;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_.test(i)) {
            out.push_back(universe_->atom(static_cast<AtomId>(i)));
        }
    }
    return out;
}

// --- Observation ---

namespace {
std::vector<Atom> sorted_unique_ground(std::vector<Atom> atoms, const char* which) {
    for (const auto& a : atoms) {
        if (!a.ground()) {
            throw DataError(std::string("non-ground atom ") + to_string(a) + " in " + which +
                            " clamp set");
        }
    }
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    return atoms;
}
}  // namespace

Observation::Observation(std::vector<Atom> clamped_true, std::vector<Atom> clamped_false,
                         std::optional<std::string> example_id)
    : true_(sorted_unique_ground(std::move(clamped_true), "true")),
      false_(sorted_unique_ground(std::move(clamped_false), "false")),
      id_(std::move(example_id)) {
    std::vector<Atom> both;
    std::set_intersection(true_.begin(), true_.end(), false_.begin(), false_.end(),
                          std::back_inserter(both));
    if (!both.empty()) {
        throw DataError("atom " + to_string(both.front()) + " is clamped both true and false");
    }
}

bool is_complete(const Observation& obs, const Universe& base) {
    std::size_t covered = 0;
    for (const auto& a : obs.clamped_true()) {
        if (!base.find(a)) {
            throw DataError("atom " + to_string(a) + " is outside the Herbrand base");
        }
        ++covered;
    }
    for (const auto& a : obs.clamped_false()) {
        if (!base.find(a)) {
            throw DataError("atom " + to_string(a) + " is outside the Herbrand base");
        }
        ++covered;
    }
    return covered == base.size();
}

// --- printing ---

std::string format_double(double value) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
        if (std::strtod(buf, nullptr) == value) {
            break;
        }
    }
    return buf;
}

std::string to_string(const Term& term) { return term.name; }

std::string to_string(const Atom& atom) {
    std::string out = atom.predicate;
    if (!atom.args.empty()) {
        out += '(';
        for (std::size_t i = 0; i < atom.args.size(); ++i) {
            if (i) {
                out += ", ";
            }
            out += atom.args[i].name;
        }
        out += ')';
    }
    return out;
}

std::string to_string(const Literal& literal) {
    switch (literal.sign) {
        case Sign::Positive: return to_string(literal.atom);
        case Sign::Negated: return "not " + to_string(literal.atom);
        case Sign::DoublyNegated: return "not not " + to_string(literal.atom);
    }
    return {};
}

std::string to_string(const Weight& weight) {
    switch (weight.kind) {
        case WeightKind::Hard: return {};
        case WeightKind::Soft: return format_double(weight.value);
        case WeightKind::Parameter: return "@w(" + std::to_string(weight.index) + ")";
    }
    return {};
}

std::string to_string(const WeightedRule& rule) {
    std::string out;
    if (!rule.weight.is_hard()) {
        out += to_string(rule.weight);
        out += ' ';
    }
    for (std::size_t i = 0; i < rule.head.size(); ++i) {
        if (i) {
            out += " ; ";
        }
        out += to_string(rule.head[i]);
    }
    if (!rule.body.empty() || !rule.guards.empty()) {
        out += rule.head.empty() ? ":- " : " :- ";
        bool first = true;
        for (const auto& lit : rule.body) {
            if (!first) {
                out += ", ";
            }
            out += to_string(lit);
            first = false;
        }
        for (const auto& g : rule.guards) {
            if (!first) {
                out += ", ";
            }
            out += g.lhs.name + " != " + g.rhs.name;
            first = false;
        }
    } else if (rule.head.empty()) {
        out += ":- ";  // degenerate empty rule; not produced by the parser
    }
    out += '.';
    return out;
}

std::string to_string(const Program& program) {
    std::string out;
    for (const auto& r : program.rules) {
        out += to_string(r);
        out += '\n';
    }
    return out;
}

}  // namespace lpmln

// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include "lpmln/ground.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace lpmln {

namespace {

using Substitution = std::map<std::string, Term>;

Atom substitute(const Atom& atom, const Substitution& sub) {
    Atom out;
    out.predicate = atom.predicate;
    out.args.reserve(atom.args.size());
    for (const auto& t : atom.args) {
        if (t.is_variable()) {
            out.args.push_back(sub.at(t.name));
        } else {
            out.args.push_back(t);
        }
    }
    return out;
}

Term substitute(const Term& t, const Substitution& sub) {
    return t.is_variable() ? sub.at(t.name) : t;
}

std::vector<std::string> rule_variables(const WeightedRule& rule) {
    std::set<std::string> vars;
    auto collect = [&](const Atom& a) {
        for (const auto& t : a.args) {
            if (t.is_variable()) {
                vars.insert(t.name);
            }
        }
    };
    for (const auto& a : rule.head) {
        collect(a);
    }
    for (const auto& l : rule.body) {
        collect(l.atom);
    }
    return {vars.begin(), vars.end()};
}

struct Instance {
    std::vector<Atom> head;
    std::vector<Atom> body_pos;
    std::vector<Atom> body_neg;
    std::vector<Atom> body_dneg;

    auto operator<=>(const Instance&) const = default;
};

}  // namespace

bool GroundProgram::has_disjunctive_head() const {
    return std::any_of(rules.begin(), rules.end(),
                       [](const GroundRule& r) { return r.head.size() > 1; });
}

GroundProgram ground(const Program& program, const GroundOptions& options) {
    // Herbrand universe: every constant occurring in the program, sorted.
    std::set<Term> constants;
    for (const auto& rule : program.rules) {
        auto collect = [&](const Atom& a) {
            for (const auto& t : a.args) {
                if (!t.is_variable()) {
                    constants.insert(t);
                }
            }
        };
        for (const auto& a : rule.head) {
            collect(a);
        }
        for (const auto& l : rule.body) {
            collect(l.atom);
        }
        for (const auto& g : rule.guards) {
            if (!g.lhs.is_variable()) {
                constants.insert(g.lhs);
            }
            if (!g.rhs.is_variable()) {
                constants.insert(g.rhs);
            }
        }
    }
    std::vector<Term> consts(constants.begin(), constants.end());

    // Instantiate rule by rule, collapsing duplicate instances per origin.
    std::vector<std::pair<int, Instance>> instances;  // (origin, instance)
    for (const auto& rule : program.rules) {
        auto vars = rule_variables(rule);
        if (!vars.empty() && consts.empty()) {
            throw SemanticError("cannot ground rule " + std::to_string(rule.rule_index) +
                                ": program has variables but no constants");
        }
        std::set<Instance> seen_here;
        std::vector<std::size_t> odometer(vars.size(), 0);
        while (true) {
            Substitution sub;
            for (std::size_t i = 0; i < vars.size(); ++i) {
                sub[vars[i]] = consts[odometer[i]];
            }
            bool guards_ok = true;
            for (const auto& g : rule.guards) {
                if (substitute(g.lhs, sub) == substitute(g.rhs, sub)) {
                    guards_ok = false;
                    break;
                }
            }
            if (guards_ok) {
                Instance inst;
                for (const auto& a : rule.head) {
                    inst.head.push_back(substitute(a, sub));
                }
                for (const auto& l : rule.body) {
                    Atom a = substitute(l.atom, sub);
                    switch (l.sign) {
                        case Sign::Positive: inst.body_pos.push_back(std::move(a)); break;
                        case Sign::Negated: inst.body_neg.push_back(std::move(a)); break;
                        case Sign::DoublyNegated: inst.body_dneg.push_back(std::move(a)); break;
                    }
                }
                if (seen_here.insert(inst).second) {
                    instances.emplace_back(rule.rule_index, std::move(inst));
                }
            }
            // advance odometer (constants in sorted order = lexicographic
            // substitution order)
            std::size_t k = 0;
            for (; k < vars.size(); ++k) {
                if (++odometer[k] < consts.size()) {
                    break;
                }
                odometer[k] = 0;
            }
            if (k == vars.size()) {
                break;
            }
        }
    }

    // Relevance pruning: an atom is potentially derivable iff some instance
    // has it in the head and a positive body of derivable atoms. Instances
    // with an underivable positive body atom can never be false and never
    // support anything; drop them to fixpoint.
    std::vector<char> alive(instances.size(), 1);
    if (options.prune) {
        std::set<Atom> derivable;
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < instances.size(); ++i) {
                const Instance& inst = instances[i].second;
                bool body_ok = std::all_of(inst.body_pos.begin(), inst.body_pos.end(),
                                           [&](const Atom& a) { return derivable.count(a) > 0; });
                if (body_ok) {
                    for (const auto& h : inst.head) {
                        if (derivable.insert(h).second) {
                            changed = true;
                        }
                    }
                }
            }
        }
        for (std::size_t i = 0; i < instances.size(); ++i) {
            const Instance& inst = instances[i].second;
            alive[i] = std::all_of(inst.body_pos.begin(), inst.body_pos.end(),
                                   [&](const Atom& a) { return derivable.count(a) > 0; });
        }
    }

    GroundProgram out;
    auto universe = std::make_shared<Universe>();
    // The Herbrand base lists every atom of the full instantiation, in first
    // appearance order, whether or not its instances survive pruning; pruned
    // atoms simply have no support and are false in every stable model.
    for (const auto& [origin, inst] : instances) {
        (void)origin;
        for (const auto& a : inst.head) {
            universe->add(a);
        }
        for (const auto& a : inst.body_pos) {
            universe->add(a);
        }
        for (const auto& a : inst.body_neg) {
            universe->add(a);
        }
        for (const auto& a : inst.body_dneg) {
            universe->add(a);
        }
    }
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (!alive[i]) {
            continue;
        }
        const auto& [origin, inst] = instances[i];
        const WeightedRule& src = program.rules[static_cast<std::size_t>(origin) - 1];
        GroundRule gr;
        gr.weight = src.weight;
        gr.origin_index = origin;
        for (const auto& a : inst.head) {
            gr.head.push_back(universe->add(a));
        }
        for (const auto& a : inst.body_pos) {
            gr.body_pos.push_back(universe->add(a));
        }
        for (const auto& a : inst.body_neg) {
            gr.body_neg.push_back(universe->add(a));
        }
        for (const auto& a : inst.body_dneg) {
            gr.body_dneg.push_back(universe->add(a));
        }
        out.rules.push_back(std::move(gr));
    }
    out.universe = std::move(universe);
    out.origin_count = static_cast<int>(program.rules.size());
    return out;
}

bool rule_false_in(const GroundRule& rule, const Bitset& bits) {
    for (AtomId a : rule.body_pos) {
        if (!bits.test(a)) {
            return false;
        }
    }
    for (AtomId a : rule.body_neg) {
        if (bits.test(a)) {
            return false;
        }
    }
    for (AtomId a : rule.body_dneg) {
        if (!bits.test(a)) {
            return false;
        }
    }
    for (AtomId a : rule.head) {
        if (bits.test(a)) {
            return false;
        }
    }
    return true;
}

int false_count(const GroundProgram& ground, int origin_index, const Interpretation& interp) {
    if (origin_index < 1 || origin_index > ground.origin_count) {
        throw UsageError("unknown origin index " + std::to_string(origin_index));
    }
    int n = 0;
    for (const auto& r : ground.rules) {
        if (r.origin_index == origin_index && rule_false_in(r, interp.bits())) {
            ++n;
        }
    }
    return n;
}

std::vector<int> false_counts(const GroundProgram& ground, const Interpretation& interp) {
    std::vector<int> out(static_cast<std::size_t>(ground.origin_count), 0);
    for (const auto& r : ground.rules) {
        if (rule_false_in(r, interp.bits())) {
            ++out[static_cast<std::size_t>(r.origin_index) - 1];
        }
    }
    return out;
}

std::string to_text(const GroundProgram& ground) {
    std::string out;
    for (const auto& r : ground.rules) {
        WeightedRule wr;
        wr.weight = r.weight;
        for (AtomId a : r.head) {
            wr.head.push_back(ground.universe->atom(a));
        }
        for (AtomId a : r.body_pos) {
            wr.body.push_back({ground.universe->atom(a), Sign::Positive});
        }
        for (AtomId a : r.body_neg) {
            wr.body.push_back({ground.universe->atom(a), Sign::Negated});
        }
        for (AtomId a : r.body_dneg) {
            wr.body.push_back({ground.universe->atom(a), Sign::DoublyNegated});
        }
        out += to_string(wr);
        out += " % origin " + std::to_string(r.origin_index) + "\n";
    }
    return out;
}

}  // namespace lpmln

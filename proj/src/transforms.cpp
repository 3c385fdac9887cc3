// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include "lpmln/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace lpmln {

namespace {

std::set<std::string> predicates_of(const Program& program) {
    std::set<std::string> out;
    for (const auto& r : program.rules) {
        for (const auto& a : r.head) {
            out.insert(a.predicate);
        }
        for (const auto& l : r.body) {
            out.insert(l.atom.predicate);
        }
    }
    return out;
}

std::vector<Term> rule_variable_terms(const WeightedRule& rule) {
    std::set<std::string> names;
    auto collect = [&](const Atom& a) {
        for (const auto& t : a.args) {
            if (t.is_variable()) {
                names.insert(t.name);
            }
        }
    };
    for (const auto& a : rule.head) {
        collect(a);
    }
    for (const auto& l : rule.body) {
        collect(l.atom);
    }
    std::vector<Term> out;
    for (const auto& n : names) {
        out.push_back(Term::variable(n));
    }
    return out;
}

std::set<Term> program_constants(const Program& program) {
    std::set<Term> out;
    for (const auto& r : program.rules) {
        auto collect = [&](const Atom& a) {
            for (const auto& t : a.args) {
                if (!t.is_variable()) {
                    out.insert(t);
                }
            }
        };
        for (const auto& a : r.head) {
            collect(a);
        }
        for (const auto& l : r.body) {
            collect(l.atom);
        }
        for (const auto& g : r.guards) {
            if (!g.lhs.is_variable()) {
                out.insert(g.lhs);
            }
            if (!g.rhs.is_variable()) {
                out.insert(g.rhs);
            }
        }
    }
    return out;
}

void renumber(Program& program) {
    int idx = 1;
    for (auto& r : program.rules) {
        r.rule_index = idx++;
    }
}

// `not Head` for the translation bodies: one negated literal per head atom
// (the disjunctive case expands into a conjunction).
void append_not_head(std::vector<Literal>& body, const std::vector<Atom>& head) {
    for (const auto& a : head) {
        body.push_back({a, Sign::Negated});
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// unsat translation
// ---------------------------------------------------------------------------

UnsatTranslation unsat_translation(const Program& program) {
    if (program.parameterized()) {
        throw UsageError("unsat translation requires bound weights");
    }
    if (predicates_of(program).count("unsat")) {
        throw SemanticError("predicate `unsat` is already used by the program");
    }
    UnsatTranslation out;
    out.original_rule_count = static_cast<int>(program.rules.size());
    for (const auto& rule : program.rules) {
        if (rule.weight.is_hard()) {
            out.program.rules.push_back(rule);
            continue;
        }
        double w = rule.weight.value;
        Atom unsat;
        unsat.predicate = "unsat";
        unsat.args.push_back(Term::constant(std::to_string(rule.rule_index)));
        unsat.args.push_back(Term::constant("\"" + format_double(w) + "\""));
        for (const auto& v : rule_variable_terms(rule)) {
            unsat.args.push_back(v);
        }

        WeightedRule define;  // unsat(i, w, x) :- Body(x), not Head(x).
        define.weight = Weight::hard();
        define.head.push_back(unsat);
        define.body = rule.body;
        append_not_head(define.body, rule.head);
        define.guards = rule.guards;
        out.program.rules.push_back(std::move(define));

        WeightedRule restore;  // Head(x) :- Body(x), not unsat(i, w, x).
        restore.weight = Weight::hard();
        restore.head = rule.head;
        restore.body = rule.body;
        restore.body.push_back({unsat, Sign::Negated});
        restore.guards = rule.guards;
        out.program.rules.push_back(std::move(restore));

        out.penalties.push_back({rule.rule_index, w});
    }
    renumber(out.program);
    return out;
}

std::vector<int> penalty_counts(const UnsatTranslation& translation,
                                const GroundProgram& translated_ground, const Bitset& model) {
    std::vector<int> counts(static_cast<std::size_t>(translation.original_rule_count), 0);
    auto atoms = translated_ground.universe->atoms();
    for (std::size_t id = 0; id < atoms.size(); ++id) {
        const Atom& a = atoms[id];
        if (a.predicate == "unsat" && model.test(id)) {
            int origin = std::atoi(a.args.at(0).name.c_str());
            counts.at(static_cast<std::size_t>(origin) - 1) += 1;
        }
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Pi^neg
// ---------------------------------------------------------------------------

NegTranslation to_negative(const Program& program) {
    if (program.parameterized()) {
        throw UsageError("to_negative requires bound weights");
    }
    auto preds = predicates_of(program);
    if (preds.count("neg")) {
        throw SemanticError("predicate `neg` is already used by the program");
    }
    const std::string dom_pred = "negdom";
    if (preds.count(dom_pred)) {
        throw SemanticError("predicate `" + dom_pred + "` is already used by the program");
    }

    NegTranslation out;
    bool need_dom = false;
    for (const auto& rule : program.rules) {
        if (!rule.weight.is_soft() || rule.weight.value <= 0.0) {
            out.program.rules.push_back(rule);
            if (rule.weight.is_soft()) {
                out.soft_map.push_back({rule.rule_index, false,
                                        static_cast<int>(out.program.rules.size()), 0});
            }
            continue;
        }
        double w = rule.weight.value;
        auto vars = rule_variable_terms(rule);

        WeightedRule zero = rule;  // 0: H(x) :- B(x).
        zero.weight = Weight::soft(0.0);
        out.program.rules.push_back(std::move(zero));
        int zero_index = static_cast<int>(out.program.rules.size());

        Atom neg;
        neg.predicate = "neg";
        neg.args.push_back(Term::constant(std::to_string(rule.rule_index)));
        for (const auto& v : vars) {
            neg.args.push_back(v);
        }

        WeightedRule define;  // neg(i, x) :- B(x), not H(x).
        define.weight = Weight::hard();
        define.head.push_back(neg);
        define.body = rule.body;
        append_not_head(define.body, rule.head);
        define.guards = rule.guards;
        out.program.rules.push_back(std::move(define));

        WeightedRule constraint;  // -w: :- negdom(x1)...negdom(xk), not neg(i, x).
        constraint.weight = Weight::soft(-w);
        for (const auto& v : vars) {
            Atom dom;
            dom.predicate = dom_pred;
            dom.args.push_back(v);
            constraint.body.push_back({dom, Sign::Positive});
            need_dom = true;
        }
        constraint.body.push_back({neg, Sign::Negated});
        out.program.rules.push_back(std::move(constraint));
        int constraint_index = static_cast<int>(out.program.rules.size());

        out.soft_map.push_back({rule.rule_index, true, zero_index, constraint_index});
    }
    if (need_dom) {
        for (const auto& c : program_constants(program)) {
            WeightedRule fact;
            fact.weight = Weight::hard();
            Atom dom;
            dom.predicate = dom_pred;
            dom.args.push_back(c);
            fact.head.push_back(dom);
            out.program.rules.push_back(std::move(fact));
        }
    }
    renumber(out.program);
    return out;
}

std::vector<int> original_counts(const NegTranslation& translation,
                                 std::span<const int> output_false_counts,
                                 std::span<const int> output_instance_totals,
                                 int original_rule_count) {
    std::vector<int> out(static_cast<std::size_t>(original_rule_count), 0);
    for (const auto& m : translation.soft_map) {
        std::size_t orig = static_cast<std::size_t>(m.original_index) - 1;
        if (!m.rewritten) {
            out[orig] = output_false_counts[static_cast<std::size_t>(m.output_soft_index) - 1];
        } else {
            // original instance false <=> neg(i,x) true <=> constraint
            // instance satisfied
            std::size_t c = static_cast<std::size_t>(m.output_constraint_index) - 1;
            out[orig] = output_instance_totals[c] - output_false_counts[c];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Multi-example indexing and noise atoms
// ---------------------------------------------------------------------------

Program index_for_multi(const Program& program, int m) {
    if (m < 1) {
        throw UsageError("example count must be at least 1");
    }
    const std::string idx_pred = "example_index";
    if (predicates_of(program).count(idx_pred)) {
        throw SemanticError("predicate `" + idx_pred + "` is already used by the program");
    }
    std::set<std::string> var_names;
    for (const auto& r : program.rules) {
        for (const auto& t : rule_variable_terms(r)) {
            var_names.insert(t.name);
        }
    }
    std::string k_name = "K";
    for (int suffix = 0; var_names.count(k_name); ++suffix) {
        k_name = "K" + std::to_string(suffix);
    }
    const Term k = Term::variable(k_name);
    Program out;
    for (const auto& rule : program.rules) {
        WeightedRule r = rule;
        for (auto& a : r.head) {
            a.args.push_back(k);
        }
        for (auto& l : r.body) {
            l.atom.args.push_back(k);
        }
        Atom dom;
        dom.predicate = idx_pred;
        dom.args.push_back(k);
        r.body.push_back({dom, Sign::Positive});
        out.rules.push_back(std::move(r));
    }
    for (int i = 1; i <= m; ++i) {
        WeightedRule fact;
        fact.weight = Weight::hard();
        Atom dom;
        dom.predicate = idx_pred;
        dom.args.push_back(Term::constant(std::to_string(i)));
        fact.head.push_back(dom);
        out.rules.push_back(std::move(fact));
    }
    renumber(out);
    return out;
}

Observation merge_observations(std::span<const Observation> observations) {
    std::vector<Atom> t, f;
    for (std::size_t i = 0; i < observations.size(); ++i) {
        Term idx = Term::constant(std::to_string(i + 1));
        for (Atom a : observations[i].clamped_true()) {
            a.args.push_back(idx);
            t.push_back(std::move(a));
        }
        for (Atom a : observations[i].clamped_false()) {
            a.args.push_back(idx);
            f.push_back(std::move(a));
        }
    }
    return Observation(std::move(t), std::move(f));
}

Program noise_augment(const Program& program, std::span<const std::string> observed_predicates,
                      double u) {
    if (u <= 0.0) {
        throw UsageError("noise level u must be positive");
    }
    if (observed_predicates.empty()) {
        return program;
    }
    auto preds = predicates_of(program);
    Program out = program;
    auto g = ground(program);
    for (const auto& p : observed_predicates) {
        std::string noise = "noise_" + p;
        if (preds.count(noise)) {
            throw SemanticError("predicate `" + noise + "` is already used by the program");
        }
        for (const auto& atom : g.universe->atoms()) {
            if (atom.predicate != p) {
                continue;
            }
            Atom n;
            n.predicate = noise;
            n.args = atom.args;

            WeightedRule bridge;  // p(t) :- noise_p(t).
            bridge.weight = Weight::hard();
            bridge.head.push_back(atom);
            bridge.body.push_back({n, Sign::Positive});
            out.rules.push_back(std::move(bridge));

            WeightedRule fact;  // -u: noise_p(t).
            fact.weight = Weight::soft(-u);
            fact.head.push_back(n);
            out.rules.push_back(std::move(fact));
        }
    }
    renumber(out);
    return out;
}

double default_noise_level(const Program& program) {
    double mx = 0.0;
    for (const auto& r : program.rules) {
        if (r.weight.is_soft()) {
            mx = std::max(mx, std::fabs(r.weight.value));
        }
    }
    return 10.0 + mx;
}

// ---------------------------------------------------------------------------
// Completion
// ---------------------------------------------------------------------------

MlnModel completion(const Program& program) {
    // tightness is judged on the full grounding: a rule like `a :- a.` is a
    // cycle even when relevance pruning would discard it
    auto g = ground(program, {.prune = false});
    std::size_t n = g.universe->size();

    // tightness: the positive dependency graph must be acyclic
    std::vector<std::vector<AtomId>> edges(n);
    for (const auto& r : g.rules) {
        for (AtomId h : r.head) {
            for (AtomId b : r.body_pos) {
                edges[h].push_back(b);
            }
        }
    }
    std::vector<int> state(n, 0);  // 0 unvisited, 1 on stack, 2 done
    std::vector<AtomId> stack;
    auto find_cycle = [&](auto&& self, AtomId a) -> bool {
        state[a] = 1;
        stack.push_back(a);
        for (AtomId b : edges[a]) {
            if (state[b] == 1) {
                std::string cycle;
                auto it = std::find(stack.begin(), stack.end(), b);
                for (; it != stack.end(); ++it) {
                    cycle += to_string(g.universe->atom(*it)) + " -> ";
                }
                cycle += to_string(g.universe->atom(b));
                throw SemanticError("program is not tight: " + cycle);
            }
            if (state[b] == 0 && self(self, b)) {
                return true;
            }
        }
        stack.pop_back();
        state[a] = 2;
        return false;
    };
    for (AtomId a = 0; a < n; ++a) {
        if (state[a] == 0) {
            find_cycle(find_cycle, a);
        }
    }

    if (program.parameterized()) {
        throw UsageError("completion requires bound weights");
    }

    MlnModel model;
    model.universe = g.universe;

    auto body_formula = [&](const GroundRule& r) {
        std::vector<Formula> conj;
        for (AtomId a : r.body_pos) {
            conj.push_back(Formula::atom_ref(a));
        }
        for (AtomId a : r.body_neg) {
            conj.push_back(Formula::negation(Formula::atom_ref(a)));
        }
        for (AtomId a : r.body_dneg) {
            conj.push_back(Formula::atom_ref(a));
        }
        return Formula::conjunction(std::move(conj));
    };

    // each rule as a weighted implication
    for (const auto& r : g.rules) {
        std::vector<Formula> head;
        for (AtomId a : r.head) {
            head.push_back(Formula::atom_ref(a));
        }
        Formula f = Formula::implies(body_formula(r), Formula::disjunction(std::move(head)));
        if (r.weight.is_hard()) {
            model.formulas.push_back({std::nullopt, std::move(f)});
        } else {
            model.formulas.push_back({r.weight.value, std::move(f)});
        }
    }

    // hard support half of the completion: a true atom needs a rule whose
    // body holds (and whose head siblings are false). The other direction is
    // carried by the rule formulas themselves; making it hard would forbid
    // the penalized violation of soft rules.
    for (AtomId a = 0; a < n; ++a) {
        std::vector<Formula> supports;
        for (const auto& r : g.rules) {
            if (std::find(r.head.begin(), r.head.end(), a) == r.head.end()) {
                continue;
            }
            std::vector<Formula> conj{body_formula(r)};
            for (AtomId h : r.head) {
                if (h != a) {
                    conj.push_back(Formula::negation(Formula::atom_ref(h)));
                }
            }
            supports.push_back(Formula::conjunction(std::move(conj)));
        }
        model.formulas.push_back(
            {std::nullopt,
             Formula::implies(Formula::atom_ref(a), Formula::disjunction(std::move(supports)))});
    }
    return model;
}

// ---------------------------------------------------------------------------
// Coherence
// ---------------------------------------------------------------------------

CoherenceReport coherence_check(const Program& program, std::optional<int> expected_k) {
    CoherenceReport report;

    // Predicates defined exclusively by hard ground facts; soft-rule bodies
    // may range over them (the dialect's rendering of #domain-style
    // schematic probabilistic facts).
    std::set<std::string> head_preds, fact_only;
    for (const auto& r : program.rules) {
        for (const auto& a : r.head) {
            head_preds.insert(a.predicate);
        }
    }
    for (const auto& pred : head_preds) {
        bool ok = true;
        for (const auto& r : program.rules) {
            for (const auto& a : r.head) {
                if (a.predicate == pred) {
                    ok = ok && r.weight.is_hard() && r.is_fact() && a.ground();
                }
            }
        }
        if (ok) {
            fact_only.insert(pred);
        }
    }

    std::vector<WeightedRule> soft, hard;
    std::map<std::pair<Atom, std::vector<Literal>>, std::size_t> merged;
    for (const auto& r : program.rules) {
        if (r.weight.is_hard()) {
            hard.push_back(r);
            continue;
        }
        bool schema = r.head.size() == 1 && r.guards.empty();
        for (const auto& l : r.body) {
            schema = schema && l.sign == Sign::Positive && fact_only.count(l.atom.predicate) > 0;
        }
        if (!schema) {
            report.failure = "soft rule " + std::to_string(r.rule_index) +
                             " is not an atomic fact (not of form w: A over a domain)";
            return report;
        }
        auto key = std::make_pair(r.head[0], r.body);
        auto it = merged.find(key);
        if (it == merged.end()) {
            merged.emplace(key, soft.size());
            soft.push_back(r);
        } else {
            WeightedRule& prev = soft[it->second];
            if (!prev.weight.is_soft() || !r.weight.is_soft()) {
                report.failure = "duplicate soft atom " + to_string(r.head[0]) +
                                 " with unbound parameters cannot be merged";
                return report;
            }
            prev.weight = Weight::soft(prev.weight.value + r.weight.value);
        }
    }
    for (const auto& s : soft) {
        if (fact_only.count(s.head[0].predicate)) {
            report.failure = "predicate " + s.head[0].predicate +
                             " is both a domain predicate and a soft atom";
            return report;
        }
    }
    report.soft_facts = soft;
    report.hard_rules = hard;

    // ground PF instances: the head atoms of the soft rules' own instances
    auto g = ground(program);
    std::set<AtomId> pf_id_set;
    std::set<int> soft_origins;
    for (const auto& r : program.rules) {
        if (!r.weight.is_hard()) {
            soft_origins.insert(r.rule_index);
        }
    }
    for (const auto& r : g.rules) {
        if (soft_origins.count(r.origin_index)) {
            pf_id_set.insert(r.head.front());
        }
    }
    std::vector<AtomId> pf_ids(pf_id_set.begin(), pf_id_set.end());
    for (AtomId id : pf_ids) {
        report.ground_pf.push_back(g.universe->atom(id));
    }

    for (const auto& r : g.rules) {
        if (!r.weight.is_hard()) {
            continue;
        }
        for (AtomId h : r.head) {
            if (pf_id_set.count(h)) {
                report.failure = "soft atom " + to_string(g.universe->atom(h)) +
                                 " occurs in the head of a hard rule";
                return report;
            }
        }
    }
    report.is_simple = true;

    if (pf_ids.size() > 16) {
        throw ResourceError("coherence verification over " + std::to_string(pf_ids.size()) +
                            " probabilistic facts exceeds the cap of 16");
    }

    // count stable models consistent with every PF truth assignment
    std::vector<GroundRule> hard_ground;
    for (const auto& r : g.rules) {
        if (r.weight.is_hard()) {
            hard_ground.push_back(r);
        }
    }
    std::optional<int> k;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pf_ids.size()); ++mask) {
        GroundProgram sub;
        sub.universe = g.universe;
        sub.rules = hard_ground;
        sub.origin_count = g.origin_count;
        ClampSet clamps;
        for (std::size_t i = 0; i < pf_ids.size(); ++i) {
            if ((mask >> i) & 1) {
                GroundRule fact;
                fact.weight = Weight::hard();
                fact.head.push_back(pf_ids[i]);
                sub.rules.push_back(std::move(fact));
                clamps.forced_true.push_back(pf_ids[i]);
            } else {
                clamps.forced_false.push_back(pf_ids[i]);
            }
        }
        int count = static_cast<int>(stable_models(sub, clamps).size());
        if (!k) {
            k = count;
        } else if (*k != count) {
            report.failure = "model count varies across PF assignments (" +
                             std::to_string(*k) + " vs " + std::to_string(count) + ")";
            return report;
        }
    }
    if (k && *k == 0) {
        report.failure = "no stable model for any PF assignment";
        return report;
    }
    if (expected_k && k != expected_k) {
        report.failure = "expected k=" + std::to_string(*expected_k) + " but verified k=" +
                         std::to_string(k.value_or(0));
        return report;
    }
    report.k = k;
    return report;
}

// ---------------------------------------------------------------------------
// ProbLog weight maps
// ---------------------------------------------------------------------------

std::vector<double> weights_from_probabilities(std::span<const double> probabilities) {
    std::vector<double> out;
    out.reserve(probabilities.size());
    for (double p : probabilities) {
        if (!(p > 0.0) || !(p < 1.0)) {
            throw DataError("probability " + format_double(p) + " is outside (0, 1)");
        }
        out.push_back(std::log(p / (1.0 - p)));
    }
    return out;
}

std::vector<double> probabilities_from_weights(std::span<const double> weights) {
    std::vector<double> out;
    out.reserve(weights.size());
    for (double w : weights) {
        out.push_back(std::exp(w) / (1.0 + std::exp(w)));
    }
    return out;
}

}  // namespace lpmln

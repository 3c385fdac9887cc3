// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include "lpmln/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lpmln {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_bound(const GroundProgram& ground) {
    for (const auto& r : ground.rules) {
        if (r.weight.is_parameter()) {
            throw UsageError("program carries unbound parameters; bind weights first");
        }
    }
}

std::vector<GroundRule> hard_rules(const GroundProgram& ground) {
    std::vector<GroundRule> out;
    for (const auto& r : ground.rules) {
        if (r.weight.is_hard()) {
            out.push_back(r);
        }
    }
    return out;
}

// The two-part SM[Pi] check, hard-rule satisfaction already established.
bool stable_for_satisfied_subset(const GroundProgram& ground, const Interpretation& interp,
                                 const SolveLimits& limits) {
    std::vector<GroundRule> satisfied;
    satisfied.reserve(ground.rules.size());
    for (const auto& r : ground.rules) {
        if (!rule_false_in(r, interp.bits())) {
            satisfied.push_back(r);
        }
    }
    return is_stable(satisfied, interp, limits);
}

double log_sum_exp(const std::vector<double>& xs) {
    double mx = kNegInf;
    for (double x : xs) {
        mx = std::max(mx, x);
    }
    if (mx == kNegInf) {
        return kNegInf;
    }
    double acc = 0.0;
    for (double x : xs) {
        acc += std::exp(x - mx);
    }
    return mx + std::log(acc);
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::vector<Interpretation> sm_set(const GroundProgram& ground, const SolveLimits& limits) {
    std::vector<Interpretation> out;
    auto hard = hard_rules(ground);
    enumerate_candidates(ground, hard, {}, {}, [&](const Interpretation& interp) {
        if (stable_for_satisfied_subset(ground, interp, limits)) {
            out.push_back(interp);
        }
    });
    return out;
}

bool sm_member(const GroundProgram& ground, const Interpretation& interp,
               const SolveLimits& limits) {
    for (const auto& r : ground.rules) {
        if (r.weight.is_hard() && rule_false_in(r, interp.bits())) {
            return false;
        }
    }
    return stable_for_satisfied_subset(ground, interp, limits);
}

double weight_of(const GroundProgram& ground, const Interpretation& interp,
                 const SolveLimits& limits) {
    require_bound(ground);
    if (!sm_member(ground, interp, limits)) {
        return kNegInf;
    }
    double acc = 0.0;
    for (const auto& r : ground.rules) {
        if (r.weight.is_soft() && rule_false_in(r, interp.bits())) {
            acc -= r.weight.value;
        }
    }
    return acc;
}

double reward_log_weight(const GroundProgram& ground, const Interpretation& interp,
                         const SolveLimits& limits) {
    require_bound(ground);
    if (!sm_member(ground, interp, limits)) {
        return kNegInf;
    }
    double acc = 0.0;
    for (const auto& r : ground.rules) {
        if (r.weight.is_soft() && !rule_false_in(r, interp.bits())) {
            acc += r.weight.value;
        }
    }
    return acc;
}

ProbabilityTable probability_table(const GroundProgram& ground, const SolveLimits& limits) {
    require_bound(ground);
    ProbabilityTable table;
    auto models = sm_set(ground, limits);
    if (models.empty()) {
        throw SemanticError("no probabilistic stable model");
    }
    std::vector<double> logw;
    logw.reserve(models.size());
    for (const auto& m : models) {
        double acc = 0.0;
        for (const auto& r : ground.rules) {
            if (r.weight.is_soft() && rule_false_in(r, m.bits())) {
                acc -= r.weight.value;
            }
        }
        logw.push_back(acc);
    }
    table.log_normalizer = log_sum_exp(logw);
    table.entries.reserve(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        table.entries.push_back(
            {models[i], logw[i], std::exp(logw[i] - table.log_normalizer)});
    }
    table.program_fingerprint = fnv1a(to_text(ground));
    return table;
}

namespace {

bool eval_query(const Query& q, const Interpretation& interp) {
    switch (q.kind) {
        case Query::Kind::AtomRef: {
            auto id = interp.universe()->find(q.atom);
            if (!id) {
                throw DataError("query atom " + to_string(q.atom) +
                                " is outside the Herbrand base");
            }
            return interp.contains(*id);
        }
        case Query::Kind::Not: return !eval_query(q.children[0], interp);
        case Query::Kind::And:
            return std::all_of(q.children.begin(), q.children.end(),
                               [&](const Query& c) { return eval_query(c, interp); });
        case Query::Kind::Or:
            return std::any_of(q.children.begin(), q.children.end(),
                               [&](const Query& c) { return eval_query(c, interp); });
    }
    return false;
}

}  // namespace

double marginal(const ProbabilityTable& table, const Query& query) {
    double p = 0.0;
    for (const auto& e : table.entries) {
        if (eval_query(query, e.model)) {
            p += e.probability;
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// MLN evaluator
// ---------------------------------------------------------------------------

Formula Formula::atom_ref(AtomId a) {
    Formula f;
    f.kind = Kind::AtomRef;
    f.atom = a;
    return f;
}

Formula Formula::negation(Formula inner) {
    Formula f;
    f.kind = Kind::Not;
    f.children.push_back(std::move(inner));
    return f;
}

Formula Formula::conjunction(std::vector<Formula> fs) {
    Formula f;
    f.kind = Kind::And;
    f.children = std::move(fs);
    return f;
}

Formula Formula::disjunction(std::vector<Formula> fs) {
    Formula f;
    f.kind = Kind::Or;
    f.children = std::move(fs);
    return f;
}

Formula Formula::implies(Formula lhs, Formula rhs) {
    Formula f;
    f.kind = Kind::Implies;
    f.children.push_back(std::move(lhs));
    f.children.push_back(std::move(rhs));
    return f;
}

Formula Formula::iff(Formula lhs, Formula rhs) {
    Formula f;
    f.kind = Kind::Iff;
    f.children.push_back(std::move(lhs));
    f.children.push_back(std::move(rhs));
    return f;
}

bool eval(const Formula& formula, const Bitset& bits) {
    switch (formula.kind) {
        case Formula::Kind::AtomRef: return bits.test(formula.atom);
        case Formula::Kind::Not: return !eval(formula.children[0], bits);
        case Formula::Kind::And:
            return std::all_of(formula.children.begin(), formula.children.end(),
                               [&](const Formula& c) { return eval(c, bits); });
        case Formula::Kind::Or:
            return std::any_of(formula.children.begin(), formula.children.end(),
                               [&](const Formula& c) { return eval(c, bits); });
        case Formula::Kind::Implies:
            return !eval(formula.children[0], bits) || eval(formula.children[1], bits);
        case Formula::Kind::Iff:
            return eval(formula.children[0], bits) == eval(formula.children[1], bits);
    }
    return false;
}

std::string to_text(const Formula& formula, const Universe& universe) {
    switch (formula.kind) {
        case Formula::Kind::AtomRef: return to_string(universe.atom(formula.atom));
        case Formula::Kind::Not: return "!" + to_text(formula.children[0], universe);
        case Formula::Kind::And: {
            if (formula.children.empty()) {
                return "true";
            }
            std::string out = "(";
            for (std::size_t i = 0; i < formula.children.size(); ++i) {
                if (i) {
                    out += " & ";
                }
                out += to_text(formula.children[i], universe);
            }
            return out + ")";
        }
        case Formula::Kind::Or: {
            if (formula.children.empty()) {
                return "false";
            }
            std::string out = "(";
            for (std::size_t i = 0; i < formula.children.size(); ++i) {
                if (i) {
                    out += " | ";
                }
                out += to_text(formula.children[i], universe);
            }
            return out + ")";
        }
        case Formula::Kind::Implies:
            return "(" + to_text(formula.children[0], universe) + " -> " +
                   to_text(formula.children[1], universe) + ")";
        case Formula::Kind::Iff:
            return "(" + to_text(formula.children[0], universe) + " <-> " +
                   to_text(formula.children[1], universe) + ")";
    }
    return {};
}

std::vector<std::pair<Interpretation, double>> mln_distribution(const MlnModel& model) {
    std::size_t n = model.universe->size();
    if (n > 24) {
        throw ResourceError("MLN evaluation over " + std::to_string(n) +
                            " atoms exceeds the enumeration cap of 24");
    }
    std::vector<std::pair<Interpretation, double>> out;
    std::vector<double> logw;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        Bitset bits(n);
        for (std::size_t i = 0; i < n; ++i) {
            if ((mask >> i) & 1) {
                bits.set(i);
            }
        }
        bool hard_ok = true;
        double acc = 0.0;
        for (const auto& f : model.formulas) {
            bool sat = eval(f.formula, bits);
            if (!f.weight) {
                if (!sat) {
                    hard_ok = false;
                    break;
                }
            } else if (sat) {
                acc += *f.weight;
            }
        }
        if (hard_ok) {
            out.emplace_back(Interpretation(model.universe, std::move(bits)), 0.0);
            logw.push_back(acc);
        }
    }
    if (out.empty()) {
        throw SemanticError("no interpretation satisfies the hard MLN formulas");
    }
    double z = log_sum_exp(logw);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].second = std::exp(logw[i] - z);
    }
    return out;
}

double mln_probability(const MlnModel& model, const Interpretation& interp) {
    auto dist = mln_distribution(model);
    for (const auto& [m, p] : dist) {
        if (m == interp) {
            return p;
        }
    }
    return 0.0;
}

}  // namespace lpmln

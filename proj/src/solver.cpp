// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include "lpmln/solver.hpp"

#include <algorithm>

namespace lpmln {

ClampSet ClampSet::from_observation(const Observation& obs, const Universe& universe) {
    ClampSet out;
    for (const auto& a : obs.clamped_true()) {
        auto id = universe.find(a);
        if (!id) {
            throw DataError("evidence atom " + to_string(a) + " is outside the Herbrand base");
        }
        out.forced_true.push_back(*id);
    }
    for (const auto& a : obs.clamped_false()) {
        auto id = universe.find(a);
        if (!id) {
            throw DataError("evidence atom " + to_string(a) + " is outside the Herbrand base");
        }
        out.forced_false.push_back(*id);
    }
    return out;
}

std::vector<ReductRule> reduct(std::span<const GroundRule> rules, const Interpretation& interp) {
    std::vector<ReductRule> out;
    const Bitset& bits = interp.bits();
    for (const auto& r : rules) {
        bool deleted = false;
        for (AtomId a : r.body_neg) {
            if (bits.test(a)) {
                deleted = true;
                break;
            }
        }
        if (!deleted) {
            for (AtomId a : r.body_dneg) {
                if (!bits.test(a)) {
                    deleted = true;
                    break;
                }
            }
        }
        if (!deleted) {
            out.push_back({r.head, r.body_pos});
        }
    }
    return out;
}

namespace {

bool satisfies_positive(const ReductRule& r, const Bitset& bits) {
    for (AtomId a : r.body) {
        if (!bits.test(a)) {
            return true;
        }
    }
    for (AtomId a : r.head) {
        if (bits.test(a)) {
            return true;
        }
    }
    return false;
}

// Least model of the definite part (single-atom heads) of a positive program.
Bitset least_model(const std::vector<ReductRule>& rules, std::size_t nbits) {
    Bitset lm(nbits);
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : rules) {
            if (r.head.size() != 1 || lm.test(r.head[0])) {
                continue;
            }
            bool fire = std::all_of(r.body.begin(), r.body.end(),
                                    [&](AtomId a) { return lm.test(a); });
            if (fire) {
                lm.set(r.head[0]);
                changed = true;
            }
        }
    }
    return lm;
}

}  // namespace

bool is_stable(std::span<const GroundRule> rules, const Interpretation& interp,
               const SolveLimits& limits) {
    const Bitset& bits = interp.bits();
    for (const auto& r : rules) {
        if (rule_false_in(r, bits)) {
            return false;
        }
    }
    auto red = reduct(rules, interp);
    bool disjunctive = std::any_of(red.begin(), red.end(),
                                   [](const ReductRule& r) { return r.head.size() > 1; });
    if (!disjunctive) {
        return least_model(red, bits.size()) == bits;
    }
    // minimal-model check by enumerating proper submodels
    std::vector<AtomId> trues;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits.test(i)) {
            trues.push_back(static_cast<AtomId>(i));
        }
    }
    if (trues.size() > limits.minimality_cap) {
        throw ResourceError("disjunctive minimality check over " + std::to_string(trues.size()) +
                            " true atoms exceeds the cap of " +
                            std::to_string(limits.minimality_cap));
    }
    std::uint64_t total = std::uint64_t{1} << trues.size();
    for (std::uint64_t mask = 0; mask + 1 < total; ++mask) {
        Bitset sub(bits.size());
        for (std::size_t i = 0; i < trues.size(); ++i) {
            if ((mask >> i) & 1) {
                sub.set(trues[i]);
            }
        }
        bool model = std::all_of(red.begin(), red.end(), [&](const ReductRule& r) {
            return satisfies_positive(r, sub);
        });
        if (model) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Candidate enumeration
// ---------------------------------------------------------------------------

namespace {

// Literal encoding: (atom << 1) | wants_false.
using Lit = std::uint32_t;
inline Lit lit_true(AtomId a) { return a << 1; }
inline Lit lit_false(AtomId a) { return (a << 1) | 1; }
inline AtomId lit_atom(Lit l) { return l >> 1; }
inline bool lit_wants_false(Lit l) { return l & 1; }

class Search {
public:
    Search(const GroundProgram& ground, std::span<const GroundRule> clause_rules,
           const ClampSet& clamps, std::span<const ParityConstraint> parities,
           const std::function<void(const Interpretation&)>& leaf)
        : ground_(ground),
          leaf_(leaf),
          n_(ground.universe->size()),
          value_(n_, Unknown),
          support_left_(n_, 0),
          conflict_(false) {
        build_clauses(clause_rules);
        build_support();
        build_parity(parities);
        for (AtomId a : clamps.forced_true) {
            enqueue(a, True);
        }
        for (AtomId a : clamps.forced_false) {
            enqueue(a, False);
        }
    }

    void run() {
        if (conflict_) {
            return;
        }
        // Root scan: facts and other unit clauses have no trigger atom yet,
        // and atoms with no head occurrence can never be true.
        for (AtomId a = 0; a < n_; ++a) {
            if (support_left_[a] == 0 && value_[a] == Unknown) {
                enqueue(a, False);
            }
        }
        for (const Clause& c : clauses_) {
            Lit unit = 0;
            int open = 0;
            bool satisfied = false;
            for (Lit l : c.lits) {
                Value v = value_[lit_atom(l)];
                if (v == Unknown) {
                    ++open;
                    unit = l;
                } else if ((v == False) == lit_wants_false(l)) {
                    satisfied = true;
                    break;
                }
            }
            if (satisfied) {
                continue;
            }
            if (open == 0) {
                conflict_ = true;
                return;
            }
            if (open == 1) {
                enqueue(lit_atom(unit), lit_wants_false(unit) ? False : True);
            }
            if (conflict_) {
                return;
            }
        }
        if (!flush()) {
            return;
        }
        descend(0);
    }

private:
    enum Value : std::int8_t { False = 0, True = 1, Unknown = -1 };

    struct Clause {
        std::vector<Lit> lits;
    };

    struct SupportRule {
        std::vector<AtomId> head;
        std::vector<Lit> body;  // literal that must not be violated for viability
        bool viable = true;
    };

    struct Parity {
        std::vector<AtomId> atoms;
        bool odd;
        int unassigned;
        int trues;
    };

    void build_clauses(std::span<const GroundRule> rules) {
        clause_occ_.resize(n_);
        for (const auto& r : rules) {
            Clause c;
            bool tautology = false;
            auto push = [&](Lit l) {
                for (Lit e : c.lits) {
                    if (e == l) {
                        return;
                    }
                    if (lit_atom(e) == lit_atom(l)) {
                        tautology = true;
                    }
                }
                c.lits.push_back(l);
            };
            for (AtomId a : r.head) {
                push(lit_true(a));
            }
            for (AtomId a : r.body_pos) {
                push(lit_false(a));
            }
            for (AtomId a : r.body_neg) {
                push(lit_true(a));
            }
            for (AtomId a : r.body_dneg) {
                push(lit_false(a));
            }
            if (tautology) {
                continue;
            }
            std::size_t idx = clauses_.size();
            clauses_.push_back(std::move(c));
            for (Lit l : clauses_.back().lits) {
                clause_occ_[lit_atom(l)].push_back(idx);
            }
        }
    }

    void build_support() {
        support_occ_.resize(n_);
        for (const auto& r : ground_.rules) {
            if (r.head.empty()) {
                continue;
            }
            SupportRule s;
            s.head = r.head;
            for (AtomId a : r.body_pos) {
                s.body.push_back(lit_true(a));  // falsified when a is false
            }
            for (AtomId a : r.body_neg) {
                s.body.push_back(lit_false(a));  // falsified when a is true
            }
            for (AtomId a : r.body_dneg) {
                s.body.push_back(lit_true(a));
            }
            std::size_t idx = supports_.size();
            supports_.push_back(std::move(s));
            for (AtomId h : supports_.back().head) {
                ++support_left_[h];
            }
            for (Lit l : supports_.back().body) {
                support_occ_[lit_atom(l)].push_back(idx);
            }
        }
    }

    void build_parity(std::span<const ParityConstraint> parities) {
        parity_occ_.resize(n_);
        for (const auto& p : parities) {
            Parity q{p.atoms, p.odd, static_cast<int>(p.atoms.size()), 0};
            std::size_t idx = parity_.size();
            parity_.push_back(std::move(q));
            for (AtomId a : parity_.back().atoms) {
                parity_occ_[a].push_back(idx);
            }
        }
    }

    void enqueue(AtomId a, Value v) {
        if (value_[a] == v) {
            return;
        }
        if (value_[a] != Unknown) {
            conflict_ = true;
            return;
        }
        value_[a] = v;
        trail_.push_back(a);
        queue_.push_back(a);
    }

    // Processes pending assignments; returns false on conflict.
    bool flush() {
        while (!queue_.empty() && !conflict_) {
            AtomId a = queue_.back();
            queue_.pop_back();
            propagate_clauses(a);
            if (conflict_) {
                break;
            }
            propagate_support(a);
            if (conflict_) {
                break;
            }
            propagate_parity(a);
        }
        if (conflict_) {
            queue_.clear();
        }
        return !conflict_;
    }

    void propagate_clauses(AtomId a) {
        for (std::size_t ci : clause_occ_[a]) {
            const Clause& c = clauses_[ci];
            Lit unit = 0;
            int open = 0;
            bool satisfied = false;
            for (Lit l : c.lits) {
                Value v = value_[lit_atom(l)];
                if (v == Unknown) {
                    ++open;
                    unit = l;
                } else if ((v == False) == lit_wants_false(l)) {
                    satisfied = true;
                    break;
                }
            }
            if (satisfied) {
                continue;
            }
            if (open == 0) {
                conflict_ = true;
                return;
            }
            if (open == 1) {
                enqueue(lit_atom(unit), lit_wants_false(unit) ? False : True);
                if (conflict_) {
                    return;
                }
            }
        }
    }

    void propagate_support(AtomId a) {
        if (value_[a] == True && support_left_[a] == 0) {
            conflict_ = true;
            return;
        }
        for (std::size_t si : support_occ_[a]) {
            SupportRule& s = supports_[si];
            if (!s.viable) {
                continue;
            }
            bool falsified = false;
            for (Lit l : s.body) {
                Value v = value_[lit_atom(l)];
                if (v != Unknown && (v == False) != lit_wants_false(l)) {
                    // literal l needs the opposite value; body is dead
                    falsified = true;
                    break;
                }
            }
            if (!falsified) {
                continue;
            }
            s.viable = false;
            support_journal_.push_back(si);
            for (AtomId h : s.head) {
                if (--support_left_[h] == 0) {
                    if (value_[h] == True) {
                        conflict_ = true;
                        return;
                    }
                    if (value_[h] == Unknown) {
                        enqueue(h, False);
                        if (conflict_) {
                            return;
                        }
                    }
                }
            }
        }
    }

    void propagate_parity(AtomId a) {
        for (std::size_t pi : parity_occ_[a]) {
            Parity& p = parity_[pi];
            --p.unassigned;
            if (value_[a] == True) {
                ++p.trues;
            }
            if (p.unassigned == 0) {
                if ((p.trues & 1) != (p.odd ? 1 : 0)) {
                    conflict_ = true;
                    return;
                }
            } else if (p.unassigned == 1) {
                bool need_true = ((p.trues & 1) != (p.odd ? 1 : 0));
                for (AtomId b : p.atoms) {
                    if (value_[b] == Unknown) {
                        enqueue(b, need_true ? True : False);
                        break;
                    }
                }
                if (conflict_) {
                    return;
                }
            }
        }
    }

    void undo_to(std::size_t trail_mark, std::size_t journal_mark) {
        while (trail_.size() > trail_mark) {
            AtomId a = trail_.back();
            trail_.pop_back();
            for (std::size_t pi : parity_occ_[a]) {
                Parity& p = parity_[pi];
                ++p.unassigned;
                if (value_[a] == True) {
                    --p.trues;
                }
            }
            value_[a] = Unknown;
        }
        while (support_journal_.size() > journal_mark) {
            std::size_t si = support_journal_.back();
            support_journal_.pop_back();
            supports_[si].viable = true;
            for (AtomId h : supports_[si].head) {
                ++support_left_[h];
            }
        }
        conflict_ = false;
        queue_.clear();
    }

    void descend(AtomId from) {
        AtomId var = n_;
        for (AtomId a = from; a < n_; ++a) {
            if (value_[a] == Unknown) {
                var = a;
                break;
            }
        }
        if (var == n_) {
            Bitset bits(n_);
            for (AtomId a = 0; a < n_; ++a) {
                if (value_[a] == True) {
                    bits.set(a);
                }
            }
            leaf_(Interpretation(ground_.universe, std::move(bits)));
            return;
        }
        for (Value v : {False, True}) {
            std::size_t tm = trail_.size();
            std::size_t jm = support_journal_.size();
            enqueue(var, v);
            if (flush()) {
                descend(var + 1);
            }
            undo_to(tm, jm);
        }
    }

    const GroundProgram& ground_;
    const std::function<void(const Interpretation&)>& leaf_;
    std::size_t n_;
    std::vector<Value> value_;
    std::vector<Clause> clauses_;
    std::vector<std::vector<std::size_t>> clause_occ_;
    std::vector<SupportRule> supports_;
    std::vector<std::vector<std::size_t>> support_occ_;
    std::vector<int> support_left_;
    std::vector<Parity> parity_;
    std::vector<std::vector<std::size_t>> parity_occ_;
    std::vector<AtomId> trail_;
    std::vector<std::size_t> support_journal_;
    std::vector<AtomId> queue_;
    bool conflict_;
};

}  // namespace

void enumerate_candidates(const GroundProgram& ground, std::span<const GroundRule> clause_rules,
                          const ClampSet& clamps, std::span<const ParityConstraint> parities,
                          const std::function<void(const Interpretation&)>& leaf) {
    Search search(ground, clause_rules, clamps, parities, leaf);
    search.run();
}

std::vector<Interpretation> stable_models(const GroundProgram& ground, const ClampSet& clamps,
                                          const SolveLimits& limits) {
    std::vector<Interpretation> out;
    enumerate_candidates(ground, ground.rules, clamps, {},
                         [&](const Interpretation& interp) {
                             if (is_stable(ground.rules, interp, limits)) {
                                 out.push_back(interp);
                             }
                         });
    return out;
}

std::vector<Interpretation> stable_models_under_parity(const GroundProgram& ground,
                                                       const ClampSet& clamps,
                                                       std::span<const ParityConstraint> parities,
                                                       const SolveLimits& limits) {
    std::vector<Interpretation> out;
    enumerate_candidates(ground, ground.rules, clamps, parities,
                         [&](const Interpretation& interp) {
                             if (is_stable(ground.rules, interp, limits)) {
                                 out.push_back(interp);
                             }
                         });
    return out;
}

}  // namespace lpmln

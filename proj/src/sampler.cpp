// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include "lpmln/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "lpmln/semantics.hpp"

namespace lpmln {

namespace {

std::vector<ParityConstraint> random_parities(const Universe& universe, int count,
                                              CounterRng& rng) {
    std::vector<ParityConstraint> out;
    for (int c = 0; c < count; ++c) {
        ParityConstraint p;
        for (AtomId a = 0; a < universe.size(); ++a) {
            if (rng.next_bool()) {
                p.atoms.push_back(a);
            }
        }
        p.odd = rng.next_bool();
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace

Interpretation uniform_stable_model(const GroundProgram& ground,
                                    std::span<const std::size_t> forbidden,
                                    const UniformStrategy& strategy, CounterRng& rng) {
    auto qualifies = [&](const Interpretation& interp) {
        return std::all_of(forbidden.begin(), forbidden.end(), [&](std::size_t idx) {
            return rule_false_in(ground.rules[idx], interp.bits());
        });
    };
    if (strategy.kind == StrategyKind::XorHash) {
        std::vector<GroundRule> hard;
        for (const auto& r : ground.rules) {
            if (r.weight.is_hard()) {
                hard.push_back(r);
            }
        }
        for (int trial = 0; trial < strategy.xor_trials; ++trial) {
            int constraints = std::max(0, strategy.xor_constraints - trial);
            auto parities = random_parities(*ground.universe, constraints, rng);
            std::vector<Interpretation> found;
            enumerate_candidates(ground, hard, {}, parities, [&](const Interpretation& interp) {
                if (qualifies(interp) && sm_member(ground, interp)) {
                    found.push_back(interp);
                }
            });
            if (!found.empty()) {
                return found[rng.next_below(found.size())];
            }
        }
        // trial budget exhausted: fall back to exact enumeration
    }
    std::vector<Interpretation> all;
    for (const auto& m : sm_set(ground)) {
        if (qualifies(m)) {
            all.push_back(m);
        }
    }
    if (all.empty()) {
        throw UsageError("no stable model falsifies every forbidden rule");
    }
    return all[rng.next_below(all.size())];
}

// ---------------------------------------------------------------------------
// MC-ASP
// ---------------------------------------------------------------------------

namespace {

struct SoftInstance {
    AtomId unsat_atom;   // in the translated universe
    double weight;       // w_i <= 0
    double include_probability;  // 1 - e^{w_i}
};

}  // namespace

SampleSet mc_asp(const Program& program, int n_samples, const UniformStrategy& strategy,
                 std::uint64_t seed, const McAspOptions& options) {
    if (program.parameterized()) {
        throw UsageError("mc_asp requires bound weights");
    }
    for (const auto& r : program.rules) {
        if (r.weight.is_soft() && r.weight.value > 0.0) {
            throw UsageError("mc_asp requires non-positive soft weights; apply to_negative first");
        }
    }
    if (n_samples < 1) {
        throw UsageError("sample count must be positive");
    }

    auto original_ground = ground(program);
    auto translation = unsat_translation(program);
    auto tg = ground(translation.program);

    ClampSet clamps;
    if (options.evidence) {
        clamps = ClampSet::from_observation(*options.evidence, *tg.universe);
    }
    auto models = stable_models(tg, clamps);
    if (models.empty()) {
        if (options.evidence) {
            throw DataError("observation has zero probability");
        }
        throw SemanticError("no probabilistic stable model");
    }

    // One ground soft instance per unsat atom; its truth in a model is
    // exactly the falsehood of the instance.
    std::vector<SoftInstance> instances;
    for (AtomId id = 0; id < tg.universe->size(); ++id) {
        const Atom& a = tg.universe->atom(id);
        if (a.predicate != "unsat") {
            continue;
        }
        int origin = std::atoi(a.args.at(0).name.c_str());
        double w = 0.0;
        for (const auto& p : translation.penalties) {
            if (p.origin == origin) {
                w = p.weight;
                break;
            }
        }
        instances.push_back({id, w, 1.0 - std::exp(w)});
    }

    // Per-model caches: instance-falsehood bits, projected sample, n_i.
    std::size_t nm = models.size();
    std::vector<Bitset> falsehood(nm);
    std::vector<Interpretation> projected(nm);
    std::vector<std::vector<int>> counts(nm);
    std::vector<std::optional<AtomId>> atom_map(original_ground.universe->size());
    for (AtomId a = 0; a < original_ground.universe->size(); ++a) {
        atom_map[a] = tg.universe->find(original_ground.universe->atom(a));
    }
    for (std::size_t j = 0; j < nm; ++j) {
        const Bitset& bits = models[j].bits();
        Bitset fb(instances.size());
        for (std::size_t k = 0; k < instances.size(); ++k) {
            if (bits.test(instances[k].unsat_atom)) {
                fb.set(k);
            }
        }
        falsehood[j] = std::move(fb);
        Bitset pb(original_ground.universe->size());
        for (AtomId a = 0; a < original_ground.universe->size(); ++a) {
            if (atom_map[a] && bits.test(*atom_map[a])) {
                pb.set(a);
            }
        }
        projected[j] = Interpretation(original_ground.universe, std::move(pb));
        counts[j] = penalty_counts(translation, tg, bits);
    }

    // Initial model: the caller's, or the lexicographically first sample in
    // the program's own base.
    std::size_t current = 0;
    {
        std::vector<std::size_t> order(nm);
        for (std::size_t j = 0; j < nm; ++j) {
            order[j] = j;
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return projected[a].lex_less(projected[b]);
        });
        current = order.front();
        if (options.initial) {
            // match by agreement on the initial's own vocabulary, so callers
            // may hand back a sample projected onto a sub-vocabulary; atoms
            // outside this program's base count as false
            const Interpretation& init = *options.initial;
            const Universe& iu = *init.universe();
            bool found = false;
            for (std::size_t j = 0; j < nm && !found; ++j) {
                bool agree = true;
                for (AtomId a = 0; a < iu.size() && agree; ++a) {
                    auto id = tg.universe->find(iu.atom(a));
                    bool model_value = id && models[j].contains(*id);
                    agree = model_value == init.contains(a);
                }
                if (agree) {
                    current = j;
                    found = true;
                }
            }
            if (!found) {
                throw UsageError("initial interpretation is not a qualifying stable model");
            }
        }
    }

    SampleSet out;
    out.seed = seed;
    out.chain_length = n_samples;
    out.instance_totals.assign(static_cast<std::size_t>(original_ground.origin_count), 0);
    for (const auto& r : original_ground.rules) {
        ++out.instance_totals[static_cast<std::size_t>(r.origin_index) - 1];
    }

    CounterRng rng(seed);
    CounterRng xor_rng = rng.fork(0x584f52);
    int total_steps = options.burn_in + n_samples * options.thinning;
    for (int step = 0; step < total_steps; ++step) {
        // build M from the soft instances false in the current sample
        Bitset m_set(instances.size());
        int m_count = 0;
        for (std::size_t k = 0; k < instances.size(); ++k) {
            if (falsehood[current].test(k) && rng.next_double() < instances[k].include_probability) {
                m_set.set(k);
                ++m_count;
            }
        }
        out.m_sizes.push_back(m_count);

        std::size_t next = nm;  // invalid
        if (strategy.kind == StrategyKind::XorHash) {
            ClampSet step_clamps = clamps;
            for (std::size_t k = 0; k < instances.size(); ++k) {
                if (m_set.test(k)) {
                    step_clamps.forced_true.push_back(instances[k].unsat_atom);
                }
            }
            for (int trial = 0; trial < strategy.xor_trials && next == nm; ++trial) {
                int nconstraints = std::max(0, strategy.xor_constraints - trial);
                auto parities = random_parities(*tg.universe, nconstraints, xor_rng);
                auto found = stable_models_under_parity(tg, step_clamps, parities);
                if (!found.empty()) {
                    const Bitset& bits = found[xor_rng.next_below(found.size())].bits();
                    for (std::size_t j = 0; j < nm; ++j) {
                        if (models[j].bits() == bits) {
                            next = j;
                            break;
                        }
                    }
                }
            }
            if (next == nm) {
                ++out.xor_fallbacks;
            }
        }
        if (next == nm) {
            // exact enumeration over the cached SM list
            std::vector<std::size_t> qualifying;
            for (std::size_t j = 0; j < nm; ++j) {
                if (m_set.is_subset_of(falsehood[j])) {
                    qualifying.push_back(j);
                }
            }
            next = qualifying[rng.next_below(qualifying.size())];
        }
        current = next;
        if (step >= options.burn_in && (step - options.burn_in + 1) % options.thinning == 0) {
            out.samples.push_back(projected[current]);
            out.false_counts.push_back(counts[current]);
        }
    }
    return out;
}

}  // namespace lpmln

// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#pragma once

#include <functional>
#include <span>

#include "lpmln/core.hpp"
#include "lpmln/ground.hpp"

namespace lpmln {

// Evidence-style clamps handed to the enumerator.
struct ClampSet {
    std::vector<AtomId> forced_true;
    std::vector<AtomId> forced_false;

    // DataError if an observation atom is outside the universe.
    static ClampSet from_observation(const Observation& obs, const Universe& universe);
};

struct SolveLimits {
    // Disjunctive minimality is checked by brute force over subsets of the
    // candidate's true atoms; 2^cap is the documented limit.
    std::size_t minimality_cap = 20;
};

// Random parity constraint over the atom vector: XOR of the listed atoms
// must equal `odd`. Used by the near-uniform sampling strategy.
struct ParityConstraint {
    std::vector<AtomId> atoms;
    bool odd = false;
};

// Positive rule left after reducing away default negation.
struct ReductRule {
    std::vector<AtomId> head;
    std::vector<AtomId> body;
};

// Standard reduct: delete rules whose `not` literal is true in interp or
// whose `not not` literal is false; strip those literals from the rest.
std::vector<ReductRule> reduct(std::span<const GroundRule> rules, const Interpretation& interp);

// interp satisfies every rule and is a minimal model of the reduct. For
// non-disjunctive reducts minimality is a least-fixpoint equality; with
// disjunctive heads it is checked by subset enumeration (ResourceError past
// limits.minimality_cap true atoms).
bool is_stable(std::span<const GroundRule> rules, const Interpretation& interp,
               const SolveLimits& limits = {});

// All stable models of the (unweighted) rule set that honor the clamps, in
// lexicographic order of the atom vector. Weights on the rules are ignored.
std::vector<Interpretation> stable_models(const GroundProgram& ground,
                                          const ClampSet& clamps = {},
                                          const SolveLimits& limits = {});

// Same search restricted by parity constraints; the sampler's XOR strategy.
std::vector<Interpretation> stable_models_under_parity(const GroundProgram& ground,
                                                       const ClampSet& clamps,
                                                       std::span<const ParityConstraint> parities,
                                                       const SolveLimits& limits = {});

// Backtracking enumerator shared by the solver and the LP^MLN semantics:
// candidates must classically satisfy `clause_rules`, every true atom keeps
// at least one head occurrence whose body is not classically falsified
// (support pruning, sound for stable models), and `leaf` decides acceptance.
// Enumeration visits candidates in lexicographic order.
void enumerate_candidates(const GroundProgram& ground, std::span<const GroundRule> clause_rules,
                          const ClampSet& clamps, std::span<const ParityConstraint> parities,
                          const std::function<void(const Interpretation&)>& leaf);

}  // namespace lpmln

// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#pragma once

#include "lpmln/core.hpp"
#include "lpmln/rng.hpp"
#include "lpmln/solver.hpp"
#include "lpmln/transforms.hpp"

namespace lpmln {

enum class StrategyKind : std::uint8_t { ExactEnumeration, XorHash };

// How step 2(c) draws a stable model. Exact enumeration is the default and
// the test oracle; the XOR strategy prunes with random parity constraints
// and falls back to enumeration when the trial budget is exhausted.
struct UniformStrategy {
    StrategyKind kind = StrategyKind::ExactEnumeration;
    int xor_constraints = 3;
    int xor_trials = 8;

    static UniformStrategy exact() { return {}; }
    static UniformStrategy xor_hash(int constraints = 3, int trials = 8) {
        return {StrategyKind::XorHash, constraints, trials};
    }
};

struct SampleSet {
    std::vector<Interpretation> samples;          // over the input program's own base
    std::vector<std::vector<int>> false_counts;   // per sample: n_i per input rule origin
    std::vector<int> instance_totals;             // ground instances per rule origin
    std::uint64_t seed = 0;
    int chain_length = 0;                         // N (samples emitted)
    std::vector<int> m_sizes;                     // |M| per chain step
    int xor_fallbacks = 0;
};

struct McAspOptions {
    int burn_in = 0;
    int thinning = 1;
    std::optional<Observation> evidence;          // sample Pi union O
    std::optional<Interpretation> initial;        // default: lexicographically
                                                  // first qualifying model
};

// MC-ASP. Requires every soft weight <= 0 (UsageError directing to
// to_negative otherwise) and a non-empty qualifying SM set (SemanticError /
// DataError under evidence). Deterministic for fixed (program, N, strategy,
// seed, options).
SampleSet mc_asp(const Program& program, int n_samples, const UniformStrategy& strategy,
                 std::uint64_t seed, const McAspOptions& options = {});

// One draw from the probabilistic stable models of the ground program on
// which every rule instance in `forbidden` (indices into ground.rules) is
// false, i.e. body true and head false. Precondition: at least one such
// model exists (UsageError otherwise).
Interpretation uniform_stable_model(const GroundProgram& ground,
                                    std::span<const std::size_t> forbidden,
                                    const UniformStrategy& strategy, CounterRng& rng);

}  // namespace lpmln

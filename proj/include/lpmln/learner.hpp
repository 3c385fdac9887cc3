// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#pragma once

#include "lpmln/core.hpp"
#include "lpmln/sampler.hpp"

namespace lpmln {

struct LearnConfig {
    enum class Mode : std::uint8_t { Exact, Mcmc };

    double learning_rate = 0.1;
    double delta = 0.001;  // termination: max_i |w_i^j - w_i^{j-1}| < delta
    int max_iterations = 500;
    int samples_per_iteration = 50;
    Mode mode = Mode::Exact;
    std::vector<double> initial_weights;  // empty = all zeros
    std::uint64_t seed = 0;
    UniformStrategy strategy;
    int burn_in = 0;
    int thinning = 1;
    double learning_rate_decay = 1.0;  // per-iteration multiplier; 1 = fixed
    int jobs = 1;                      // cap on concurrent chains
};

struct LearnResult {
    std::vector<double> weights;  // one per parameter index
    std::vector<std::vector<double>> weight_trace;    // per iteration
    std::vector<std::vector<double>> gradient_trace;  // per iteration
    std::vector<double> gradient_norm_history;        // l2 norms
    bool converged = false;
    int iterations = 0;
    std::uint64_t seed = 0;
};

// Exact log-likelihood of the observations under a bound program: ln P(I)
// for complete observations, the partial-evidence ratio otherwise, summed
// over multiple observations. DataError when an observation has zero
// probability.
double log_likelihood(const Program& bound_program, std::span<const Observation> observations);

// Exact gradient of the log-likelihood with respect to each soft rule's
// weight, in rule order: -n_i(I) + E[n_i] (complete), with the clamped
// expectation replacing n_i(I) for partial observations, summed over
// multiple observations.
std::vector<double> gradient_exact(const Program& bound_program,
                                   std::span<const Observation> observations);

// Gradient-ascent weight learning for a parameterized program. Exact mode
// computes E[n_i] from the enumerated SM table; mcmc mode estimates it from
// MC-ASP samples of the sign-normalized program (and estimates the clamped
// term by sampling under the observation's clamps when it is partial).
LearnResult learn(const Program& parameterized, std::span<const Observation> observations,
                  const LearnConfig& config = {});

// Closed form for k-coherent programs and complete data: w_i =
// ln(m_i(I) / n_i(I)) per probabilistic fact, indexed by parameter.
// UsageError when the program is not verified coherent or the observation is
// incomplete; DataError on degenerate counts.
std::vector<double> learn_closed_form(const Program& parameterized, const Observation& complete);

}  // namespace lpmln

// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include "lpmln/learner.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "lpmln/semantics.hpp"
#include "lpmln/transforms.hpp"

namespace lpmln {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Enumerated SM table with per-model false-count vectors; weights enter only
// through the log-weight recomputation, so one table serves a whole
// gradient-ascent run.
struct ExactEngine {
    GroundProgram ground_program;
    std::vector<Interpretation> models;
    std::vector<std::vector<int>> counts;  // per model, per origin
    std::vector<int> soft_origins;         // origins with soft (or bound) weight

    explicit ExactEngine(const Program& bound) {
        ground_program = ground(bound);
        models = sm_set(ground_program);
        if (models.empty()) {
            throw SemanticError("no probabilistic stable model");
        }
        counts.reserve(models.size());
        for (const auto& m : models) {
            counts.push_back(false_counts(ground_program, m));
        }
        for (const auto& r : bound.rules) {
            if (!r.weight.is_hard()) {
                soft_origins.push_back(r.rule_index);
            }
        }
    }

    std::vector<double> log_weights(std::span<const double> origin_weights) const {
        std::vector<double> out(models.size(), 0.0);
        for (std::size_t j = 0; j < models.size(); ++j) {
            for (int origin : soft_origins) {
                out[j] -= origin_weights[static_cast<std::size_t>(origin) - 1] *
                          counts[j][static_cast<std::size_t>(origin) - 1];
            }
        }
        return out;
    }

    // Indices of models satisfying the observation.
    std::vector<std::size_t> satisfying(const Observation& obs) const {
        ClampSet clamps = ClampSet::from_observation(obs, *ground_program.universe);
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < models.size(); ++j) {
            const Bitset& bits = models[j].bits();
            bool ok = std::all_of(clamps.forced_true.begin(), clamps.forced_true.end(),
                                  [&](AtomId a) { return bits.test(a); }) &&
                      std::none_of(clamps.forced_false.begin(), clamps.forced_false.end(),
                                   [&](AtomId a) { return bits.test(a); });
            if (ok) {
                out.push_back(j);
            }
        }
        if (out.empty()) {
            throw DataError("observation has zero probability");
        }
        return out;
    }
};

double log_sum_exp(std::span<const double> xs, std::span<const std::size_t> idx) {
    double mx = kNegInf;
    for (std::size_t i : idx) {
        mx = std::max(mx, xs[i]);
    }
    double acc = 0.0;
    for (std::size_t i : idx) {
        acc += std::exp(xs[i] - mx);
    }
    return mx + std::log(acc);
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = i;
    }
    return out;
}

std::vector<double> origin_weight_vector(const Program& bound) {
    std::vector<double> out(bound.rules.size(), 0.0);
    for (const auto& r : bound.rules) {
        if (r.weight.is_soft()) {
            out[static_cast<std::size_t>(r.rule_index) - 1] = r.weight.value;
        } else if (r.weight.is_parameter()) {
            throw UsageError("program carries unbound parameters; bind weights first");
        }
    }
    return out;
}

double engine_log_likelihood(const ExactEngine& engine, std::span<const double> w,
                             std::span<const Observation> observations) {
    auto logw = engine.log_weights(w);
    auto all = all_indices(engine.models.size());
    double log_z = log_sum_exp(logw, all);
    double acc = 0.0;
    for (const auto& obs : observations) {
        acc += log_sum_exp(logw, engine.satisfying(obs)) - log_z;
    }
    return acc;
}

std::vector<double> engine_gradient(const ExactEngine& engine, std::span<const double> w,
                                    std::span<const Observation> observations) {
    auto logw = engine.log_weights(w);
    auto all = all_indices(engine.models.size());
    double log_z = log_sum_exp(logw, all);

    std::size_t norigins = engine.counts.front().size();
    std::vector<double> free_expect(norigins, 0.0);
    for (std::size_t j = 0; j < engine.models.size(); ++j) {
        double p = std::exp(logw[j] - log_z);
        for (std::size_t i = 0; i < norigins; ++i) {
            free_expect[i] += p * engine.counts[j][i];
        }
    }

    std::vector<double> grad(norigins, 0.0);
    for (const auto& obs : observations) {
        auto sat = engine.satisfying(obs);
        double log_zo = log_sum_exp(logw, sat);
        std::vector<double> clamped(norigins, 0.0);
        for (std::size_t j : sat) {
            double p = std::exp(logw[j] - log_zo);
            for (std::size_t i = 0; i < norigins; ++i) {
                clamped[i] += p * engine.counts[j][i];
            }
        }
        for (std::size_t i = 0; i < norigins; ++i) {
            grad[i] += -clamped[i] + free_expect[i];
        }
    }
    return grad;
}

std::vector<double> soft_entries(const Program& bound, std::span<const double> per_origin) {
    std::vector<double> out;
    for (const auto& r : bound.rules) {
        if (!r.weight.is_hard()) {
            out.push_back(per_origin[static_cast<std::size_t>(r.rule_index) - 1]);
        }
    }
    return out;
}

}  // namespace

double log_likelihood(const Program& bound_program, std::span<const Observation> observations) {
    ExactEngine engine(bound_program);
    return engine_log_likelihood(engine, origin_weight_vector(bound_program), observations);
}

std::vector<double> gradient_exact(const Program& bound_program,
                                   std::span<const Observation> observations) {
    ExactEngine engine(bound_program);
    auto grad = engine_gradient(engine, origin_weight_vector(bound_program), observations);
    return soft_entries(bound_program, grad);
}

// ---------------------------------------------------------------------------
// Gradient ascent
// ---------------------------------------------------------------------------

namespace {

struct McmcContext {
    GroundProgram original_ground;  // structure is weight-independent
    std::vector<char> obs_is_model_checked;
    // Chains continue across iterations: the SM set does not depend on the
    // weights, so the previous iteration's last sample is still a qualifying
    // stable model and avoids restart bias. Slot 0 is the free chain. The
    // starts are kept in the original program's vocabulary; mc_asp lifts
    // them into whatever shape to_negative produced for the current signs.
    std::vector<std::optional<Interpretation>> warm_start;
};

// Per-origin expectation of n_i from a sample set mapped back to the
// original program's rule indices.
std::vector<double> mean_original_counts(const NegTranslation& neg, const SampleSet& samples,
                                         int original_rule_count) {
    std::vector<double> acc(static_cast<std::size_t>(original_rule_count), 0.0);
    for (const auto& per_sample : samples.false_counts) {
        auto mapped = original_counts(neg, per_sample, samples.instance_totals,
                                      original_rule_count);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            acc[i] += mapped[i];
        }
    }
    for (auto& v : acc) {
        v /= static_cast<double>(samples.false_counts.size());
    }
    return acc;
}

std::vector<double> mcmc_gradient(const Program& bound, McmcContext& ctx,
                                  std::span<const Observation> observations,
                                  const LearnConfig& config, std::uint64_t iteration) {
    auto neg = to_negative(bound);
    CounterRng iteration_rng = CounterRng(config.seed).fork(iteration);
    McAspOptions base_options;
    base_options.burn_in = config.burn_in;
    base_options.thinning = config.thinning;

    int norigins = static_cast<int>(bound.rules.size());
    using ChainResult = std::pair<std::vector<double>, Interpretation>;
    auto run_chain = [&](std::optional<Observation> evidence, std::uint64_t label,
                         std::size_t warm_slot) -> ChainResult {
        McAspOptions options = base_options;
        options.evidence = std::move(evidence);
        options.initial = ctx.warm_start[warm_slot];
        std::uint64_t chain_seed = iteration_rng.fork(label).next_u64();
        SampleSet s = mc_asp(neg.program, config.samples_per_iteration, config.strategy,
                             chain_seed, options);
        // keep the continuation point in the stable original vocabulary
        Interpretation last(ctx.original_ground.universe);
        for (AtomId a = 0; a < ctx.original_ground.universe->size(); ++a) {
            if (s.samples.back().contains(ctx.original_ground.universe->atom(a))) {
                last.insert(a);
            }
        }
        return {mean_original_counts(neg, s, norigins), last};
    };

    // free expectation chain plus one clamped chain per partial observation
    if (ctx.warm_start.empty()) {
        ctx.warm_start.assign(observations.size() + 1, std::nullopt);
    }
    std::vector<std::function<ChainResult()>> tasks;
    std::vector<std::size_t> slot_of_task{0};
    tasks.emplace_back([&] { return run_chain(std::nullopt, 0, 0); });
    std::vector<int> task_of_obs(observations.size(), -1);
    std::vector<std::vector<int>> complete_counts(observations.size());
    for (std::size_t k = 0; k < observations.size(); ++k) {
        const Observation& obs = observations[k];
        if (is_complete(obs, *ctx.original_ground.universe)) {
            Interpretation interp(ctx.original_ground.universe);
            for (const auto& a : obs.clamped_true()) {
                interp.insert(a);
            }
            if (!ctx.obs_is_model_checked[k]) {
                if (!sm_member(ctx.original_ground, interp)) {
                    throw DataError("observation has zero probability");
                }
                ctx.obs_is_model_checked[k] = 1;
            }
            complete_counts[k] = false_counts(ctx.original_ground, interp);
        } else {
            task_of_obs[k] = static_cast<int>(tasks.size());
            slot_of_task.push_back(k + 1);
            tasks.emplace_back([&, k] { return run_chain(observations[k], k + 1, k + 1); });
        }
    }

    std::vector<ChainResult> results(tasks.size());
    if (config.jobs > 1) {
        std::vector<std::future<ChainResult>> futures;
        for (auto& t : tasks) {
            futures.push_back(std::async(std::launch::async, t));
        }
        for (std::size_t i = 0; i < futures.size(); ++i) {
            results[i] = futures[i].get();
        }
    } else {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            results[i] = tasks[i]();
        }
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
        ctx.warm_start[slot_of_task[i]] = results[i].second;
    }

    const std::vector<double>& free_expect = results[0].first;
    std::vector<double> grad(static_cast<std::size_t>(norigins), 0.0);
    for (std::size_t k = 0; k < observations.size(); ++k) {
        for (std::size_t i = 0; i < grad.size(); ++i) {
            double term = task_of_obs[k] >= 0
                              ? results[static_cast<std::size_t>(task_of_obs[k])].first[i]
                              : static_cast<double>(complete_counts[k][i]);
            grad[i] += -term + free_expect[i];
        }
    }
    return grad;
}

}  // namespace

LearnResult learn(const Program& parameterized, std::span<const Observation> observations,
                  const LearnConfig& config) {
    int m = parameterized.parameter_count();
    if (m == 0) {
        throw UsageError("program has no parameters to learn");
    }
    if (observations.empty()) {
        throw UsageError("no observations given");
    }
    std::vector<double> w(static_cast<std::size_t>(m), 0.0);
    if (!config.initial_weights.empty()) {
        if (config.initial_weights.size() != w.size()) {
            throw UsageError("initial weight vector has wrong length");
        }
        w = config.initial_weights;
    }
    // parameter index -> rule index
    std::vector<int> rule_of_param(static_cast<std::size_t>(m), 0);
    for (const auto& r : parameterized.rules) {
        if (r.weight.is_parameter()) {
            rule_of_param[static_cast<std::size_t>(r.weight.index) - 1] = r.rule_index;
        }
    }

    std::optional<ExactEngine> engine;
    std::optional<McmcContext> mcmc;
    if (config.mode == LearnConfig::Mode::Exact) {
        engine.emplace(bind_parameters(parameterized, w));
    } else {
        mcmc.emplace();
        mcmc->original_ground = ground(bind_parameters(parameterized, w));
        mcmc->obs_is_model_checked.assign(observations.size(), 0);
    }

    LearnResult result;
    result.seed = config.seed;
    double rate = config.learning_rate;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        std::vector<double> origin_grad;
        if (engine) {
            Program bound = bind_parameters(parameterized, w);
            origin_grad = engine_gradient(*engine, origin_weight_vector(bound), observations);
        } else {
            Program bound = bind_parameters(parameterized, w);
            origin_grad = mcmc_gradient(bound, *mcmc, observations, config,
                                        static_cast<std::uint64_t>(iter));
        }
        std::vector<double> grad(w.size());
        for (std::size_t p = 0; p < w.size(); ++p) {
            grad[p] = origin_grad[static_cast<std::size_t>(rule_of_param[p]) - 1];
        }
        double max_delta = 0.0;
        double norm = 0.0;
        for (std::size_t p = 0; p < w.size(); ++p) {
            double step = rate * grad[p];
            w[p] += step;
            max_delta = std::max(max_delta, std::fabs(step));
            norm += grad[p] * grad[p];
        }
        rate *= config.learning_rate_decay;
        result.weight_trace.push_back(w);
        result.gradient_trace.push_back(grad);
        result.gradient_norm_history.push_back(std::sqrt(norm));
        result.iterations = iter + 1;
        if (max_delta < config.delta) {
            result.converged = true;
            break;
        }
    }
    result.weights = w;
    return result;
}

std::vector<double> learn_closed_form(const Program& parameterized, const Observation& complete) {
    auto report = coherence_check(parameterized);
    if (!report.is_simple || !report.k) {
        throw UsageError("closed-form learning requires a verified k-coherent program: " +
                         report.failure);
    }
    auto g = ground(parameterized);
    if (!is_complete(complete, *g.universe)) {
        throw UsageError("closed-form learning requires a complete interpretation; use learn()");
    }
    Interpretation interp(g.universe);
    for (const auto& a : complete.clamped_true()) {
        interp.insert(a);
    }

    int m = parameterized.parameter_count();
    std::vector<double> out(static_cast<std::size_t>(m), 0.0);
    // instances of each PF pattern are the ground atoms of its soft fact rule
    for (const auto& soft : report.soft_facts) {
        if (!soft.weight.is_parameter()) {
            continue;
        }
        int truecount = 0, falsecount = 0;
        for (const auto& r : g.rules) {
            if (r.origin_index != soft.rule_index) {
                continue;
            }
            if (interp.contains(r.head.front())) {
                ++truecount;
            } else {
                ++falsecount;
            }
        }
        if (truecount == 0 || falsecount == 0) {
            throw DataError("degenerate counts for " + to_string(soft.head.front()) +
                            ": m=" + std::to_string(truecount) +
                            ", n=" + std::to_string(falsecount) + " (MLE at +/-infinity)");
        }
        out[static_cast<std::size_t>(soft.weight.index) - 1] =
            std::log(static_cast<double>(truecount) / static_cast<double>(falsecount));
    }
    return out;
}

}  // namespace lpmln

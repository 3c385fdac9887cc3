// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpmln/learner.hpp"
#include "lpmln/parser.hpp"
#include "lpmln/sampler.hpp"
#include "lpmln/semantics.hpp"
#include "lpmln/transforms.hpp"

namespace lpmln::cli {

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write file: " + path);
    }
    out << text;
}

std::string significant(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::string model_line(const Interpretation& interp) {
    std::vector<std::string> names;
    for (const auto& a : interp.true_atoms()) {
        names.push_back(to_string(a));
    }
    std::sort(names.begin(), names.end());
    std::string line;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) {
            line += ' ';
        }
        line += names[i];
    }
    return line;
}

std::uint64_t seed_or_env(std::optional<std::uint64_t> seed) {
    if (seed) {
        return *seed;
    }
    if (const char* env = std::getenv("LPMLN_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0;
}

std::string table_csv(const ProbabilityTable& table) {
    std::string out;
    const Universe& u = *table.entries.front().model.universe();
    for (std::size_t i = 0; i < u.size(); ++i) {
        out += csv_quote(to_string(u.atom(static_cast<AtomId>(i)))) + ",";
    }
    out += "log_weight,probability\n";
    for (const auto& e : table.entries) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            out += e.model.contains(static_cast<AtomId>(i)) ? "1," : "0,";
        }
        out += significant(e.log_weight, 17) + "," + significant(e.probability, 17) + "\n";
    }
    return out;
}

std::string problog_text(const Program& program) {
    auto report = coherence_check(program);
    if (!report.is_simple) {
        throw SemanticError("problog output requires a simple program: " + report.failure);
    }
    std::string out;
    for (const auto& soft : report.soft_facts) {
        WeightedRule bare = soft;  // bodies are pure domain literals
        bare.weight = Weight::hard();
        std::string tail = to_string(bare);
        if (soft.weight.is_parameter()) {
            out += "t(_)::" + tail + "\n";
        } else {
            double p = probabilities_from_weights(std::vector<double>{soft.weight.value})[0];
            out += format_double(p) + "::" + tail + "\n";
        }
    }
    for (const auto& r : report.hard_rules) {
        std::string line;
        for (std::size_t i = 0; i < r.head.size(); ++i) {
            if (i) {
                line += " ; ";
            }
            line += to_string(r.head[i]);
        }
        bool first = true;
        for (const auto& l : r.body) {
            line += first ? " :- " : ", ";
            first = false;
            if (l.sign == Sign::Positive) {
                line += to_string(l.atom);
            } else if (l.sign == Sign::Negated) {
                line += "\\+" + to_string(l.atom);
            } else {
                line += "\\+ \\+" + to_string(l.atom);
            }
        }
        for (const auto& g : r.guards) {
            line += first ? " :- " : ", ";
            first = false;
            line += g.lhs.name + " \\== " + g.rhs.name;
        }
        out += line + ".\n";
    }
    return out;
}

std::string completion_text(const MlnModel& model) {
    std::string out;
    for (const auto& f : model.formulas) {
        if (f.weight) {
            out += format_double(*f.weight);
        } else {
            out += "hard";
        }
        out += " " + to_text(f.formula, *model.universe) + "\n";
    }
    return out;
}

struct ReportClock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    double wall_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"LP^MLN weight-learning toolkit"};
    app.require_subcommand(1);

    std::string program_path, evidence_path, query_text, mode, output_path, report_path;
    std::optional<std::uint64_t> seed_opt;
    bool dump_table = false;
    bool closed_form = false;
    int n = 50, max_iters = 500, burn_in = 0, thinning = 1, jobs = 1;
    double lr = 0.1, delta = 0.001, noise = 0.0;
    std::string strategy_name = "exact";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--program", program_path, "program file (.lpmln)")->required();
        cmd->add_option("--output,-o", output_path, "write primary output to a file");
    };

    CLI::App* c_ground = app.add_subcommand("ground", "ground a program");
    add_common(c_ground);

    CLI::App* c_models = app.add_subcommand(
        "models", "enumerate stable models of the rules with weights dropped");
    add_common(c_models);

    CLI::App* c_infer = app.add_subcommand("infer", "exact marginal inference");
    add_common(c_infer);
    c_infer->add_option("--query", query_text, "ground query formula");
    c_infer->add_flag("--table", dump_table, "dump the full probability table as CSV");

    CLI::App* c_sample = app.add_subcommand("sample", "MC-ASP sampling");
    add_common(c_sample);
    c_sample->add_option("--n", n, "number of samples")->default_val(50);
    c_sample->add_option("--seed", seed_opt, "rng seed (default: LPMLN_SEED or 0)");
    c_sample->add_option("--strategy", strategy_name, "exact|xor")->default_val("exact");
    c_sample->add_option("--burn-in", burn_in, "chain burn-in steps")->default_val(0);
    c_sample->add_option("--thin", thinning, "chain thinning")->default_val(1);

    CLI::App* c_translate = app.add_subcommand("translate", "program rewritings");
    add_common(c_translate);
    c_translate->add_option("--mode", mode, "unsat|neg|index:<m>|completion|problog")->required();

    CLI::App* c_learn = app.add_subcommand("learn", "maximum-likelihood weight learning");
    add_common(c_learn);
    c_learn->add_option("--evidence", evidence_path, "evidence file (.evid)")->required();
    c_learn->add_option("--mode", mode, "exact|mcmc")->default_val("exact");
    c_learn->add_option("--lr", lr, "learning rate")->default_val(0.1);
    c_learn->add_option("--delta", delta, "termination threshold")->default_val(0.001);
    c_learn->add_option("--n", n, "samples per iteration (mcmc)")->default_val(50);
    c_learn->add_option("--max-iters", max_iters, "iteration cap")->default_val(500);
    c_learn->add_option("--seed", seed_opt, "rng seed (default: LPMLN_SEED or 0)");
    c_learn->add_option("--noise", noise,
                        "augment observed predicates with noise atoms at level u "
                        "(0 = 10 + max|w| heuristic)");
    c_learn->add_flag("--closed-form", closed_form, "k-coherent closed-form counting");
    c_learn->add_option("--strategy", strategy_name, "exact|xor")->default_val("exact");
    c_learn->add_option("--report", report_path, "write the JSON learning report to a file");
    c_learn->add_option("--jobs", jobs, "cap on concurrent sampling chains")->default_val(1);

    std::vector<const char*> argv;
    argv.push_back("lpmln");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    ReportClock clock;
    json report;
    report["seed"] = nullptr;
    auto emit_report = [&](const std::string& subcommand) {
        report["subcommand"] = subcommand;
        report["wall_ms"] = clock.wall_ms();
        if (!output_path.empty()) {
            report["output"] = output_path;
        }
        err << report.dump() << "\n";
    };
    auto deliver = [&](const std::string& text) {
        if (output_path.empty()) {
            out << text;
        } else {
            spill(output_path, text);
        }
    };

    try {
        if (*c_ground) {
            Program p = parse_program(slurp(program_path));
            deliver(to_text(ground(p)));
            emit_report("ground");
        } else if (*c_models) {
            Program p = parse_program(slurp(program_path));
            for (auto& r : p.rules) {
                r.weight = Weight::hard();
            }
            auto models = stable_models(ground(p));
            std::string text;
            for (const auto& m : models) {
                text += model_line(m) + "\n";
            }
            deliver(text);
            report["model_count"] = models.size();
            emit_report("models");
        } else if (*c_infer) {
            Program p = parse_program(slurp(program_path));
            auto table = probability_table(ground(p));
            if (dump_table) {
                deliver(table_csv(table));
            } else {
                if (query_text.empty()) {
                    err << "error: --query or --table is required\n";
                    return 1;
                }
                double m = marginal(table, parse_query(query_text));
                deliver(significant(m, 10) + "\n");
            }
            report["models"] = table.entries.size();
            emit_report("infer");
        } else if (*c_sample) {
            Program p = parse_program(slurp(program_path));
            std::uint64_t seed = seed_or_env(seed_opt);
            UniformStrategy strategy = strategy_name == "xor" ? UniformStrategy::xor_hash()
                                                              : UniformStrategy::exact();
            McAspOptions options;
            options.burn_in = burn_in;
            options.thinning = thinning;
            SampleSet s = mc_asp(p, n, strategy, seed, options);
            std::string text;
            for (const auto& m : s.samples) {
                text += model_line(m) + "\n";
            }
            json stats;
            stats["seed"] = s.seed;
            stats["n"] = s.chain_length;
            stats["strategy"] = strategy_name;
            stats["burn_in"] = burn_in;
            stats["thinning"] = thinning;
            stats["mean_m_size"] = s.m_sizes.empty()
                                       ? 0.0
                                       : std::accumulate(s.m_sizes.begin(), s.m_sizes.end(), 0.0) /
                                             static_cast<double>(s.m_sizes.size());
            stats["xor_fallbacks"] = s.xor_fallbacks;
            text += stats.dump() + "\n";
            deliver(text);
            report["seed"] = seed;
            emit_report("sample");
        } else if (*c_translate) {
            Program p = parse_program(slurp(program_path));
            if (mode == "unsat") {
                deliver(to_string(unsat_translation(p).program));
            } else if (mode == "neg") {
                deliver(to_string(to_negative(p).program));
            } else if (mode.rfind("index:", 0) == 0) {
                int m = std::atoi(mode.c_str() + 6);
                deliver(to_string(index_for_multi(p, m)));
            } else if (mode == "completion") {
                deliver(completion_text(completion(p)));
            } else if (mode == "problog") {
                deliver(problog_text(p));
            } else {
                err << "error: unknown translate mode " << mode << "\n";
                return 1;
            }
            emit_report("translate");
        } else if (*c_learn) {
            Program p = parse_program(slurp(program_path));
            auto observations = parse_evidence(slurp(evidence_path));
            if (c_learn->count("--noise")) {
                double u = noise > 0.0 ? noise : default_noise_level(p);
                std::set<std::string> preds;
                for (const auto& obs : observations) {
                    for (const auto& a : obs.clamped_true()) {
                        preds.insert(a.predicate);
                    }
                    for (const auto& a : obs.clamped_false()) {
                        preds.insert(a.predicate);
                    }
                }
                std::vector<std::string> plist(preds.begin(), preds.end());
                p = noise_augment(p, plist, u);
                report["noise_u"] = u;
            }
            std::uint64_t seed = seed_or_env(seed_opt);
            report["config"] = {{"lr", lr},          {"delta", delta},
                                {"n", n},            {"max_iters", max_iters},
                                {"strategy", strategy_name}, {"jobs", jobs}};
            std::vector<double> weights;
            if (closed_form) {
                if (observations.size() != 1) {
                    throw UsageError("closed-form learning expects a single observation");
                }
                weights = learn_closed_form(p, observations.front());
                report["mode"] = "closed-form";
            } else {
                LearnConfig config;
                config.learning_rate = lr;
                config.delta = delta;
                config.max_iterations = max_iters;
                config.samples_per_iteration = n;
                config.mode = mode == "mcmc" ? LearnConfig::Mode::Mcmc : LearnConfig::Mode::Exact;
                config.seed = seed;
                config.jobs = jobs;
                config.strategy = strategy_name == "xor" ? UniformStrategy::xor_hash()
                                                         : UniformStrategy::exact();
                LearnResult result = learn(p, observations, config);
                weights = result.weights;
                report["mode"] = mode;
                report["converged"] = result.converged;
                report["iterations"] = result.iterations;
                report["weights"] = result.weights;
                json trace = json::array();
                for (std::size_t i = 0; i < result.weight_trace.size(); ++i) {
                    trace.push_back({{"weights", result.weight_trace[i]},
                                     {"gradient", result.gradient_trace[i]},
                                     {"gradient_norm", result.gradient_norm_history[i]}});
                }
                if (!report_path.empty()) {
                    json full = report;
                    full["trace"] = trace;
                    full["seed"] = seed;
                    spill(report_path, full.dump(2) + "\n");
                    report["report"] = report_path;
                }
            }
            deliver(to_string(bind_parameters(p, weights)));
            report["seed"] = seed;
            report["learned_weights"] = weights;
            emit_report("learn");
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace lpmln::cli

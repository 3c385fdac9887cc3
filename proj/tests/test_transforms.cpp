// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "lpmln/transforms.hpp"
#include "testutil.hpp"

using namespace lpmln;
using namespace lpmln::test;
using Catch::Approx;

namespace {

// Distribution over the original vocabulary for comparing rewrites.
std::map<std::vector<std::string>, double> projected_distribution(const Program& p,
                                                                  const Universe& onto) {
    auto table = probability_table(ground(p));
    std::map<std::vector<std::string>, double> out;
    for (const auto& e : table.entries) {
        std::vector<std::string> key;
        for (const auto& a : e.model.true_atoms()) {
            if (onto.find(a)) {
                key.push_back(to_string(a));
            }
        }
        std::sort(key.begin(), key.end());
        out[key] += e.probability;
    }
    return out;
}

}  // namespace

TEST_CASE("unsat translation") {
    SECTION("soft rule becomes the unsat pair plus a penalty record") {
        auto tr = unsat_translation(parse_program("1 p :- q. {q}."));
        REQUIRE(tr.penalties.size() == 1);
        CHECK(tr.penalties[0].origin == 1);
        CHECK(tr.penalties[0].weight == 1.0);
        REQUIRE(tr.program.rules.size() == 3);
        const auto& define = tr.program.rules[0];
        CHECK(define.weight.is_hard());
        CHECK(define.head[0].predicate == "unsat");
        CHECK(define.head[0].args[0].name == "1");
        CHECK(define.body.back().sign == Sign::Negated);
        const auto& restore = tr.program.rules[1];
        CHECK(restore.head[0].predicate == "p");
        CHECK(restore.body.back().atom.predicate == "unsat");
    }
    SECTION("hard rules pass through") {
        auto tr = unsat_translation(parse_program("p :- q. {q}."));
        CHECK(tr.program.rules.size() == 2);
        CHECK(tr.penalties.empty());
    }
    SECTION("disjunctive heads expand not Head") {
        auto tr = unsat_translation(parse_program("1 a ; b :- q. {q}."));
        const auto& define = tr.program.rules[0];
        int negated = 0;
        for (const auto& l : define.body) {
            if (l.sign == Sign::Negated) {
                ++negated;
            }
        }
        CHECK(negated == 2);
    }
    SECTION("name collision") {
        CHECK_THROWS_AS(unsat_translation(parse_program("1 unsat :- q. {q}.")), SemanticError);
    }
}

TEST_CASE("to_negative") {
    SECTION("positive weight becomes the triple") {
        auto tr = to_negative(parse_program("{flip}. 0.5 head :- flip."));
        REQUIRE(tr.soft_map.size() == 1);
        CHECK(tr.soft_map[0].rewritten);
        const auto& zero = tr.program.rules[static_cast<std::size_t>(tr.soft_map[0].output_soft_index) - 1];
        CHECK(zero.weight == Weight::soft(0.0));
        const auto& constraint =
            tr.program.rules[static_cast<std::size_t>(tr.soft_map[0].output_constraint_index) - 1];
        CHECK(constraint.weight == Weight::soft(-0.5));
        CHECK(constraint.head.empty());
        for (const auto& r : tr.program.rules) {
            if (r.weight.is_soft()) {
                CHECK(r.weight.value <= 0.0);
            }
        }
    }
    SECTION("non-positive weights are untouched") {
        Program p = parse_program("{flip}. -0.5 head :- flip.");
        auto tr = to_negative(p);
        CHECK(tr.program == p);
    }
    SECTION("mixed signs rewrite only the positive rules") {
        auto tr = to_negative(parse_program("1 a. -1 b. {c}."));
        int soft_count = 0;
        for (const auto& r : tr.program.rules) {
            if (r.weight.is_soft()) {
                CHECK(r.weight.value <= 0.0);
                ++soft_count;
            }
        }
        CHECK(soft_count == 3);  // 0:a, -1: :- not neg, and -1 b kept
    }
    SECTION("distribution is preserved") {
        CounterRng rng(401);
        int checked = 0;
        for (int round = 0; round < 150 && checked < 60; ++round) {
            Program p = random_program(rng);
            auto g = ground(p);
            std::map<std::vector<std::string>, double> base;
            try {
                base = projected_distribution(p, *g.universe);
            } catch (const SemanticError&) {
                continue;  // empty SM
            }
            ++checked;
            auto tr = to_negative(p);
            auto negd = projected_distribution(tr.program, *g.universe);
            REQUIRE(negd.size() == base.size());
            for (const auto& [key, prob] : base) {
                REQUIRE(negd.count(key) == 1);
                CHECK(std::fabs(negd[key] - prob) <= 1e-9);
            }
        }
        CHECK(checked == 60);
    }
}

TEST_CASE("index_for_multi") {
    SECTION("coin with three examples") {
        Program p = index_for_multi(parse_program("{flip}. 1 head :- flip."), 3);
        auto g = ground(p);
        CHECK(g.universe->find(atom("flip(1)")));
        CHECK(g.universe->find(atom("head(3)")));
        CHECK_FALSE(g.universe->find(atom("flip")));
    }
    SECTION("m = 1 is isomorphic") {
        Program p = index_for_multi(parse_program("{flip}. 1 head :- flip."), 1);
        auto table = probability_table(ground(p));
        auto base = probability_table(ground(parse_program("{flip}. 1 head :- flip.")));
        REQUIRE(table.entries.size() == base.entries.size());
        for (std::size_t i = 0; i < table.entries.size(); ++i) {
            CHECK(table.entries[i].probability == Approx(base.entries[i].probability));
        }
    }
    SECTION("merge builds the Example 1 interpretation") {
        std::vector<Observation> obs = {observe({"flip"}, {"head"}), observe({"flip"}, {"head"}),
                                        observe({"flip", "head"}, {})};
        Observation merged = merge_observations(obs);
        CHECK(merged.clamped_true() ==
              std::vector<Atom>{atom("flip(1)"), atom("flip(2)"), atom("flip(3)"),
                                atom("head(3)")});
        CHECK(merged.clamped_false() == std::vector<Atom>{atom("head(1)"), atom("head(2)")});
    }
    SECTION("indexed examples multiply probabilities") {
        double w = 0.7;
        Program coin = parse_program("{flip}. " + format_double(w) + " head :- flip.");
        auto base_table = probability_table(ground(coin));
        Program indexed = index_for_multi(coin, 2);
        auto table = probability_table(ground(indexed));
        // P over the indexed program of (I1, I2) = product of the parts
        auto prob_of = [&](const ProbabilityTable& t, const std::vector<std::string>& atoms) {
            for (const auto& e : t.entries) {
                std::vector<std::string> names;
                for (const auto& a : e.model.true_atoms()) {
                    if (a.predicate != "example_index") {
                        names.push_back(to_string(a));
                    }
                }
                std::sort(names.begin(), names.end());
                std::vector<std::string> want = atoms;
                std::sort(want.begin(), want.end());
                if (names == want) {
                    return e.probability;
                }
            }
            return 0.0;
        };
        double p_flip = prob_of(base_table, {"flip"});
        double p_fh = prob_of(base_table, {"flip", "head"});
        CHECK(prob_of(table, {"flip(1)", "flip(2)", "head(2)"}) ==
              Approx(p_flip * p_fh).epsilon(1e-9));
        CHECK(prob_of(table, {"flip(1)", "flip(2)"}) == Approx(p_flip * p_flip).epsilon(1e-9));
    }
}

TEST_CASE("noise_augment") {
    Program coin3 = index_for_multi(parse_program("{flip}. 1 head :- flip."), 3);
    SECTION("adds bridge rules and noise facts per instance") {
        std::vector<std::string> preds{"head"};
        Program noisy = noise_augment(coin3, preds, 5.0);
        auto g = ground(noisy);
        CHECK(g.universe->find(atom("noise_head(1)")));
        int bridges = 0, facts = 0;
        for (const auto& r : noisy.rules) {
            if (!r.head.empty() && r.head[0].predicate == "head" && !r.body.empty() &&
                r.body[0].atom.predicate == "noise_head") {
                ++bridges;
            }
            if (!r.head.empty() && r.head[0].predicate == "noise_head" && r.body.empty()) {
                CHECK(r.weight == Weight::soft(-5.0));
                ++facts;
            }
        }
        CHECK(bridges == 3);
        CHECK(facts == 3);
    }
    SECTION("larger u approaches the unaugmented distribution") {
        std::vector<std::string> preds{"head"};
        auto base = projected_distribution(coin3, *ground(coin3).universe);
        double prev_gap = 1.0;
        for (double u : {5.0, 10.0, 20.0}) {
            Program noisy = noise_augment(coin3, preds, u);
            auto dist = projected_distribution(noisy, *ground(coin3).universe);
            double gap = 0.0;
            for (const auto& [key, prob] : base) {
                gap = std::max(gap, std::fabs(dist[key] - prob));
            }
            CHECK(gap < prev_gap);
            prev_gap = gap;
        }
        CHECK(prev_gap < 1e-7);  // e^{-20} scale leakage
    }
    SECTION("no observed predicates is the identity") {
        CHECK(noise_augment(coin3, {}, 5.0) == coin3);
    }
    SECTION("a noisy observation becomes representable") {
        std::vector<std::string> preds{"head"};
        Program noisy = noise_augment(coin3, preds, 10.0);
        auto g = ground(noisy);
        Interpretation I(g.universe);
        I.insert(atom("head(1)"));
        I.insert(atom("noise_head(1)"));
        for (AtomId a = 0; a < g.universe->size(); ++a) {
            if (g.universe->atom(a).predicate == "example_index") {
                I.insert(a);
            }
        }
        CHECK(sm_member(g, I));
    }
}

TEST_CASE("completion") {
    SECTION("tight two-rule program matches the LP^MLN table") {
        Program p = parse_program("1 p :- q. {q}.");
        MlnModel model = completion(p);
        auto table = probability_table(ground(p));
        auto dist = mln_distribution(model);
        for (const auto& e : table.entries) {
            bool found = false;
            for (const auto& [m, prob] : dist) {
                if (m.bits() == e.model.bits()) {
                    CHECK(std::fabs(prob - e.probability) <= 1e-9);
                    found = true;
                }
            }
            CHECK(found);
        }
    }
    SECTION("the virus program is rejected with its cycle") {
        Program p = parse_program(read_fixture("virus.lpmln"));
        try {
            completion(p);
            FAIL("expected a tightness error");
        } catch (const SemanticError& e) {
            CHECK(std::string(e.what()).find("carries_virus") != std::string::npos);
        }
    }
    SECTION("self-loop is not tight") {
        CHECK_THROWS_AS(completion(parse_program("a :- a.")), SemanticError);
    }
    SECTION("random tight programs agree everywhere") {
        CounterRng rng(419);
        int checked = 0;
        for (int round = 0; round < 120 && checked < 40; ++round) {
            GeneratorOptions opt;
            opt.max_atoms = 4;
            opt.max_rules = 5;
            opt.positive_bodies_only = false;
            Program p = random_program(rng, opt);
            MlnModel model;
            ProbabilityTable table;
            try {
                model = completion(p);
                table = probability_table(ground(p, {.prune = false}));
            } catch (const SemanticError&) {
                continue;  // not tight or empty SM
            }
            ++checked;
            auto dist = mln_distribution(model);
            // the MLN must put the same probability on every interpretation
            std::map<std::vector<std::uint64_t>, double> mln_probs;
            for (const auto& [m, prob] : dist) {
                auto w = m.bits().words();
                mln_probs[{w.begin(), w.end()}] += prob;
            }
            double covered = 0.0;
            for (const auto& e : table.entries) {
                auto w = e.model.bits().words();
                auto it = mln_probs.find({w.begin(), w.end()});
                REQUIRE(it != mln_probs.end());
                CHECK(std::fabs(it->second - e.probability) <= 1e-9);
                covered += it->second;
            }
            CHECK(covered == Approx(1.0).epsilon(1e-9));
        }
        CHECK(checked == 40);
    }
}

TEST_CASE("coherence_check") {
    SECTION("single soft fact is 1-coherent") {
        auto report = coherence_check(parse_program("1 a."));
        CHECK(report.is_simple);
        CHECK(report.k == 1);
        REQUIRE(report.ground_pf.size() == 1);
        CHECK(to_string(report.ground_pf[0]) == "a");
    }
    SECTION("coin is not simple") {
        auto report = coherence_check(parse_program("{flip}. 1 head :- flip."));
        CHECK_FALSE(report.is_simple);
        CHECK_FALSE(report.failure.empty());
    }
    SECTION("soft atom in a hard head is not simple") {
        auto report = coherence_check(parse_program("1 a. a :- b. {b}."));
        CHECK_FALSE(report.is_simple);
    }
    SECTION("duplicate soft atoms merge by summing") {
        auto report = coherence_check(parse_program("1 a. 2 a."));
        REQUIRE(report.is_simple);
        REQUIRE(report.soft_facts.size() == 1);
        CHECK(report.soft_facts[0].weight == Weight::soft(3.0));
    }
    SECTION("expected k mismatch is reported") {
        auto report = coherence_check(parse_program("1 a. {b}."), 1);
        CHECK_FALSE(report.k.has_value());
        CHECK(report.failure.find("k=1") != std::string::npos);
        auto ok = coherence_check(parse_program("1 a. {b}."), 2);
        CHECK(ok.k == 2);
    }
    SECTION("the robot fixture is 30-coherent") {
        Program robot = parse_program(read_fixture("robot.lpmln"));
        auto report = coherence_check(robot);
        CHECK(report.is_simple);
        CHECK(report.k == 30);
        CHECK(report.ground_pf.size() == 3);
    }
}

TEST_CASE("problog weight maps") {
    CHECK(weights_from_probabilities(std::vector<double>{0.5})[0] == Approx(0.0));
    CHECK(weights_from_probabilities(std::vector<double>{0.8})[0] ==
          Approx(std::log(4.0)).epsilon(1e-12));
    CHECK_THROWS_AS(weights_from_probabilities(std::vector<double>{1.0}), DataError);
    CHECK_THROWS_AS(weights_from_probabilities(std::vector<double>{0.0}), DataError);
    SECTION("round trip") {
        CounterRng rng(431);
        for (int i = 0; i < 200; ++i) {
            double p = 1e-6 + rng.next_double() * (1 - 2e-6);
            double back = probabilities_from_weights(
                weights_from_probabilities(std::vector<double>{p}))[0];
            CHECK(std::fabs(back - p) <= 1e-12);
        }
    }
    SECTION("sigmoid marginals on a 1-coherent program") {
        for (double w : {-1.5, -0.3, 0.0, 0.8, 2.0}) {
            Program p = parse_program(format_double(w) + " a.\nb :- a.\n");
            auto table = probability_table(ground(p));
            double sigmoid = std::exp(w) / (1.0 + std::exp(w));
            CHECK(marginal(table, parse_query("a")) == Approx(sigmoid).epsilon(1e-9));
        }
    }
}

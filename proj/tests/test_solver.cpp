// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"

using namespace lpmln;
using namespace lpmln::test;

namespace {

std::vector<std::vector<std::string>> names_of(const std::vector<Interpretation>& models) {
    std::vector<std::vector<std::string>> out;
    for (const auto& m : models) {
        std::vector<std::string> names;
        for (const auto& a : m.true_atoms()) {
            names.push_back(to_string(a));
        }
        out.push_back(names);
    }
    return out;
}

}  // namespace

TEST_CASE("reduct") {
    SECTION("negative literal false keeps a stripped rule") {
        auto g = grounded("a :- not b. {b}.");
        auto red = reduct(g.rules, interp_of(g, {"a"}));
        bool found = false;
        for (const auto& r : red) {
            if (r.head.size() == 1 && g.universe->atom(r.head[0]).predicate == "a") {
                CHECK(r.body.empty());
                found = true;
            }
        }
        CHECK(found);
    }
    SECTION("negative literal true deletes the rule") {
        auto g = grounded("a :- not b. {b}.");
        auto red = reduct(g.rules, interp_of(g, {"b"}));
        for (const auto& r : red) {
            if (!r.head.empty()) {
                CHECK(g.universe->atom(r.head[0]).predicate != "a");
            }
        }
    }
    SECTION("double negation strips when the atom holds") {
        auto g = grounded("{flip}.");
        auto red = reduct(g.rules, interp_of(g, {"flip"}));
        REQUIRE(red.size() == 1);
        CHECK(red[0].body.empty());
        CHECK(reduct(g.rules, interp_of(g, {})).empty());
    }
}

TEST_CASE("is_stable") {
    SECTION("classic even loop") {
        auto g = grounded("a :- not b. b :- not a.");
        CHECK(is_stable(g.rules, interp_of(g, {"a"})));
        CHECK(is_stable(g.rules, interp_of(g, {"b"})));
        CHECK_FALSE(is_stable(g.rules, interp_of(g, {"a", "b"})));
        CHECK_FALSE(is_stable(g.rules, interp_of(g, {})));
    }
    SECTION("unfounded loop") {
        auto g = ground(parse_program("a :- a."), {.prune = false});
        CHECK_FALSE(is_stable(g.rules, interp_of(g, {"a"})));
        CHECK(is_stable(g.rules, interp_of(g, {})));
    }
    SECTION("disjunctive minimality") {
        auto g = grounded("a ; b.");
        CHECK(is_stable(g.rules, interp_of(g, {"a"})));
        CHECK(is_stable(g.rules, interp_of(g, {"b"})));
        CHECK_FALSE(is_stable(g.rules, interp_of(g, {"a", "b"})));
    }
    SECTION("minimality cap raises a resource error") {
        std::string text = "a0 ; a1.";
        for (int i = 0; i < 24; ++i) {
            text += " a" + std::to_string(i) + ".";
        }
        auto g = grounded(text);
        Interpretation full(g.universe);
        for (AtomId a = 0; a < g.universe->size(); ++a) {
            full.insert(a);
        }
        CHECK_THROWS_AS(is_stable(g.rules, full, SolveLimits{.minimality_cap = 8}), ResourceError);
    }
}

TEST_CASE("stable model enumeration") {
    SECTION("coin, no clamps") {
        auto g = grounded("{flip}. head :- flip.");
        auto models = names_of(stable_models(g));
        REQUIRE(models.size() == 2);
        CHECK(models[0].empty());
        CHECK(models[1] == std::vector<std::string>{"flip", "head"});
    }
    SECTION("choice body under clamps") {
        auto g = grounded("{flip}. {head} :- flip.");
        auto all = stable_models(g);
        CHECK(all.size() == 3);  // {}, {flip}, {flip, head}
        ClampSet clamp;
        clamp.forced_true.push_back(*g.universe->find(atom("flip")));
        auto clamped = stable_models(g, clamp);
        CHECK(clamped.size() == 2);
    }
    SECTION("no stable model") {
        auto g = ground(parse_program("a :- not a."), {.prune = false});
        CHECK(stable_models(g).empty());
    }
}

TEST_CASE("enumeration equals the subset oracle") {
    CounterRng rng(101);
    int nonempty = 0;
    for (int round = 0; round < 250; ++round) {
        GeneratorOptions opt;
        opt.max_atoms = 5;
        opt.max_rules = 7;
        opt.allow_soft = false;
        Program p = random_program(rng, opt);
        auto g = ground(p);
        auto fast = stable_models(g);
        auto slow = oracle_stable_models(g);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            CHECK(fast[i] == slow[i]);  // identical lexicographic order
        }
        nonempty += !fast.empty();
    }
    CHECK(nonempty > 50);  // the generator is not degenerate
}

TEST_CASE("clamp monotonicity") {
    CounterRng rng(103);
    for (int round = 0; round < 60; ++round) {
        Program p = random_program(rng);
        auto g = ground(p);
        if (g.universe->size() == 0) {
            continue;
        }
        ClampSet clamps;
        AtomId pick = static_cast<AtomId>(rng.next_below(g.universe->size()));
        clamps.forced_true.push_back(pick);
        auto clamped = stable_models(g, clamps);
        auto all = stable_models(g);
        std::vector<Interpretation> filtered;
        for (const auto& m : all) {
            if (m.contains(pick)) {
                filtered.push_back(m);
            }
        }
        CHECK(names_of(clamped) == names_of(filtered));
    }
}

TEST_CASE("adding a redundant double-negated copy changes nothing") {
    // a choice-free atom already free under a choice rule
    auto g1 = grounded("{a}. b :- a.");
    auto g2 = grounded("{a}. b :- a, not not a.");
    CHECK(names_of(stable_models(g1)) == names_of(stable_models(g2)));
}

TEST_CASE("parity constraints partition the model set") {
    auto g = grounded("{a}. {b}. {c}.");
    auto all = stable_models(g);
    REQUIRE(all.size() == 8);
    ParityConstraint even{{0, 1}, false}, odd{{0, 1}, true};
    auto with_even = stable_models_under_parity(g, {}, std::vector<ParityConstraint>{even});
    auto with_odd = stable_models_under_parity(g, {}, std::vector<ParityConstraint>{odd});
    CHECK(with_even.size() + with_odd.size() == all.size());
    for (const auto& m : with_even) {
        CHECK(((m.contains(AtomId{0}) ? 1 : 0) + (m.contains(AtomId{1}) ? 1 : 0)) % 2 == 0);
    }
}

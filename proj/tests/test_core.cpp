// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"

using namespace lpmln;
using namespace lpmln::test;

TEST_CASE("weights are tagged, not encoded") {
    CHECK(Weight::hard().is_hard());
    CHECK_FALSE(Weight::hard().is_soft());
    CHECK(Weight::soft(1e30).is_soft());
    CHECK(Weight::parameter(3).index == 3);
}

TEST_CASE("observation construction") {
    SECTION("rejects overlapping clamp sets") {
        CHECK_THROWS_AS(observe({"a"}, {"a"}), DataError);
    }
    SECTION("rejects non-ground atoms") {
        Atom p;
        p.predicate = "p";
        p.args.push_back(Term::variable("X"));
        CHECK_THROWS_AS(Observation({p}, {}), DataError);
    }
    SECTION("random disjointness property") {
        CounterRng rng(7);
        for (int round = 0; round < 200; ++round) {
            std::vector<Atom> t, f;
            bool overlap = false;
            std::vector<Atom> pool;
            for (int i = 0; i < 6; ++i) {
                pool.push_back(atom("p" + std::to_string(i)));
            }
            std::vector<int> side(6);
            for (int i = 0; i < 6; ++i) {
                side[i] = static_cast<int>(rng.next_below(4));  // 0 none, 1 t, 2 f, 3 both
                if (side[i] == 1 || side[i] == 3) {
                    t.push_back(pool[i]);
                }
                if (side[i] == 2 || side[i] == 3) {
                    f.push_back(pool[i]);
                }
                overlap = overlap || side[i] == 3;
            }
            if (overlap) {
                CHECK_THROWS_AS(Observation(t, f), DataError);
            } else {
                CHECK_NOTHROW(Observation(t, f));
            }
        }
    }
}

TEST_CASE("is_complete") {
    auto g = grounded("{flip}. 1 head :- flip.");
    SECTION("full cover") {
        CHECK(is_complete(observe({"flip"}, {"head"}), *g.universe));
    }
    SECTION("unclamped atom") {
        CHECK_FALSE(is_complete(observe({"flip"}, {}), *g.universe));
    }
    SECTION("atom outside base") {
        CHECK_THROWS_AS(is_complete(observe({"tail"}, {}), *g.universe), DataError);
    }
}

TEST_CASE("bitset lexicographic order") {
    Bitset a(3), b(3);
    b.set(0);
    CHECK(a.lex_less(b));  // 000 < 100 with atom 0 most significant
    Bitset c(3);
    c.set(2);
    CHECK(c.lex_less(b));
    CHECK_FALSE(b.lex_less(c));
}

TEST_CASE("program round-trips through its canonical text") {
    CounterRng rng(11);
    for (int round = 0; round < 200; ++round) {
        Program p = random_program(rng);
        Program q = parse_program(to_string(p));
        REQUIRE(q.rules.size() == p.rules.size());
        CHECK(q == p);
    }
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, -1.3862943611198906, 1e-9, 12345.6789, 2.0}) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("parameter density validation") {
    Program p = parse_program("@w(1) a. @w(2) b.");
    CHECK(p.parameter_count() == 2);
    CHECK(p.parameterized());
    Program bound = bind_parameters(p, std::vector<double>{1.0, -2.0});
    CHECK_FALSE(bound.parameterized());
    CHECK(bound.rules[0].weight == Weight::soft(1.0));
    CHECK_THROWS_AS(bind_parameters(p, std::vector<double>{1.0}), UsageError);
}

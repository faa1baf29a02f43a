#include <catch_amalgamated.hpp>

#include "rlang/oracle.hpp"
#include "rlang/separation.hpp"
#include "support.hpp"

using namespace rlang;
using testsupport::below;
using testsupport::Rng;

TEST_CASE("first and last are Parikh-equal but not equal", "[oracle]") {
    auto first = Provider::of(builtin_automaton("B_first"), "first");
    auto last = Provider::of(builtin_automaton("C_last"), "last");
    auto u = named_universe(3);
    auto pv = parikh_equal_bounded(first, last, u, 4);
    CHECK(pv.equal);
    CHECK(pv.first_size > 0);
    CHECK_FALSE(pv.vector_witness);

    // every two-letter word with distinct atoms is in both, so the first difference has length three
    CHECK(language_equal_bounded(first, last, universe_of({"a", "b"}), 2).equal);
    auto lv = language_equal_bounded(first, last, universe_of({"a", "b"}), 3);
    REQUIRE_FALSE(lv.equal);
    REQUIRE(lv.word_witness);
    CHECK(*lv.word_witness == word_of("a a b"));
    auto wit = *lv.word_witness;
    bool in_first = accepts(builtin_automaton("B_first"), wit).has_value();
    bool in_last = accepts(builtin_automaton("C_last"), wit).has_value();
    CHECK(in_first != in_last);
    CHECK(lv.witness_in_first == in_first);
}

TEST_CASE("mirror grammar matches its expression", "[oracle]") {
    auto g = Provider::of(builtin_grammar("mirror"));
    auto e = builtin_expression("par_mirror");
    auto u = named_universe(2);
    // the grammar derives no empty word while the star contains zero
    auto v = parikh_equal_bounded(g, Provider::of(e), u, 4);
    REQUIRE_FALSE(v.equal);
    CHECK(*v.vector_witness == DataVector());
    CHECK_FALSE(v.witness_in_first);
    auto nonempty = Provider::vectors("nonempty", [&](const DataVector& x) { return !x.empty() && contains(e, x); }, {},
                                      {label("l"), label("r")});
    auto w = parikh_equal_bounded(g, nonempty, u, 6);
    CHECK(w.equal);
    CHECK(w.first_size == 2 + 3 + 4);
}

TEST_CASE("repeated atom versus unique first atom", "[oracle]") {
    auto two = Provider::of(builtin_automaton("example_two"), "two");
    auto first = Provider::of(builtin_expression("par_first"), "first");
    auto u = named_universe(3);
    auto v = parikh_equal_bounded(two, first, u, 4);
    REQUIRE_FALSE(v.equal);
    REQUIRE(v.vector_witness);
    auto all_two = provider_vectors(two, u, 4);
    auto all_first = provider_vectors(first, u, 4);
    // {a:2} lacks a count-1 atom, so only the repeated-atom side has it
    CHECK(all_two.count(vector_of("2a")));
    CHECK_FALSE(all_first.count(vector_of("2a")));
    // and the reported witness is the least difference overall
    VectorSet diff;
    for (auto& x : all_two)
        if (!all_first.count(x)) diff.insert(x);
    for (auto& x : all_first)
        if (!all_two.count(x)) diff.insert(x);
    CHECK(*v.vector_witness == *diff.begin());
    CHECK(v.witness_in_first == static_cast<bool>(all_two.count(*v.vector_witness)));
}

TEST_CASE("separating automaton matches the parser", "[oracle]") {
    auto u = make_universe({separator(), atom("a"), atom("b"), atom("c")});
    auto aut = Provider::of(builtin_automaton("sep_L"), "sep_L");
    auto parse = Provider::words("sep_parse", [](const DataWord& w) { return sep_parse(w).has_value(); }, {separator()});
    auto v = language_equal_bounded(aut, parse, u, 10);
    CHECK(v.equal);
    CHECK(v.first_size > 0);
    CHECK_THROWS_AS(language_equal_bounded(aut, parse, named_universe(3), 4), Error);
}

TEST_CASE("providers agree with themselves", "[oracle]") {
    auto u = named_universe(3);
    for (auto& name : builtin_automaton_names()) {
        auto a = builtin_automaton(name);
        Universe uu = u;
        for (Atom c : a.constants) uu.push_back(c);
        auto p = Provider::of(a, name);
        CHECK(parikh_equal_bounded(p, p, uu, 3).equal);
        CHECK(language_equal_bounded(p, p, uu, 3).equal);
    }
    auto e = Provider::of(builtin_expression("par_two"));
    CHECK(parikh_equal_bounded(e, e, u, 4).equal);
    CHECK_THROWS_AS(language_equal_bounded(e, e, u, 2), Error);
}

TEST_CASE("predicate providers enumerate everything", "[oracle]") {
    auto u = named_universe(2);
    auto anything = Provider::words("any", [](const DataWord&) { return true; });
    CHECK(provider_words(anything, u, 3).size() == 1 + 2 + 4 + 8);
    auto vectors = Provider::vectors("any", [](const DataVector&) { return true; });
    CHECK(provider_vectors(vectors, u, 3).size() == 1 + 2 + 3 + 4);
    CHECK(provider_vectors(anything, u, 3) == provider_vectors(vectors, u, 3));

    // the vector predicate for "some atom twice" equals the automaton's image
    auto some_two = Provider::vectors("two", [](const DataVector& v) {
        for (auto& [l, n] : v.entries())
            if (n >= 2) return true;
        return false;
    });
    CHECK(parikh_equal_bounded(some_two, Provider::of(builtin_automaton("example_two")), named_universe(3), 4).equal);
}

TEST_CASE("errors carry the provider name", "[oracle]") {
    auto aut = Provider::of(builtin_automaton("sep_L"), "the-sep-automaton");
    try {
        provider_words(aut, named_universe(2), 3);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::constant);
        CHECK(std::string(e.what()).find("the-sep-automaton") != std::string::npos);
    }
}

TEST_CASE("verdicts are monotone and equivariant", "[oracle]") {
    auto first = Provider::of(builtin_automaton("B_first"));
    auto last = Provider::of(builtin_automaton("C_last"));
    auto two = Provider::of(builtin_automaton("example_two"));
    // equality at a larger bound implies equality at every smaller one
    CHECK(parikh_equal_bounded(first, last, named_universe(4), 4).equal);
    for (int n = 1; n <= 4; ++n)
        for (int s = 0; s <= 4; ++s) CHECK(parikh_equal_bounded(first, last, named_universe(n), s).equal);

    // renaming the universe renames the witness
    Rng rng(41);
    auto u = named_universe(3);
    auto base = parikh_equal_bounded(two, first, u, 3);
    REQUIRE(base.vector_witness);
    for (int t = 0; t < 5; ++t) {
        auto pi = testsupport::random_permutation(rng, named_universe(6));
        auto moved = make_universe(pi.apply(std::set<Atom>(u.begin(), u.end())));
        auto v = parikh_equal_bounded(two, first, moved, 3);
        VectorSet image;
        for (auto& x : provider_vectors(two, u, 3)) image.insert(pi.apply(x));
        CHECK(image == provider_vectors(two, moved, 3));
        REQUIRE(v.vector_witness);
        CHECK(v.vector_witness->size() == base.vector_witness->size());
        CHECK(v.witness_in_first == base.witness_in_first);
        CHECK(v.first_size == base.first_size);
    }
}

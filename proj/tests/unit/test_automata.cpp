#include <catch_amalgamated.hpp>

#include "rlang/automata.hpp"
#include "support.hpp"

using namespace rlang;

namespace {

std::set<DataWord> all_words(const Universe& u, int max_len) {
    std::set<DataWord> out{DataWord{}};
    std::vector<DataWord> layer{DataWord{}};
    for (int n = 0; n < max_len; ++n) {
        std::vector<DataWord> next;
        for (auto& w : layer)
            for (Atom a : u) {
                auto v = w;
                v.push_back({no_label, a});
                next.push_back(v);
                out.insert(v);
            }
        layer = std::move(next);
    }
    return out;
}

bool repeats(const DataWord& w) {
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = i + 1; j < w.size(); ++j)
            if (w[i] == w[j]) return true;
    return false;
}

bool first_unique(const DataWord& w) {
    if (w.size() < 2) return false;
    for (std::size_t i = 1; i < w.size(); ++i)
        if (w[i] == w[0]) return false;
    return true;
}

bool last_unique(const DataWord& w) {
    if (w.size() < 2) return false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (w[i] == w.back()) return false;
    return true;
}

bool four_distinct(const DataWord& w) { return w.size() == 4 && !repeats(w); }

std::set<DataWord> filtered(const Universe& u, int n, bool (*pred)(const DataWord&)) {
    std::set<DataWord> s;
    for (auto& w : all_words(u, n))
        if (pred(w)) s.insert(w);
    return s;
}

// One-register automaton with a single rule from "s" to "f" reading `p` letters.
Fma single_rule(int p, Constraint phi) {
    Fma a;
    a.r = 1;
    a.r0 = {std::nullopt};
    a.labels = {no_label};
    a.add_state("s");
    a.add_state("f", true);
    a.rules.push_back({0, std::vector<Label>(p, no_label), std::move(phi), 1});
    return a;
}

Term x() { return Term::v(0); }
Term y(int j) { return Term::v(1 + j); }
Term xp(int p) { return Term::v(1 + p); }

std::vector<StepKind> chain_kinds(const Fma& a) {
    std::vector<StepKind> out;
    for (auto& rl : a.rules) out.push_back(classify_rule(a, rl)->kind);
    return out;
}

}  // namespace

TEST_CASE("builtin automata accept the documented words", "[automata]") {
    auto two = builtin_automaton("example_two");
    CHECK(two.states.size() == 3);
    auto run = accepts(two, word_of("a b a"));
    REQUIRE(run);
    CHECK(valid_run(two, *run));
    CHECK(run->word() == word_of("a b a"));
    CHECK(two.accepting.count(run->end().state));
    CHECK_FALSE(accepts(two, word_of("a b c")));
    CHECK(accepts(builtin_automaton("B_first"), word_of("a b")));
    CHECK_FALSE(accepts(builtin_automaton("B_first"), word_of("a b a")));
    CHECK(accepts(builtin_automaton("C_last"), word_of("a a b")));
    CHECK_FALSE(accepts(builtin_automaton("C_last"), word_of("b a b")));
    CHECK_THROWS_AS(accepts(two, word_of("h:a")), Error);
    CHECK_THROWS_AS(builtin_automaton("nope"), Error);

    bool guesses = false;
    auto c = builtin_automaton("C_last");
    for (auto& rl : c.rules)
        for (auto& f : decompose_constraint(rl.phi, c.layout(rl).count()))
            guesses |= !f.same(2, 0) && !f.same(2, 1);
    CHECK(guesses);
}

TEST_CASE("bounded languages match brute force", "[automata]") {
    auto ab = universe_of({"a", "b"});
    CHECK(enumerate_language(builtin_automaton("example_two"), ab, 2) == std::set<DataWord>{word_of("a a"), word_of("b b")});
    std::set<DataWord> len2;
    for (auto& w : enumerate_language(builtin_automaton("B_first"), ab, 2))
        if (w.size() == 2) len2.insert(w);
    CHECK(len2 == std::set<DataWord>{word_of("a b"), word_of("b a")});

    auto four = enumerate_language(builtin_automaton("L_four"), universe_of({"a", "b", "c", "d"}), 4);
    CHECK(four.size() == 24);
    CHECK(four == filtered(universe_of({"a", "b", "c", "d"}), 4, four_distinct));

    auto u = named_universe(3);
    CHECK(enumerate_language(builtin_automaton("example_two"), u, 4) == filtered(u, 4, repeats));
    CHECK(enumerate_language(builtin_automaton("B_first"), u, 4) == filtered(u, 4, first_unique));
    CHECK(enumerate_language(builtin_automaton("C_last"), u, 4) == filtered(u, 4, last_unique));
    for (auto& w : all_words(u, 4))
        CHECK(static_cast<bool>(accepts(builtin_automaton("C_last"), w)) == last_unique(w));
}

TEST_CASE("universe must cover constants and initial registers", "[automata]") {
    auto g = builtin_automaton("gsh3_auto");
    CHECK(g.states.size() == 7);
    CHECK(g.r == 3);
    CHECK_THROWS_AS(enumerate_language(g, universe_of({"b", "c"}), 2), Error);
    CHECK_THROWS_AS(enumerate_language(builtin_automaton("sep_L"), named_universe(3), 2), Error);
    CHECK_NOTHROW(enumerate_language(g, universe_of({"a", "b"}), 2));
}

TEST_CASE("a larger guessing pool changes nothing", "[automata]") {
    auto u3 = named_universe(3);
    for (auto name : {"example_two", "B_first", "C_last", "L_four"}) {
        auto a = builtin_automaton(name);
        CHECK(enumerate_language(a, u3, 4, 2 * a.r) == enumerate_language(a, u3, 4, 4 * a.r));
    }
    auto g = builtin_automaton("gsh3_auto");
    auto ga = universe_of({"a", "b", "c"});
    CHECK(enumerate_language(g, ga, 5, 6) == enumerate_language(g, ga, 5, 12));
    auto s = builtin_automaton("sep_L");
    auto su = make_universe({constant("#"), atom("a"), atom("b")});
    CHECK(enumerate_language(s, su, 7, 6) == enumerate_language(s, su, 7, 12));
    for (auto& w : all_words(u3, 4)) {
        auto c = builtin_automaton("C_last");
        CHECK(static_cast<bool>(accepts(c, w, 2)) == static_cast<bool>(accepts(c, w, 4)));
    }
}

TEST_CASE("runs between configurations", "[automata]") {
    auto two = builtin_automaton("example_two");
    auto a = atom("a"), b = atom("b");
    auto ab = universe_of({"a", "b"});
    Configuration s0a{two.state("s0"), {a}}, sa{two.state("s"), {a}};
    CHECK(langof_between(two, s0a, sa, ab, 1) == std::set<DataWord>{word_of("a")});
    auto bf = builtin_automaton("B_first");
    Configuration fa{bf.state("f"), {a}};
    std::set<DataWord> one;
    for (auto& w : langof_between(bf, fa, fa, ab, 1))
        if (w.size() == 1) one.insert(w);
    CHECK(one == std::set<DataWord>{word_of("b")});
    for (auto name : builtin_automaton_names()) {
        auto m = builtin_automaton(name);
        std::vector<Atom> regs;
        for (int i = 0; i < m.r; ++i) regs.push_back(fresh_atom(i));
        if (m.r0[0]) regs[0] = *m.r0[0];
        Configuration c{m.init, regs};
        auto u = make_universe({regs.begin(), regs.end()});
        for (Atom k : m.constants) u.push_back(k);
        std::sort(u.begin(), u.end());
        CHECK(langof_between(m, c, c, u, 0) == std::set<DataWord>{DataWord{}});
    }
    CHECK_THROWS_AS(langof_between(two, Configuration{0, {a}}, Configuration{0, {}}, ab, 1), Error);
    auto run = run_between(two, s0a, sa, word_of("b a"));
    REQUIRE(run);
    CHECK(valid_run(two, *run));
    CHECK_FALSE(run_between(two, s0a, Configuration{two.state("s"), {b}}, word_of("a")));

    // initial configurations with accepting ends reproduce the language
    auto u = named_universe(3);
    std::set<DataWord> joined;
    for (Atom r : u)
        for (Atom r2 : u)
            for (int f : bf.accepting)
                for (auto& w : langof_between(bf, {bf.init, {r}}, {f, {r2}}, u, 4)) joined.insert(w);
    CHECK(joined == enumerate_language(bf, u, 4));
}

TEST_CASE("runs are invariant under permutations", "[automata]") {
    testsupport::Rng rng(11);
    auto u = named_universe(4);
    for (auto name : {"example_two", "B_first", "C_last", "L_four"}) {
        auto m = builtin_automaton(name);
        for (int i = 0; i < 40; ++i) {
            auto w = testsupport::random_word(rng, u, 5);
            auto run = accepts(m, w);
            if (!run) continue;
            CHECK(valid_run(m, *run));
            auto pi = testsupport::random_permutation(rng, named_universe(8));
            Run moved{{run->start.state, pi.apply(run->start.regs)}, {}};
            for (auto& s : run->steps) moved.steps.push_back({s.rule, pi.apply(s.block), {s.to.state, pi.apply(s.to.regs)}});
            CHECK(valid_run(m, moved));
            CHECK(accepts(m, pi.apply(w)));
        }
    }
}

TEST_CASE("restricted conversion", "[automata]") {
    const int p = 3;
    auto u = named_universe(4);

    // x = x' = y3 and x outside {y1, y2}
    auto pres = single_rule(p, Constraint::all_equal({x(), xp(p), y(2)}) && Constraint::ne(x(), y(0)) &&
                                   Constraint::ne(x(), y(1)));
    auto rp = to_restricted(pres);
    CHECK(is_restricted(rp));
    CHECK(rp.rules.size() == 4);  // y1 = y2 and y1 ≠ y2 give separate chains
    CHECK(rp.states.size() == 4);
    for (std::size_t i = 0; i < rp.rules.size(); i += 2) {
        auto k0 = classify_rule(rp, rp.rules[i]);
        auto k1 = classify_rule(rp, rp.rules[i + 1]);
        CHECK(k0->kind == StepKind::pres_eq);
        CHECK(rp.rules[i].width() == 1);
        CHECK(k1->kind == StepKind::pres_diff);
        CHECK(rp.rules[i + 1].width() == 2);
    }
    CHECK(parikh_bounded(rp, u, 4) == parikh_bounded(pres, u, 4));

    // x = y1, y1 y2 y3 distinct, y2 = x'
    auto upd = single_rule(p, Constraint::eq(x(), y(0)) && Constraint::distinct({y(0), y(1), y(2)}) &&
                                  Constraint::eq(y(1), xp(p)));
    auto ru = to_restricted(upd);
    CHECK(is_restricted(ru));
    CHECK(chain_kinds(ru) == std::vector<StepKind>{StepKind::pres_eq, StepKind::up_diff, StepKind::pres_eq});
    CHECK(parikh_bounded(ru, u, 4) == parikh_bounded(upd, u, 4));

    for (auto name : {"example_two", "B_first", "C_last", "L_four"}) {
        auto m = builtin_automaton(name);
        auto rm = to_restricted(m);
        CHECK(is_restricted(rm));
        CHECK(parikh_bounded(rm, u, 5) == parikh_bounded(m, u, 5));
        auto again = to_restricted(rm);
        CHECK(again.states == rm.states);
        CHECK(again.rules.size() == rm.rules.size());
    }
    CHECK(is_restricted(builtin_automaton("B_first")) == false);
    CHECK_THROWS_AS(to_restricted(builtin_automaton("gsh3_auto")), Error);
}

TEST_CASE("random one-register automata keep their Parikh image", "[automata]") {
    testsupport::Rng rng(23);
    auto u = named_universe(3);
    for (int trial = 0; trial < 25; ++trial) {
        Fma a;
        a.r = 1;
        a.r0 = {std::nullopt};
        a.labels = {no_label, label("h")};
        int n = 2 + testsupport::below(rng, 2);
        for (int i = 0; i < n; ++i) a.add_state("q" + std::to_string(i), testsupport::below(rng, 2) == 0);
        a.accepting.insert(n - 1);
        int rules = 2 + testsupport::below(rng, 3);
        for (int i = 0; i < rules; ++i) {
            int p = testsupport::below(rng, 3);
            std::vector<Label> block;
            for (int j = 0; j < p; ++j) block.push_back(testsupport::below(rng, 2) ? no_label : label("h"));
            a.rules.push_back({testsupport::below(rng, n), block, testsupport::random_constraint(rng, 2 + p, {}, 2),
                               testsupport::below(rng, n)});
        }
        auto ra = to_restricted(a);
        REQUIRE(is_restricted(ra));
        CHECK(parikh_bounded(ra, u, 4) == parikh_bounded(a, u, 4));
    }
}

TEST_CASE("altering-path decomposition", "[automata]") {
    Fma a;
    a.r = 1;
    a.r0 = {std::nullopt};
    a.labels = {no_label};
    a.add_state("p");
    a.add_state("q", true);
    OrbitFormula single({0});
    a.rules.push_back({0, {no_label}, restricted_constraint({StepKind::pres_eq, {}}, 1), 0});
    a.rules.push_back({0, {no_label}, restricted_constraint({StepKind::up_diff, single}, 1), 1});
    a.rules.push_back({1, {no_label}, restricted_constraint({StepKind::pres_diff, single}, 1), 1});
    REQUIRE(is_restricted(a));

    auto run = accepts(a, word_of("a a b c"));
    REQUIRE(run);
    auto ap = run_decompose(a, *run);
    REQUIRE(ap.segments.size() == 2);
    CHECK(ap.blocks == std::vector<DataWord>{word_of("b")});
    CHECK(ap.segments[0].reg == atom("a"));
    CHECK(ap.segments[0].from == 0);
    CHECK(ap.segments[0].to == 0);
    CHECK(ap.segments[1].from == 1);
    CHECK(ap.segments[1].to == 1);
    CHECK(ap.to_string(a).find("<b>") != std::string::npos);

    Run still{{0, {atom("a")}}, {}};
    auto flat = run_decompose(a, still);
    CHECK(flat.segments.size() == 1);
    CHECK(flat.blocks.empty());

    auto check_side = [](const AlteringPath& p) {
        for (std::size_t i = 0; i < p.blocks.size(); ++i) {
            Atom left = p.segments[i].reg, right = p.segments[i + 1].reg;
            CHECK(left != right);
            for (auto& l : p.blocks[i]) {
                CHECK(l.atom != left);
                CHECK(l.atom != right);
            }
        }
    };
    check_side(ap);

    auto four = to_restricted(builtin_automaton("L_four"));
    auto frun = accepts(four, word_of("a b c d"));
    REQUIRE(frun);
    auto fp = run_decompose(four, *frun);
    CHECK(fp.blocks.size() == 1);
    check_side(fp);

    testsupport::Rng rng(3);
    for (auto name : {"example_two", "B_first", "C_last"}) {
        auto m = to_restricted(builtin_automaton(name));
        for (int i = 0; i < 30; ++i) {
            auto w = testsupport::random_word(rng, named_universe(4), 6);
            if (auto r = accepts(m, w)) check_side(run_decompose(m, *r));
        }
    }
    CHECK_THROWS_AS(run_decompose(builtin_automaton("B_first"), *accepts(builtin_automaton("B_first"), word_of("a b"))), Error);
}

TEST_CASE("preserving segments have height-one forms", "[automata]") {
    auto bf = to_restricted(builtin_automaton("B_first"));
    int s = bf.state("s"), f = bf.state("f");
    Atom a = atom("a");
    auto ab = universe_of({"a", "b"});
    auto ff = preserving_parikh(bf, f, a, f);
    CHECK(ff.height <= 1);
    CHECK(members_bounded(ff.to_expr(), ab, 3).count(DataVector{}));
    auto sf = members_bounded(preserving_parikh(bf, s, a, f).to_expr(), ab, 3);
    CHECK(sf.count(vector_of("b")));
    CHECK_FALSE(sf.count(vector_of("a")));

    // the loop at s0 of example_two
    auto two = to_restricted(builtin_automaton("example_two"));
    int s0 = two.state("s0");
    auto loop = preserving_parikh(two, s0, a, s0);
    CHECK(loop.height == 1);
    auto u = named_universe(3);
    VectorSet every;
    for (int n = 0; n <= 4; ++n)
        for (auto& w : all_words(u, n))
            if (static_cast<int>(w.size()) == n) every.insert(parikh(w));
    CHECK(members_bounded(loop.to_expr(), u, 4) == every);

    // against preserving runs found by simulation
    for (auto name : {"example_two", "B_first", "C_last", "L_four"}) {
        auto m = to_restricted(builtin_automaton(name));
        Fma only = m;
        only.rules.clear();
        for (auto& rl : m.rules)
            if (classify_rule(m, rl)->preserving()) only.rules.push_back(rl);
        for (int p = 0; p < static_cast<int>(m.states.size()); ++p)
            for (int q = 0; q < static_cast<int>(m.states.size()); ++q) {
                auto lf = preserving_parikh(m, p, a, q);
                CHECK(lf.height <= 1);
                VectorSet sim;
                for (auto& w : langof_between(only, {p, {a}}, {q, {a}}, u, 4)) sim.insert(parikh(w));
                CHECK(members_bounded(lf.to_expr(), u, 4) == sim);
            }
    }
}

TEST_CASE("star-height-two synthesis", "[automata]") {
    auto u = named_universe(3);
    auto two = to_restricted(builtin_automaton("example_two"));
    auto e2 = synth_language_parikh(two);
    CHECK(syntactic_star_height(e2) <= 2);
    CHECK(members_bounded(e2, u, 5) == members_bounded(builtin_expression("par_two"), u, 5));
    auto bf = to_restricted(builtin_automaton("B_first"));
    auto ef = synth_language_parikh(bf);
    CHECK(syntactic_star_height(ef) <= 2);
    // the expression also holds the one-letter vectors, which no word of length at least two has
    auto first = members_bounded(ef, u, 5);
    VectorSet expected;
    for (auto& v : members_bounded(builtin_expression("par_first"), u, 5))
        if (v.size() != 1) expected.insert(v);
    CHECK(first == expected);
    CHECK(members_bounded(builtin_expression("par_first"), u, 5).size() == first.size() + u.size());

    for (auto name : {"example_two", "B_first", "C_last", "L_four"}) {
        auto m = to_restricted(builtin_automaton(name));
        CHECK(members_bounded(synth_language_parikh(m), u, 5) == parikh_bounded(m, u, 5));
        for (Atom r : {atom("a"), atom("b")})
            for (Atom r2 : {atom("a"), atom("c")})
                for (int f : m.accepting) {
                    Configuration from{m.init, {r}}, to{f, {r2}};
                    auto e = synth_parikh_sh2(m, from, to);
                    CHECK(syntactic_star_height(e) <= 2);
                    VectorSet sim;
                    for (auto& w : langof_between(m, from, to, u, 5)) sim.insert(parikh(w));
                    CHECK(members_bounded(e, u, 5) == sim);
                }
    }

    Fma flat;
    flat.r = 1;
    flat.r0 = {std::nullopt};
    flat.labels = {no_label};
    flat.add_state("s", true);
    flat.rules.push_back({0, {no_label}, restricted_constraint({StepKind::pres_eq, {}}, 1), 0});
    CHECK(preserving_parikh(flat, 0, atom("a"), 0).height <= 1);
    CHECK(members_bounded(synth_language_parikh(flat), u, 3) == parikh_bounded(flat, u, 3));
    CHECK_THROWS_AS(synth_language_parikh(builtin_automaton("B_first")), Error);
}

TEST_CASE("separating automaton accepts the block shape", "[automata]") {
    auto s = builtin_automaton("sep_L");
    CHECK(s.r == 3);
    CHECK(accepts(s, word_of("a b a b $# $# b c d $# $# d e d e d e")));
    CHECK(accepts(s, word_of("a b $# $# b c")));
    CHECK(accepts(s, word_of("a a $# $# a a")));
    CHECK_FALSE(accepts(s, word_of("a b $# b c")));
    CHECK_FALSE(accepts(s, word_of("a b $# $# c d")));
    CHECK_FALSE(accepts(s, word_of("a b a $# $# a c")));
    CHECK(accepts(s, word_of("e d e d $# $# d c b $# $# b a b a")));
}

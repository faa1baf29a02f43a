#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "rlang/separation.hpp"
#include "support.hpp"

using namespace rlang;
using testsupport::below;
using testsupport::Rng;

namespace {

void all_words(const Universe& u, int len, const std::function<void(const DataWord&)>& f) {
    DataWord w(len);
    std::function<void(int)> rec = [&](int i) {
        if (i == len) return f(w);
        for (Atom a : u) {
            w[i] = {no_label, a};
            rec(i + 1);
        }
    };
    rec(0);
}

SepStructure random_structure(Rng& rng, const Universe& u, int maxk, int maxn, bool distinct) {
    SepStructure s;
    s.k = below(rng, maxk + 1);
    for (int i = 0; i < s.k + 2; ++i) s.n.push_back(1 + below(rng, maxn));
    auto pool = u;
    std::shuffle(pool.begin(), pool.end(), rng);
    for (int i = 0; i < 2 * s.k + 3; ++i) s.tau.push_back(distinct ? pool[i] : u[below(rng, static_cast<int>(u.size()))]);
    s.reversed = below(rng, 2);
    return sep_canonical(s);
}

IntervalTreeInstance figure() {
    std::ifstream in(std::string(RLANG_DATA_DIR) + "/fig_t3.json");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_interval_document(ss.str());
}

}  // namespace

TEST_CASE("separating words parse and build", "[separation]") {
    auto w = word_of("a b a b $# $# b c d $# $# d e d e d e");
    auto s = sep_parse(w);
    REQUIRE(s);
    CHECK(s->k == 1);
    CHECK(s->n == std::vector<int>{2, 1, 3});
    CHECK(s->tau == atoms({"a", "b", "c", "d", "e"}));
    CHECK_FALSE(s->reversed);
    CHECK(sep_build(*s) == w);

    CHECK_FALSE(sep_parse(word_of("a b a b $# b c d $# $# d e")));
    CHECK_FALSE(sep_parse(word_of("a b $# $# c d")));
    CHECK_FALSE(sep_parse(word_of("a b a $# $# b c")));
    CHECK_FALSE(sep_parse(word_of("a b")));
    CHECK_FALSE(sep_parse(word_of("h:a b $# $# b c")));

    DataWord rev(w.rbegin(), w.rend());
    auto r = sep_parse(rev);
    REQUIRE(r);
    CHECK(r->reversed);
    CHECK(r->tau == s->tau);
    CHECK(r->n == s->n);
    CHECK(sep_build(*r) == rev);

    CHECK_THROWS_AS(sep_build(SepStructure{0, {1}, atoms({"a", "b", "c"})}), Error);
    CHECK_THROWS_AS(sep_build(SepStructure{0, {1, 0}, atoms({"a", "b", "c"})}), Error);
}

TEST_CASE("parse inverts build and respects the domain bound", "[separation]") {
    Rng rng(31);
    auto u = named_universe(8);
    for (int t = 0; t < 400; ++t) {
        auto s = random_structure(rng, u, 3, 4, below(rng, 2));
        auto w = sep_build(s);
        auto back = sep_parse(w);
        REQUIRE(back);
        CHECK(*back == s);
        CHECK(parikh(w) == sep_vector(s));
        auto v = parikh(w);
        int hashes = v[Letter{no_label, separator()}];
        std::set<Atom> distinct(s.tau.begin(), s.tau.end());
        int dom = static_cast<int>(v.dom().size());
        CHECK(dom <= hashes + 2);
        CHECK((dom == hashes + 2) == (distinct.size() == s.tau.size()));
    }
}

TEST_CASE("parse agrees with the three-register automaton", "[separation]") {
    auto u = make_universe({separator(), atom("a"), atom("b"), atom("c")});
    auto aut = builtin_automaton("sep_L");
    std::set<DataWord> by_parse;
    for (int len = 0; len <= 8; ++len)
        all_words(u, len, [&](const DataWord& w) {
            if (sep_parse(w)) by_parse.insert(w);
        });
    CHECK(enumerate_language(aut, u, 8) == by_parse);
    CHECK(by_parse.size() > 50);
}

TEST_CASE("witness search matches brute-force parsing", "[separation]") {
    // every word of a distinct-atom vector is a permutation of it; compare
    // against all structures with the same atoms and exponents up to the counts
    Rng rng(32);
    auto u = named_universe(6);
    for (int t = 0; t < 40; ++t) {
        auto s = random_structure(rng, u, 1, 3, true);
        auto v = sep_vector(s);
        auto found = sep_witnesses(v);
        std::vector<Atom> perm = s.tau;
        std::sort(perm.begin(), perm.end());
        std::set<std::string> brute;
        do {
            SepStructure c{s.k, std::vector<int>(s.k + 2), perm};
            std::function<void(int)> rec = [&](int j) {
                if (j == s.k + 2) {
                    if (sep_vector(c) == v) {
                        brute.insert(to_string(sep_canonical(c)));
                        auto flipped = c;
                        flipped.reversed = true;
                        brute.insert(to_string(sep_canonical(flipped)));
                    }
                    return;
                }
                for (int e = 1; e <= 3 * 3; ++e) {
                    c.n[j] = e;
                    rec(j + 1);
                }
            };
            rec(0);
        } while (std::next_permutation(perm.begin(), perm.end()));
        std::set<std::string> got;
        for (auto& f : found) got.insert(to_string(f));
        CHECK(got == brute);
        CHECK(got.count(to_string(s)));
    }
    CHECK(sep_witnesses(vector_of("a b")).empty());
    CHECK_THROWS_AS(sep_witnesses(vector_of("4a 2$#")), Error);
}

TEST_CASE("separating words are commutatively stable", "[separation]") {
    auto u = named_universe(7);
    auto k0 = stability_check(0, 2, u);
    CHECK(k0.violations() == 0);
    CHECK(k0.examined == 4);  // zero plus three singletons
    REQUIRE(k0.cases.size() == 1);
    CHECK(k0.cases[0].w.empty());
    REQUIRE(k0.cases[0].witnesses.size() == 2);  // the word and its reversal
    CHECK(k0.cases[0].witnesses[0] == k0.structure);

    auto k1 = stability_check(1, 2, u);
    CHECK(k1.violations() == 0);
    CHECK(k1.examined == 6);

    // with room for whole-block increments the realisable perturbations are real
    for (int k : {0, 1}) {
        auto rep = stability_check(k, 4, u);
        CHECK(rep.violations() == 0);
        CHECK(rep.cases.size() > 1);
        for (auto& c : rep.cases) CHECK(c.witnesses.size() >= 1);
    }
    auto k2 = stability_check(2, 3, u);
    CHECK(k2.violations() == 0);
    CHECK_THROWS_AS(stability_check(2, 2, named_universe(6)), Error);
}

TEST_CASE("stable words order their atom values", "[separation]") {
    auto s = sep_stable_word(2, 3, named_universe(7));
    CHECK(s.n == std::vector<int>{12, 48, 192, 768});
    auto v = sep_vector(s);
    auto val = [&](int i) { return v[Letter{no_label, s.tau[i - 1]}]; };
    CHECK(val(6) > val(7));
    CHECK(val(7) > val(4));
    CHECK(val(4) > val(5));
    CHECK(val(5) > val(2));
    CHECK(val(2) > val(3));
    CHECK(val(3) > val(1));
}

TEST_CASE("g3 words are commutatively stable at depth one", "[separation]") {
    CHECK_THROWS_AS(g3_stability_check(1, 4, 19), Error);
    auto rep = g3_stability_check(1, 4, 20);
    CHECK(rep.violations() == 0);
    REQUIRE_FALSE(rep.cases.empty());
    CHECK(rep.cases[0].w.empty());
    bool anchor_case = false;
    auto tau = g3_stable_tree(1, 4, 20);
    auto& root = tau.root.atoms;
    for (auto& c : rep.cases)
        if (c.w[Letter{no_label, root[1]}] > 0) {
            anchor_case = true;
            CHECK(c.w[Letter{no_label, root[0]}] > 0);
            CHECK(c.w[Letter{no_label, root[2]}] > 0);
        }
    CHECK(anchor_case);
    CHECK_THROWS_AS(g3_stable_tree(2, 4, 38), Error);  // counters leave int range
}

TEST_CASE("g3 witness search agrees with derivation", "[separation]") {
    auto t = g3_stable_tree(1, 1, 3);
    auto v = g3_tree_vector(t);
    CHECK(parikh(g3_word(t)) == v);
    auto found = g3_witnesses(v);
    REQUIRE_FALSE(found.empty());
    for (auto& f : found) {
        CHECK(parikh(g3_word(f)) == v);
        CHECK(same_unordered_tree(f, t));
    }
    // a root-only tree: (a,b,c)^n with three separators
    auto single = g3_witnesses(vector_of("3$# 2a 2b 2c"));
    CHECK(single.size() == 6);  // any order of the three root atoms
    auto g3 = builtin_grammar("g3");
    auto trees = derive_with_trees(g3, make_universe({separator(), atom("a"), atom("b"), atom("c"), atom("d"), atom("e")}), 9);
    int checked = 0;
    for (auto& [w, d] : trees) {
        auto tree = g3_tree(g3, d);
        auto pv = parikh(w);
        int hashes = pv[Letter{no_label, separator()}];
        if (static_cast<int>(pv.dom().size()) != hashes + 1) continue;
        auto ws = g3_witnesses(pv);
        bool present = false;
        for (auto& x : ws) present = present || g3_word(x) == w;
        CHECK(present);
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("interval instances", "[separation]") {
    auto fig = figure();
    CHECK(interval_validate(fig));
    CHECK(interval_max_overlap(fig) == 2);
    CHECK(subtree_unions_connected(fig));
    auto labels = vertex_labels(fig);
    CHECK(labels[0] == std::pair<std::string, std::string>{"A", "B"});
    CHECK(labels[1] == std::pair<std::string, std::string>{"A", "C"});
    CHECK(labels[2] == std::pair<std::string, std::string>{"D", "B"});
    auto again = parse_interval_document(interval_document(fig));
    CHECK(again.leaves == fig.leaves);
    CHECK(again.intervals == fig.intervals);

    auto broken = fig;
    broken.intervals["E"] = {Rational(7), Rational(8)};
    CHECK_FALSE(interval_validate(broken));
    auto dup = fig;
    dup.leaves[3].first = "A";
    CHECK_FALSE(interval_validate(dup));
    auto shortleaves = fig;
    shortleaves.leaves.pop_back();
    CHECK_THROWS_AS(interval_validate(shortleaves), Error);
    auto missing = fig;
    missing.intervals.erase("G");
    CHECK_THROWS_AS(interval_validate(missing), Error);
    CHECK_THROWS_AS(parse_interval_document("{\"kind\":\"interval-instance\",\"version\":7}"), Error);

    // closed ends: touching intervals overlap
    IntervalTreeInstance touch{1, {{"A", "B"}}, {{"A", {Rational(0), Rational(1)}}, {"B", {Rational(1), Rational(2)}}}};
    CHECK(interval_validate(touch));
    CHECK(interval_max_overlap(touch) == 2);
}

TEST_CASE("overlap sweep agrees with pointwise counting", "[separation]") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        auto inst = random_interval_instance(1 + static_cast<int>(seed % 5), seed);
        REQUIRE(interval_validate(inst));
        std::set<Rational> points;
        for (auto& [l, iv] : inst.intervals) points.insert({iv.lo, iv.hi});
        int best = 0;
        for (auto& x : points) {
            int c = 0;
            for (auto& [l, iv] : inst.intervals) c += iv.lo <= x && x <= iv.hi;
            best = std::max(best, c);
        }
        CHECK(interval_max_overlap(inst) == best);
        CHECK(interval_max_overlap(inst) >= 2);
    }
}

TEST_CASE("interval lower bounds", "[separation]") {
    for (int d = 1; d <= 3; ++d) {
        auto r = interval_search(d, 0);
        CHECK(r.exhaustive);
        CHECK(r.achieved == 2);
        CHECK(interval_validate(r.instance));
    }
    int at_least_three = 0;
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        auto inst = random_interval_instance(6, seed * 7919);
        REQUIRE(interval_validate(inst));
        at_least_three += interval_max_overlap(inst) >= 3;
    }
    CHECK(at_least_three == 500);
    auto r = interval_search(6, 200, 5);
    CHECK_FALSE(r.exhaustive);
    CHECK(r.achieved >= 3);
}

TEST_CASE("register compatibility", "[separation]") {
    auto a = atom("a"), b = atom("b"), c = atom("c"), d = atom("d");
    CHECK(compatible({a, b}, {a, b}, {a, b, c}));
    CHECK_FALSE(compatible({a, b}, {b, a}, {a}));
    CHECK(compatible({a, c}, {a, d}, {a, b}));
    CHECK_FALSE(compatible({a, c}, {a, b}, {b}));
    CHECK_THROWS_AS(compatible({a, a}, {a, b}, {a}), Error);
    CHECK_THROWS_AS(compatible({a}, {a, b}, {a}), Error);

    Rng rng(33);
    auto u = named_universe(7);
    for (int t = 0; t < 200; ++t) {
        int r = 1 + below(rng, 3);
        std::set<Atom> A;
        int na = 1 + below(rng, 3);
        while (static_cast<int>(A.size()) < na) A.insert(u[below(rng, 7)]);
        long long need = 1;
        for (int i = 0; i < r; ++i) need *= na + 1;
        std::vector<RegisterValuation> seq;
        for (long long i = 0; i <= need; ++i) {
            auto pool = u;
            std::shuffle(pool.begin(), pool.end(), rng);
            seq.emplace_back(pool.begin(), pool.begin() + r);
        }
        auto pair = find_compatible_pair(seq, A);
        REQUIRE(pair);
        CHECK(pair->first < pair->second);
        CHECK(compatible(seq[pair->first], seq[pair->second], A));
    }
}

TEST_CASE("pumping a letter", "[separation]") {
    auto two = builtin_automaton("example_two");
    auto bounds = pump_bounds(two, 1);
    CHECK(bounds.f4 == 3 * 2);
    CHECK(bounds.f2 == 6);
    CHECK(bounds.f3 == 2 * 7);
    DataWord w(bounds.f2 + 1, Letter{no_label, atom("a")});
    auto run = accepts(two, w);
    REQUIRE(run);
    auto p = pump_word(two, w, *run, w[0]);
    CHECK(parikh(p.omega)[w[0]] > 0);
    CHECK(static_cast<long long>(p.omega.size()) <= p.bounds.f3);
    CHECK(accepts(two, p.pumped));
    CHECK(p.pumped.size() > w.size());
    CHECK_THROWS_AS(pump_word(two, DataWord(bounds.f2, w[0]), *accepts(two, DataWord(bounds.f2, w[0])), w[0]), Error);

    auto first = builtin_automaton("B_first");
    Rng rng(34);
    auto u = named_universe(4);
    int done = 0;
    for (int t = 0; t < 60; ++t) {
        DataWord x{Letter{no_label, u[0]}};
        int len = 20 + below(rng, 30);
        for (int i = 0; i < len; ++i) x.push_back({no_label, u[1 + below(rng, 3)]});
        auto r = accepts(first, x);
        REQUIRE(r);
        Letter tau = x[1];
        if (std::count(x.begin(), x.end(), tau) <= pump_bounds(first, static_cast<int>(atoms_of(x).size())).f2) continue;
        auto p = pump_word(first, x, *r, tau);
        CHECK(accepts(first, p.pumped));
        CHECK(parikh(p.omega)[tau] > 0);
        CHECK(static_cast<long long>(p.omega.size()) <= p.bounds.f3);
        DataWord joined = p.sigma1;
        joined.insert(joined.end(), p.sigma2.begin(), p.sigma2.end());
        joined.insert(joined.end(), p.sigma3.begin(), p.sigma3.end());
        CHECK(joined == x);
        ++done;
    }
    CHECK(done > 10);
}

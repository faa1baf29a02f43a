#include <catch_amalgamated.hpp>

#include "rlang/automata.hpp"
#include "rlang/grammar.hpp"
#include "support.hpp"

using namespace rlang;

namespace {

Letter L(const char* h, const char* a) { return {label(h), atom(a)}; }

bool is_mirror(const DataWord& w) {
    if (w.empty() || w.size() % 2) return false;
    std::size_t n = w.size() / 2;
    for (std::size_t i = 0; i < n; ++i) {
        if (w[i].label != label("l") || w[2 * n - 1 - i].label != label("r")) return false;
        if (w[i].atom != w[2 * n - 1 - i].atom) return false;
    }
    return true;
}

// g3 words of depth at most one built directly from trees over `atoms`.
std::set<DataWord> g3_shallow_words(const std::vector<Atom>& atoms, int max_len) {
    std::set<DataWord> out;
    for (Atom a : atoms)
        for (Atom b : atoms)
            for (Atom c : atoms) {
                if (a == b || b == c || a == c) continue;
                for (int n = 1; 3 + 3 * n <= max_len; ++n) {
                    G3Tree t{{{a, b, c}, n, {}}};
                    out.insert(g3_word(t));
                    for (Atom d : atoms)
                        for (Atom h : atoms) {
                            if (d == a || d == c || h == c || h == a) continue;
                            for (int m = 1; 5 + 3 * n + 2 * m <= max_len; ++m)
                                for (int k = 1; 5 + 3 * n + 2 * m + 2 * k <= max_len; ++k) {
                                    G3Tree::Node left{{a, d}, m, {}}, right{{h, c}, k, {}};
                                    G3Tree t2{{{a, b, c}, n, {left, right}}};
                                    out.insert(g3_word(t2));
                                }
                        }
                }
            }
    return out;
}

Rcfg random_grammar(testsupport::Rng& rng) {
    Rcfg g;
    g.r = 1;
    g.r0 = {std::nullopt};
    g.labels = {no_label, label("h")};
    int nvars = 1 + testsupport::below(rng, 2);
    for (int i = 0; i < nvars; ++i) g.add_var("N" + std::to_string(i));
    int nprods = 1 + testsupport::below(rng, 3);
    for (int i = 0; i < nprods; ++i) {
        Production p;
        p.head = testsupport::below(rng, nvars);
        int len = testsupport::below(rng, 4);
        for (int j = 0; j < len; ++j) {
            int k = testsupport::below(rng, 4);
            if (k == 0 && i > 0)
                p.body.push_back(Symbol::nt(testsupport::below(rng, nvars)));
            else
                p.body.push_back(Symbol::lab(k == 1 ? label("h") : no_label));
        }
        p.phi = testsupport::random_constraint(rng, 1 + len, {}, 2);
        g.prods.push_back(p);
    }
    // a terminating production for every nonterminal
    for (int v = 0; v < nvars; ++v) g.prods.push_back({v, Constraint::top(), {Symbol::lab(no_label)}});
    return g;
}

}  // namespace

TEST_CASE("mirror grammar", "[grammar]") {
    auto g = builtin_grammar("mirror");
    CHECK(g.prods.size() == 2);
    CHECK(g.labels == std::set<Label>{label("l"), label("r")});
    auto ab = universe_of({"a", "b"});
    auto words = derive_bounded(g, ab, 4);
    std::set<DataWord> expect{
        {L("l", "a"), L("r", "a")},
        {L("l", "b"), L("r", "b")},
        {L("l", "a"), L("l", "b"), L("r", "b"), L("r", "a")},
        {L("l", "b"), L("l", "a"), L("r", "a"), L("r", "b")},
        {L("l", "a"), L("l", "a"), L("r", "a"), L("r", "a")},
        {L("l", "b"), L("l", "b"), L("r", "b"), L("r", "b")},
    };
    CHECK(words == expect);
    CHECK_FALSE(words.count(DataWord{}));

    auto u = named_universe(3);
    auto six = derive_bounded(g, u, 6);
    for (auto& w : six) CHECK(is_mirror(w));
    CHECK(six.size() == 3 + 9 + 27);

    for (auto& [w, t] : derive_with_trees(g, u, 6)) {
        CHECK(valid_derivation(g, t));
        CHECK(t.word() == w);
    }
    CHECK(derive_bounded(g, u, 6, 3) == derive_bounded(g, u, 6, 8));
}

TEST_CASE("gsh grammars match their expressions", "[grammar]") {
    auto g = builtin_grammar("gsh");
    CHECK(g.vars == std::vector<std::string>{"S", "S1", "S2", "S3", "S4", "S5"});
    CHECK(g.labels.size() == 6);
    auto u = universe_of({"a", "b", "c"});
    CHECK(derive_bounded(g, u, 4).count(DataWord{}));
    CHECK(parikh_bounded(g, u, 6) == members_bounded(builtin_expression("gsh", {3}), u, 6));
    auto u4 = universe_of({"a", "b", "c", "d"});
    for (int n : {1, 2}) {
        auto gn = builtin_grammar("gsh", {n});
        CHECK(gn.vars.size() == static_cast<std::size_t>(2 * n));
        CHECK(parikh_bounded(gn, u4, 6) == members_bounded(builtin_expression("gsh", {n}), u4, 6));
    }
    CHECK_THROWS_AS(derive_bounded(g, universe_of({"b", "c"}), 3), Error);
    for (auto& v : parikh_bounded(g, u4, 6)) {
        CHECK(v[{label("r"), atom("a")}] == v.size() - [&] {
            int other = 0;
            for (auto& [l, k] : v.entries())
                if (!(l.label == label("r") && l.atom == atom("a"))) other += k;
            return other;
        }());
        int r = 0, u1 = 0;
        for (auto& [l, k] : v.entries()) {
            if (l.label == label("r")) r += k;
            if (l.label == label("u1")) u1 += k;
        }
        CHECK(r == u1);
    }
}

TEST_CASE("g3 grammar and its trees", "[grammar]") {
    auto g = builtin_grammar("g3");
    CHECK(g.vars == std::vector<std::string>{"S", "A", "B", "C", "D", "E"});
    CHECK(g.r == 3);
    Atom hash = constant("#");
    auto atoms4 = atoms({"a", "b", "c", "d"});
    std::vector<Atom> u(atoms4.begin(), atoms4.end());
    u.push_back(hash);
    auto universe = make_universe({u.begin(), u.end()});
    auto trees = derive_with_trees(g, universe, 12);
    std::set<DataWord> words;
    for (auto& [w, t] : trees) words.insert(w);
    CHECK(words == g3_shallow_words(u, 12));
    for (auto& [w, t] : trees) {
        REQUIRE(valid_derivation(g, t));
        auto tree = g3_tree(g, t);
        CHECK(g3_word(tree) == w);
        auto v = parikh(w);
        int hashes = v[{no_label, hash}];
        CHECK(static_cast<int>(v.dom().size()) <= 1 + hashes);
        CHECK(tree.node_count() <= 3 * hashes);
        auto back = g3_derivation(g, tree);
        CHECK(valid_derivation(g, back));
        CHECK(back.word() == w);
    }

    // the worked derivation with eight distinct atoms
    auto as = atoms({"a", "b", "c", "d", "e", "f", "g", "h"});
    int n1 = 2, n2 = 1, n3 = 3, n4 = 1, n5 = 2;
    G3Tree::Node ad{{as[0], as[3]}, n2, {}};
    G3Tree::Node eg{{as[4], as[6]}, n4, {}};
    G3Tree::Node hc{{as[7], as[2]}, n5, {}};
    G3Tree::Node efc{{as[4], as[5], as[2]}, n3, {eg, hc}};
    G3Tree tau{{{as[0], as[1], as[2]}, n1, {ad, efc}}};
    auto w = g3_word(tau);
    auto d = g3_derivation(g, tau);
    REQUIRE(valid_derivation(g, d));
    auto back = g3_tree(g, d);
    CHECK(back.to_string() == tau.to_string());
    CHECK(back.node_count() == 5);
    DataVector expect = DataVector::single({no_label, hash}, 8);
    int counts[] = {n1 + n2, n1, n1 + n3 + n5, n2, n3 + n4, n3, n4, n5};
    for (int i = 0; i < 8; ++i) expect += DataVector::single({no_label, as[i]}, counts[i]);
    CHECK(parikh(w) == expect);

    G3Tree single{{{as[0], as[1], as[2]}, 1, {}}};
    CHECK(g3_tree(g, g3_derivation(g, single)).node_count() == 1);
    CHECK(g3_word(single).size() == 6);

    std::vector<int> counts7(7);
    for (int i = 0; i < 7; ++i) counts7[i] = 2 * (i + 1);
    std::vector<Atom> many;
    for (int i = 0; i < g3_full_atoms(2); ++i) many.push_back(atom("t" + std::to_string(i)));
    auto full = g3_full_tree(2, counts7, many);
    CHECK(full.node_count() == 7);
    auto fw = parikh(g3_word(full));
    CHECK(static_cast<int>(fw.dom().size()) == 1 + fw[{no_label, hash}]);
    std::set<Atom> anchors{full.root.atoms[1], full.root.kids[0].atoms[1], full.root.kids[1].atoms[1]};
    CHECK(anchors.size() == 3);
    CHECK(valid_derivation(g, g3_derivation(g, full)));

    G3Tree broken = tau;
    broken.root.kids[1].atoms[2] = as[6];
    CHECK_THROWS_AS(g3_word(broken), Error);
    CHECK_THROWS_AS(g3_tree(g, derive_with_trees(builtin_grammar("mirror"), named_universe(2), 2).begin()->second), Error);
}

TEST_CASE("restricted grammar conversion", "[grammar]") {
    auto u = named_universe(3);
    // A(x) -> B(x) C(y) D(y)
    Rcfg g;
    g.r = 1;
    g.r0 = {std::nullopt};
    g.labels = {no_label, label("h")};
    for (auto n : {"A", "B", "C", "D"}) g.add_var(n);
    g.prods.push_back({0, Constraint::eq(Term::v(0), Term::v(1)) && Constraint::eq(Term::v(2), Term::v(3)),
                       {Symbol::nt(1), Symbol::nt(2), Symbol::nt(3)}});
    for (int v = 1; v <= 3; ++v) g.prods.push_back({v, Constraint::top(), {Symbol::lab(v == 1 ? label("h") : no_label)}});
    auto rg = to_restricted_cfg(g);
    CHECK(is_restricted(rg));
    CHECK(parikh_bounded(rg, u, 4) == parikh_bounded(g, u, 4));
    // the orbit with y ≠ x splits into B(x) and the pair C, D
    bool found = false;
    for (auto& p : rg.prods)
        if (p.body.size() == 2 && p.body[0].kind == Symbol::Kind::nonterminal && rg.vars[p.body[0].id].find("Dx") != std::string::npos)
            found = true;
    CHECK(found);

    auto mirror = builtin_grammar("mirror");
    auto rm = to_restricted_cfg(mirror);
    CHECK(is_restricted(rm));
    auto u4 = named_universe(4);
    CHECK(parikh_bounded(rm, u4, 4) == parikh_bounded(mirror, u4, 4));

    auto gsh = builtin_grammar("gsh", {2});
    CHECK(is_restricted(gsh) == false);
    auto rs = to_restricted_cfg(gsh);
    CHECK(is_restricted(rs));
    CHECK(parikh_bounded(rs, u, 5) == parikh_bounded(gsh, u, 5));

    Rcfg eq_only;
    eq_only.r = 1;
    eq_only.r0 = {std::nullopt};
    eq_only.labels = {no_label};
    eq_only.add_var("S");
    eq_only.prods.push_back({0, Constraint::all_equal({Term::v(0), Term::v(1), Term::v(2)}), {Symbol::lab(no_label), Symbol::nt(0)}});
    eq_only.prods.push_back({0, Constraint::top(), {}});
    auto same = to_restricted_cfg(eq_only);
    CHECK(same.vars == eq_only.vars);
    CHECK(same.prods.size() == 2);
    CHECK_THROWS_AS(to_restricted_cfg(builtin_grammar("g3")), Error);
}

TEST_CASE("random grammars keep their Parikh image", "[grammar]") {
    testsupport::Rng rng(41);
    auto u = named_universe(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = random_grammar(rng);
        auto rg = to_restricted_cfg(g);
        REQUIRE(is_restricted(rg));
        CHECK(parikh_bounded(rg, u, 4) == parikh_bounded(g, u, 4));
        // each derived word is witnessed by a valid tree
        for (auto& [w, t] : derive_with_trees(g, u, 3)) {
            CHECK(valid_derivation(g, t));
            CHECK(parikh_bounded(g, u, 3).count(parikh(w)));
        }
    }
}

TEST_CASE("derivation is equivariant", "[grammar]") {
    testsupport::Rng rng(7);
    auto u = named_universe(3);
    auto wide = named_universe(6);
    auto g = builtin_grammar("mirror");
    auto base = derive_bounded(g, u, 4);
    for (int i = 0; i < 5; ++i) {
        auto pi = testsupport::random_permutation(rng, wide);
        auto moved = derive_bounded(g, make_universe(pi.apply(std::set<Atom>(u.begin(), u.end()))), 4);
        std::set<DataWord> expect;
        for (auto& w : base) expect.insert(pi.apply(w));
        CHECK(moved == expect);
    }
    CHECK_THROWS_AS(builtin_grammar("nope"), Error);
}


TEST_CASE("three-register automaton image sits inside the star-height-three grammar", "[grammar]") {
    // Registers stay pairwise distinct, so levels that reuse an atom are unreachable.
    auto g = builtin_grammar("gsh");
    auto a = builtin_automaton("gsh3_auto");
    auto u = universe_of({"a", "b"});
    auto pa = parikh_bounded(a, u, 6);
    auto pg = parikh_bounded(g, u, 6);
    for (auto& v : pa) CHECK(pg.count(v));
    CHECK(pa.size() < pg.size());
    auto reuse = vector_of("r:a u1:b d1:b u2:a d2:a l:b");
    CHECK(pg.count(reuse));
    CHECK_FALSE(pa.count(reuse));
    CHECK(pa.count(vector_of("r:a u1:b")));
}

#include <catch_amalgamated.hpp>

#include "rlang/ratset.hpp"
#include "support.hpp"

using namespace rlang;

namespace {

// All label-less vectors over u of size at most n.
std::vector<DataVector> all_vectors(const Universe& u, int n) {
    std::vector<DataVector> out{DataVector{}};
    for (Atom a : u) {
        std::vector<DataVector> next;
        for (auto& v : out)
            for (int k = 0; v.size() + k <= n; ++k) next.push_back(v + DataVector::single({no_label, a}, k));
        out = std::move(next);
    }
    return out;
}

bool in_r_example(const DataVector& v) {
    for (auto& [l, k] : v.entries()) {
        Atom a = l.atom;
        bool ok = (k - 1) * 2 == v.size() - k;
        for (auto& [m, j] : v.entries())
            if (m.atom != a && j % 2) ok = false;
        if (ok) return true;
    }
    return false;
}

bool in_par_two(const DataVector& v) {
    for (auto& e : v.entries())
        if (e.second >= 2) return true;
    return false;
}

bool in_par_first(const DataVector& v) {
    for (auto& e : v.entries())
        if (e.second == 1) return true;
    return false;
}

VectorSet filtered(const Universe& u, int n, bool (*pred)(const DataVector&)) {
    VectorSet s;
    for (auto& v : all_vectors(u, n))
        if (pred(v)) s.insert(v);
    return s;
}

}  // namespace

TEST_CASE("star height of named expressions", "[ratset]") {
    CHECK(syntactic_star_height(RatExpr::zero()) == 0);
    CHECK(syntactic_star_height(builtin_expression("par_two")) == 1);
    CHECK(syntactic_star_height(builtin_expression("par_first")) == 1);
    CHECK(syntactic_star_height(builtin_expression("par_mirror")) == 1);
    CHECK(syntactic_star_height(builtin_expression("gsh", {3})) == 3);
    CHECK(syntactic_star_height(builtin_expression("gsh", {5})) == 5);
    CHECK_THROWS_AS(builtin_expression("nope"), Error);
}

TEST_CASE("bounded members agree with brute force", "[ratset]") {
    auto u = named_universe(3);
    auto r = builtin_expression("R_example");
    auto m = members_bounded(r, u, 7);
    CHECK(m.count(vector_of("3a 2b 2c")));
    CHECK(m.count(vector_of("3a 4b")));
    CHECK(m.count(vector_of("a")));
    CHECK(m == filtered(u, 7, in_r_example));
    CHECK_FALSE(members_bounded(r, named_universe(2), 2).count(vector_of("a b")));
    CHECK(members_bounded(builtin_expression("par_two"), u, 5) == filtered(u, 5, in_par_two));
    CHECK(members_bounded(builtin_expression("par_first"), u, 5) == filtered(u, 5, in_par_first));
    CHECK(contains(r, vector_of("5a 2b 2c 2d 2e")));
    CHECK(contains(r, vector_of("2a 2b")));
    CHECK_FALSE(contains(r, vector_of("2a b")));

    auto mirror = members_bounded(builtin_expression("par_mirror"), u, 4);
    for (auto& v : mirror)
        for (Atom a : v.atoms()) CHECK(v[{label("l"), a}] == v[{label("r"), a}]);
    CHECK(mirror.count(vector_of("l:a r:a l:b r:b")));
    CHECK(mirror.size() == 1 + 3 + 6);
}

TEST_CASE("missing constants are reported", "[ratset]") {
    auto k = constant("k");
    auto e = RatExpr::single(DataVector::single({no_label, k}));
    CHECK_THROWS_AS(members_bounded(e, named_universe(2), 3), Error);
    CHECK(members_bounded(e, make_universe({atom("a"), k}), 3).size() == 1);
}

TEST_CASE("bounded members are equivariant", "[ratset]") {
    testsupport::Rng rng(5);
    auto u = named_universe(3);
    auto wide = named_universe(6);
    for (auto name : {"R_example", "par_two", "par_first"}) {
        auto e = builtin_expression(name);
        auto base = members_bounded(e, u, 6);
        for (int i = 0; i < 5; ++i) {
            auto pi = testsupport::random_permutation(rng, wide);
            auto moved = members_bounded(e, make_universe(pi.apply(std::set<Atom>(u.begin(), u.end()))), 6);
            VectorSet expect;
            for (auto& v : base) expect.insert(pi.apply(v));
            CHECK(moved == expect);
        }
    }
}

TEST_CASE("linear forms preserve members and height", "[ratset]") {
    int x = new_var(), y = new_var();
    VecTemplate tx, ty, txy;
    tx.add(no_label, Term::v(x));
    ty.add(no_label, Term::v(y));
    txy.add(label("h"), Term::v(x)).add(no_label, Term::v(y), 2);
    auto any = RatExpr::onion({x}, Constraint::top(), {RatExpr::single(tx)});
    auto pairs = RatExpr::onion({x, y}, Constraint::ne(Term::v(x), Term::v(y)), {RatExpr::single(txy)});
    auto fixed = RatExpr::single(vector_of("2a"));
    std::vector<RatExpr> cases{
        RatExpr::star(any),
        RatExpr::sum({RatExpr::star(any), RatExpr::star(pairs)}),
        RatExpr::sum({fixed, RatExpr::star(RatExpr::sum({pairs, RatExpr::star(any)}))}),
        RatExpr::alt({fixed, RatExpr::star(pairs), RatExpr::zero()}),
        RatExpr::onion({y}, Constraint::top(), {RatExpr::sum({RatExpr::single(ty), RatExpr::star(RatExpr::sum({any, RatExpr::single(ty)}))})}),
        builtin_expression("R_example"),
        builtin_expression("par_two"),
        builtin_expression("par_mirror"),
        builtin_expression("gsh", {2}),
    };
    auto u = named_universe(3);
    for (auto& e : cases) {
        auto lf = to_linear_form(e);
        CHECK(lf.height == syntactic_star_height(e));
        CHECK(members_bounded(lf.to_expr(), u, 6) == members_bounded(e, u, 6));
    }
    auto star_any = to_linear_form(RatExpr::star(any));
    REQUIRE(star_any.clauses.size() == 1);
    CHECK(star_any.clauses[0].base.size() == 0);
    auto r = builtin_expression("R_example");
    CHECK(to_linear_form(r).to_expr().to_string() == r.to_string());
}

TEST_CASE("parsing trees and their edits", "[ratset]") {
    auto lf = to_linear_form(builtin_expression("R_example"));
    auto u = universe_of({"a", "b", "c"});
    auto t = build_parsing_tree(lf, vector_of("3a 2b 2c"), u);
    REQUIRE(t);
    CHECK(t->root.vec == vector_of("a"));
    CHECK(t->root.support.empty());
    REQUIRE(t->root.kids.size() == 2);
    CHECK(t->root.kids[0].vec == vector_of("a 2b"));
    CHECK(t->root.kids[1].vec == vector_of("a 2c"));
    CHECK(t->root.kids[1].support == std::set<Atom>{atom("a")});
    CHECK(t->value() == vector_of("3a 2b 2c"));
    CHECK(validate_parsing_tree(lf, *t));
    CHECK_FALSE(build_parsing_tree(lf, vector_of("a b"), u));

    auto pruned = tree_edit(lf, *t, {TreeEdit::Kind::prune, {1}, {}});
    CHECK(pruned.value() == vector_of("2a 2b"));
    auto doubled = tree_edit(lf, *t, {TreeEdit::Kind::duplicate, {0}, {}});
    CHECK(doubled.value() == vector_of("4a 4b 2c"));
    auto moved = tree_edit(lf, *t, {TreeEdit::Kind::permute, {1}, Permutation::swap(atom("c"), atom("d"))});
    CHECK(moved.value() == vector_of("3a 2b 2d"));
    try {
        tree_edit(lf, *t, {TreeEdit::Kind::permute, {1}, Permutation::swap(atom("a"), atom("d"))});
        FAIL("support violation not reported");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::support);
    }
    CHECK_THROWS_AS(tree_edit(lf, *t, {TreeEdit::Kind::prune, {}, {}}), Error);
}

TEST_CASE("bound constants cover every parsing tree", "[ratset]") {
    CHECK(bound_constants(LinearForm{}).N == 0);
    CHECK(bound_constants(LinearForm{}).M == 0);
    auto two = bound_constants(to_linear_form(builtin_expression("par_two")));
    CHECK(two.N == 2);
    CHECK(two.M == 1);
    for (auto name : {"R_example", "par_two", "par_first", "par_mirror"}) {
        auto e = builtin_expression(name);
        auto lf = to_linear_form(e);
        auto bc = bound_constants(lf);
        if (std::string(name) == "R_example") {
            CHECK(bc.N == 3);
            CHECK(bc.M == 1);
        }
        auto u = named_universe(3);
        for (auto& v : members_bounded(e, u, 6)) {
            auto t = build_parsing_tree(lf, v, u);
            REQUIRE(t);
            CHECK(t->value() == v);
            CHECK(t->depth() <= lf.height);
            std::function<void(const ParsingTree::Node&)> walk = [&](const ParsingTree::Node& n) {
                CHECK(n.vec.size() <= bc.N);
                CHECK(static_cast<int>(n.support.size()) <= bc.M);
                for (auto& k : n.kids) walk(k);
            };
            walk(t->root);
        }
    }
}

TEST_CASE("substitution", "[ratset]") {
    auto base = RatExpr::single(vector_of("2x"));
    auto ab = RatExpr::single(vector_of("a b"));
    auto out = substitute(base, [&](const VecTemplate::Item&) { return ab; });
    CHECK(members_bounded(out, universe_of({"a", "b", "x"}), 6) == VectorSet{vector_of("2a 2b")});

    auto identity = [](const VecTemplate::Item& i) {
        VecTemplate t;
        t.add(i.label, i.atom);
        return RatExpr::single(t);
    };
    auto u = named_universe(3);
    for (auto name : {"R_example", "par_two", "par_mirror"}) {
        auto e = builtin_expression(name);
        auto s = substitute(e, identity);
        CHECK(members_bounded(s, u, 6) == members_bounded(e, u, 6));
        CHECK(syntactic_star_height(s) == syntactic_star_height(e));
    }
    // a star-height-one family over a height-one base stays within height two
    auto starred = substitute(builtin_expression("par_two"), [&](const VecTemplate::Item& i) {
        VecTemplate t;
        t.add(i.label, i.atom);
        return RatExpr::star(RatExpr::single(t));
    });
    CHECK(syntactic_star_height(starred) <= 2);
}

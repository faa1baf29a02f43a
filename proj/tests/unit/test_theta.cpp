#include <catch_amalgamated.hpp>

#include "rlang/theta.hpp"
#include "support.hpp"

using namespace rlang;
using testsupport::below;
using testsupport::Rng;

namespace {

ThetaSet A1() { return parse_theta("(a,{b,c}); (a,{d,e}); (a,{f,g})"); }
ThetaSet A2() { return parse_theta("(a,{b,c}); (d,{e,f}); (g,{h,i}); (j,{k,l})"); }
ThetaSet A3() { return parse_theta("(a,{b,c}); (d,{b,e}); (f,{b,g}); (h,{b,i})"); }

ThetaElem random_elem(Rng& rng, const Universe& u, int p) {
    Atom a = u[below(rng, static_cast<int>(u.size()))];
    std::set<Atom> B;
    while (static_cast<int>(B.size()) < p) {
        Atom b = u[below(rng, static_cast<int>(u.size()))];
        if (b != a) B.insert(b);
    }
    return ThetaElem(a, B);
}

ThetaSet random_set(Rng& rng, const Universe& u, int p, int n) {
    ThetaSet s(p);
    for (int i = 0; i < n; ++i) s.insert(random_elem(rng, u, p));
    return s;
}

void subsets_of_size(const std::vector<Atom>& pool, int k, std::size_t from, std::vector<Atom>& cur,
                     const std::function<void(const std::vector<Atom>&)>& f) {
    if (static_cast<int>(cur.size()) == k) return f(cur);
    for (std::size_t i = from; i < pool.size(); ++i) {
        cur.push_back(pool[i]);
        subsets_of_size(pool, k, i + 1, cur, f);
        cur.pop_back();
    }
}

// Exhaustive restraint search over atoms(A) plus p+2 fresh atoms for both components.
bool brute_restrained(const ThetaSet& s) {
    auto used = s.atoms();
    std::vector<Atom> pool(used.begin(), used.end());
    for (Atom f : fresh_avoiding(used, s.p + 2)) pool.push_back(f);
    bool found = false;
    for (Atom z : pool) {
        std::vector<Atom> cur, rest;
        for (Atom w : pool)
            if (w != z) rest.push_back(w);
        subsets_of_size(rest, s.p, 0, cur, [&](const std::vector<Atom>& W) { found = found || restrains(s, z, W); });
        if (found) return true;
    }
    return false;
}

std::vector<ThetaElem> all_theta1(const Universe& u) {
    std::vector<ThetaElem> out;
    for (Atom a : u)
        for (Atom b : u)
            if (a != b) out.push_back(ThetaElem(a, {b}));
    return out;
}

}  // namespace

TEST_CASE("restraint on the worked sets", "[theta]") {
    auto r1 = find_restraint(A1());
    REQUIRE(r1);
    CHECK(std::count(r1->W.begin(), r1->W.end(), atom("a")) == 1);
    CHECK_FALSE(find_restraint(A2()));
    auto r3 = find_restraint(A3());
    REQUIRE(r3);
    CHECK(r3->z == atom("b"));
    CHECK(restrains(A3(), r3->z, r3->W));
    CHECK(to_string(parse_theta(to_string(A2()))) == to_string(A2()));
    CHECK_THROWS_AS(parse_theta("(a,{a,b})"), Error);
    CHECK_THROWS_AS(parse_theta("(a,{b}); (c,{d,e})"), Error);
}

TEST_CASE("restraint search agrees with a wider exhaustive search", "[theta]") {
    Rng rng(11);
    for (int p = 0; p <= 2; ++p)
        for (int t = 0; t < 120; ++t) {
            auto s = random_set(rng, named_universe(3 + p + below(rng, 4)), p, below(rng, 6));
            auto r = find_restraint(s);
            INFO(to_string(s));
            CHECK(static_cast<bool>(r) == brute_restrained(s));
            if (r) CHECK(restrains(s, r->z, r->W));
            if (r) CHECK(static_cast<int>(r->W.size()) == p);
        }
}

TEST_CASE("restraint is equivariant and monotone", "[theta]") {
    Rng rng(12);
    auto u = named_universe(7);
    for (int t = 0; t < 150; ++t) {
        int p = 1 + below(rng, 2);
        auto s = random_set(rng, u, p, 1 + below(rng, 6));
        auto r = find_restraint(s);
        CHECK(static_cast<bool>(find_restraint(permute(s, testsupport::random_permutation(rng, u)))) == static_cast<bool>(r));
        auto bigger = s;
        bigger.insert(random_elem(rng, u, p));
        if (!r) CHECK_FALSE(find_restraint(bigger));
        if (r) {
            auto smaller = s;
            smaller.elems.erase(smaller.elems.begin());
            CHECK(restrains(smaller, r->z, r->W));
        }
    }
}

TEST_CASE("good controls of the worked sets", "[theta]") {
    auto c1 = good_control(A1());
    CHECK(c1.type == ControlType::LC);
    CHECK(c1.Y == std::set<Atom>{atom("a")});
    auto c2 = good_control(A2());
    CHECK(c2.type == ControlType::URC);
    CHECK(c2.X.empty());
    CHECK(c2.Y.empty());
    auto c3 = good_control(A3());
    CHECK(c3.type == ControlType::URC);
    CHECK(c3.X == std::set<Atom>{atom("b")});
    CHECK(reduce(A3(), {atom("b")}, {}) == parse_theta("(a,{c}); (d,{e}); (f,{g}); (h,{i})"));
    CHECK(reduce(A2(), {}, {}) == A2());
    CHECK_THROWS_AS(good_control(ThetaSet(2)), Error);
    try {
        reduce(A2(), {atom("b")}, {});
        FAIL("reduction by a non-control succeeded");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::control);
    }
}

TEST_CASE("good control exhaustively over small one-arity sets", "[theta]") {
    auto pool = all_theta1(named_universe(4));
    int n = static_cast<int>(pool.size()), checked = 0;
    std::map<ControlType, int> seen;
    for (int k = 1; k <= 4; ++k) {
        std::vector<int> idx(k);
        std::function<void(int, int)> rec = [&](int pos, int from) {
            if (pos == k) {
                ThetaSet s(1);
                for (int i : idx) s.insert(pool[i]);
                auto c = good_control(s);
                CHECK(is_good_control(s, c));
                CHECK(c.X.size() <= 1);
                CHECK(c.Y.size() <= 1);
                ++seen[c.type];
                ++checked;
                return;
            }
            for (int i = from; i < n; ++i) {
                idx[pos] = i;
                rec(pos + 1, i + 1);
            }
        };
        rec(0, 0);
    }
    CHECK(checked == 12 + 66 + 220 + 495);
    CHECK(seen[ControlType::LC] > 0);
    CHECK(seen[ControlType::RC] > 0);
    CHECK(seen[ControlType::FC] > 0);
    CHECK(seen[ControlType::URC] > 0);
}

TEST_CASE("good control on random sets of higher arity", "[theta]") {
    Rng rng(13);
    for (int t = 0; t < 200; ++t) {
        int p = 2 + below(rng, 2);
        auto s = random_set(rng, named_universe(p + 2 + below(rng, 5)), p, 1 + below(rng, 10));
        auto c = good_control(s);
        INFO(to_string(s) << " -> " << to_string(c));
        CHECK(is_good_control(s, c));
        CHECK(static_cast<int>(c.X.size()) <= p);
        CHECK(static_cast<int>(c.Y.size()) <= p * (p + 1) / 2);
    }
}

TEST_CASE("reductions commute", "[theta]") {
    Rng rng(14);
    auto u = named_universe(8);
    for (int t = 0; t < 150; ++t) {
        int p = 3;
        std::set<Atom> X{u[below(rng, 8)]}, U{u[below(rng, 8)]}, Y, V;
        if (X == U) continue;
        Y.insert(u[below(rng, 8)]);
        V.insert(u[below(rng, 8)]);
        ThetaSet s(p);
        for (int i = 0; i < 12; ++i) {
            auto e = random_elem(rng, u, p);
            bool first = Y.count(e.a) || std::includes(e.B.begin(), e.B.end(), X.begin(), X.end());
            bool second = Y.count(e.a) || V.count(e.a) || std::includes(e.B.begin(), e.B.end(), U.begin(), U.end());
            if (first && second) s.insert(e);
        }
        std::set<Atom> XU = X, YV = Y;
        XU.insert(U.begin(), U.end());
        YV.insert(V.begin(), V.end());
        CHECK(reduce(reduce(s, X, Y), U, V) == reduce(s, XU, YV));
    }
}

TEST_CASE("insertion keeps the good control", "[theta]") {
    auto a2 = A2();
    auto c2 = good_control(a2);
    auto ins = insertion_place(a2, c2, ThetaElem(atom("x"), {atom("y"), atom("z")}));
    CHECK(a2.elems.count(ins.chosen));
    CHECK_FALSE(find_restraint(ins.replaced));
    CHECK(ins.chosen == *a2.elems.begin());

    auto again = insertion_place(a2, c2, ThetaElem(atom("d"), {atom("x"), atom("y")}));
    CHECK(again.chosen.a == atom("d"));
    auto with = a2;
    with.insert(ThetaElem(atom("d"), {atom("x"), atom("y")}));
    CHECK(again.replaced == with);

    auto rc = parse_theta("(a,{x,y}); (b,{x,y})");
    auto crc = good_control(rc);
    REQUIRE(crc.type == ControlType::RC);
    auto r = insertion_place(rc, crc, ThetaElem(atom("c"), {atom("x"), atom("y")}));
    auto rc_with = rc;
    rc_with.insert(ThetaElem(atom("c"), {atom("x"), atom("y")}));
    CHECK(r.replaced == rc_with);
    CHECK_THROWS_AS(insertion_place(rc, crc, ThetaElem(atom("c"), {atom("x"), atom("z")})), Error);

    Rng rng(15);
    int done = 0;
    for (int t = 0; t < 400; ++t) {
        int p = 1 + below(rng, 2);
        auto u = named_universe(p + 3 + below(rng, 4));
        auto s = random_set(rng, u, p, 1 + below(rng, 8));
        auto c = good_control(s);
        auto cd = random_elem(rng, u, p);
        if (!insertion_condition(cd, c)) continue;
        auto out = insertion_place(s, c, cd);
        INFO(to_string(s) << " with " << to_string(c) << " inserting " << to_string(cd));
        CHECK(s.elems.count(out.chosen));
        CHECK_FALSE(cd.contains(out.chosen.a));
        CHECK_FALSE(out.chosen.contains(cd.a));
        CHECK(is_good_control(out.replaced, c));
        CHECK(is_good_control(out.extended, c));
        ++done;
    }
    CHECK(done > 100);
}

TEST_CASE("compact subsets respect their bounds", "[theta]") {
    CHECK(compact_subset(A2(), good_control(A2())) == A2());

    Rng rng(16);
    int unrestrained = 0;
    for (int t = 0; t < 200; ++t) {
        auto s = random_set(rng, named_universe(6), 1, 4 + below(rng, 10));
        if (find_restraint(s)) continue;
        ++unrestrained;
        Control plain{ControlType::URC, {}, {}};
        auto small = compact_subset(s, plain);
        CHECK(small.size() <= 6);
        CHECK(std::includes(s.elems.begin(), s.elems.end(), small.elems.begin(), small.elems.end()));
        CHECK_FALSE(find_restraint(small));
    }
    CHECK(unrestrained > 20);

    for (int t = 0; t < 20; ++t) {
        ThetaSet s(2);
        while (s.size() < 40) s.insert(random_elem(rng, named_universe(12), 2));
        REQUIRE_FALSE(find_restraint(s));
        auto small = compact_subset(s, {ControlType::URC, {}, {}});
        CHECK(small.size() <= 21);
        CHECK_FALSE(find_restraint(small));
    }

    for (int t = 0; t < 200; ++t) {
        int p = 1 + below(rng, 3);
        auto s = random_set(rng, named_universe(p + 2 + below(rng, 6)), p, 1 + below(rng, 30));
        auto c = good_control(s);
        auto small = compact_subset(s, c);
        CHECK(is_good_control(small, c));
        CHECK(static_cast<std::size_t>(small.size()) <= compact_bound(p, c));
        CHECK(std::includes(s.elems.begin(), s.elems.end(), small.elems.begin(), small.elems.end()));
    }
}

TEST_CASE("matching in sequences", "[theta]") {
    auto e = [](const char* a, std::initializer_list<const char*> bs) {
        std::set<Atom> B;
        for (auto b : bs) B.insert(atom(b));
        return ThetaElem(atom(a), B);
    };
    auto m = find_matching({e("a", {"b"}), e("b", {"a"}), e("c", {"d"}), e("d", {"c"})});
    REQUIRE(m);
    CHECK(*m == std::pair{0, 2});
    // Repeated elements always match each other.
    auto rep = find_matching({e("a", {"b"}), e("b", {"a"}), e("a", {"b"})});
    REQUIRE(rep);
    CHECK(*rep == std::pair{0, 2});
    CHECK_FALSE(find_matching({e("a", {"b"}), e("b", {"a"})}));

    Rng rng(17);
    for (int t = 0; t < 300; ++t) {
        int p = 1 + below(rng, 3);
        auto u = named_universe(p + 1 + below(rng, 5));
        ThetaSeq seq;
        for (int i = 0; i < 2 * p + 2; ++i) seq.push_back(random_elem(rng, u, p));
        CHECK(find_matching(seq));
    }
    for (int t = 0; t < 200; ++t) {
        int p = 1 + below(rng, 2);
        auto u = named_universe(p + 2 + below(rng, 4));
        auto s = random_set(rng, u, p, 1 + below(rng, 8));
        auto c = good_control(s);
        std::vector<ThetaElem> elems(s.elems.begin(), s.elems.end());
        ThetaSeq seq;
        int need = (2 * p + 1) * (static_cast<int>(c.Y.size()) + 1) + 1;
        while (static_cast<int>(seq.size()) < need) seq.push_back(elems[below(rng, static_cast<int>(elems.size()))]);
        auto found = find_matching(seq, c);
        REQUIRE(found);
        auto [i, j] = *found;
        ThetaSet swapped(p);
        swapped.insert(ThetaElem(seq[i].a, {seq[j].B.begin(), seq[j].B.end()}));
        swapped.insert(ThetaElem(seq[j].a, {seq[i].B.begin(), seq[i].B.end()}));
        CHECK(weak_good_control(swapped, c));
    }
}

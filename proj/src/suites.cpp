#include "rlang/suites.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "rlang/automata.hpp"
#include "rlang/grammar.hpp"
#include "rlang/oracle.hpp"
#include "rlang/ratset.hpp"
#include "rlang/separation.hpp"
#include "rlang/surgery.hpp"
#include "rlang/theta.hpp"

namespace rlang {

namespace {

using Rng = std::mt19937_64;

int below(Rng& rng, int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); }

struct Checks {
    std::vector<std::string> failures;
    std::ostringstream summary;

    bool operator()(bool ok, const std::string& what) {
        if (!ok && failures.size() < 20) failures.push_back(what);
        return ok;
    }
};

Constraint random_constraint(Rng& rng, int nvars, int depth) {
    auto term = [&] { return Term::v(below(rng, nvars)); };
    if (depth == 0 || below(rng, 3) == 0) {
        auto e = Constraint::eq(term(), term());
        return below(rng, 2) ? e : !e;
    }
    auto a = random_constraint(rng, nvars, depth - 1);
    auto b = random_constraint(rng, nvars, depth - 1);
    switch (below(rng, 3)) {
        case 0:
            return a && b;
        case 1:
            return a || b;
        default:
            return !a;
    }
}

// One register, at most four states, blocks of at most two letters.
Fma random_block_automaton(Rng& rng) {
    Fma a;
    a.r = 1;
    a.r0 = {std::nullopt};
    a.labels = {no_label, label("h")};
    int n = 1 + below(rng, 4);
    for (int i = 0; i < n; ++i) a.add_state("q" + std::to_string(i), below(rng, 3) == 0);
    a.accepting.insert(n - 1);
    int rules = 1 + below(rng, 4);
    for (int i = 0; i < rules; ++i) {
        int p = below(rng, 3);
        std::vector<Label> block;
        for (int j = 0; j < p; ++j) block.push_back(below(rng, 2) ? no_label : label("h"));
        a.rules.push_back({below(rng, n), block, random_constraint(rng, 2 + p, 2), below(rng, n)});
    }
    return a;
}

// One register, at most three productions, every nonterminal has a terminating one.
Rcfg random_small_grammar(Rng& rng) {
    Rcfg g;
    g.r = 1;
    g.r0 = {std::nullopt};
    g.labels = {no_label, label("h")};
    int nvars = 1 + below(rng, 2);
    for (int i = 0; i < nvars; ++i) g.add_var("N" + std::to_string(i));
    for (int v = 0; v < nvars; ++v) {
        Label l = below(rng, 2) ? no_label : label("h");
        g.prods.push_back({v, random_constraint(rng, 2, 1), {Symbol::lab(l)}});
    }
    int extra = 1 + below(rng, 3 - nvars);
    for (int i = 0; i < extra; ++i) {
        Production p;
        p.head = below(rng, nvars);
        int len = 1 + below(rng, 3);
        for (int j = 0; j < len; ++j) {
            int k = below(rng, 3);
            if (k == 0)
                p.body.push_back(Symbol::nt(below(rng, nvars)));
            else
                p.body.push_back(Symbol::lab(k == 1 ? label("h") : no_label));
        }
        p.phi = random_constraint(rng, 1 + len, 2);
        g.prods.push_back(p);
    }
    return g;
}

ThetaElem random_elem(Rng& rng, const Universe& u, int p) {
    Atom a = u[below(rng, static_cast<int>(u.size()))];
    std::set<Atom> B;
    while (static_cast<int>(B.size()) < p) {
        Atom b = u[below(rng, static_cast<int>(u.size()))];
        if (b != a) B.insert(b);
    }
    return ThetaElem(a, B);
}

ThetaSet random_theta(Rng& rng, const Universe& u, int p, int n) {
    ThetaSet s(p);
    for (int i = 0; i < n; ++i) s.insert(random_elem(rng, u, p));
    return s;
}

std::string str(const VectorSet& s) { return std::to_string(s.size()) + " vectors"; }

// ---------------------------------------------------------------------------

void example_two_expression(Checks& ok) {
    auto v = parikh_equal_bounded(Provider::of(builtin_automaton("example_two"), "example_two"),
                                  Provider::of(builtin_expression("par_two"), "par_two"), named_universe(3), 4);
    ok(v.equal, "example_two vs par_two: " + to_string(v));
    ok(v.first_size > 0, "empty image");
    ok.summary << to_string(v);
}

void first_last(Checks& ok) {
    auto first = Provider::of(builtin_automaton("B_first"), "B_first");
    auto last = Provider::of(builtin_automaton("C_last"), "C_last");
    auto u = named_universe(3);
    auto pv = parikh_equal_bounded(first, last, u, 5);
    ok(pv.equal, "Parikh images differ: " + to_string(pv));
    auto lv = language_equal_bounded(first, last, u, 5);
    ok(!lv.equal && lv.word_witness.has_value(), "languages should differ: " + to_string(lv));
    if (lv.word_witness) {
        bool a = accepts(*first.automaton, *lv.word_witness).has_value();
        bool b = accepts(*last.automaton, *lv.word_witness).has_value();
        ok(a != b && a == lv.witness_in_first, "witness is not in exactly one language");
    }
    ok.summary << "Parikh " << to_string(pv) << "; words " << to_string(lv);
}

void conversions(Checks& ok) {
    Rng rng(3);
    auto u = named_universe(4);
    int autos = 0, grams = 0;
    for (int i = 0; i < 20; ++i) {
        auto a = random_block_automaton(rng);
        auto ra = to_restricted(a);
        bool classified = std::all_of(ra.rules.begin(), ra.rules.end(),
                                      [&](const Rule& rl) { return classify_rule(ra, rl).has_value(); });
        ok(classified && is_restricted(ra), "automaton " + std::to_string(i) + " not restricted after conversion");
        auto before = parikh_bounded(a, u, 4), after = parikh_bounded(ra, u, 4);
        ok(before == after, "automaton " + std::to_string(i) + ": " + str(before) + " became " + str(after));
        autos += before == after;
    }
    for (int i = 0; i < 20; ++i) {
        auto g = random_small_grammar(rng);
        auto rg = to_restricted_cfg(g);
        bool classified = std::all_of(rg.prods.begin(), rg.prods.end(),
                                      [&](const Production& p) { return classify_production(rg, p).has_value(); });
        ok(classified && is_restricted(rg), "grammar " + std::to_string(i) + " not restricted after conversion");
        auto before = parikh_bounded(g, u, 4), after = parikh_bounded(rg, u, 4);
        ok(before == after, "grammar " + std::to_string(i) + ": " + str(before) + " became " + str(after));
        grams += before == after;
    }
    ok.summary << autos << "/20 automata, " << grams << "/20 grammars Parikh-equal after conversion";
}

void antipath_identities(Checks& ok) {
    auto un = unrestrained_constants();
    auto re = restrained_constants();
    ok(un.N0 == 41 && un.N1 == 4, "unrestrained constants");
    ok(re.N0 == 24 && re.N1 == 8, "restrained constants");
    auto a = semilinear_identity_check(IdentityKind::unrestrained_ap, named_universe(8), 6);
    ok(a.equal, "unrestrained identity fails at " + a.counterexample + " (" + a.side + ")");
    auto b = semilinear_identity_check(IdentityKind::restrained_ap, named_universe(8), 6);
    ok(b.equal, "restrained identity fails at " + b.counterexample + " (" + b.side + ")");
    ok.summary << "unrestrained " << a.lhs << " orbits, restrained " << b.lhs << " orbits";
}

void theta_lemmas(Checks& ok) {
    // (a) every nonempty A of at most four elements of Theta_1 over four atoms
    auto u4 = named_universe(4);
    std::vector<ThetaElem> pool;
    for (Atom a : u4)
        for (Atom b : u4)
            if (a != b) pool.push_back(ThetaElem(a, {b}));
    int subsets = 0;
    std::vector<int> idx;
    std::function<void(int)> rec = [&](int from) {
        if (!idx.empty()) {
            ThetaSet s(1);
            for (int i : idx) s.insert(pool[i]);
            ++subsets;
            ok(is_good_control(s, good_control(s)), "good control fails on " + to_string(s));
        }
        if (idx.size() == 4) return;
        for (int i = from; i < static_cast<int>(pool.size()); ++i) {
            idx.push_back(i);
            rec(i + 1);
            idx.pop_back();
        }
    };
    rec(0);
    ok(subsets == 12 + 66 + 220 + 495, "subset count");

    // (b) matching
    Rng rng(5);
    int matched = 0;
    for (int t = 0; t < 1000; ++t) {
        int p = 1 + below(rng, 3);
        auto u = named_universe(p + 1 + below(rng, 5));
        ThetaSeq seq;
        for (int i = 0; i < 2 * p + 2; ++i) seq.push_back(random_elem(rng, u, p));
        auto m = find_matching(seq);
        if (ok(m.has_value(), "no matching in a sequence of length " + std::to_string(2 * p + 2))) {
            auto [i, j] = *m;
            bool cross = !seq[i].contains(seq[j].a) && !seq[j].contains(seq[i].a);
            ok(i < j && cross, "reported matching is not one");
            ++matched;
        }
    }

    // (c) compact subsets of unrestrained sets
    Control plain{ControlType::URC, {}, {}};
    ok(compact_bound(1, plain) == 6, "compact bound at p = 1");
    for (int p = 1; p <= 3; ++p)
        ok(compact_bound(p, plain) == static_cast<std::size_t>(p * p * p + 2 * p * p + 2 * p + 1), "compact bound formula");
    int compact = 0;
    while (compact < 500) {
        int p = 1 + below(rng, 2);
        auto s = random_theta(rng, named_universe(p + 3 + below(rng, 5)), p, 4 + below(rng, 14));
        if (find_restraint(s)) continue;
        ++compact;
        auto small = compact_subset(s, plain);
        ok(small.size() <= static_cast<int>(compact_bound(p, plain)), "compact subset too large for " + to_string(s));
        ok(std::includes(s.elems.begin(), s.elems.end(), small.elems.begin(), small.elems.end()), "not a subset");
        ok(!find_restraint(small), "compact subset of " + to_string(s) + " is restrained");
    }

    // (d) insertion places
    int inserted = 0;
    while (inserted < 500) {
        int p = 1 + below(rng, 2);
        auto u = named_universe(p + 3 + below(rng, 4));
        auto s = random_theta(rng, u, p, 1 + below(rng, 8));
        auto c = good_control(s);
        auto cd = random_elem(rng, u, p);
        if (!insertion_condition(cd, c)) continue;
        ++inserted;
        auto out = insertion_place(s, c, cd);
        ok(s.elems.count(out.chosen) > 0, "chosen element not in the set");
        ok(is_good_control(out.replaced, c) && is_good_control(out.extended, c),
           "insertion into " + to_string(s) + " loses the control " + to_string(c));
    }
    ok.summary << subsets << " sets controlled, " << matched << " matchings, " << compact << " compact subsets, "
               << inserted << " insertions";
}

void star_height_three(Checks& ok) {
    auto u = named_universe(6);
    auto g = parikh_bounded(builtin_grammar("gsh", {3}), u, 8);
    auto e = builtin_expression("gsh", {3});
    auto m = members_bounded(e, u, 8);
    ok(g == m, "grammar " + str(g) + " vs expression " + str(m));
    int h = syntactic_star_height(e);
    ok(h == 3, "star height " + std::to_string(h));
    ok.summary << str(g) << " on both sides; star height " << h;
}

void separating_language(Checks& ok) {
    auto u = make_universe({separator(), atom("a"), atom("b"), atom("c")});
    auto aut = Provider::of(builtin_automaton("sep_L"), "sep_L");
    auto parse = Provider::words("sep_parse", [](const DataWord& w) { return sep_parse(w).has_value(); }, {separator()});
    auto v = language_equal_bounded(aut, parse, u, 10);
    ok(v.equal, "automaton vs parser: " + to_string(v));
    int checked = 0;
    Letter hash{no_label, separator()};
    for (auto& w : provider_words(aut, u, 10)) {
        auto pv = parikh(w);
        auto s = sep_parse(w);
        if (!ok(s.has_value(), "member does not parse")) continue;
        std::set<Atom> distinct(s->tau.begin(), s->tau.end());
        int dom = static_cast<int>(pv.dom().size());
        ok(dom <= pv[hash] + 2, "domain bound fails on " + to_string(w));
        ok((dom == pv[hash] + 2) == (distinct.size() == s->tau.size()), "equality case fails on " + to_string(w));
        ++checked;
    }
    ok.summary << to_string(v) << "; domain bound on " << checked << " members";
}

void word_stability(Checks& ok) {
    auto rep = stability_check(1, 2, named_universe(5));
    ok(rep.violations() == 0, std::to_string(rep.violations()) + " violations");
    for (auto& c : rep.cases)
        ok(c.preserved && c.propagates && !c.witnesses.empty(), "perturbation " + to_string(c.w) + " breaks the structure");
    ok.summary << rep.structure << ": " << rep.examined << " perturbations, " << rep.cases.size() << " realisable, "
               << rep.violations() << " violations";
}

void tree_stability(Checks& ok) {
    int k = g3_full_atoms(1) + 1;
    int M = 3 * k + 2;
    for (int C : {2, 4}) {
        auto rep = g3_stability_check(1, C, M);
        ok(rep.violations() == 0, "C = " + std::to_string(C) + ": " + std::to_string(rep.violations()) + " violations");
        ok.summary << "C=" << C << " M=" << M << ": " << rep.cases.size() << " realisable of " << rep.examined << "; ";
    }
    bool rejected = false;
    try {
        g3_stability_check(1, 2, M - 1);
    } catch (const Error& e) {
        rejected = e.kind() == ErrorKind::parameter;
    }
    ok(rejected, "M = 3k+1 accepted");

    // random derivations
    auto g3 = builtin_grammar("g3");
    Rng rng(9);
    auto pool = named_universe(7);
    Letter hash{no_label, separator()};
    int made = 0;
    while (made < 200) {
        std::function<G3Tree::Node(std::vector<Atom>, int)> grow = [&](std::vector<Atom> as, int depth) {
            G3Tree::Node n{as, 1 + below(rng, 3), {}};
            if (as.size() == 3 && depth > 0 && below(rng, 3) > 0) {
                // a left child keeps the parent's first atom, a right child its last
                auto pick = [&](std::vector<Atom> keep, std::size_t size, Atom avoid) {
                    while (keep.size() < size) {
                        Atom a = pool[below(rng, static_cast<int>(pool.size()))];
                        if (a != avoid && std::find(keep.begin(), keep.end(), a) == keep.end()) keep.push_back(a);
                    }
                    return keep;
                };
                bool left_leaf = below(rng, 2), right_leaf = below(rng, 2);
                auto l = pick({as[0]}, left_leaf ? 2 : 3, as[0]);
                auto r = pick({}, right_leaf ? 1 : 2, as[2]);
                r.push_back(as[2]);
                n.kids.push_back(grow(l, depth - 1));
                n.kids.push_back(grow(r, depth - 1));
            }
            return n;
        };
        std::vector<Atom> root;
        while (root.size() < 3) {
            Atom a = pool[below(rng, static_cast<int>(pool.size()))];
            if (std::find(root.begin(), root.end(), a) == root.end()) root.push_back(a);
        }
        G3Tree t{grow(root, 3)};
        DataWord w;
        try {
            w = g3_word(t);
        } catch (const Error&) {
            continue;  // a random choice broke the distinctness of some node
        }
        ++made;
        auto d = g3_derivation(g3, t);
        ok(valid_derivation(g3, d) && d.word() == w, "derivation of " + t.to_string() + " is invalid");
        auto v = parikh(w);
        int hashes = v[hash];
        ok(static_cast<int>(v.dom().size()) <= 1 + hashes, "domain bound fails on " + t.to_string());
        ok(t.node_count() <= 3 * hashes, "node bound fails on " + t.to_string());
    }
    ok.summary << made << " random derivations";
}

void interval_trees(Checks& ok, const std::string& figure_path) {
    std::ifstream in(figure_path);
    if (ok(static_cast<bool>(in), "cannot read " + figure_path)) {
        std::stringstream ss;
        ss << in.rdbuf();
        auto fig = parse_interval_document(ss.str());
        ok(interval_validate(fig), "figure instance invalid");
        ok(interval_max_overlap(fig) == 2, "figure overlap " + std::to_string(interval_max_overlap(fig)));
    }
    int low = 0;
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        auto inst = random_interval_instance(6, seed);
        ok(interval_validate(inst), "random instance " + std::to_string(seed) + " invalid");
        int m = interval_max_overlap(inst);
        ok(m >= 3, "random instance " + std::to_string(seed) + " has overlap " + std::to_string(m));
        low += m < 3;
    }
    auto r = interval_search(3, 0);
    ok(r.exhaustive && r.achieved == 2 && interval_validate(r.instance), "depth-3 search did not reach 2");
    ok.summary << "figure overlap 2; " << 500 - low << "/500 random depth-6 instances at >= 3; depth 3 achieves "
               << r.achieved << " after " << r.examined << " partial orders";
}

void pumping(Checks& ok) {
    Rng rng(11);
    int done = 0;
    for (const char* name : {"example_two", "B_first"}) {
        auto a = builtin_automaton(name);
        bool first = std::string(name) == "B_first";
        for (int t = 0; t < 50; ++t) {
            int k = (first ? 2 : 1) + below(rng, first ? 2 : 3);
            auto u = named_universe(k);
            Letter tau{no_label, u[first ? 1 : 0]};
            auto b = pump_bounds(a, k);
            DataWord rest(b.f2 + 1 + below(rng, 4), tau);
            for (int i = below(rng, 5); i > 0 && k > 1; --i) rest.push_back({no_label, u[(first ? 1 : 0) + below(rng, k - (first ? 1 : 0))]});
            if (!first)
                for (int i = 1; i < k; ++i) rest.push_back({no_label, u[i]});
            std::shuffle(rest.begin(), rest.end(), rng);
            DataWord w;
            if (first) w.push_back({no_label, u[0]});
            w.insert(w.end(), rest.begin(), rest.end());
            auto run = accepts(a, w);
            if (!ok(run.has_value(), std::string(name) + " rejects " + to_string(w))) continue;
            PumpResult p;
            try {
                p = pump_word(a, w, *run, tau);
            } catch (const Error& e) {
                ok(false, std::string(name) + " pumping failed on " + to_string(w) + ": " + e.what());
                continue;
            }
            long long fact = 1;
            for (int i = 2; i <= 2 * a.r; ++i) fact *= i;
            long long classes = static_cast<long long>(a.states.size());
            for (int i = 0; i < a.r; ++i) classes *= k + 1;
            ok(static_cast<long long>(p.omega.size()) <= fact * (1 + classes), "omega too long on " + to_string(w));
            ok(parikh(p.omega)[tau] > 0, "omega misses tau");
            DataWord joined = p.sigma1;
            joined.insert(joined.end(), p.sigma2.begin(), p.sigma2.end());
            joined.insert(joined.end(), p.sigma3.begin(), p.sigma3.end());
            ok(joined == w, "pieces do not recombine to the word");
            ok(accepts(a, p.pumped).has_value() && valid_run(a, p.run), "pumped word rejected");
            ++done;
        }
    }
    ok.summary << done << "/100 words pumped";
}

void parsing_trees(Checks& ok) {
    auto lf = to_linear_form(builtin_expression("R_example"));
    auto u = universe_of({"a", "b", "c", "d"});
    auto t = build_parsing_tree(lf, vector_of("3a 2b 2c"), universe_of({"a", "b", "c"}));
    if (!ok(t.has_value(), "no parsing tree")) return;
    bool shape = t->root.vec == vector_of("a") && t->root.kids.size() == 2 && t->root.kids[0].vec == vector_of("a 2b") &&
                 t->root.kids[1].vec == vector_of("a 2c") && t->root.kids[0].kids.empty() && t->root.kids[1].kids.empty();
    ok(shape, "tree differs from the figure: " + t->to_string());
    auto members = members_bounded(builtin_expression("R_example"), u, 10);
    auto pruned = tree_edit(lf, *t, {TreeEdit::Kind::prune, {1}, {}}).value();
    auto doubled = tree_edit(lf, *t, {TreeEdit::Kind::duplicate, {1}, {}}).value();
    auto moved = tree_edit(lf, *t, {TreeEdit::Kind::permute, {1}, Permutation::swap(atom("c"), atom("d"))}).value();
    ok(pruned == vector_of("2a 2b") && members.count(pruned), "prune gives " + to_string(pruned));
    ok(doubled == vector_of("4a 2b 4c") && members.count(doubled), "duplicate gives " + to_string(doubled));
    ok(moved == vector_of("3a 2b 2d") && members.count(moved), "permute gives " + to_string(moved));
    ok.summary << t->to_string() << " -> " << to_string(pruned) << ", " << to_string(doubled) << ", " << to_string(moved);
}

void synthesis(Checks& ok) {
    auto u = named_universe(5);
    for (const char* name : {"example_two", "B_first"}) {
        auto a = builtin_automaton(name);
        auto e = synth_language_parikh(to_restricted(a));
        int h = syntactic_star_height(e);
        ok(h <= 2, std::string(name) + ": star height " + std::to_string(h));
        auto v = parikh_equal_bounded(Provider::of(e, "synthesised"), Provider::of(a, name), u, 6);
        ok(v.equal, std::string(name) + ": " + to_string(v));
        ok.summary << name << " height " << h << ", " << to_string(v) << "; ";
    }
}

struct Entry {
    SuiteInfo info;
    std::function<void(Checks&)> body;
};

std::string figure_path() {
    if (const char* d = std::getenv("RLANG_DATA")) return std::string(d) + "/fig_t3.json";
#ifdef RLANG_DATA_DIR
    return std::string(RLANG_DATA_DIR) + "/fig_t3.json";
#else
    return "data/fig_t3.json";
#endif
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> all = {
        {{"example-two", "Parikh expression of the repeated-atom automaton", 5}, example_two_expression},
        {{"first-last", "first/last: Parikh-equal, not equal", 10}, first_last},
        {{"conversions", "restricted-form conversions keep Parikh images", 60}, conversions},
        {{"antipath-identities", "anti-path identities at 8 atoms, size 6", 60}, antipath_identities},
        {{"theta", "control, matching, compact subset and insertion lemmas", 60}, theta_lemmas},
        {{"star-height-three", "G_sh,3 image and its star height", 60}, star_height_three},
        {{"separating", "separating automaton and domain bound", 60}, separating_language},
        {{"word-stability", "commutative stability of separating words", 60}, word_stability},
        {{"tree-stability", "commutative stability of g3 trees", 60}, tree_stability},
        {{"intervals", "interval-tree overlap bounds", 60}, [](Checks& ok) { interval_trees(ok, figure_path()); }},
        {{"pumping", "pumping a frequent letter", 60}, pumping},
        {{"parsing-trees", "parsing tree of 3a+2b+2c and its edits", 5}, parsing_trees},
        {{"synthesis", "star-height-two synthesis", 60}, synthesis},
    };
    return all;
}

}  // namespace

const std::vector<SuiteInfo>& suite_list() {
    static const std::vector<SuiteInfo> infos = [] {
        std::vector<SuiteInfo> out;
        for (auto& e : entries()) out.push_back(e.info);
        return out;
    }();
    return infos;
}

SuiteResult run_suite(const std::string& name) {
    for (auto& e : entries()) {
        if (e.info.name != name) continue;
        SuiteResult r;
        r.name = name;
        r.limit_seconds = e.info.limit_seconds;
        Checks ok;
        auto t0 = std::chrono::steady_clock::now();
        try {
            e.body(ok);
        } catch (const std::exception& ex) {
            ok(false, std::string("error: ") + ex.what());
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.in_time = r.seconds < r.limit_seconds;
        r.failures = std::move(ok.failures);
        r.summary = ok.summary.str();
        r.passed = r.failures.empty() && r.in_time;
        return r;
    }
    throw Error(ErrorKind::lookup, "unknown suite " + name);
}

}  // namespace rlang

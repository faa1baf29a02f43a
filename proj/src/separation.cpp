#include "rlang/separation.hpp"

#include <algorithm>
#include <climits>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace rlang {

Atom separator() { return constant("#"); }

namespace {

Letter plain(Atom a) { return {no_label, a}; }

std::vector<int> atom_ids(const std::vector<Atom>& as) {
    std::vector<int> out;
    for (Atom a : as) out.push_back(a.id);
    return out;
}

SepStructure flipped(const SepStructure& s) {
    SepStructure r = s;
    std::reverse(r.tau.begin(), r.tau.end());
    std::reverse(r.n.begin(), r.n.end());
    r.reversed = !s.reversed;
    return r;
}

void check_structure(const SepStructure& s) {
    if (s.k < 0 || static_cast<int>(s.n.size()) != s.k + 2 || static_cast<int>(s.tau.size()) != 2 * s.k + 3)
        throw Error(ErrorKind::form, "separating structure needs k+2 exponents and 2k+3 atoms");
    for (int e : s.n)
        if (e < 1) throw Error(ErrorKind::form, "block exponents must be positive");
    for (Atom a : s.tau)
        if (a == separator()) throw Error(ErrorKind::form, "block atoms must differ from #");
}

// Literal left-to-right reading; flag false.
std::optional<SepStructure> read_forward(const DataWord& w) {
    Atom hash = separator();
    std::vector<DataWord> segs(1);
    for (auto& l : w) {
        if (l.label != no_label) return std::nullopt;
        if (l.atom == hash)
            segs.emplace_back();
        else
            segs.back().push_back(l);
    }
    if (segs.size() < 3 || segs.size() % 2 == 0) return std::nullopt;
    std::vector<DataWord> blocks;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (i % 2 == 1) {
            if (!segs[i].empty()) return std::nullopt;
        } else {
            if (segs[i].empty()) return std::nullopt;
            blocks.push_back(segs[i]);
        }
    }
    SepStructure s;
    s.k = static_cast<int>(blocks.size()) - 2;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        std::size_t period = b == 0 || b + 1 == blocks.size() ? 2 : 3;
        auto& blk = blocks[b];
        if (blk.size() % period != 0) return std::nullopt;
        for (std::size_t i = period; i < blk.size(); ++i)
            if (blk[i] != blk[i - period]) return std::nullopt;
        if (b == 0)
            s.tau.push_back(blk[0].atom);
        else if (blk[0].atom != s.tau.back())
            return std::nullopt;
        for (std::size_t i = 1; i < period; ++i) s.tau.push_back(blk[i].atom);
        s.n.push_back(static_cast<int>(blk.size() / period));
    }
    return s;
}

}  // namespace

std::string to_string(const SepStructure& s) {
    std::string out = "k=" + std::to_string(s.k) + " n=(";
    for (std::size_t i = 0; i < s.n.size(); ++i) out += (i ? "," : "") + std::to_string(s.n[i]);
    out += ") tau=(";
    for (std::size_t i = 0; i < s.tau.size(); ++i) out += (i ? "," : "") + atom_name(s.tau[i]);
    out += ")";
    if (s.reversed) out += " reversed";
    return out;
}

DataWord sep_build(const SepStructure& s) {
    check_structure(s);
    DataWord w;
    Letter hash = plain(separator());
    auto block = [&](std::vector<Atom> as, int times) {
        for (int i = 0; i < times; ++i)
            for (Atom a : as) w.push_back(plain(a));
    };
    block({s.tau[0], s.tau[1]}, s.n[0]);
    for (int j = 1; j <= s.k; ++j) {
        w.insert(w.end(), {hash, hash});
        block({s.tau[2 * j - 1], s.tau[2 * j], s.tau[2 * j + 1]}, s.n[j]);
    }
    w.insert(w.end(), {hash, hash});
    block({s.tau[2 * s.k + 1], s.tau[2 * s.k + 2]}, s.n[s.k + 1]);
    if (s.reversed) std::reverse(w.begin(), w.end());
    return w;
}

DataVector sep_vector(const SepStructure& s) {
    check_structure(s);
    std::map<Atom, int> c;
    c[separator()] = 2 * s.k + 2;
    for (int j = 0; j <= s.k + 1; ++j) {
        int lo = j == 0 ? 0 : 2 * j - 1;
        int hi = j == s.k + 1 ? 2 * j : 2 * j + 1;
        for (int i = lo; i <= hi; ++i) c[s.tau[i]] += s.n[j];
    }
    std::vector<DataVector::Entry> es;
    for (auto& [a, n] : c) es.emplace_back(plain(a), n);
    return DataVector(es);
}

SepStructure sep_canonical(SepStructure s) {
    check_structure(s);
    auto r = flipped(s);
    auto key = [](const SepStructure& x) { return std::pair{atom_ids(x.tau), x.n}; };
    if (key(s) < key(r)) return s;
    if (key(r) < key(s)) return r;
    s.reversed = false;  // palindromic word
    return s;
}

std::optional<SepStructure> sep_parse(const DataWord& w) {
    auto s = read_forward(w);
    if (!s) return std::nullopt;
    return sep_canonical(*s);
}

std::vector<SepStructure> sep_witnesses(const DataVector& v) {
    Atom hash = separator();
    std::map<Atom, int> val;
    int hashes = 0;
    for (auto& [l, n] : v.entries()) {
        if (l.label != no_label) return {};
        if (l.atom == hash)
            hashes = n;
        else
            val[l.atom] = n;
    }
    if (hashes < 2 || hashes % 2 != 0) return {};
    int k = hashes / 2 - 1;
    int slots = 2 * k + 3;
    if (static_cast<int>(val.size()) > slots) return {};
    if (static_cast<int>(val.size()) < slots)
        throw Error(ErrorKind::precondition, "witness search needs 2k+3 distinct atoms besides #");
    std::vector<Atom> pool;
    for (auto& [a, n] : val) pool.push_back(a);
    std::vector<SepStructure> out;
    SepStructure s;
    s.k = k;
    s.n.assign(k + 2, 0);
    s.tau.assign(slots, Atom{});
    std::set<Atom> used;
    // odd slots carry the exponents; each even slot must then hold the sum of its two blocks
    std::function<void(int)> even = [&](int j) {
        if (j > k + 1) {
            out.push_back(sep_canonical(s));
            return;
        }
        int want = s.n[j - 1] + s.n[j];
        for (Atom a : pool) {
            if (used.count(a) || val[a] != want) continue;
            used.insert(a);
            s.tau[2 * j - 1] = a;
            even(j + 1);
            used.erase(a);
        }
    };
    std::function<void(int)> odd = [&](int j) {
        if (j > k + 1) return even(1);
        for (Atom a : pool) {
            if (used.count(a)) continue;
            used.insert(a);
            s.tau[2 * j] = a;
            s.n[j] = val[a];
            odd(j + 1);
            used.erase(a);
        }
    };
    odd(0);
    auto key = [](const SepStructure& x) { return std::tuple{atom_ids(x.tau), x.n, x.reversed}; };
    std::sort(out.begin(), out.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SepStructure sep_stable_word(int k, int C, const Universe& universe) {
    if (k < 0 || C < 1) throw Error(ErrorKind::parameter, "stable words need k >= 0 and C >= 1");
    std::vector<Atom> pool;
    for (Atom a : universe)
        if (a != separator()) pool.push_back(a);
    if (static_cast<int>(pool.size()) < 2 * k + 3)
        throw Error(ErrorKind::reference, "universe has " + std::to_string(pool.size()) + " atoms besides #, " +
                                              std::to_string(2 * k + 3) + " are needed");
    SepStructure s;
    s.k = k;
    s.tau.assign(pool.begin(), pool.begin() + 2 * k + 3);
    long long e = C;
    for (int i = 0; i <= k + 1; ++i) {
        e *= 4;
        if (2 * e > INT_MAX) throw Error(ErrorKind::parameter, "exponents overflow");
        s.n.push_back(static_cast<int>(e));
    }
    // v(t2k+2) > v(t2k+3) > v(t2k) > v(t2k+1) > ... > v(t2) > v(t3) > v(t1), gaps above C
    auto v = sep_vector(s);
    std::vector<int> order;
    for (int j = k + 1; j >= 1; --j) {
        order.push_back(v[plain(s.tau[2 * j - 1])]);
        order.push_back(v[plain(s.tau[2 * j])]);
    }
    order.push_back(v[plain(s.tau[0])]);
    for (std::size_t i = 1; i < order.size(); ++i)
        if (order[i - 1] - order[i] <= C) throw Error(ErrorKind::parameter, "stable word lost its value ordering");
    return s;
}

int StabilityReport::violations() const {
    int n = 0;
    for (auto& c : cases)
        if (!c.preserved || !c.propagates) ++n;
    return n;
}

std::vector<DataVector> small_perturbations(const DataVector& v, int C) {
    std::vector<DataVector::Entry> pool;
    for (auto& e : v.entries())
        if (e.first.atom != separator()) pool.push_back(e);
    std::vector<DataVector> out;
    std::vector<DataVector::Entry> cur;
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i == pool.size()) {
            out.emplace_back(cur);
            return;
        }
        for (int c = 0; c <= std::min(left, pool[i].second); ++c) {
            if (c) cur.emplace_back(pool[i].first, c);
            rec(i + 1, left - c);
            if (c) cur.pop_back();
        }
    };
    rec(0, C - 1);
    std::sort(out.begin(), out.end());
    return out;
}

StabilityReport stability_check(int k, int C, const Universe& universe) {
    auto base = sep_stable_word(k, C, universe);
    StabilityReport rep;
    rep.base = sep_vector(base);
    rep.structure = to_string(base);
    for (auto& w : small_perturbations(rep.base, C)) {
        ++rep.examined;
        auto found = sep_witnesses(rep.base + w);
        if (found.empty()) continue;
        StabilityCase c;
        c.w = w;
        for (auto& s : found) {
            c.witnesses.push_back(to_string(s));
            bool grows = s.tau == base.tau;
            for (int j = 0; grows && j <= k + 1; ++j) grows = s.n[j] >= base.n[j];
            c.preserved = c.preserved && grows;
        }
        for (int j = 0; j <= k + 1; ++j) {
            if (w[plain(base.tau[2 * j])] == 0) continue;
            if (j > 0 && w[plain(base.tau[2 * j - 1])] == 0) c.propagates = false;
            if (j <= k && w[plain(base.tau[2 * j + 1])] == 0) c.propagates = false;
        }
        rep.cases.push_back(std::move(c));
    }
    return rep;
}

namespace {

long long checked_pow(long long C, long long M, int e) {
    long long x = C;
    for (int i = 0; i < e; ++i) {
        if (x > INT_MAX / M) throw Error(ErrorKind::parameter, "tree counters overflow");
        x *= M;
    }
    return x;
}

void tree_values(const G3Tree::Node& n, bool root, std::map<Atom, long long>& vals, long long& hashes) {
    hashes += root ? 3 : (n.leaf() ? 1 : 2);
    for (Atom a : n.atoms) vals[a] += n.count;
    for (auto& kid : n.kids) tree_values(kid, false, vals, hashes);
}

std::string unordered_key(const G3Tree::Node& n) {
    auto ids = atom_ids(n.atoms);
    std::sort(ids.begin(), ids.end());
    std::string s = "{";
    for (int i : ids) s += std::to_string(i) + ",";
    s += "}[";
    std::vector<std::string> kids;
    for (auto& k : n.kids) kids.push_back(unordered_key(k));
    std::sort(kids.begin(), kids.end());
    for (auto& k : kids) s += k + ";";
    return s + "]";
}

// Shape of a g3 tree: a triple node with none or two children; each child is a
// pair leaf (one #) or a triple node (two #).
struct Shape {
    bool triple = true;
    std::vector<Shape> kids;
};

const std::vector<Shape>& triple_shapes(int budget) {
    static std::map<int, std::vector<Shape>> memo;
    auto it = memo.find(budget);
    if (it != memo.end()) return it->second;
    std::vector<Shape> out;
    if (budget == 0) out.push_back(Shape{});
    auto child_options = [](int b) {
        std::vector<Shape> opts;
        if (b == 1) opts.push_back(Shape{false, {}});
        if (b >= 2)
            for (auto& s : triple_shapes(b - 2)) opts.push_back(s);
        return opts;
    };
    for (int bl = 1; bl < budget; ++bl)
        for (auto& l : child_options(bl))
            for (auto& r : child_options(budget - bl)) out.push_back(Shape{true, {l, r}});
    return memo[budget] = out;
}

}  // namespace

G3Tree g3_stable_tree(int depth, int C, int M) {
    if (depth < 1 || C < 1 || M < 1) throw Error(ErrorKind::parameter, "stable trees need depth, C and M positive");
    int nodes = (2 << depth) - 1;
    std::vector<int> counts;
    for (int i = 0; i < nodes; ++i) counts.push_back(static_cast<int>(checked_pow(C, M, i + 1)));
    std::vector<Atom> as;
    for (int i = 0; i < g3_full_atoms(depth); ++i) as.push_back(fresh_atom(i));
    auto t = g3_full_tree(depth, counts, as);
    std::map<Atom, long long> vals;
    long long hashes = 0;
    tree_values(t.root, true, vals, hashes);
    for (auto& [a, x] : vals)
        if (x > INT_MAX) throw Error(ErrorKind::parameter, "tree counters overflow");
    return t;
}

DataVector g3_tree_vector(const G3Tree& t) {
    std::map<Atom, long long> vals;
    long long hashes = 0;
    tree_values(t.root, true, vals, hashes);
    vals[separator()] += hashes;
    std::vector<DataVector::Entry> es;
    for (auto& [a, x] : vals) es.emplace_back(plain(a), static_cast<int>(x));
    return DataVector(es);
}

std::vector<G3Tree> g3_witnesses(const DataVector& v) {
    Atom hash = separator();
    std::map<Atom, int> val;
    int hashes = 0;
    for (auto& [l, n] : v.entries()) {
        if (l.label != no_label) return {};
        if (l.atom == hash)
            hashes = n;
        else
            val[l.atom] = n;
    }
    if (hashes < 3) return {};
    if (static_cast<int>(val.size()) > hashes) return {};
    if (static_cast<int>(val.size()) < hashes)
        throw Error(ErrorKind::precondition, "witness search needs a maximal-distinct vector");
    std::vector<Atom> pool;
    for (auto& [a, n] : val) pool.push_back(a);

    std::vector<G3Tree> out;
    for (auto& shape : triple_shapes(hashes - 3)) {
        // flatten: nodes in preorder with the chains they belong to
        struct Flat {
            bool triple;
            int parent;
            bool left;
            int own_chain_left = -1, own_chain_right = -1;  // chain ids of the outer atoms
        };
        std::vector<Flat> nodes;
        std::vector<std::vector<int>> chains;  // chain -> nodes sharing the atom
        std::function<void(const Shape&, int, bool, int, int)> flat = [&](const Shape& s, int parent, bool left, int lc,
                                                                             int rc) {
            int me = static_cast<int>(nodes.size());
            nodes.push_back({s.triple, parent, left});
            if (!s.triple) {
                int c = left ? lc : rc;
                chains[c].push_back(me);
                nodes[me].own_chain_left = left ? c : -1;
                nodes[me].own_chain_right = left ? -1 : c;
                return;
            }
            if (lc < 0) {
                lc = static_cast<int>(chains.size());
                chains.emplace_back();
            }
            if (rc < 0) {
                rc = static_cast<int>(chains.size());
                chains.emplace_back();
            }
            chains[lc].push_back(me);
            chains[rc].push_back(me);
            nodes[me].own_chain_left = lc;
            nodes[me].own_chain_right = rc;
            if (s.kids.empty()) return;
            flat(s.kids[0], me, true, lc, -1);
            flat(s.kids[1], me, false, -1, rc);
        };
        flat(shape, -1, false, -1, -1);
        if (nodes.size() + chains.size() != pool.size()) continue;

        std::vector<Atom> own(nodes.size());
        std::vector<long long> chain_sum(chains.size(), 0);
        std::set<Atom> used;
        int max_val = 0;
        for (auto& [a, n] : val) max_val = std::max(max_val, n);

        auto emit = [&](const std::vector<Atom>& chain_atom) {
            std::function<G3Tree::Node(int, std::size_t&)> build = [&](int i, std::size_t& next) {
                G3Tree::Node n;
                n.count = val[own[i]];
                auto& f = nodes[i];
                if (!f.triple)
                    n.atoms = f.left ? std::vector<Atom>{chain_atom[f.own_chain_left], own[i]}
                                     : std::vector<Atom>{own[i], chain_atom[f.own_chain_right]};
                else
                    n.atoms = {chain_atom[f.own_chain_left], own[i], chain_atom[f.own_chain_right]};
                ++next;
                std::vector<int> kids;
                for (std::size_t j = 0; j < nodes.size(); ++j)
                    if (nodes[j].parent == i) kids.push_back(static_cast<int>(j));
                for (int kid : kids) {
                    std::size_t dummy = 0;
                    n.kids.push_back(build(kid, dummy));
                }
                return n;
            };
            std::size_t next = 0;
            out.push_back(G3Tree{build(0, next)});
        };

        // match chain atoms by value among the atoms left over
        auto match_chains = [&]() {
            std::vector<Atom> rest;
            for (Atom a : pool)
                if (!used.count(a)) rest.push_back(a);
            std::vector<Atom> chain_atom(chains.size());
            std::set<Atom> taken;
            std::function<void(std::size_t)> rec = [&](std::size_t c) {
                if (c == chains.size()) return emit(chain_atom);
                for (Atom a : rest) {
                    if (taken.count(a) || val[a] != chain_sum[c]) continue;
                    taken.insert(a);
                    chain_atom[c] = a;
                    rec(c + 1);
                    taken.erase(a);
                }
            };
            rec(0);
        };

        std::function<void(std::size_t)> assign = [&](std::size_t i) {
            if (i == nodes.size()) return match_chains();
            for (Atom a : pool) {
                if (used.count(a)) continue;
                int x = val[a];
                bool ok = true;
                for (int c : {nodes[i].own_chain_left, nodes[i].own_chain_right})
                    if (c >= 0 && chain_sum[c] + x > max_val) ok = false;
                if (!ok) continue;
                used.insert(a);
                own[i] = a;
                for (int c : {nodes[i].own_chain_left, nodes[i].own_chain_right})
                    if (c >= 0) chain_sum[c] += x;
                assign(i + 1);
                for (int c : {nodes[i].own_chain_left, nodes[i].own_chain_right})
                    if (c >= 0) chain_sum[c] -= x;
                used.erase(a);
            }
        };
        assign(0);
    }
    std::sort(out.begin(), out.end(), [](const G3Tree& a, const G3Tree& b) { return a.to_string() < b.to_string(); });
    return out;
}

bool same_unordered_tree(const G3Tree& a, const G3Tree& b) { return unordered_key(a.root) == unordered_key(b.root); }

StabilityReport g3_stability_check(int depth, int C, int M) {
    if (depth < 1) throw Error(ErrorKind::parameter, "depth must be positive");
    int k = g3_full_atoms(depth) + 1;
    if (M <= 3 * k + 1)
        throw Error(ErrorKind::parameter, "M = " + std::to_string(M) + " must exceed 3k+1 = " + std::to_string(3 * k + 1));
    auto tau = g3_stable_tree(depth, C, M);
    StabilityReport rep;
    rep.base = g3_tree_vector(tau);
    rep.structure = tau.to_string();
    std::vector<std::vector<Atom>> triples;
    std::function<void(const G3Tree::Node&)> collect = [&](const G3Tree::Node& n) {
        if (!n.leaf()) triples.push_back(n.atoms);
        for (auto& kid : n.kids) collect(kid);
    };
    collect(tau.root);
    for (auto& w : small_perturbations(rep.base, C)) {
        ++rep.examined;
        auto found = g3_witnesses(rep.base + w);
        if (found.empty()) continue;
        StabilityCase c;
        c.w = w;
        for (auto& t : found) {
            c.witnesses.push_back(t.to_string());
            c.preserved = c.preserved && same_unordered_tree(t, tau);
        }
        for (auto& t : triples)
            if (w[plain(t[1])] > 0 && (w[plain(t[0])] == 0 || w[plain(t[2])] == 0)) c.propagates = false;
        rep.cases.push_back(std::move(c));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Interval trees.

std::string to_string(const Rational& q) {
    if (q.denominator() == 1) return std::to_string(q.numerator());
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

std::vector<std::pair<std::string, std::string>> vertex_labels(const IntervalTreeInstance& inst) {
    if (inst.depth < 1 || inst.depth > 20) throw Error(ErrorKind::form, "interval tree depth must be between 1 and 20");
    std::size_t leaves = std::size_t{1} << (inst.depth - 1);
    if (inst.leaves.size() != leaves)
        throw Error(ErrorKind::form, "depth " + std::to_string(inst.depth) + " needs " + std::to_string(leaves) + " leaves, got " +
                                         std::to_string(inst.leaves.size()));
    std::vector<std::pair<std::string, std::string>> v(2 * leaves - 1);
    for (std::size_t i = 0; i < leaves; ++i) v[leaves - 1 + i] = inst.leaves[i];
    for (std::size_t i = leaves - 1; i-- > 0;) v[i] = {v[2 * i + 1].first, v[2 * i + 2].second};
    return v;
}

namespace {

void check_intervals(const IntervalTreeInstance& inst) {
    std::set<std::string> used;
    for (auto& [l, r] : inst.leaves) used.insert({l, r});
    for (auto& l : used)
        if (!inst.intervals.count(l)) throw Error(ErrorKind::form, "label " + l + " has no interval");
    for (auto& [l, iv] : inst.intervals) {
        if (!used.count(l)) throw Error(ErrorKind::form, "interval for unused label " + l);
        if (iv.hi < iv.lo) throw Error(ErrorKind::form, "interval of " + l + " is empty");
    }
}

bool meets(const Interval& a, const Interval& b) { return std::max(a.lo, b.lo) <= std::min(a.hi, b.hi); }

}  // namespace

bool subtree_unions_connected(const IntervalTreeInstance& inst) {
    auto v = vertex_labels(inst);
    check_intervals(inst);
    std::size_t n = v.size();
    std::function<std::vector<Interval>(std::size_t)> gather = [&](std::size_t i) {
        std::vector<Interval> out;
        if (2 * i + 1 >= n) {
            out.push_back(inst.intervals.at(v[i].first));
            out.push_back(inst.intervals.at(v[i].second));
            return out;
        }
        for (auto c : {2 * i + 1, 2 * i + 2}) {
            auto sub = gather(c);
            out.insert(out.end(), sub.begin(), sub.end());
        }
        return out;
    };
    for (std::size_t i = 0; i < n; ++i) {
        auto ivs = gather(i);
        std::sort(ivs.begin(), ivs.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
        Rational reach = ivs[0].hi;
        for (auto& iv : ivs) {
            if (iv.lo > reach) return false;
            reach = std::max(reach, iv.hi);
        }
    }
    return true;
}

bool interval_validate(const IntervalTreeInstance& inst) {
    auto v = vertex_labels(inst);
    std::set<std::string> seen;
    for (auto& [l, r] : inst.leaves)
        if (!seen.insert(l).second || !seen.insert(r).second) return false;
    check_intervals(inst);
    for (auto& [l, r] : v)
        if (!meets(inst.intervals.at(l), inst.intervals.at(r))) return false;
    return subtree_unions_connected(inst);
}

int interval_max_overlap(const IntervalTreeInstance& inst) {
    vertex_labels(inst);
    check_intervals(inst);
    std::vector<std::pair<Rational, int>> ev;  // opening (0) sorts before closing (1) at equal points
    for (auto& [l, iv] : inst.intervals) {
        ev.emplace_back(iv.lo, 0);
        ev.emplace_back(iv.hi, 1);
    }
    std::sort(ev.begin(), ev.end());
    int cur = 0, best = 0;
    for (auto& [x, kind] : ev) {
        cur += kind == 0 ? 1 : -1;
        best = std::max(best, cur);
    }
    return best;
}

namespace {

std::string label_name_for(int i) {
    if (i < 26) return std::string(1, static_cast<char>('A' + i));
    return "L" + std::to_string(i);
}

// Label creation order shared by the generators: root (0,1), then each vertex
// in heap order hands a new label to each child. partner[i] is the label the
// new label i must meet.
struct LabelPlan {
    std::vector<std::pair<int, int>> vertex;  // heap order
    std::vector<int> partner;
};

LabelPlan label_plan(int depth) {
    LabelPlan p;
    std::size_t n = (std::size_t{1} << depth) - 1;
    p.vertex.resize(n);
    p.vertex[0] = {0, 1};
    p.partner = {-1, 0};
    int next = 2;
    for (std::size_t i = 0; 2 * i + 2 < n; ++i) {
        auto [l, r] = p.vertex[i];
        p.vertex[2 * i + 1] = {l, next};
        p.partner.push_back(l);
        ++next;
        p.vertex[2 * i + 2] = {next, r};
        p.partner.push_back(r);
        ++next;
    }
    return p;
}

IntervalTreeInstance from_plan(int depth, const LabelPlan& p, const std::vector<Interval>& ivs) {
    IntervalTreeInstance inst;
    inst.depth = depth;
    std::size_t leaves = std::size_t{1} << (depth - 1);
    for (std::size_t i = leaves - 1; i < p.vertex.size(); ++i)
        inst.leaves.emplace_back(label_name_for(p.vertex[i].first), label_name_for(p.vertex[i].second));
    for (std::size_t i = 0; i < ivs.size(); ++i) inst.intervals[label_name_for(static_cast<int>(i))] = ivs[i];
    return inst;
}

}  // namespace

IntervalTreeInstance random_interval_instance(int depth, std::uint64_t seed) {
    if (depth < 1 || depth > 16) throw Error(ErrorKind::parameter, "random instances support depth 1..16");
    std::mt19937_64 rng(seed);
    auto uni = [&](long long lo, long long hi) { return std::uniform_int_distribution<long long>(lo, hi)(rng); };
    auto plan = label_plan(depth);
    std::vector<Interval> ivs(plan.partner.size());
    long long span = 1 << 20;
    // style 0: wide intervals, 1: narrow ones hugging the partner's ends, 2: mixed
    int style = static_cast<int>(uni(0, 2));
    long long lo0 = uni(0, span / 2);
    ivs[0] = {lo0, lo0 + uni(1, span / 2)};
    for (std::size_t i = 1; i < ivs.size(); ++i) {
        auto& q = ivs[plan.partner[i]];
        long long plo = boost::rational_cast<long long>(q.lo), phi = boost::rational_cast<long long>(q.hi);
        long long at;
        long long width;
        bool narrow = style == 1 || (style == 2 && uni(0, 1));
        if (narrow) {
            at = uni(0, 1) ? plo + uni(0, std::min<long long>(8, phi - plo)) : phi - uni(0, std::min<long long>(8, phi - plo));
            width = uni(0, std::max<long long>(1, (phi - plo) / 4));
        } else {
            at = uni(plo, phi);
            width = uni(0, span / 4);
        }
        long long left = uni(0, width);
        ivs[i] = {at - left, at + (width - left)};
    }
    return from_plan(depth, plan, ivs);
}

IntervalSearchResult interval_search(int depth, long long budget, std::uint64_t seed) {
    if (depth < 1) throw Error(ErrorKind::parameter, "depth must be positive");
    IntervalSearchResult res;
    if (depth <= 3) {
        auto plan = label_plan(depth);
        int n = static_cast<int>(plan.partner.size());
        int G = 2 * n;
        std::vector<int> lo(n), hi(n), cover(G, 0);
        // the root intervals always meet, so two is the floor
        for (int target = 2;; ++target) {
            bool found = false;
            std::function<void(int)> dfs = [&](int i) {
                if (found) return;
                ++res.examined;
                if (i == n) {
                    found = true;
                    return;
                }
                for (int a = 0; a < G && !found; ++a)
                    for (int b = a; b < G && !found; ++b) {
                        if (i > 0 && std::max(a, lo[plan.partner[i]]) > std::min(b, hi[plan.partner[i]])) continue;
                        bool ok = true;
                        for (int x = a; x <= b && ok; ++x) ok = cover[x] < target;
                        if (!ok) continue;
                        for (int x = a; x <= b; ++x) ++cover[x];
                        lo[i] = a;
                        hi[i] = b;
                        dfs(i + 1);
                        if (!found)
                            for (int x = a; x <= b; ++x) --cover[x];
                    }
            };
            dfs(0);
            if (found) {
                std::vector<Interval> ivs;
                for (int i = 0; i < n; ++i) ivs.push_back({lo[i], hi[i]});
                res.instance = from_plan(depth, plan, ivs);
                res.achieved = interval_max_overlap(res.instance);
                res.exhaustive = true;
                return res;
            }
            std::fill(cover.begin(), cover.end(), 0);
        }
    }
    if (budget < 1) throw Error(ErrorKind::parameter, "random interval search needs a positive budget");
    std::mt19937_64 seeds(seed);
    for (long long t = 0; t < budget; ++t) {
        auto inst = random_interval_instance(depth, seeds());
        ++res.examined;
        int m = interval_max_overlap(inst);
        if (res.achieved == 0 || m < res.achieved) {
            res.achieved = m;
            res.instance = inst;
        }
    }
    return res;
}

namespace {

Rational parse_rational(const nlohmann::json& j) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (!j.is_string()) throw Error(ErrorKind::parse, "endpoint must be an integer or a \"p/q\" string");
    auto s = j.get<std::string>();
    try {
        auto slash = s.find('/');
        if (slash == std::string::npos) return Rational(std::stoll(s));
        long long q = std::stoll(s.substr(slash + 1));
        if (q == 0) throw Error(ErrorKind::parse, "zero denominator in " + s);
        return Rational(std::stoll(s.substr(0, slash)), q);
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::parse, "bad rational " + s);
    }
}

}  // namespace

std::string interval_document(const IntervalTreeInstance& inst) {
    nlohmann::ordered_json j;
    j["kind"] = "interval-instance";
    j["version"] = 1;
    j["depth"] = inst.depth;
    j["leaves"] = nlohmann::ordered_json::array();
    for (auto& [l, r] : inst.leaves) j["leaves"].push_back({l, r});
    j["intervals"] = nlohmann::ordered_json::object();
    for (auto& [l, iv] : inst.intervals) j["intervals"][l] = {to_string(iv.lo), to_string(iv.hi)};
    return j.dump(2);
}

IntervalTreeInstance parse_interval_document(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("interval document: ") + e.what());
    }
    if (!j.is_object() || j.value("kind", "") != "interval-instance") throw Error(ErrorKind::parse, "not an interval-instance document");
    if (j.value("version", 0) != 1) throw Error(ErrorKind::parse, "unsupported interval document version");
    IntervalTreeInstance inst;
    try {
        inst.depth = j.at("depth").get<int>();
        for (auto& p : j.at("leaves")) inst.leaves.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
        for (auto& [l, iv] : j.at("intervals").items()) inst.intervals[l] = {parse_rational(iv.at(0)), parse_rational(iv.at(1))};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("interval document: ") + e.what());
    }
    return inst;
}

// ---------------------------------------------------------------------------
// Register compatibility and pumping.

namespace {

void check_valuation(const RegisterValuation& r) {
    std::set<Atom> s(r.begin(), r.end());
    if (s.size() != r.size()) throw Error(ErrorKind::form, "register valuation repeats an atom");
}

// Permutation on the atoms of r and rp sending r to rp; requires compatibility
// for every atom the two share.
Permutation valuation_map(const RegisterValuation& r, const RegisterValuation& rp) {
    std::map<Atom, Atom> f;
    for (std::size_t t = 0; t < r.size(); ++t) f[r[t]] = rp[t];
    std::set<Atom> img(rp.begin(), rp.end());
    std::map<Atom, Atom> m = f;
    // close chains x0 -> f(x0) -> ... ending outside dom f back onto their start
    for (Atom x0 : r) {
        if (img.count(x0)) continue;
        Atom x = x0;
        while (f.count(x)) x = f[x];
        m[x] = x0;
    }
    return Permutation(m);
}

}  // namespace

bool compatible(const RegisterValuation& r, const RegisterValuation& rp, const std::set<Atom>& A) {
    if (r.size() != rp.size()) throw Error(ErrorKind::arity, "register valuations of different lengths");
    check_valuation(r);
    check_valuation(rp);
    for (Atom a : A) {
        auto i = std::find(r.begin(), r.end(), a);
        auto j = std::find(rp.begin(), rp.end(), a);
        if (i == r.end() && j == rp.end()) continue;
        if (i == r.end() || j == rp.end() || i - r.begin() != j - rp.begin()) return false;
    }
    return true;
}

std::optional<std::pair<int, int>> find_compatible_pair(const std::vector<RegisterValuation>& seq, const std::set<Atom>& A) {
    for (std::size_t j = 1; j < seq.size(); ++j)
        for (std::size_t i = 0; i < j; ++i)
            if (compatible(seq[i], seq[j], A)) return std::pair{static_cast<int>(i), static_cast<int>(j)};
    return std::nullopt;
}

PumpBounds pump_bounds(const Fma& a, int k) {
    long long b = std::max(1, a.block_size());
    long long classes = static_cast<long long>(a.states.size());
    for (int i = 0; i < a.r; ++i) classes *= k + 1;
    long long fact = 1;
    for (int i = 2; i <= 2 * a.r; ++i) fact *= i;
    PumpBounds p;
    p.f4 = classes;
    p.f2 = b * classes;
    p.f3 = fact * b * (1 + classes);
    return p;
}

PumpResult pump_word(const Fma& a, const DataWord& w, const Run& run, const Letter& tau) {
    if (!valid_run(a, run) || run.word() != w || !a.accepting.count(run.end().state))
        throw Error(ErrorKind::form, "pumping needs an accepting run on the word");
    std::set<Atom> A = atoms_of(w);
    int k = static_cast<int>(A.size());
    A.insert(a.constants.begin(), a.constants.end());
    PumpResult res;
    res.bounds = pump_bounds(a, k);
    long long count = std::count(w.begin(), w.end(), tau);
    if (count <= res.bounds.f2)
        throw Error(ErrorKind::threshold, to_string(tau) + " occurs " + std::to_string(count) + " times, not above " +
                                              std::to_string(res.bounds.f2));

    std::vector<Configuration> before;  // configuration preceding step i
    Configuration c = run.start;
    for (auto& s : run.steps) {
        before.push_back(c);
        c = s.to;
    }
    std::vector<int> tau_steps;
    for (std::size_t i = 0; i < run.steps.size(); ++i)
        if (std::count(run.steps[i].block.begin(), run.steps[i].block.end(), tau))
            tau_steps.push_back(static_cast<int>(i));
    std::optional<std::pair<int, int>> pick;
    for (std::size_t y = 1; y < tau_steps.size() && !pick; ++y)
        for (std::size_t x = 0; x < y && !pick; ++x) {
            auto& cx = before[tau_steps[x]];
            auto& cy = before[tau_steps[y]];
            if (cx.state == cy.state && compatible(cx.regs, cy.regs, A)) pick = std::pair{tau_steps[x], tau_steps[y]};
        }
    if (!pick) throw Error(ErrorKind::threshold, "no compatible pair before the occurrences of " + to_string(tau));
    auto [j, kk] = *pick;
    Permutation pi = valuation_map(before[j].regs, before[kk].regs);

    // Steps j+1 .. kk-1 run from after step j to before step kk; cut repeated
    // compatible configurations until at most f4 steps remain.
    std::vector<Step> mid(run.steps.begin() + j + 1, run.steps.begin() + kk);
    Configuration from = run.steps[j].to;
    auto config_at = [&](std::size_t i) { return i == 0 ? from : mid[i - 1].to; };
    while (static_cast<long long>(mid.size()) > res.bounds.f4) {
        bool cut = false;
        Configuration end = config_at(mid.size());
        for (std::size_t q = 1; q <= mid.size() && !cut; ++q)
            for (std::size_t p = 0; p < q && !cut; ++p) {
                auto cp = config_at(p), cq = config_at(q);
                if (cp.state != cq.state || !compatible(cp.regs, cq.regs, A)) continue;
                Permutation sigma = valuation_map(cq.regs, cp.regs);
                if (sigma.apply(end.regs) != end.regs) continue;
                std::vector<Step> shorter(mid.begin(), mid.begin() + static_cast<long>(p));
                for (std::size_t i = q; i < mid.size(); ++i) {
                    Step s = mid[i];
                    s.block = sigma.apply(s.block);
                    s.to.regs = sigma.apply(s.to.regs);
                    shorter.push_back(s);
                }
                mid = std::move(shorter);
                cut = true;
            }
        if (!cut) break;
    }

    std::vector<Step> loop{run.steps[j]};
    loop.insert(loop.end(), mid.begin(), mid.end());
    res.order = pi.order();
    // omega_1 leads pi^p(before[j]) to pi^(p+1)(before[j]); start from pi(before[j]) = before[kk]
    Run out;
    out.start = run.start;
    out.steps.assign(run.steps.begin(), run.steps.begin() + kk);
    Permutation power = pi;
    for (int p = 0; p < res.order; ++p) {
        for (auto s : loop) {
            s.to.regs = power.apply(s.to.regs);
            s.block = power.apply(s.block);
            out.steps.push_back(s);
            res.omega.insert(res.omega.end(), s.block.begin(), s.block.end());
        }
        power = power.then(pi);
    }
    out.steps.insert(out.steps.end(), run.steps.begin() + kk, run.steps.end());
    for (int i = 0; i < j; ++i) res.sigma1.insert(res.sigma1.end(), run.steps[i].block.begin(), run.steps[i].block.end());
    for (int i = j; i < kk; ++i) res.sigma2.insert(res.sigma2.end(), run.steps[i].block.begin(), run.steps[i].block.end());
    for (std::size_t i = kk; i < run.steps.size(); ++i)
        res.sigma3.insert(res.sigma3.end(), run.steps[i].block.begin(), run.steps[i].block.end());
    res.pumped = res.sigma1;
    res.pumped.insert(res.pumped.end(), res.sigma2.begin(), res.sigma2.end());
    res.pumped.insert(res.pumped.end(), res.omega.begin(), res.omega.end());
    res.pumped.insert(res.pumped.end(), res.sigma3.begin(), res.sigma3.end());
    if (out.word() != res.pumped || !valid_run(a, out) || !a.accepting.count(out.end().state))
        throw Error(ErrorKind::threshold, "pumped run failed verification");
    res.run = std::move(out);
    return res;
}

}  // namespace rlang

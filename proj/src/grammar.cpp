#include "rlang/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace rlang {

int Rcfg::add_var(const std::string& name) {
    vars.push_back(name);
    return static_cast<int>(vars.size()) - 1;
}

int Rcfg::var(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == name) return static_cast<int>(i);
    throw Error(ErrorKind::lookup, "no nonterminal " + name);
}

int Rcfg::branching() const {
    int m = 0;
    for (auto& p : prods) m = std::max(m, static_cast<int>(p.body.size()));
    return m;
}

ProdLayout Rcfg::layout(const Production& p) const {
    ProdLayout l;
    l.r = r;
    l.count = r;
    for (auto& s : p.body) {
        switch (s.kind) {
        case Symbol::Kind::label:
            l.first.push_back(l.count);
            l.count += 1;
            break;
        case Symbol::Kind::nonterminal:
            l.first.push_back(l.count);
            l.count += r;
            break;
        case Symbol::Kind::constant: l.first.push_back(-1); break;
        }
    }
    return l;
}

void Rcfg::validate() const {
    int n = static_cast<int>(vars.size());
    if (start < 0 || start >= n) throw Error(ErrorKind::reference, "start symbol out of range");
    if (static_cast<int>(r0.size()) != r) throw Error(ErrorKind::arity, "initial registers do not match the register count");
    std::set<Atom> seen;
    for (auto& v : r0)
        if (v && !seen.insert(*v).second) throw Error(ErrorKind::configuration, "initial registers repeat " + atom_name(*v));
    std::set<Atom> consts(constants.begin(), constants.end());
    for (auto& p : prods) {
        if (p.head < 0 || p.head >= n) throw Error(ErrorKind::reference, "production head out of range");
        for (auto& s : p.body) {
            if (s.kind == Symbol::Kind::label && !labels.count(s.id))
                throw Error(ErrorKind::alphabet, "production uses undeclared label " + label_name(s.id));
            if (s.kind == Symbol::Kind::nonterminal && (s.id < 0 || s.id >= n))
                throw Error(ErrorKind::reference, "production uses undeclared nonterminal");
            if (s.kind == Symbol::Kind::constant && !consts.count(Atom{s.id}))
                throw Error(ErrorKind::reference, "production uses undeclared constant");
        }
        for (int v : p.phi.vars())
            if (v >= layout(p).count) throw Error(ErrorKind::reference, "production mentions undeclared variable");
        for (Atom c : p.phi.constants())
            if (!consts.count(c)) throw Error(ErrorKind::reference, "production mentions undeclared constant " + atom_name(c));
    }
}

DataWord DerivationTree::word() const {
    DataWord w;
    if (nodes.empty()) return w;
    std::function<void(int)> walk = [&](int i) {
        for (auto& p : nodes[i].parts) {
            if (p.child >= 0)
                walk(p.child);
            else
                w.push_back(p.letter);
        }
    };
    walk(0);
    return w;
}

namespace {

bool distinct(const std::vector<Atom>& as) {
    std::set<Atom> s(as.begin(), as.end());
    return s.size() == as.size();
}

// Values assigned to the production variables by a derivation node.
std::optional<std::vector<Atom>> node_values(const Rcfg& g, const DerivationTree& t, const DerivationTree::Node& n) {
    if (n.prod < 0 || n.prod >= static_cast<int>(g.prods.size())) return std::nullopt;
    const Production& p = g.prods[n.prod];
    if (p.head != n.var || p.body.size() != n.parts.size() || static_cast<int>(n.regs.size()) != g.r) return std::nullopt;
    auto l = g.layout(p);
    std::vector<Atom> vals(l.count);
    for (int i = 0; i < g.r; ++i) vals[i] = n.regs[i];
    for (std::size_t i = 0; i < p.body.size(); ++i) {
        const Symbol& s = p.body[i];
        const auto& part = n.parts[i];
        switch (s.kind) {
        case Symbol::Kind::label:
            if (part.child >= 0 || part.letter.label != s.id) return std::nullopt;
            vals[l.y(i)] = part.letter.atom;
            break;
        case Symbol::Kind::constant:
            if (part.child >= 0 || part.letter != Letter{no_label, Atom{s.id}}) return std::nullopt;
            break;
        case Symbol::Kind::nonterminal: {
            if (part.child < 0 || part.child >= t.size()) return std::nullopt;
            const auto& kid = t.nodes[part.child];
            if (kid.var != s.id || static_cast<int>(kid.regs.size()) != g.r) return std::nullopt;
            for (int k = 0; k < g.r; ++k) vals[l.y(i, k)] = kid.regs[k];
            break;
        }
        }
    }
    return vals;
}

}  // namespace

bool valid_derivation(const Rcfg& g, const DerivationTree& t) {
    if (t.nodes.empty()) return false;
    std::vector<int> parent(t.nodes.size(), -1);
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const auto& n = t.nodes[i];
        if (!distinct(n.regs)) return false;
        auto vals = node_values(g, t, n);
        if (!vals || !g.prods[n.prod].phi.eval(*vals)) return false;
        for (auto& p : n.parts)
            if (p.child >= 0) {
                if (p.child == 0 || parent[p.child] >= 0) return false;
                parent[p.child] = static_cast<int>(i);
            }
    }
    for (std::size_t i = 1; i < t.nodes.size(); ++i)
        if (parent[i] < 0) return false;
    const auto& root = t.nodes[0];
    if (root.var != g.start) return false;
    for (int i = 0; i < g.r; ++i)
        if (g.r0[i] && root.regs[i] != *g.r0[i]) return false;
    return true;
}

namespace {

struct WordOps {
    using V = DataWord;
    static int size(const V& v) { return static_cast<int>(v.size()); }
    static void add(V& acc, const V& v) { acc.insert(acc.end(), v.begin(), v.end()); }
    static void add(V& acc, const Letter& l) { acc.push_back(l); }
};

struct VectorOps {
    using V = DataVector;
    static int size(const V& v) { return v.size(); }
    static void add(V& acc, const V& v) { acc += v; }
    static void add(V& acc, const Letter& l) { acc += DataVector::single(l); }
};

// Least fixpoint of the bounded value sets of all reachable configurations.
template <class Ops>
class Fixpoint {
public:
    using V = typename Ops::V;

    struct Instance {
        int prod;
        std::vector<DerivationTree::Part> parts;  // child = configuration index
        auto operator<=>(const Instance&) const = default;
        bool operator==(const Instance&) const = default;
    };
    struct Witness {
        int inst;
        std::vector<int> picks;  // value index per child, in body order
    };
    struct Config {
        int var;
        std::vector<Atom> regs;
        std::vector<Instance> insts;
        std::vector<V> values;
        std::map<V, int> index;
        std::vector<Witness> wit;
    };

    Fixpoint(const Rcfg& g, const Universe& universe, int bound, int pool) : g_(g), bound_(bound) {
        g.validate();
        std::set<Atom> u(universe.begin(), universe.end());
        for (Atom c : g.constants)
            if (!u.count(c)) throw Error(ErrorKind::reference, "universe lacks constant " + atom_name(c));
        for (auto& v : g.r0)
            if (v && !u.count(*v)) throw Error(ErrorKind::reference, "universe lacks initial register " + atom_name(*v));
        universe_.assign(u.begin(), u.end());
        inside_ = u;
        int m = std::max(1, g.branching());
        pool_ = fresh_avoiding(u, pool < 0 ? g.r + g.r * m + 1 : pool);
        pool_set_.insert(pool_.begin(), pool_.end());
        for (auto& p : g.prods) forms_.push_back(usable_forms(p));
        for (auto& regs : initial_regs()) roots_.insert(intern(g.start, regs));
        for (std::size_t i = 0; i < configs_.size(); ++i) expand(static_cast<int>(i));
        solve();
    }

    std::set<V> results() const {
        std::set<V> out;
        for (int c : roots_) out.insert(configs_[c].values.begin(), configs_[c].values.end());
        return out;
    }

    std::map<V, DerivationTree> trees() const {
        std::map<V, DerivationTree> out;
        for (int c : roots_)
            for (std::size_t i = 0; i < configs_[c].values.size(); ++i) {
                const V& v = configs_[c].values[i];
                if (out.count(v)) continue;
                DerivationTree t;
                build(t, c, static_cast<int>(i));
                out.emplace(v, std::move(t));
            }
        return out;
    }

private:
    std::vector<OrbitFormula> usable_forms(const Production& p) const {
        auto l = g_.layout(p);
        std::vector<OrbitFormula> keep;
        for (auto& f : decompose_constraint(p.phi, l.count, g_.constants)) {
            bool ok = true;
            auto block_distinct = [&](int first) {
                for (int i = 0; i < g_.r; ++i)
                    for (int j = i + 1; j < g_.r; ++j)
                        if (f.same(first + i, first + j)) return false;
                return true;
            };
            ok = block_distinct(0);
            for (std::size_t i = 0; i < p.body.size() && ok; ++i)
                if (p.body[i].kind == Symbol::Kind::nonterminal) ok = block_distinct(l.y(static_cast<int>(i)));
            if (ok) keep.push_back(f);
        }
        return keep;
    }

    std::vector<std::vector<Atom>> initial_regs() const {
        std::vector<std::vector<Atom>> out;
        std::vector<Atom> cur(g_.r);
        auto cands = universe_;
        cands.insert(cands.end(), pool_.begin(), pool_.begin() + std::min<std::size_t>(pool_.size(), g_.r));
        std::function<void(int)> rec = [&](int i) {
            if (i == g_.r) {
                out.push_back(cur);
                return;
            }
            std::vector<Atom> opts;
            if (g_.r0[i])
                opts = {*g_.r0[i]};
            else
                opts = cands;
            for (Atom a : opts) {
                if (std::find(cur.begin(), cur.begin() + i, a) != cur.begin() + i) continue;
                bool clash = false;
                for (int j = i + 1; j < g_.r; ++j) clash |= g_.r0[j] && *g_.r0[j] == a;
                if (clash) continue;
                cur[i] = a;
                rec(i + 1);
            }
        };
        rec(0);
        return out;
    }

    int intern(int var, std::vector<Atom> regs) {
        std::map<Atom, Atom> ren;
        for (auto& a : regs)
            if (pool_set_.count(a)) {
                auto it = ren.find(a);
                if (it == ren.end()) it = ren.emplace(a, pool_[ren.size()]).first;
                a = it->second;
            }
        auto key = std::make_pair(var, regs);
        auto it = ids_.find(key);
        if (it != ids_.end()) return it->second;
        int id = static_cast<int>(configs_.size());
        ids_.emplace(key, id);
        configs_.push_back(Config{var, regs, {}, {}, {}, {}});
        return id;
    }

    void expand(int ci) {
        int var = configs_[ci].var;
        std::vector<Atom> regs = configs_[ci].regs;
        std::set<Instance> seen;
        for (std::size_t pi = 0; pi < g_.prods.size(); ++pi) {
            const Production& p = g_.prods[pi];
            if (p.head != var) continue;
            auto l = g_.layout(p);
            std::vector<std::optional<Atom>> known(l.count);
            for (int i = 0; i < g_.r; ++i) known[i] = regs[i];
            std::vector<Atom> cands = universe_;
            int want = l.count - g_.r, got = 0;
            for (Atom a : pool_) {
                if (got == want) break;
                if (std::find(regs.begin(), regs.end(), a) != regs.end()) continue;
                cands.push_back(a);
                ++got;
            }
            for (auto& f : forms_[pi])
                for_each_completion(f, known, cands, [&](const std::vector<Atom>& vals) {
                    Instance inst{static_cast<int>(pi), {}};
                    for (std::size_t i = 0; i < p.body.size(); ++i) {
                        const Symbol& s = p.body[i];
                        if (s.kind == Symbol::Kind::label) {
                            Atom a = vals[l.y(static_cast<int>(i))];
                            if (!inside_.count(a)) return;
                            inst.parts.push_back({{s.id, a}, -1});
                        } else if (s.kind == Symbol::Kind::constant) {
                            inst.parts.push_back({{no_label, Atom{s.id}}, -1});
                        } else {
                            std::vector<Atom> kid(vals.begin() + l.y(static_cast<int>(i)),
                                                  vals.begin() + l.y(static_cast<int>(i)) + g_.r);
                            inst.parts.push_back({{}, intern(s.id, kid)});
                        }
                    }
                    if (seen.insert(inst).second) configs_[ci].insts.push_back(inst);
                });
        }
    }

    void add_value(std::vector<std::tuple<int, V, Witness>>& pending, int ci, V v, Witness w) {
        if (Ops::size(v) > bound_ || configs_[ci].index.count(v)) return;
        pending.emplace_back(ci, std::move(v), std::move(w));
    }

    void solve() {
        // old[c] .. size[c] is the delta of the previous round
        std::vector<std::size_t> old(configs_.size(), 0), size(configs_.size(), 0);
        bool first = true;
        while (true) {
            std::vector<std::tuple<int, V, Witness>> pending;
            for (std::size_t ci = 0; ci < configs_.size(); ++ci) {
                const auto& insts = configs_[ci].insts;
                for (std::size_t ii = 0; ii < insts.size(); ++ii) {
                    const auto& inst = insts[ii];
                    std::vector<int> kids;
                    for (auto& p : inst.parts)
                        if (p.child >= 0) kids.push_back(p.child);
                    if (kids.empty()) {
                        if (!first) continue;
                        V v{};
                        for (auto& p : inst.parts) Ops::add(v, p.letter);
                        add_value(pending, static_cast<int>(ci), std::move(v), {static_cast<int>(ii), {}});
                        continue;
                    }
                    // at least one child takes a value that is new since the last round
                    for (std::size_t d = 0; d < kids.size(); ++d) {
                        if (old[kids[d]] == size[kids[d]]) continue;
                        std::vector<int> picks(kids.size());
                        std::function<void(std::size_t, int)> rec = [&](std::size_t k, int used) {
                            if (k == kids.size()) {
                                V v{};
                                std::size_t kk = 0;
                                for (auto& p : inst.parts) {
                                    if (p.child < 0) {
                                        Ops::add(v, p.letter);
                                        continue;
                                    }
                                    Ops::add(v, configs_[kids[kk]].values[picks[kk]]);
                                    ++kk;
                                }
                                add_value(pending, static_cast<int>(ci), std::move(v), {static_cast<int>(ii), picks});
                                return;
                            }
                            std::size_t lo = 0, hi = size[kids[k]];
                            if (k < d) hi = old[kids[k]];
                            if (k == d) lo = old[kids[k]];
                            for (std::size_t j = lo; j < hi; ++j) {
                                int s = Ops::size(configs_[kids[k]].values[j]);
                                if (used + s > bound_) continue;
                                picks[k] = static_cast<int>(j);
                                rec(k + 1, used + s);
                            }
                        };
                        int letters = 0;
                        for (auto& p : inst.parts) letters += p.child < 0;
                        rec(0, letters);
                    }
                }
            }
            first = false;
            for (std::size_t c = 0; c < configs_.size(); ++c) old[c] = size[c];
            bool grew = false;
            for (auto& [ci, v, w] : pending) {
                auto& c = configs_[ci];
                if (c.index.count(v)) continue;
                c.index.emplace(v, static_cast<int>(c.values.size()));
                c.values.push_back(v);
                c.wit.push_back(w);
                grew = true;
            }
            for (std::size_t c = 0; c < configs_.size(); ++c) size[c] = configs_[c].values.size();
            if (!grew) break;
        }
    }

    int build(DerivationTree& t, int ci, int vi) const {
        const Config& c = configs_[ci];
        const Witness& w = c.wit[vi];
        const Instance& inst = c.insts[w.inst];
        int id = static_cast<int>(t.nodes.size());
        t.nodes.push_back({c.var, c.regs, inst.prod, {}});
        std::size_t k = 0;
        std::vector<DerivationTree::Part> parts;
        for (auto& p : inst.parts) {
            if (p.child < 0) {
                parts.push_back(p);
                continue;
            }
            int kid = build(t, p.child, w.picks[k++]);
            parts.push_back({{}, kid});
        }
        t.nodes[id].parts = std::move(parts);
        return id;
    }

    const Rcfg& g_;
    int bound_;
    Universe universe_;
    std::set<Atom> inside_;
    std::vector<Atom> pool_;
    std::set<Atom> pool_set_;
    std::vector<std::vector<OrbitFormula>> forms_;
    std::map<std::pair<int, std::vector<Atom>>, int> ids_;
    std::vector<Config> configs_;
    std::set<int> roots_;
};

}  // namespace

std::set<DataWord> derive_bounded(const Rcfg& g, const Universe& universe, int max_len, int pool) {
    return Fixpoint<WordOps>(g, universe, max_len, pool).results();
}

std::map<DataWord, DerivationTree> derive_with_trees(const Rcfg& g, const Universe& universe, int max_len, int pool) {
    return Fixpoint<WordOps>(g, universe, max_len, pool).trees();
}

VectorSet parikh_bounded(const Rcfg& g, const Universe& universe, int size_bound, int pool) {
    return Fixpoint<VectorOps>(g, universe, size_bound, pool).results();
}

namespace {

Constraint restricted_cfg_constraint(GrammarTag tag, int m) {
    std::vector<Term> ts{Term::v(0)};
    for (int i = 0; i < m; ++i) ts.push_back(Term::v(1 + i));
    return tag == GrammarTag::all_eq ? Constraint::all_equal(ts) : Constraint::distinct(ts);
}

}  // namespace

std::optional<GrammarTag> classify_production(const Rcfg& g, const Production& p) {
    if (g.r != 1 || !p.phi.constants().empty()) return std::nullopt;
    auto l = g.layout(p);
    auto fs = decompose_constraint(p.phi, l.count);
    if (fs.size() != 1) return std::nullopt;
    const auto& f = fs[0];
    if (f.classes() == 1) return GrammarTag::all_eq;
    if (f.classes() == l.count) return GrammarTag::all_diff;
    return std::nullopt;
}

bool is_restricted(const Rcfg& g) {
    for (auto& p : g.prods)
        if (!classify_production(g, p)) return false;
    return true;
}

Rcfg to_restricted_cfg(const Rcfg& g) {
    if (g.r != 1) throw Error(ErrorKind::arity, "restricted grammars have exactly one register");
    g.validate();
    for (auto& p : g.prods)
        if (!p.phi.constants().empty()) throw Error(ErrorKind::precondition, "restricted conversion needs constant-free constraints");
    Rcfg out = g;
    out.prods.clear();
    int fresh = 0;
    auto make = [&](int head, GrammarTag tag, std::vector<Symbol> body) {
        int m = 0;
        for (auto& s : body) m += s.kind != Symbol::Kind::constant;
        out.prods.push_back({head, restricted_cfg_constraint(tag, m), std::move(body)});
    };
    for (std::size_t pi = 0; pi < g.prods.size(); ++pi) {
        const Production& p = g.prods[pi];
        if (classify_production(g, p)) {
            out.prods.push_back(p);
            continue;
        }
        auto l = g.layout(p);
        for (auto& f : decompose_constraint(p.phi, l.count)) {
            // C_x collects constants too; they carry no variable
            std::vector<Symbol> cx;
            std::map<int, std::vector<Symbol>> rest;
            for (std::size_t i = 0; i < p.body.size(); ++i) {
                const Symbol& s = p.body[i];
                if (s.kind == Symbol::Kind::constant || f.same(l.y(static_cast<int>(i)), 0))
                    cx.push_back(s);
                else
                    rest[f.cls(l.y(static_cast<int>(i)))].push_back(s);
            }
            std::string tag = g.vars[p.head] + "." + std::to_string(fresh++);
            int dx = out.add_var(tag + ".Dx");
            int dn = out.add_var(tag + ".Dnx");
            make(p.head, GrammarTag::all_eq, {Symbol::nt(dx), Symbol::nt(dn)});
            make(dx, GrammarTag::all_eq, cx);
            std::vector<Symbol> es;
            int k = 0;
            for (auto& [cls, syms] : rest) {
                int e = out.add_var(tag + ".E" + std::to_string(++k));
                es.push_back(Symbol::nt(e));
                make(e, GrammarTag::all_eq, syms);
            }
            make(dn, GrammarTag::all_diff, es);
        }
    }
    return out;
}

namespace {

struct GBuilder {
    Rcfg g;
    explicit GBuilder(int r) {
        g.r = r;
        g.r0.assign(r, std::nullopt);
    }
    int nt(const std::string& name) {
        for (std::size_t i = 0; i < g.vars.size(); ++i)
            if (g.vars[i] == name) return static_cast<int>(i);
        return g.add_var(name);
    }
    // Body items: "h(v)" for labels, "$c" for constants, "A(v1,..)" for nonterminals,
    // a bare variable for a label-less letter. Variables are named; equal names mean
    // equal atoms, "x1".."xr" are the head registers.
    void prod(const std::string& head, const std::vector<std::string>& body, const std::string& neq = "") {
        Production p;
        p.head = nt(head);
        std::map<std::string, std::vector<int>> occurrences;
        int next = g.r;
        for (int i = 0; i < g.r; ++i) occurrences["x" + std::to_string(i + 1)].push_back(i);
        for (auto& item : body) {
            if (item[0] == '$') {
                Atom c = constant(item.substr(1));
                if (std::find(g.constants.begin(), g.constants.end(), c) == g.constants.end()) g.constants.push_back(c);
                p.body.push_back(Symbol::con(c));
                continue;
            }
            auto open = item.find('(');
            if (open == std::string::npos) {
                p.body.push_back(Symbol::lab(no_label));
                g.labels.insert(no_label);
                occurrences[item].push_back(next++);
                continue;
            }
            std::string name = item.substr(0, open);
            std::vector<std::string> args;
            std::string cur;
            for (char ch : item.substr(open + 1, item.size() - open - 2)) {
                if (ch == ',') {
                    args.push_back(cur);
                    cur.clear();
                } else {
                    cur += ch;
                }
            }
            args.push_back(cur);
            bool is_nt = std::isupper(static_cast<unsigned char>(name[0]));
            if (is_nt) {
                p.body.push_back(Symbol::nt(nt(name)));
            } else {
                Label h = label(name);
                g.labels.insert(h);
                p.body.push_back(Symbol::lab(h));
            }
            for (auto& a : args) occurrences[a].push_back(next++);
        }
        std::vector<Constraint> cs;
        for (auto& [name, occ] : occurrences)
            for (std::size_t i = 1; i < occ.size(); ++i) cs.push_back(Constraint::eq(Term::v(occ[0]), Term::v(occ[i])));
        if (!neq.empty()) {
            auto bar = neq.find('!');
            cs.push_back(Constraint::ne(Term::v(occurrences.at(neq.substr(0, bar))[0]), Term::v(occurrences.at(neq.substr(bar + 1))[0])));
        }
        p.phi = Constraint::all(cs);
        g.prods.push_back(std::move(p));
    }
};

Rcfg gsh_grammar(int n) {
    if (n < 1) throw Error(ErrorKind::parameter, "gsh needs at least one level");
    GBuilder b(1);
    b.g.r0 = {atom("a")};
    b.nt("S");
    b.prod("S", {"S1(x1)"});
    b.prod("S", {});
    for (int i = 1; i <= n; ++i) {
        std::string me = "S" + std::to_string(2 * i - 1);
        std::string down = i == 1 ? "r" : "d" + std::to_string(i - 1);
        b.prod(me, {me + "(x1)", me + "(x1)"});
        if (i < n) {
            std::string next = "S" + std::to_string(2 * i);
            b.prod(me, {down + "(x1)", next + "(y)"}, "x1!y");
            b.prod(next, {"S" + std::to_string(2 * i + 1) + "(x1)", "u" + std::to_string(i) + "(x1)"});
        } else {
            b.prod(me, {down + "(x1)", "l(y)"}, "x1!y");
        }
        b.prod(me, {});
    }
    return b.g;
}

}  // namespace

std::vector<std::string> builtin_grammar_names() { return {"mirror", "gsh", "g3"}; }

Rcfg builtin_grammar(const std::string& name, const std::vector<int>& params) {
    if (name == "mirror") {
        GBuilder b(1);
        b.nt("S");
        b.prod("S", {"l(x1)", "S(y)", "r(x1)"});
        b.prod("S", {"l(x1)", "r(x1)"});
        return b.g;
    }
    if (name == "gsh") return gsh_grammar(params.empty() ? 3 : params[0]);
    if (name == "g3") {
        GBuilder b(3);
        for (auto n : {"S", "A", "B", "C", "D", "E"}) b.nt(n);
        b.prod("S", {"$#", "$#", "$#", "A(x1,x2,x3)"});
        b.prod("A", {"x1", "x2", "x3"});
        b.prod("A", {"x1", "x2", "x3", "A(x1,x2,x3)"});
        b.prod("A", {"x1", "x2", "x3", "B(x1,x2,x3)", "C(x1,x2,x3)"});
        b.prod("B", {"$#", "$#", "A(x1,y,z)"});
        b.prod("B", {"$#", "D(x1,y,x3)"});
        b.prod("C", {"$#", "$#", "A(y,z,x3)"});
        b.prod("C", {"$#", "E(x1,y,x3)"});
        b.prod("D", {"x1", "x2"});
        b.prod("D", {"x1", "x2", "D(x1,x2,x3)"});
        b.prod("E", {"x2", "x3"});
        b.prod("E", {"x2", "x3", "E(x1,x2,x3)"});
        return b.g;
    }
    throw Error(ErrorKind::lookup, "unknown grammar " + name);
}

int G3Tree::node_count() const {
    std::function<int(const Node&)> count = [&](const Node& n) {
        int c = 1;
        for (auto& k : n.kids) c += count(k);
        return c;
    };
    return count(root);
}

std::string G3Tree::to_string() const {
    std::function<std::string(const Node&)> show = [&](const Node& n) {
        std::string s = "(";
        for (std::size_t i = 0; i < n.atoms.size(); ++i) s += (i ? "," : "") + atom_name(n.atoms[i]);
        s += ";" + std::to_string(n.count);
        for (auto& k : n.kids) s += " " + show(k);
        return s + ")";
    };
    return show(root);
}

G3Tree g3_tree(const Rcfg& g3, const DerivationTree& d) {
    auto bad = [](const std::string& why) { return Error(ErrorKind::form, "not a g3 derivation: " + why); };
    if (g3.r != 3 || g3.vars.size() != 6 || d.nodes.empty()) throw bad("wrong grammar");
    if (!valid_derivation(g3, d)) throw bad("invalid derivation");
    const int S = g3.var("S"), A = g3.var("A"), B = g3.var("B"), C = g3.var("C"), D = g3.var("D"), E = g3.var("E");
    auto child_of = [&](int node, int var) {
        for (auto& p : d.nodes[node].parts)
            if (p.child >= 0 && d.nodes[p.child].var == var) return p.child;
        return -1;
    };
    // repetitions of a D or E chain
    auto chain = [&](int node, int var) {
        int n = 0;
        while (node >= 0) {
            ++n;
            node = child_of(node, var);
        }
        return n;
    };
    std::function<G3Tree::Node(int)> internal = [&](int node) {
        G3Tree::Node out;
        out.atoms = d.nodes[node].regs;
        out.count = 0;
        int cur = node;
        while (true) {
            ++out.count;
            int next = child_of(cur, A);
            if (next < 0) break;
            cur = next;
        }
        int b = child_of(cur, B), c = child_of(cur, C);
        if (b < 0) return out;
        int ba = child_of(b, A), bd = child_of(b, D);
        if (ba >= 0) {
            out.kids.push_back(internal(ba));
        } else {
            G3Tree::Node leaf;
            leaf.atoms = {d.nodes[bd].regs[0], d.nodes[bd].regs[1]};
            leaf.count = chain(bd, D);
            out.kids.push_back(leaf);
        }
        int ca = child_of(c, A), ce = child_of(c, E);
        if (ca >= 0) {
            out.kids.push_back(internal(ca));
        } else {
            G3Tree::Node leaf;
            leaf.atoms = {d.nodes[ce].regs[1], d.nodes[ce].regs[2]};
            leaf.count = chain(ce, E);
            out.kids.push_back(leaf);
        }
        return out;
    };
    if (d.nodes[0].var != S) throw bad("root is not the start symbol");
    int a = child_of(0, A);
    if (a < 0) throw bad("start production without A");
    return G3Tree{internal(a)};
}

namespace {

void check_g3_node(const G3Tree::Node& n, bool root) {
    if (n.count < 1) throw Error(ErrorKind::form, "g3 counters are positive");
    if (n.atoms.size() != (root ? 3u : n.atoms.size()) || n.atoms.size() < 2 || n.atoms.size() > 3)
        throw Error(ErrorKind::form, "g3 nodes carry two or three atoms");
    if (n.leaf() && !n.kids.empty()) throw Error(ErrorKind::form, "g3 leaves have no children");
    if (!n.kids.empty() && n.kids.size() != 2) throw Error(ErrorKind::form, "g3 internal nodes have zero or two children");
    if (!n.leaf()) {
        std::set<Atom> s(n.atoms.begin(), n.atoms.end());
        if (s.size() != 3) throw Error(ErrorKind::form, "g3 registers are distinct");
    } else if (n.atoms[0] == n.atoms[1]) {
        throw Error(ErrorKind::form, "g3 leaf atoms are distinct");
    }
    if (n.kids.size() == 2) {
        if (n.kids[0].atoms.front() != n.atoms.front()) throw Error(ErrorKind::form, "left child must inherit the left atom");
        if (n.kids[1].atoms.back() != n.atoms.back()) throw Error(ErrorKind::form, "right child must inherit the right atom");
        // the unchanged register of a leaf must still hold a distinct triple
        if (n.kids[0].leaf() && (n.kids[0].atoms[1] == n.atoms[2])) throw Error(ErrorKind::form, "left leaf clashes with the right atom");
        if (n.kids[1].leaf() && (n.kids[1].atoms[0] == n.atoms[0])) throw Error(ErrorKind::form, "right leaf clashes with the left atom");
        for (auto& k : n.kids) check_g3_node(k, false);
    }
}

}  // namespace

DataWord g3_word(const G3Tree& t) {
    check_g3_node(t.root, true);
    Letter hash{no_label, constant("#")};
    auto letter = [](Atom a) { return Letter{no_label, a}; };
    DataWord w{hash, hash, hash};
    std::function<void(const G3Tree::Node&)> emit = [&](const G3Tree::Node& n) {
        for (int i = 0; i < n.count; ++i)
            for (Atom a : n.atoms) w.push_back(letter(a));
        if (n.kids.empty()) return;
        const auto& l = n.kids[0];
        if (l.leaf()) {
            w.push_back(hash);
            for (int i = 0; i < l.count; ++i) w.insert(w.end(), {letter(l.atoms[0]), letter(l.atoms[1])});
        } else {
            w.insert(w.end(), {hash, hash});
            emit(l);
        }
        const auto& r = n.kids[1];
        if (r.leaf()) {
            w.push_back(hash);
            for (int i = 0; i < r.count; ++i) w.insert(w.end(), {letter(r.atoms[0]), letter(r.atoms[1])});
        } else {
            w.insert(w.end(), {hash, hash});
            emit(r);
        }
    };
    emit(t.root);
    return w;
}

DerivationTree g3_derivation(const Rcfg& g3, const G3Tree& t) {
    check_g3_node(t.root, true);
    const int S = g3.var("S"), A = g3.var("A"), B = g3.var("B"), C = g3.var("C"), D = g3.var("D"), E = g3.var("E");
    // production indices as listed by builtin_grammar("g3")
    auto find_prod = [&](int head, std::size_t len, bool ends_nt) {
        for (std::size_t i = 0; i < g3.prods.size(); ++i) {
            auto& p = g3.prods[i];
            if (p.head != head || p.body.size() != len) continue;
            if (ends_nt != (p.body.back().kind == Symbol::Kind::nonterminal)) continue;
            return static_cast<int>(i);
        }
        throw Error(ErrorKind::form, "grammar lacks a g3 production");
    };
    Letter hash{no_label, constant("#")};
    auto letter = [](Atom a) { return Letter{no_label, a}; };
    DerivationTree d;
    auto node = [&](int var, std::vector<Atom> regs, int prod) {
        d.nodes.push_back({var, std::move(regs), prod, {}});
        return static_cast<int>(d.nodes.size()) - 1;
    };
    auto nt_part = [](int child) { return DerivationTree::Part{{}, child}; };
    // fill the repeating chain of a D/E leaf
    auto leaf_chain = [&](int var, std::vector<Atom> regs, std::pair<Atom, Atom> out, int count) {
        int first = -1, prev = -1;
        for (int i = 0; i < count; ++i) {
            bool last = i + 1 == count;
            int id = node(var, regs, find_prod(var, last ? 2 : 3, !last));
            d.nodes[id].parts = {{letter(out.first), -1}, {letter(out.second), -1}};
            if (prev >= 0) d.nodes[prev].parts.push_back(nt_part(id));
            if (first < 0) first = id;
            prev = id;
        }
        return first;
    };
    std::function<int(const G3Tree::Node&)> build = [&](const G3Tree::Node& n) {
        int first = -1, prev = -1;
        for (int i = 0; i < n.count; ++i) {
            bool last = i + 1 == n.count;
            int prod = last ? (n.kids.empty() ? find_prod(A, 3, false) : find_prod(A, 5, true)) : find_prod(A, 4, true);
            int id = node(A, n.atoms, prod);
            for (Atom a : n.atoms) d.nodes[id].parts.push_back({letter(a), -1});
            if (prev >= 0) d.nodes[prev].parts.push_back(nt_part(id));
            if (first < 0) first = id;
            prev = id;
        }
        if (n.kids.empty()) return first;
        const auto& l = n.kids[0];
        const auto& r = n.kids[1];
        int bid, cid;
        if (l.leaf()) {
            bid = node(B, n.atoms, find_prod(B, 2, true));
            int dd = leaf_chain(D, {n.atoms[0], l.atoms[1], n.atoms[2]}, {l.atoms[0], l.atoms[1]}, l.count);
            d.nodes[bid].parts = {{hash, -1}, nt_part(dd)};
        } else {
            bid = node(B, n.atoms, find_prod(B, 3, true));
            int a = build(l);
            d.nodes[bid].parts = {{hash, -1}, {hash, -1}, nt_part(a)};
        }
        if (r.leaf()) {
            cid = node(C, n.atoms, find_prod(C, 2, true));
            int ee = leaf_chain(E, {n.atoms[0], r.atoms[0], n.atoms[2]}, {r.atoms[0], r.atoms[1]}, r.count);
            d.nodes[cid].parts = {{hash, -1}, nt_part(ee)};
        } else {
            cid = node(C, n.atoms, find_prod(C, 3, true));
            int a = build(r);
            d.nodes[cid].parts = {{hash, -1}, {hash, -1}, nt_part(a)};
        }
        d.nodes[prev].parts.push_back(nt_part(bid));
        d.nodes[prev].parts.push_back(nt_part(cid));
        return first;
    };
    int root = node(S, t.root.atoms, find_prod(S, 4, true));
    int a = build(t.root);
    d.nodes[root].parts = {{hash, -1}, {hash, -1}, {hash, -1}, nt_part(a)};
    return d;
}

int g3_full_atoms(int depth) {
    int leaves = 1 << depth;
    int internal = leaves - 1;
    return 3 + 2 * (internal - 1) + leaves;
}

G3Tree g3_full_tree(int depth, const std::vector<int>& counts, const std::vector<Atom>& atoms) {
    if (depth < 1) throw Error(ErrorKind::parameter, "full g3 trees have depth at least one");
    int nodes = (2 << depth) - 1;
    if (static_cast<int>(counts.size()) < nodes) throw Error(ErrorKind::parameter, "one counter per node is needed");
    if (static_cast<int>(atoms.size()) < g3_full_atoms(depth)) throw Error(ErrorKind::parameter, "not enough atoms");
    std::size_t next = 0;
    auto take = [&]() { return atoms[next++]; };
    // heap order equals shortlex order of the node addresses
    std::function<G3Tree::Node(int, int, std::optional<Atom>, std::optional<Atom>)> make =
        [&](int idx, int level, std::optional<Atom> left, std::optional<Atom> right) {
            G3Tree::Node n;
            n.count = counts[idx];
            if (level == depth) {
                n.atoms = left ? std::vector<Atom>{*left, take()} : std::vector<Atom>{take(), *right};
                return n;
            }
            Atom a = left ? *left : take();
            Atom b = take();
            Atom c = right ? *right : take();
            n.atoms = {a, b, c};
            n.kids.push_back(make(2 * idx + 1, level + 1, a, std::nullopt));
            n.kids.push_back(make(2 * idx + 2, level + 1, std::nullopt, c));
            return n;
        };
    return G3Tree{make(0, 0, std::nullopt, std::nullopt)};
}

}  // namespace rlang

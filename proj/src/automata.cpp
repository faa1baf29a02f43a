#include "rlang/automata.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>

namespace rlang {

const char* step_kind_name(StepKind k) {
    switch (k) {
    case StepKind::pres_eq: return "PresEq";
    case StepKind::pres_diff: return "PresDiff";
    case StepKind::up_diff: return "UpDiff";
    }
    return "?";
}

std::string to_string(const RestrictedTag& t) {
    std::string s = step_kind_name(t.kind);
    if (t.kind != StepKind::pres_eq) {
        s += "[";
        for (int i = 0; i < t.blocks.size(); ++i) s += std::to_string(t.blocks.cls(i));
        s += "]";
    }
    return s;
}

std::string VarLayout::name(int v) const {
    if (v < r) return "x" + std::to_string(v + 1);
    if (v < r + p) return "y" + std::to_string(v - r + 1);
    return "x" + std::to_string(v - r - p + 1) + "'";
}

Constraint restricted_constraint(const RestrictedTag& tag, int p) {
    VarLayout l{1, p};
    auto x = Term::v(l.x(0)), xp = Term::v(l.xp(0));
    std::vector<Constraint> parts;
    if (tag.kind == StepKind::pres_eq) {
        std::vector<Term> all{x};
        for (int j = 0; j < p; ++j) all.push_back(Term::v(l.y(j)));
        all.push_back(xp);
        return Constraint::all_equal(all);
    }
    parts.push_back(tag.kind == StepKind::pres_diff ? Constraint::eq(x, xp) : Constraint::ne(x, xp));
    for (int j = 0; j < p; ++j) {
        parts.push_back(Constraint::ne(Term::v(l.y(j)), x));
        parts.push_back(Constraint::ne(Term::v(l.y(j)), xp));
    }
    if (p > 0)
        parts.push_back(tag.blocks.to_constraint().rename([&](const Term& t) { return t.is_var() ? Term::v(l.y(t.var)) : t; }));
    return Constraint::all(std::move(parts));
}

int Fma::add_state(const std::string& name, bool accept) {
    states.push_back(name);
    int id = static_cast<int>(states.size()) - 1;
    if (accept) accepting.insert(id);
    return id;
}

int Fma::state(const std::string& name) const {
    for (std::size_t i = 0; i < states.size(); ++i)
        if (states[i] == name) return static_cast<int>(i);
    throw Error(ErrorKind::lookup, "no state " + name);
}

int Fma::block_size() const {
    int k = 0;
    for (auto& rl : rules) k = std::max(k, rl.width());
    return k;
}

void Fma::validate() const {
    int n = static_cast<int>(states.size());
    if (init < 0 || init >= n) throw Error(ErrorKind::reference, "initial state out of range");
    for (int f : accepting)
        if (f < 0 || f >= n) throw Error(ErrorKind::reference, "accepting state out of range");
    if (static_cast<int>(r0.size()) != r) throw Error(ErrorKind::arity, "initial registers do not match the register count");
    std::set<Atom> seen;
    for (auto& v : r0)
        if (v && !seen.insert(*v).second) throw Error(ErrorKind::configuration, "initial registers repeat " + atom_name(*v));
    std::set<Atom> consts(constants.begin(), constants.end());
    for (auto& rl : rules) {
        if (rl.src < 0 || rl.src >= n || rl.dst < 0 || rl.dst >= n) throw Error(ErrorKind::reference, "rule state out of range");
        for (Label h : rl.block)
            if (!labels.count(h)) throw Error(ErrorKind::alphabet, "rule uses undeclared label " + label_name(h));
        for (int v : rl.phi.vars())
            if (v >= layout(rl).count()) throw Error(ErrorKind::reference, "rule mentions undeclared variable");
        for (Atom c : rl.phi.constants())
            if (!consts.count(c)) throw Error(ErrorKind::reference, "rule mentions undeclared constant " + atom_name(c));
    }
}

std::string to_string(const Fma& a, const Configuration& c) {
    std::string s = "<" + a.states.at(c.state) + ",(";
    for (std::size_t i = 0; i < c.regs.size(); ++i) {
        if (i) s += ",";
        s += atom_name(c.regs[i]);
    }
    return s + ")>";
}

DataWord Run::word() const {
    DataWord w;
    for (auto& s : steps) w.insert(w.end(), s.block.begin(), s.block.end());
    return w;
}

namespace {

// Orbit formulas of a rule constraint, cached by constraint identity. Formulas
// that merge two registers on either side can never fire and are dropped.
const std::vector<OrbitFormula>& rule_forms(const Constraint& phi, const VarLayout& l, const std::vector<Atom>& consts) {
    using Key = std::tuple<const void*, int, int, std::vector<Atom>>;
    static std::mutex mu;
    static std::map<Key, std::pair<Constraint, std::vector<OrbitFormula>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    Key key{phi.id(), l.r, l.p, consts};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second.second;
    std::vector<OrbitFormula> keep;
    for (auto& f : decompose_constraint(phi, l.count(), consts)) {
        bool ok = true;
        for (int i = 0; i < l.r && ok; ++i)
            for (int j = i + 1; j < l.r && ok; ++j)
                if (f.same(l.x(i), l.x(j)) || f.same(l.xp(i), l.xp(j))) ok = false;
        if (ok) keep.push_back(f);
    }
    return cache.emplace(key, std::make_pair(phi, std::move(keep))).first->second.second;
}

class Sim {
public:
    Sim(const Fma& a, std::set<Atom> universe, int pool) : a_(a) {
        a.validate();
        for (Atom c : a.constants) universe.insert(c);
        for (auto& v : a.r0)
            if (v) universe.insert(*v);
        universe_.assign(universe.begin(), universe.end());
        pool_ = fresh_avoiding(universe, pool < 0 ? 2 * a.r : pool);
        pool_set_.insert(pool_.begin(), pool_.end());
        forms_.reserve(a.rules.size());
        for (auto& rl : a.rules) forms_.push_back(&rule_forms(rl.phi, a.layout(rl), a.constants));
    }

    const Universe& universe() const { return universe_; }

    Configuration canon(Configuration c) const {
        std::map<Atom, Atom> ren;
        for (auto& x : c.regs)
            if (pool_set_.count(x)) {
                auto it = ren.find(x);
                if (it == ren.end()) it = ren.emplace(x, pool_[ren.size()]).first;
                x = it->second;
            }
        return c;
    }

    std::vector<Configuration> initial() const {
        std::set<Configuration> out;
        Configuration c{a_.init, std::vector<Atom>(a_.r)};
        auto cands = universe_;
        cands.insert(cands.end(), pool_.begin(), pool_.end());
        std::function<void(int)> rec = [&](int i) {
            if (i == a_.r) {
                out.insert(canon(c));
                return;
            }
            if (a_.r0[i]) {
                c.regs[i] = *a_.r0[i];
                for (int j = 0; j < i; ++j)
                    if (c.regs[j] == c.regs[i]) return;
                rec(i + 1);
                return;
            }
            for (Atom x : cands) {
                bool clash = false;
                for (int j = 0; j < i; ++j) clash |= c.regs[j] == x;
                for (int j = i + 1; j < a_.r; ++j) clash |= a_.r0[j] && *a_.r0[j] == x;
                if (clash) continue;
                c.regs[i] = x;
                rec(i + 1);
            }
        };
        rec(0);
        return {out.begin(), out.end()};
    }

    // Successors of c by rule `ri` reading `block` (whose labels must match).
    void step(const Configuration& c, int ri, const DataWord& block,
              const std::function<void(const Configuration&)>& emit) const {
        const Rule& rl = a_.rules[ri];
        if (rl.src != c.state || rl.width() != static_cast<int>(block.size())) return;
        for (int j = 0; j < rl.width(); ++j)
            if (rl.block[j] != block[j].label) return;
        VarLayout l = a_.layout(rl);
        std::vector<std::optional<Atom>> known(l.count());
        for (int i = 0; i < l.r; ++i) known[l.x(i)] = c.regs[i];
        for (int j = 0; j < l.p; ++j) known[l.y(j)] = block[j].atom;
        std::vector<Atom> cands = universe_;
        int fresh = 0;
        for (Atom x : pool_) {
            if (fresh == l.r) break;
            if (std::find(c.regs.begin(), c.regs.end(), x) != c.regs.end()) continue;
            cands.push_back(x);
            ++fresh;
        }
        for (const auto& f : *forms_[ri])
            for_each_completion(f, known, cands, [&](const std::vector<Atom>& vals) {
                Configuration d{rl.dst, std::vector<Atom>(l.r)};
                for (int i = 0; i < l.r; ++i) d.regs[i] = vals[l.xp(i)];
                emit(d);
            });
    }

    std::set<Configuration> closure(std::set<Configuration> s) const {
        std::vector<Configuration> todo(s.begin(), s.end());
        while (!todo.empty()) {
            auto c = todo.back();
            todo.pop_back();
            for (std::size_t ri = 0; ri < a_.rules.size(); ++ri) {
                if (a_.rules[ri].width() != 0) continue;
                step(c, static_cast<int>(ri), {}, [&](const Configuration& d) {
                    auto cd = canon(d);
                    if (s.insert(cd).second) todo.push_back(cd);
                });
            }
        }
        return s;
    }

    std::optional<Run> search(const std::vector<Configuration>& starts, const DataWord& w,
                              const std::function<bool(const Configuration&)>& done) const {
        std::set<std::pair<std::size_t, Configuration>> visited;
        Run run;
        std::function<bool(std::size_t, const Configuration&)> dfs = [&](std::size_t pos, const Configuration& c) {
            if (!visited.insert({pos, canon(c)}).second) return false;
            if (pos == w.size() && done(c)) return true;
            for (std::size_t ri = 0; ri < a_.rules.size(); ++ri) {
                const Rule& rl = a_.rules[ri];
                if (rl.src != c.state || pos + rl.width() > w.size()) continue;
                DataWord block(w.begin() + pos, w.begin() + pos + rl.width());
                bool found = false;
                std::vector<Configuration> next;
                step(c, static_cast<int>(ri), block, [&](const Configuration& d) { next.push_back(d); });
                for (auto& d : next) {
                    run.steps.push_back({static_cast<int>(ri), block, d});
                    if (dfs(pos + rl.width(), d)) {
                        found = true;
                        break;
                    }
                    run.steps.pop_back();
                }
                if (found) return true;
            }
            return false;
        };
        for (auto& s : starts) {
            run = Run{s, {}};
            if (dfs(0, s)) return run;
        }
        return std::nullopt;
    }

    // Words over the universe of length ≤ max_len leading from `starts` to a configuration accepted by `done`.
    std::set<DataWord> enumerate(const std::vector<Configuration>& starts, const Universe& letters_atoms, int max_len,
                                 const std::function<bool(const Configuration&)>& done) const {
        std::set<DataWord> out;
        int k = std::max(1, a_.block_size());
        std::vector<std::set<Configuration>> reach{closure({starts.begin(), starts.end()})};
        DataWord w;
        std::vector<Letter> letters;
        for (Label h : a_.labels)
            for (Atom x : letters_atoms) letters.push_back({h, x});
        std::function<void()> rec = [&]() {
            for (auto& c : reach.back())
                if (done(c)) {
                    out.insert(w);
                    break;
                }
            if (static_cast<int>(w.size()) == max_len) return;
            int n = static_cast<int>(w.size());
            for (const Letter& l : letters) {
                w.push_back(l);
                std::set<Configuration> next;
                for (int p = 1; p <= k && p <= n + 1; ++p) {
                    DataWord block(w.end() - p, w.end());
                    for (auto& c : reach[n + 1 - p])
                        for (std::size_t ri = 0; ri < a_.rules.size(); ++ri)
                            if (a_.rules[ri].width() == p)
                                step(c, static_cast<int>(ri), block, [&](const Configuration& d) { next.insert(canon(d)); });
                }
                reach.push_back(closure(std::move(next)));
                bool alive = false;
                for (int j = std::max(0, n + 2 - k); j <= n + 1; ++j) alive |= !reach[j].empty();
                if (alive) rec();
                reach.pop_back();
                w.pop_back();
            }
        };
        rec();
        return out;
    }

private:
    const Fma& a_;
    Universe universe_;
    std::vector<Atom> pool_;
    std::set<Atom> pool_set_;
    std::vector<const std::vector<OrbitFormula>*> forms_;
};

void check_universe(const Fma& a, const Universe& u) {
    std::set<Atom> s(u.begin(), u.end());
    for (Atom c : a.constants)
        if (!s.count(c)) throw Error(ErrorKind::reference, "universe lacks constant " + atom_name(c));
    for (auto& v : a.r0)
        if (v && !s.count(*v)) throw Error(ErrorKind::reference, "universe lacks initial register " + atom_name(*v));
}

void check_configuration(const Fma& a, const Configuration& c) {
    if (c.state < 0 || c.state >= static_cast<int>(a.states.size())) throw Error(ErrorKind::configuration, "state out of range");
    if (static_cast<int>(c.regs.size()) != a.r) throw Error(ErrorKind::configuration, "wrong number of registers");
    std::set<Atom> s(c.regs.begin(), c.regs.end());
    if (static_cast<int>(s.size()) != a.r) throw Error(ErrorKind::configuration, "registers must hold distinct atoms");
}

void check_word(const Fma& a, const DataWord& w) {
    for (auto& l : w)
        if (!a.labels.count(l.label)) throw Error(ErrorKind::alphabet, "label " + label_name(l.label) + " is not in the alphabet");
}

}  // namespace

bool valid_run(const Fma& a, const Run& run) {
    Configuration c = run.start;
    try {
        check_configuration(a, c);
    } catch (const Error&) {
        return false;
    }
    for (auto& s : run.steps) {
        if (s.rule < 0 || s.rule >= static_cast<int>(a.rules.size())) return false;
        const Rule& rl = a.rules[s.rule];
        if (rl.src != c.state || rl.dst != s.to.state || rl.width() != static_cast<int>(s.block.size())) return false;
        VarLayout l = a.layout(rl);
        std::vector<Atom> vals(l.count());
        for (int i = 0; i < a.r; ++i) {
            vals[l.x(i)] = c.regs[i];
            vals[l.xp(i)] = s.to.regs.at(i);
        }
        for (int j = 0; j < l.p; ++j) {
            if (s.block[j].label != rl.block[j]) return false;
            vals[l.y(j)] = s.block[j].atom;
        }
        if (!rl.phi.eval(vals)) return false;
        std::set<Atom> distinct(s.to.regs.begin(), s.to.regs.end());
        if (static_cast<int>(distinct.size()) != a.r) return false;
        c = s.to;
    }
    return true;
}

std::optional<Run> accepts(const Fma& a, const DataWord& w, int pool) {
    check_word(a, w);
    auto u = atoms_of(w);
    Sim sim(a, u, pool);
    return sim.search(sim.initial(), w, [&](const Configuration& c) { return a.accepting.count(c.state) > 0; });
}

std::optional<Run> run_between(const Fma& a, const Configuration& from, const Configuration& to, const DataWord& w,
                               int pool) {
    check_word(a, w);
    check_configuration(a, from);
    check_configuration(a, to);
    auto u = atoms_of(w);
    u.insert(from.regs.begin(), from.regs.end());
    u.insert(to.regs.begin(), to.regs.end());
    Sim sim(a, u, pool);
    return sim.search({from}, w, [&](const Configuration& c) { return c == to; });
}

std::set<DataWord> enumerate_language(const Fma& a, const Universe& universe, int max_len, int pool) {
    check_universe(a, universe);
    Sim sim(a, {universe.begin(), universe.end()}, pool);
    return sim.enumerate(sim.initial(), universe, max_len, [&](const Configuration& c) { return a.accepting.count(c.state) > 0; });
}

VectorSet parikh_bounded(const Fma& a, const Universe& universe, int max_len, int pool) {
    VectorSet out;
    for (auto& w : enumerate_language(a, universe, max_len, pool)) out.insert(parikh(w));
    return out;
}

std::set<DataWord> langof_between(const Fma& a, const Configuration& from, const Configuration& to,
                                  const Universe& universe, int max_len, int pool) {
    check_configuration(a, from);
    check_configuration(a, to);
    check_universe(a, universe);
    std::set<Atom> u(universe.begin(), universe.end());
    u.insert(from.regs.begin(), from.regs.end());
    u.insert(to.regs.begin(), to.regs.end());
    Sim sim(a, u, pool);
    return sim.enumerate({from}, universe, max_len, [&](const Configuration& c) { return c == to; });
}

namespace {

std::optional<RestrictedTag> shape_of(const OrbitFormula& f, int p) {
    VarLayout l{1, p};
    std::vector<int> ys;
    bool any_x = false, all_x = true, any_xp = false;
    for (int j = 0; j < p; ++j) {
        ys.push_back(l.y(j));
        bool sx = f.same(l.y(j), l.x(0));
        any_x |= sx;
        all_x &= sx;
        any_xp |= f.same(l.y(j), l.xp(0));
    }
    if (f.same(l.x(0), l.xp(0))) {
        if (all_x) return RestrictedTag{StepKind::pres_eq, OrbitFormula{}};
        if (!any_x) return RestrictedTag{StepKind::pres_diff, f.restrict(ys)};
        return std::nullopt;
    }
    if (!any_x && !any_xp) return RestrictedTag{StepKind::up_diff, f.restrict(ys)};
    return std::nullopt;
}

}  // namespace

std::optional<RestrictedTag> classify_rule(const Fma& a, const Rule& rl) {
    if (a.r != 1 || !rl.phi.constants().empty()) return std::nullopt;
    auto fs = decompose_constraint(rl.phi, a.layout(rl).count());
    if (fs.size() != 1) return std::nullopt;
    return shape_of(fs[0], rl.width());
}

bool is_restricted(const Fma& a) {
    for (auto& rl : a.rules)
        if (!classify_rule(a, rl)) return false;
    return true;
}

Fma to_restricted(const Fma& a) {
    if (a.r != 1) throw Error(ErrorKind::arity, "restricted form needs exactly one register");
    if (!a.constants.empty()) throw Error(ErrorKind::precondition, "restricted form is defined without constants");
    a.validate();
    Fma out = a;
    out.rules.clear();
    int fresh = 0;
    for (auto& rl : a.rules) {
        if (classify_rule(a, rl)) {
            out.rules.push_back(rl);
            continue;
        }
        VarLayout l = a.layout(rl);
        for (auto& f : decompose_constraint(rl.phi, l.count())) {
            struct Piece {
                RestrictedTag tag;
                std::vector<int> pos;
            };
            std::vector<Piece> pieces;
            std::vector<int> cx, cxp, rest;
            for (int j = 0; j < l.p; ++j) {
                if (f.same(l.y(j), l.x(0)))
                    cx.push_back(j);
                else if (f.same(l.y(j), l.xp(0)))
                    cxp.push_back(j);
                else
                    rest.push_back(j);
            }
            std::vector<int> rest_vars;
            for (int j : rest) rest_vars.push_back(l.y(j));
            if (f.same(l.x(0), l.xp(0))) {
                if (!cx.empty()) pieces.push_back({{StepKind::pres_eq, {}}, cx});
                if (!rest.empty()) pieces.push_back({{StepKind::pres_diff, f.restrict(rest_vars)}, rest});
                if (pieces.empty()) pieces.push_back({{StepKind::pres_eq, {}}, {}});
            } else {
                if (!cx.empty()) pieces.push_back({{StepKind::pres_eq, {}}, cx});
                pieces.push_back({{StepKind::up_diff, f.restrict(rest_vars)}, rest});
                if (!cxp.empty()) pieces.push_back({{StepKind::pres_eq, {}}, cxp});
            }
            int cur = rl.src;
            for (std::size_t i = 0; i < pieces.size(); ++i) {
                int next = rl.dst;
                if (i + 1 < pieces.size()) next = out.add_state(a.states[rl.src] + "~" + std::to_string(fresh++));
                Rule nr;
                nr.src = cur;
                nr.dst = next;
                for (int j : pieces[i].pos) nr.block.push_back(rl.block[j]);
                nr.phi = restricted_constraint(pieces[i].tag, nr.width());
                out.rules.push_back(std::move(nr));
                cur = next;
            }
        }
    }
    return out;
}

std::string AlteringPath::to_string(const Fma& a) const {
    std::string s;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        auto& g = segments[i];
        s += "<" + a.states[g.from] + "," + atom_name(g.reg) + "," + a.states[g.to] + ">";
        if (i < blocks.size()) s += "<" + rlang::to_string(blocks[i]) + ">";
    }
    return s;
}

AlteringPath run_decompose(const Fma& a, const Run& run) {
    if (a.r != 1) throw Error(ErrorKind::arity, "altering paths need one register");
    AlteringPath ap;
    int from = run.start.state;
    Atom reg = run.start.regs.at(0);
    Configuration cur = run.start;
    for (auto& s : run.steps) {
        const Rule& rl = a.rules.at(s.rule);
        auto tag = classify_rule(a, rl);
        if (!tag) throw Error(ErrorKind::form, "rule " + std::to_string(s.rule) + " is not restricted");
        if (!tag->preserving()) {
            ap.segments.push_back({from, reg, rl.src});
            ap.blocks.push_back(s.block);
            ap.block_rules.push_back(s.rule);
            from = rl.dst;
            reg = s.to.regs.at(0);
        }
        cur = s.to;
    }
    ap.segments.push_back({from, reg, cur.state});
    return ap;
}

namespace {

struct Sym {
    RestrictedTag tag;
    std::vector<Label> labels;
    auto operator<=>(const Sym&) const = default;
    bool operator==(const Sym&) const = default;
};

struct Edge {
    int src;
    int sym;
    int dst;
};

struct PreservingGraph {
    std::vector<Sym> syms;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> out;  // edge ids per state
};

PreservingGraph preserving_graph(const Fma& a) {
    PreservingGraph g;
    g.out.resize(a.states.size());
    std::set<std::tuple<int, int, int>> seen;
    for (auto& rl : a.rules) {
        auto tag = classify_rule(a, rl);
        if (!tag) throw Error(ErrorKind::form, "automaton is not in restricted form");
        if (!tag->preserving()) continue;
        Sym s{*tag, rl.block};
        auto it = std::find(g.syms.begin(), g.syms.end(), s);
        int id = static_cast<int>(it - g.syms.begin());
        if (it == g.syms.end()) g.syms.push_back(s);
        if (!seen.insert({rl.src, id, rl.dst}).second) continue;
        g.out[rl.src].push_back(static_cast<int>(g.edges.size()));
        g.edges.push_back({rl.src, id, rl.dst});
    }
    return g;
}

using SymCount = std::map<int, int>;

// Clause content for a multiset of symbols: binders, guard and template.
void add_symbols(const PreservingGraph& g, const SymCount& syms, Term reg, LinearForm::Clause& c) {
    std::vector<Constraint> guard;
    for (auto& [id, n] : syms) {
        const Sym& s = g.syms[id];
        for (int rep = 0; rep < n; ++rep) {
            if (s.tag.kind == StepKind::pres_eq) {
                for (Label h : s.labels) c.base.add(h, reg);
                continue;
            }
            std::vector<Term> vars;
            for (int k = 0; k < s.tag.blocks.classes(); ++k) {
                int v = new_var();
                c.binders.push_back(v);
                c.names.push_back("b" + std::to_string(c.binders.size()));
                vars.push_back(Term::v(v));
                guard.push_back(Constraint::ne(Term::v(v), reg));
            }
            if (vars.size() > 1) guard.push_back(Constraint::distinct(vars));
            for (std::size_t i = 0; i < s.labels.size(); ++i) c.base.add(s.labels[i], vars[s.tag.blocks.cls(static_cast<int>(i))]);
        }
    }
    c.guard = Constraint::all(std::move(guard));
}

}  // namespace

LinearForm preserving_form(const Fma& a, int s, int t, Term reg) {
    auto g = preserving_graph(a);
    int n = static_cast<int>(a.states.size());

    // Irreducible paths: no closed sub-walk can be cut out without losing a state.
    std::set<std::pair<SymCount, std::set<int>>> bases;
    std::vector<int> path_states{s};
    SymCount count;
    std::function<void()> walk = [&]() {
        int last = path_states.back();
        if (last == t) bases.insert({count, std::set<int>(path_states.begin(), path_states.end())});
        for (int e : g.out[last]) {
            int d = g.edges[e].dst;
            path_states.push_back(d);
            std::size_t m = path_states.size() - 1;
            bool reducible = false;
            for (std::size_t i = 0; i < m && !reducible; ++i) {
                if (path_states[i] != d) continue;
                bool all_outside = true;
                for (std::size_t j = i + 1; j <= m && all_outside; ++j) {
                    bool elsewhere = false;
                    for (std::size_t q = 0; q <= i && !elsewhere; ++q) elsewhere = path_states[q] == path_states[j];
                    all_outside = elsewhere;
                }
                reducible = all_outside;
            }
            if (!reducible) {
                ++count[g.edges[e].sym];
                walk();
                if (--count[g.edges[e].sym] == 0) count.erase(g.edges[e].sym);
            }
            path_states.pop_back();
        }
    };
    walk();

    // Simple cycles, each listed once from its smallest state.
    std::set<std::pair<SymCount, std::set<int>>> cycles;
    for (int start = 0; start < n; ++start) {
        std::vector<int> onpath{start};
        SymCount cc;
        std::function<void(int)> dfs = [&](int v) {
            for (int e : g.out[v]) {
                int d = g.edges[e].dst;
                if (d < start) continue;
                ++cc[g.edges[e].sym];
                if (d == start)
                    cycles.insert({cc, std::set<int>(onpath.begin(), onpath.end())});
                else if (std::find(onpath.begin(), onpath.end(), d) == onpath.end()) {
                    onpath.push_back(d);
                    dfs(d);
                    onpath.pop_back();
                }
                if (--cc[g.edges[e].sym] == 0) cc.erase(g.edges[e].sym);
            }
        };
        dfs(start);
    }

    LinearForm lf;
    lf.height = cycles.empty() ? 0 : 1;
    for (auto& [syms, visited] : bases) {
        LinearForm::Clause c;
        add_symbols(g, syms, reg, c);
        if (lf.height == 1) {
            auto periods = std::make_shared<LinearForm>();
            for (auto& [cyc, states] : cycles) {
                if (!std::includes(visited.begin(), visited.end(), states.begin(), states.end())) continue;
                LinearForm::Clause pc;
                add_symbols(g, cyc, reg, pc);
                periods->clauses.push_back(std::move(pc));
            }
            c.periods = periods;
        }
        lf.clauses.push_back(std::move(c));
    }
    return lf;
}

LinearForm preserving_parikh(const Fma& a, int s, Atom reg, int t) { return preserving_form(a, s, t, Term::c(reg)); }

namespace {

// Parikh image of the runs between (s, a) and (t, a'): preserving segments
// joined by register-updating blocks, explored level by level over the vectors
// that fit the size bound.
class AlteringImage : public IntensionalSet {
public:
    AlteringImage(const Fma& a, int s, int t) : a_(a), s_(s), t_(t) {
        int n = static_cast<int>(a.states.size());
        var_ = new_var();
        forms_.resize(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                auto lf = preserving_form(a, i, j, Term::v(var_));
                height_ = std::max(height_, lf.height);
                forms_[i].push_back(lf.clauses.empty() ? RatExpr::zero() : lf.to_expr());
            }
        for (std::size_t ri = 0; ri < a.rules.size(); ++ri) {
            auto tag = classify_rule(a, a.rules[ri]);
            if (!tag) throw Error(ErrorKind::form, "automaton is not in restricted form");
            if (!tag->preserving()) updates_.push_back({static_cast<int>(ri), *tag});
        }
    }

    std::string describe() const override { return "altering " + a_.states[s_] + "->" + a_.states[t_]; }
    int star_height() const override { return 1 + height_; }

    VectorSet members(const std::vector<Atom>& args, const Universe& universe, int bound) const override {
        Atom first = args.at(0), last = args.at(1);
        std::set<Atom> inside(universe.begin(), universe.end());
        std::set<Atom> avoid = inside;
        avoid.insert(first);
        avoid.insert(last);
        Atom outside = fresh_avoiding(avoid, 1)[0];
        auto canon = [&](Atom b) { return inside.count(b) || b == last ? b : outside; };

        std::map<std::tuple<int, int, Atom>, VectorSet> pres;
        auto preserved = [&](int s, int t, Atom b) -> const VectorSet& {
            auto key = std::make_tuple(s, t, b);
            auto it = pres.find(key);
            if (it != pres.end()) return it->second;
            std::set<Atom> u = inside;
            u.insert(b);
            VectorSet keep;
            for (auto& v : members_bounded(forms_[s][t], make_universe(u), bound, {{var_, b}})) {
                bool ok = true;
                for (Atom x : v.atoms()) ok &= inside.count(x) > 0;
                if (ok) keep.insert(v);
            }
            return pres.emplace(key, std::move(keep)).first->second;
        };

        std::vector<Atom> regs(universe.begin(), universe.end());
        if (!inside.count(last)) regs.push_back(last);
        regs.push_back(outside);

        VectorSet out;
        // phase 0: at the start of a segment; phase 1: at its end
        using Node = std::tuple<int, int, Atom, DataVector>;
        std::set<Node> seen;
        std::vector<Node> todo{{0, s_, canon(first), DataVector{}}};
        seen.insert(todo.back());
        auto push = [&](Node nd) {
            if (seen.insert(nd).second) todo.push_back(std::move(nd));
        };
        while (!todo.empty()) {
            auto [phase, q, b, v] = todo.back();
            todo.pop_back();
            if (phase == 0) {
                for (int t = 0; t < static_cast<int>(a_.states.size()); ++t)
                    for (auto& m : preserved(q, t, b))
                        if (v.size() + m.size() <= bound) push({1, t, b, v + m});
                continue;
            }
            if (q == t_ && b == canon(last)) out.insert(v);
            for (auto& [ri, tag] : updates_) {
                const Rule& rl = a_.rules[ri];
                if (rl.src != q || v.size() + rl.width() > bound) continue;
                for (Atom b2 : regs) {
                    if (b2 == b && b2 != outside) continue;
                    std::vector<Atom> block_atoms;
                    for (Atom x : universe)
                        if (x != b && x != b2) block_atoms.push_back(x);
                    int k = tag.blocks.classes();
                    std::vector<Atom> pick(k);
                    std::set<Atom> used;
                    std::function<void(int)> assign = [&](int c) {
                        if (c == k) {
                            DataVector blk;
                            for (int j = 0; j < rl.width(); ++j) blk += DataVector::single({rl.block[j], pick[tag.blocks.cls(j)]});
                            push({0, rl.dst, b2, v + blk});
                            return;
                        }
                        for (Atom x : block_atoms) {
                            if (used.count(x)) continue;
                            used.insert(x);
                            pick[c] = x;
                            assign(c + 1);
                            used.erase(x);
                        }
                    };
                    assign(0);
                }
            }
        }
        return out;
    }

private:
    Fma a_;
    int s_, t_;
    int var_ = 0;
    int height_ = 0;
    std::vector<std::vector<RatExpr>> forms_;
    std::vector<std::pair<int, RestrictedTag>> updates_;
};

}  // namespace

RatExpr synth_parikh_sh2(const Fma& a, int s, int t) {
    if (!is_restricted(a)) throw Error(ErrorKind::form, "synthesis needs a restricted automaton");
    int u = new_var(), v = new_var();
    return RatExpr::onion({u, v}, Constraint::top(),
                          {RatExpr::external(std::make_shared<AlteringImage>(a, s, t), {Term::v(u), Term::v(v)})},
                          {"a", "a'"});
}

RatExpr synth_parikh_sh2(const Fma& a, const Configuration& from, const Configuration& to) {
    if (!is_restricted(a)) throw Error(ErrorKind::form, "synthesis needs a restricted automaton");
    check_configuration(a, from);
    check_configuration(a, to);
    return RatExpr::external(std::make_shared<AlteringImage>(a, from.state, to.state),
                             {Term::c(from.regs[0]), Term::c(to.regs[0])});
}

RatExpr synth_language_parikh(const Fma& a) {
    if (!is_restricted(a)) throw Error(ErrorKind::form, "synthesis needs a restricted automaton");
    if (a.accepting.empty()) return RatExpr::zero();
    int u = new_var(), v = new_var();
    Term first = a.r0[0] ? Term::c(*a.r0[0]) : Term::v(u);
    std::vector<RatExpr> parts;
    for (int f : a.accepting)
        parts.push_back(RatExpr::external(std::make_shared<AlteringImage>(a, a.init, f), {first, Term::v(v)}));
    if (a.r0[0]) return RatExpr::onion({v}, Constraint::top(), std::move(parts), {"a'"});
    return RatExpr::onion({u, v}, Constraint::top(), std::move(parts), {"a", "a'"});
}

namespace {

struct Builder {
    Fma a;
    explicit Builder(int r) {
        a.r = r;
        a.r0.assign(r, std::nullopt);
    }
    int st(const std::string& name) {
        for (std::size_t i = 0; i < a.states.size(); ++i)
            if (a.states[i] == name) return static_cast<int>(i);
        return a.add_state(name);
    }
    void rule(const std::string& s, std::vector<Label> block, Constraint phi, const std::string& t) {
        int i = st(s), j = st(t);
        for (Label h : block) a.labels.insert(h);
        a.rules.push_back({i, std::move(block), std::move(phi), j});
    }
};

Term X(int i) { return Term::v(i); }

Fma sep_automaton() {
    const int r = 3;
    VarLayout l{r, 1};
    Atom hash = constant("#");
    Term y = Term::v(l.y(0));
    auto xp = [&](int i) { return Term::v(l.xp(i)); };
    auto keep_except = [&](std::set<int> skip) {
        std::vector<Constraint> cs;
        for (int i = 0; i < r; ++i)
            if (!skip.count(i)) cs.push_back(Constraint::eq(xp(i), X(i)));
        return Constraint::all(cs);
    };
    // Stores the read atom in register j; an atom already parked in a later
    // register trades places with register j.
    auto load = [&](int j) {
        std::vector<Constraint> cs{Constraint::ne(y, Term::c(hash))};
        for (int i = 0; i < j; ++i) cs.push_back(Constraint::ne(y, X(i)));
        std::vector<Constraint> alts;
        std::vector<Constraint> fresh{Constraint::eq(xp(j), y), keep_except({j})};
        for (int i = j + 1; i < r; ++i) fresh.push_back(Constraint::ne(y, X(i)));
        alts.push_back(Constraint::all(fresh));
        for (int i = j + 1; i < r; ++i)
            alts.push_back(Constraint::all({Constraint::eq(y, X(i)), Constraint::eq(xp(j), y), Constraint::eq(xp(i), X(j)), keep_except({i, j})}));
        cs.push_back(Constraint::any(alts));
        return Constraint::all(cs);
    };

    Builder b(r);
    b.a.constants = {hash};
    b.a.labels.insert(no_label);
    struct Abs {
        char kind;
        std::vector<int> rgs;
        int pos;
        bool full;
    };
    auto name = [](const Abs& s) {
        std::string n(1, s.kind);
        n += "[";
        for (int c : s.rgs) n += std::to_string(c);
        n += "]" + std::to_string(s.pos);
        if (s.full) n += "*";
        return n;
    };
    std::vector<Abs> todo{{'F', {}, 0, false}};
    b.st(name(todo[0]));
    std::set<std::string> done;
    auto go = [&](const Abs& from, Constraint phi, const Abs& to) {
        b.rule(name(from), {no_label}, std::move(phi), name(to));
        if (!done.count(name(to))) todo.push_back(to);
    };
    while (!todo.empty()) {
        Abs s = todo.back();
        todo.pop_back();
        if (!done.insert(name(s)).second) continue;
        int len = s.kind == 'M' ? 3 : 2;
        if (!s.full && s.pos < static_cast<int>(s.rgs.size())) {
            Abs t = s;
            t.pos = s.pos + 1;
            go(s, Constraint::all({Constraint::eq(y, X(s.rgs[s.pos])), keep_except({})}), t);
            continue;
        }
        if (!s.full) {
            int ncls = s.rgs.empty() ? 0 : *std::max_element(s.rgs.begin(), s.rgs.end()) + 1;
            auto advance = [&](int c) {
                Abs t = s;
                t.rgs.push_back(c);
                t.pos = s.pos + 1;
                if (t.pos == len) {
                    t.full = true;
                    t.pos = 0;
                }
                return t;
            };
            for (int c = 0; c < ncls; ++c) go(s, Constraint::all({Constraint::eq(y, X(c)), keep_except({})}), advance(c));
            if (ncls < r) go(s, load(ncls), advance(ncls));
            continue;
        }
        Abs t = s;
        t.pos = (s.pos + 1) % len;
        go(s, Constraint::all({Constraint::eq(y, X(s.rgs[s.pos])), keep_except({})}), t);
        if (s.pos == 0 && s.kind != 'Z') {
            int c = s.rgs[len - 1];
            std::string h = "H" + std::to_string(c);
            b.rule(name(s), {no_label}, Constraint::all({Constraint::eq(y, Term::c(hash)), keep_except({})}), h);
            Constraint swap = c == 0 ? keep_except({})
                                     : Constraint::all({Constraint::eq(xp(0), X(c)), Constraint::eq(xp(c), X(0)), keep_except({0, c})});
            for (char kind : {'M', 'Z'}) {
                // the shared atom now sits in register 0 and opens the next period
                Abs start{kind, {0}, 0, false};
                b.rule(h, {no_label}, Constraint::all({Constraint::eq(y, Term::c(hash)), swap}), name(start));
                if (!done.count(name(start))) todo.push_back(start);
            }
        }
    }
    for (std::size_t i = 0; i < b.a.states.size(); ++i) {
        auto& n = b.a.states[i];
        if (n[0] == 'Z' && n.back() == '*' && n[n.size() - 2] == '0') b.a.accepting.insert(static_cast<int>(i));
    }
    return b.a;
}

}  // namespace

std::vector<std::string> builtin_automaton_names() { return {"example_two", "B_first", "C_last", "L_four", "gsh3_auto", "sep_L"}; }

Fma builtin_automaton(const std::string& name) {
    if (name == "example_two" || name == "B_first" || name == "C_last") {
        Builder b(1);
        VarLayout l{1, 1};
        Term x = X(l.x(0)), y = Term::v(l.y(0)), xp = Term::v(l.xp(0));
        std::vector<Label> one{no_label};
        b.st("s0");
        if (name == "example_two") {
            b.rule("s0", one, Constraint::top(), "s0");
            b.rule("s0", one, Constraint::eq(y, xp), "s");
            b.rule("s", one, Constraint::eq(x, xp), "s");
            b.rule("s", one, Constraint::eq(x, y), "f");
            b.rule("f", one, Constraint::top(), "f");
        } else if (name == "B_first") {
            auto keep_ne = Constraint::eq(x, xp) && Constraint::ne(xp, y);
            b.rule("s0", one, Constraint::eq(y, xp), "s");
            b.rule("s", one, keep_ne, "f");
            b.rule("f", one, keep_ne, "f");
        } else {
            b.rule("s0", one, Constraint::ne(y, xp), "s");
            b.rule("s", one, Constraint::eq(x, xp) && Constraint::ne(xp, y), "s");
            b.rule("s", one, Constraint::eq(x, y), "f");
        }
        b.a.accepting.insert(b.a.state("f"));
        return b.a;
    }
    if (name == "L_four") {
        Builder b(1);
        VarLayout one{1, 1}, two{1, 2};
        b.rule("s0", {no_label}, Constraint::eq(Term::v(one.y(0)), Term::v(one.xp(0))), "s1");
        b.rule("s1", {no_label, no_label},
               Constraint::distinct({X(two.x(0)), Term::v(two.y(0)), Term::v(two.y(1)), Term::v(two.xp(0))}), "s2");
        b.rule("s2", {no_label}, Constraint::eq(X(one.x(0)), Term::v(one.y(0))), "f");
        b.a.accepting.insert(b.a.state("f"));
        return b.a;
    }
    if (name == "gsh3_auto") {
        Builder b(3);
        b.a.r0[0] = atom("a");
        VarLayout one{3, 1}, eps{3, 0};
        Term y = Term::v(one.y(0));
        auto keep = [&](const VarLayout& l, std::set<int> skip) {
            std::vector<Constraint> cs;
            for (int i = 0; i < 3; ++i)
                if (!skip.count(i)) cs.push_back(Constraint::eq(Term::v(l.xp(i)), X(i)));
            return Constraint::all(cs);
        };
        for (int i = 0; i < 7; ++i) b.st("q" + std::to_string(i));
        b.rule("q0", {label("r")}, Constraint::eq(y, X(0)) && keep(one, {}), "q1");
        b.rule("q1", {label("u1")}, Constraint::eq(y, Term::v(one.xp(1))) && Constraint::ne(y, X(0)) && keep(one, {1}), "q2");
        b.rule("q2", {label("d1")}, Constraint::eq(y, X(1)) && keep(one, {}), "q3");
        b.rule("q3", {label("u2")}, Constraint::eq(y, Term::v(one.xp(2))) && Constraint::ne(y, X(1)) && keep(one, {2}), "q4");
        b.rule("q4", {label("d2")}, Constraint::eq(y, X(2)) && keep(one, {}), "q5");
        b.rule("q5", {label("l")}, Constraint::ne(y, X(2)) && keep(one, {}), "q6");
        b.rule("q2", {}, keep(eps, {}), "q0");
        b.rule("q4", {}, keep(eps, {}), "q2");
        b.rule("q6", {}, keep(eps, {}), "q4");
        b.a.accepting.insert(0);
        return b.a;
    }
    if (name == "sep_L") return sep_automaton();
    throw Error(ErrorKind::lookup, "unknown automaton " + name);
}

}  // namespace rlang

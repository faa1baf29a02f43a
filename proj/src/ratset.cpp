#include "rlang/ratset.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <unordered_set>

namespace rlang {

int new_var() {
    static std::atomic<int> next{1000};
    return next++;
}

Atom lookup(const Env& env, int var) {
    auto it = std::lower_bound(env.begin(), env.end(), var, [](const auto& e, int v) { return e.first < v; });
    if (it == env.end() || it->first != var) throw Error(ErrorKind::reference, "unbound variable " + var_name(var));
    return it->second;
}

Env extend(Env env, int var, Atom a) {
    auto it = std::lower_bound(env.begin(), env.end(), var, [](const auto& e, int v) { return e.first < v; });
    if (it != env.end() && it->first == var)
        it->second = a;
    else
        env.insert(it, {var, a});
    return env;
}

std::string var_name(int v) { return "v" + std::to_string(v); }

VecTemplate VecTemplate::of(const DataVector& v) {
    VecTemplate t;
    for (auto& [l, n] : v.entries()) t.add(l.label, Term::c(l.atom), n);
    return t;
}

VecTemplate& VecTemplate::add(Label l, Term t, int count) {
    items.push_back({l, t, count});
    return *this;
}

VecTemplate VecTemplate::operator+(const VecTemplate& o) const {
    VecTemplate r = *this;
    r.items.insert(r.items.end(), o.items.begin(), o.items.end());
    return r;
}

int VecTemplate::size() const {
    int n = 0;
    for (auto& i : items) n += i.count;
    return n;
}

std::set<int> VecTemplate::vars() const {
    std::set<int> s;
    for (auto& i : items)
        if (i.atom.is_var()) s.insert(i.atom.var);
    return s;
}

std::set<Atom> VecTemplate::fixed_atoms() const {
    std::set<Atom> s;
    for (auto& i : items)
        if (!i.atom.is_var()) s.insert(i.atom.atom);
    return s;
}

DataVector VecTemplate::instantiate(const Env& env) const {
    std::vector<DataVector::Entry> es;
    for (auto& i : items) es.emplace_back(Letter{i.label, i.atom.is_var() ? lookup(env, i.atom.var) : i.atom.atom}, i.count);
    return DataVector(std::move(es));
}

VecTemplate VecTemplate::rename(const std::map<int, int>& m) const {
    VecTemplate r = *this;
    for (auto& i : r.items)
        if (i.atom.is_var()) {
            auto it = m.find(i.atom.var);
            if (it != m.end()) i.atom.var = it->second;
        }
    return r;
}

RatExpr RatExpr::zero() { return RatExpr(std::make_shared<Node>(Kind::zero)); }

RatExpr RatExpr::single(VecTemplate t) {
    auto n = std::make_shared<Node>(Kind::single);
    n->tmpl = std::move(t);
    return RatExpr(n);
}

RatExpr RatExpr::single(const DataVector& v) { return single(VecTemplate::of(v)); }

RatExpr RatExpr::sum(std::vector<RatExpr> parts) {
    if (parts.empty()) return single(VecTemplate{});
    if (parts.size() == 1) return parts[0];
    auto n = std::make_shared<Node>(Kind::sum);
    n->kids = std::move(parts);
    return RatExpr(n);
}

RatExpr RatExpr::star(RatExpr body) {
    auto n = std::make_shared<Node>(Kind::star);
    n->kids = {std::move(body)};
    return RatExpr(n);
}

RatExpr RatExpr::onion(std::vector<int> binders, Constraint guard, std::vector<RatExpr> bodies,
                       std::vector<std::string> names) {
    if (bodies.empty()) return zero();
    auto n = std::make_shared<Node>(Kind::onion);
    n->binders = std::move(binders);
    n->guard = std::move(guard);
    n->kids = std::move(bodies);
    n->names = std::move(names);
    n->names.resize(n->binders.size());
    return RatExpr(n);
}

RatExpr RatExpr::alt(std::vector<RatExpr> bodies) {
    if (bodies.size() == 1) return bodies[0];
    return onion({}, Constraint::top(), std::move(bodies));
}

RatExpr RatExpr::external(std::shared_ptr<const IntensionalSet> set, std::vector<Term> args) {
    auto n = std::make_shared<Node>(Kind::external);
    n->ext = std::move(set);
    n->args = std::move(args);
    return RatExpr(n);
}

std::set<int> RatExpr::free_vars() const {
    std::set<int> s;
    switch (kind()) {
    case Kind::zero: break;
    case Kind::single: s = tmpl().vars(); break;
    case Kind::sum:
    case Kind::star:
        for (auto& k : kids()) {
            auto f = k.free_vars();
            s.insert(f.begin(), f.end());
        }
        break;
    case Kind::onion: {
        for (auto& k : kids()) {
            auto f = k.free_vars();
            s.insert(f.begin(), f.end());
        }
        auto g = guard().vars();
        s.insert(g.begin(), g.end());
        for (int b : binders()) s.erase(b);
        break;
    }
    case Kind::external:
        for (auto& t : args())
            if (t.is_var()) s.insert(t.var);
        break;
    }
    return s;
}

std::set<Atom> RatExpr::constants() const {
    std::set<Atom> s;
    auto keep = [&](const std::set<Atom>& xs) {
        for (Atom a : xs)
            if (is_constant(a)) s.insert(a);
    };
    switch (kind()) {
    case Kind::zero: break;
    case Kind::single: keep(tmpl().fixed_atoms()); break;
    case Kind::sum:
    case Kind::star:
    case Kind::onion:
        for (auto& k : kids()) keep(k.constants());
        keep(guard().constants());
        break;
    case Kind::external: {
        keep(ext()->constants());
        std::set<Atom> a;
        for (auto& t : args())
            if (!t.is_var()) a.insert(t.atom);
        keep(a);
        break;
    }
    }
    return s;
}

namespace {

std::string term_name(const Term& t, const std::map<int, std::string>& names) {
    if (!t.is_var()) return atom_name(t.atom);
    auto it = names.find(t.var);
    return it != names.end() ? it->second : var_name(t.var);
}

std::string tmpl_string(const VecTemplate& t, const std::map<int, std::string>& names) {
    if (t.items.empty()) return "0";
    std::string s;
    for (auto& i : t.items) {
        if (!s.empty()) s += " + ";
        if (i.count != 1) s += std::to_string(i.count);
        if (i.label != no_label) s += label_name(i.label) + ":";
        s += term_name(i.atom, names);
    }
    return s;
}

std::string expr_string(const RatExpr& e, std::map<int, std::string> names) {
    using K = RatExpr::Kind;
    switch (e.kind()) {
    case K::zero: return "∅";
    case K::single: return "{" + tmpl_string(e.tmpl(), names) + "}";
    case K::sum: {
        std::string s = "(";
        for (std::size_t i = 0; i < e.kids().size(); ++i) {
            if (i) s += " + ";
            s += expr_string(e.kids()[i], names);
        }
        return s + ")";
    }
    case K::star: return expr_string(e.kids()[0], names) + "*";
    case K::onion: {
        std::string s = "U[";
        for (std::size_t i = 0; i < e.binders().size(); ++i) {
            std::string n = e.binder_names()[i].empty() ? var_name(e.binders()[i]) : e.binder_names()[i];
            names[e.binders()[i]] = n;
            if (i) s += ",";
            s += n;
        }
        if (e.guard().kind() != Constraint::Kind::truth)
            s += " | " + e.guard().to_string([&](int v) { return term_name(Term::v(v), names); });
        s += "](";
        for (std::size_t i = 0; i < e.kids().size(); ++i) {
            if (i) s += " ∪ ";
            s += expr_string(e.kids()[i], names);
        }
        return s + ")";
    }
    case K::external: {
        std::string s = "<" + e.ext()->describe() + ">(";
        for (std::size_t i = 0; i < e.args().size(); ++i) {
            if (i) s += ",";
            s += term_name(e.args()[i], names);
        }
        return s + ")";
    }
    }
    return "?";
}

}  // namespace

std::string RatExpr::to_string() const { return expr_string(*this, {}); }

int syntactic_star_height(const RatExpr& e) {
    using K = RatExpr::Kind;
    switch (e.kind()) {
    case K::zero:
    case K::single: return 0;
    case K::star: return 1 + syntactic_star_height(e.kids()[0]);
    case K::sum:
    case K::onion: {
        int h = 0;
        for (auto& k : e.kids()) h = std::max(h, syntactic_star_height(k));
        return h;
    }
    case K::external: return e.ext()->star_height();
    }
    return 0;
}

namespace {

using VecList = std::vector<DataVector>;
using VecListPtr = std::shared_ptr<const VecList>;

class Evaluator {
public:
    Evaluator(const Universe& u, int bound) : universe_(u), inside_(u.begin(), u.end()), bound_(bound) {}

    VecListPtr eval(const RatExpr& e, const Env& env) {
        auto fv = free_vars(e);
        Env key_env;
        for (auto& [v, a] : env)
            if (fv.count(v)) key_env.emplace_back(v, a);
        auto key = std::make_pair(e.id(), key_env);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        auto r = std::make_shared<const VecList>(compute(e, env));
        memo_.emplace(key, r);
        return r;
    }

private:
    const std::set<int>& free_vars(const RatExpr& e) {
        auto it = fv_.find(e.id());
        if (it == fv_.end()) it = fv_.emplace(e.id(), e.free_vars()).first;
        return it->second;
    }

    bool in_universe(const DataVector& v) const {
        for (auto& [l, n] : v.entries())
            if (!inside_.count(l.atom)) return false;
        return true;
    }

    static VecList normalize(std::unordered_set<DataVector, DataVectorHash>&& s) {
        VecList out(s.begin(), s.end());
        std::sort(out.begin(), out.end());
        return out;
    }

    VecList compute(const RatExpr& e, const Env& env) {
        using K = RatExpr::Kind;
        switch (e.kind()) {
        case K::zero: return {};
        case K::single: {
            if (e.tmpl().size() > bound_) return {};
            auto v = e.tmpl().instantiate(env);
            if (!in_universe(v)) return {};
            return {v};
        }
        case K::sum: {
            std::unordered_set<DataVector, DataVectorHash> acc{DataVector{}};
            for (auto& k : e.kids()) {
                auto part = eval(k, env);
                std::unordered_set<DataVector, DataVectorHash> next;
                for (auto& x : acc)
                    for (auto& y : *part)
                        if (x.size() + y.size() <= bound_) next.insert(x + y);
                acc = std::move(next);
                if (acc.empty()) break;
            }
            return normalize(std::move(acc));
        }
        case K::star: {
            auto body = eval(e.kids()[0], env);
            std::vector<DataVector> gens;
            for (auto& b : *body)
                if (!b.empty()) gens.push_back(b);
            std::unordered_set<DataVector, DataVectorHash> seen{DataVector{}};
            std::vector<DataVector> frontier{DataVector{}};
            while (!frontier.empty()) {
                std::vector<DataVector> next;
                for (auto& x : frontier)
                    for (auto& g : gens) {
                        if (x.size() + g.size() > bound_) continue;
                        auto y = x + g;
                        if (seen.insert(y).second) next.push_back(std::move(y));
                    }
                frontier = std::move(next);
            }
            return normalize(std::move(seen));
        }
        case K::onion: {
            std::unordered_set<DataVector, DataVectorHash> acc;
            std::set<Atom> avoid(universe_.begin(), universe_.end());
            for (auto& [v, a] : env) avoid.insert(a);
            auto gc = e.guard().constants();
            avoid.insert(gc.begin(), gc.end());
            int nb = static_cast<int>(e.binders().size());
            auto fresh = fresh_avoiding(avoid, nb);
            Env cur = env;
            std::function<void(int, int)> rec = [&](int i, int used_fresh) {
                if (i == nb) {
                    if (!e.guard().eval([&](int v) { return lookup(cur, v); })) return;
                    for (auto& k : e.kids()) {
                        auto part = eval(k, cur);
                        acc.insert(part->begin(), part->end());
                    }
                    return;
                }
                Env saved = cur;
                for (Atom a : universe_) {
                    cur = extend(saved, e.binders()[i], a);
                    rec(i + 1, used_fresh);
                }
                // fresh atoms are interchangeable: only the next unused one is new
                for (int j = 0; j <= used_fresh && j < nb; ++j) {
                    cur = extend(saved, e.binders()[i], fresh[j]);
                    rec(i + 1, std::max(used_fresh, j + 1));
                }
                cur = saved;
            };
            rec(0, 0);
            return normalize(std::move(acc));
        }
        case K::external: {
            std::vector<Atom> args;
            for (auto& t : e.args()) args.push_back(t.is_var() ? lookup(env, t.var) : t.atom);
            auto s = e.ext()->members(args, universe_, bound_);
            return VecList(s.begin(), s.end());
        }
        }
        return {};
    }

    Universe universe_;
    std::set<Atom> inside_;
    int bound_;
    std::map<std::pair<const void*, Env>, VecListPtr> memo_;
    std::map<const void*, std::set<int>> fv_;
};

}  // namespace

VectorSet members_bounded(const RatExpr& e, const Universe& universe, int size_bound, const Env& env) {
    std::set<Atom> u(universe.begin(), universe.end());
    for (Atom c : e.constants())
        if (!u.count(c)) throw Error(ErrorKind::reference, "universe lacks constant " + atom_name(c));
    Evaluator ev(make_universe(u), size_bound);
    auto r = ev.eval(e, env);
    return VectorSet(r->begin(), r->end());
}

bool contains(const RatExpr& e, const DataVector& v) {
    auto u = v.atoms();
    auto c = e.constants();
    u.insert(c.begin(), c.end());
    return members_bounded(e, make_universe(u), v.size()).count(v) > 0;
}

RatExpr LinearForm::to_expr() const {
    std::vector<RatExpr> alts;
    for (auto& c : clauses) {
        RatExpr body = RatExpr::single(c.base);
        if (height > 0 && c.periods) body = RatExpr::sum({body, RatExpr::star(c.periods->to_expr())});
        if (c.binders.empty() && c.guard.kind() == Constraint::Kind::truth)
            alts.push_back(body);
        else
            alts.push_back(RatExpr::onion(c.binders, c.guard, {body}, c.names));
    }
    if (alts.empty()) return RatExpr::zero();
    return RatExpr::alt(std::move(alts));
}

namespace {

LinearForm renamed(const LinearForm& lf, std::map<int, int> m) {
    LinearForm out;
    out.height = lf.height;
    for (auto& c : lf.clauses) {
        LinearForm::Clause d;
        auto local = m;
        for (int b : c.binders) {
            int nb = new_var();
            local[b] = nb;
            d.binders.push_back(nb);
        }
        d.names = c.names;
        d.guard = c.guard.rename([&](const Term& t) {
            if (!t.is_var()) return t;
            auto it = local.find(t.var);
            return it == local.end() ? t : Term::v(it->second);
        });
        d.base = c.base.rename(local);
        if (c.periods) d.periods = std::make_shared<LinearForm>(renamed(*c.periods, local));
        out.clauses.push_back(std::move(d));
    }
    return out;
}

LinearForm empty_form(int h) {
    LinearForm f;
    f.height = h;
    return f;
}

LinearForm lift(const LinearForm& lf, int h) {
    // g + P* with P of any smaller height is already of height h.
    LinearForm out = lf;
    out.height = h;
    if (lf.height == 0 && h > 0)
        for (auto& c : out.clauses) c.periods = std::make_shared<LinearForm>(empty_form(h - 1));
    return out;
}

LinearForm union_forms(const LinearForm& a, const LinearForm& b) {
    int h = std::max(a.height, b.height);
    LinearForm x = lift(a, h), y = lift(b, h);
    x.clauses.insert(x.clauses.end(), y.clauses.begin(), y.clauses.end());
    return x;
}

LinearForm sum_forms(const LinearForm& a, const LinearForm& b0) {
    LinearForm b = b0.fresh_copy();
    int h = std::max(a.height, b.height);
    LinearForm out;
    out.height = h;
    for (auto& x : a.clauses)
        for (auto& y : b.clauses) {
            LinearForm::Clause c;
            c.binders = x.binders;
            c.binders.insert(c.binders.end(), y.binders.begin(), y.binders.end());
            c.names = x.names;
            c.names.insert(c.names.end(), y.names.begin(), y.names.end());
            c.guard = x.guard && y.guard;
            c.base = x.base + y.base;
            if (h > 0) {
                LinearForm p = empty_form(h - 1);
                if (x.periods) p = union_forms(p, *x.periods);
                if (y.periods) p = union_forms(p, *y.periods);
                p.height = h - 1;
                c.periods = std::make_shared<LinearForm>(p);
            }
            out.clauses.push_back(std::move(c));
        }
    return out;
}

}  // namespace

LinearForm LinearForm::fresh_copy() const { return renamed(*this, {}); }

LinearForm to_linear_form(const RatExpr& e) {
    using K = RatExpr::Kind;
    switch (e.kind()) {
    case K::zero: return empty_form(0);
    case K::single: {
        LinearForm f;
        f.clauses.push_back({{}, {}, Constraint::top(), e.tmpl(), nullptr});
        return f;
    }
    case K::sum: {
        LinearForm acc;
        acc.clauses.push_back({{}, {}, Constraint::top(), VecTemplate{}, nullptr});
        for (auto& k : e.kids()) acc = sum_forms(acc, to_linear_form(k));
        return acc;
    }
    case K::star: {
        auto inner = to_linear_form(e.kids()[0]);
        LinearForm f;
        f.height = inner.height + 1;
        f.clauses.push_back({{}, {}, Constraint::top(), VecTemplate{}, std::make_shared<LinearForm>(inner)});
        return f;
    }
    case K::onion: {
        LinearForm acc = empty_form(0);
        for (auto& k : e.kids()) acc = union_forms(acc, to_linear_form(k));
        for (auto& c : acc.clauses) {
            c.binders.insert(c.binders.begin(), e.binders().begin(), e.binders().end());
            c.names.insert(c.names.begin(), e.binder_names().begin(), e.binder_names().end());
            c.guard = e.guard().kind() == Constraint::Kind::truth ? c.guard : (e.guard() && c.guard);
        }
        return acc;
    }
    case K::external:
        throw Error(ErrorKind::form, "intensional node " + e.ext()->describe() + " has no explicit linear form");
    }
    return {};
}

DataVector ParsingTree::value() const {
    DataVector v;
    std::function<void(const Node&)> go = [&](const Node& n) {
        v += n.vec;
        for (auto& k : n.kids) go(k);
    };
    go(root);
    return v;
}

int ParsingTree::depth() const {
    std::function<int(const Node&)> go = [&](const Node& n) {
        int d = 0;
        for (auto& k : n.kids) d = std::max(d, 1 + go(k));
        return d;
    };
    return go(root);
}

std::string ParsingTree::to_string() const {
    std::string s;
    std::function<void(const Node&, int)> go = [&](const Node& n, int indent) {
        s += std::string(indent * 2, ' ') + "(" + rlang::to_string(n.vec) + ", {";
        bool first = true;
        for (Atom a : n.support) {
            if (!first) s += ",";
            s += atom_name(a);
            first = false;
        }
        s += "})\n";
        for (auto& k : n.kids) go(k, indent + 1);
    };
    go(root, 0);
    return s;
}

namespace {

std::set<Atom> scope_support(const Env& env, const LinearForm::Clause& c) {
    std::set<Atom> s;
    for (auto& [v, a] : env) s.insert(a);
    for (Atom a : c.base.fixed_atoms())
        if (is_constant(a)) s.insert(a);
    for (Atom a : c.guard.constants()) s.insert(a);
    return s;
}

// Calls f(env') for every binder assignment of c over universe ∪ fresh atoms that satisfies the guard;
// stops when f returns true.
bool for_each_binding(const LinearForm::Clause& c, const Env& env, const Universe& u,
                      const std::function<bool(const Env&)>& f) {
    std::set<Atom> avoid(u.begin(), u.end());
    for (auto& [v, a] : env) avoid.insert(a);
    int nb = static_cast<int>(c.binders.size());
    auto fresh = fresh_avoiding(avoid, nb);
    Env cur = env;
    std::function<bool(int, int)> rec = [&](int i, int used) -> bool {
        if (i == nb) {
            if (!c.guard.eval([&](int v) { return lookup(cur, v); })) return false;
            return f(cur);
        }
        Env saved = cur;
        for (Atom a : u) {
            cur = extend(saved, c.binders[i], a);
            if (rec(i + 1, used)) return true;
        }
        for (int j = 0; j <= used && j < nb; ++j) {
            cur = extend(saved, c.binders[i], fresh[j]);
            if (rec(i + 1, std::max(used, j + 1))) return true;
        }
        cur = saved;
        return false;
    };
    return rec(0, 0);
}

std::optional<ParsingTree::Node> build_node(const LinearForm& lf, const Env& env, const DataVector& v,
                                            const Universe& u) {
    std::optional<ParsingTree::Node> found;
    for (auto& c : lf.clauses) {
        for_each_binding(c, env, u, [&](const Env& e2) {
            auto g = c.base.instantiate(e2);
            if (!g.leq(v)) return false;
            auto r = v.minus(g);
            ParsingTree::Node node{g, scope_support(env, c), {}};
            if (r.empty()) {
                found = node;
                return true;
            }
            if (lf.height == 0 || !c.periods) return false;
            auto members = members_bounded(c.periods->to_expr(), u, r.size(), e2);
            std::vector<DataVector> gens;
            for (auto& m : members)
                if (!m.empty() && m.leq(r)) gens.push_back(m);
            std::set<std::pair<DataVector, std::size_t>> dead;
            std::vector<DataVector> chosen;
            std::function<bool(const DataVector&, std::size_t)> split = [&](const DataVector& rest, std::size_t from) {
                if (rest.empty()) return true;
                if (dead.count({rest, from})) return false;
                for (std::size_t i = from; i < gens.size(); ++i) {
                    if (!gens[i].leq(rest)) continue;
                    chosen.push_back(gens[i]);
                    if (split(rest.minus(gens[i]), i)) return true;
                    chosen.pop_back();
                }
                dead.insert({rest, from});
                return false;
            };
            if (!split(r, 0)) return false;
            for (auto& part : chosen) {
                auto kid = build_node(*c.periods, e2, part, u);
                if (!kid) return false;
                node.kids.push_back(std::move(*kid));
            }
            found = node;
            return true;
        });
        if (found) return found;
    }
    return std::nullopt;
}

bool valid_node(const LinearForm& lf, const Env& env, const ParsingTree::Node& n, const Universe& u) {
    for (auto& c : lf.clauses) {
        bool ok = for_each_binding(c, env, u, [&](const Env& e2) {
            if (c.base.instantiate(e2) != n.vec) return false;
            if (scope_support(env, c) != n.support) return false;
            if (n.kids.empty()) return true;
            if (lf.height == 0 || !c.periods) return false;
            for (auto& k : n.kids)
                if (!valid_node(*c.periods, e2, k, u)) return false;
            return true;
        });
        if (ok) return true;
    }
    return false;
}

std::set<Atom> tree_atoms(const ParsingTree::Node& n) {
    std::set<Atom> s = n.vec.atoms();
    s.insert(n.support.begin(), n.support.end());
    for (auto& k : n.kids) {
        auto t = tree_atoms(k);
        s.insert(t.begin(), t.end());
    }
    return s;
}

ParsingTree::Node* node_at(ParsingTree::Node& root, const TreePath& path, std::size_t upto) {
    ParsingTree::Node* n = &root;
    for (std::size_t i = 0; i < upto; ++i) {
        if (path[i] < 0 || path[i] >= static_cast<int>(n->kids.size())) throw Error(ErrorKind::form, "no such tree node");
        n = &n->kids[path[i]];
    }
    return n;
}

void permute_node(ParsingTree::Node& n, const Permutation& p) {
    n.vec = p.apply(n.vec);
    n.support = p.apply(n.support);
    for (auto& k : n.kids) permute_node(k, p);
}

}  // namespace

std::optional<ParsingTree> build_parsing_tree(const LinearForm& lf, const DataVector& v, const Universe& universe) {
    std::set<Atom> u(universe.begin(), universe.end());
    for (Atom a : v.atoms())
        if (!u.count(a)) return std::nullopt;
    auto n = build_node(lf, {}, v, universe);
    if (!n) return std::nullopt;
    return ParsingTree{*n};
}

bool validate_parsing_tree(const LinearForm& lf, const ParsingTree& t) {
    auto u = make_universe(tree_atoms(t.root));
    return valid_node(lf, {}, t.root, u);
}

ParsingTree tree_edit(const LinearForm& lf, const ParsingTree& t, const TreeEdit& edit) {
    ParsingTree out = t;
    switch (edit.kind) {
    case TreeEdit::Kind::prune:
    case TreeEdit::Kind::duplicate: {
        if (edit.node.empty()) throw Error(ErrorKind::form, "the root cannot be pruned or duplicated");
        auto* parent = node_at(out.root, edit.node, edit.node.size() - 1);
        int idx = edit.node.back();
        if (idx < 0 || idx >= static_cast<int>(parent->kids.size())) throw Error(ErrorKind::form, "no such tree node");
        if (edit.kind == TreeEdit::Kind::prune)
            parent->kids.erase(parent->kids.begin() + idx);
        else
            parent->kids.insert(parent->kids.begin() + idx + 1, parent->kids[idx]);
        break;
    }
    case TreeEdit::Kind::permute: {
        auto* n = node_at(out.root, edit.node, edit.node.size());
        if (edit.perm.apply(n->support) != n->support)
            throw Error(ErrorKind::support, "permutation does not preserve the node support");
        permute_node(*n, edit.perm);
        break;
    }
    }
    if (!validate_parsing_tree(lf, out)) throw Error(ErrorKind::form, "edited tree is not a parsing tree");
    return out;
}

BoundConstants bound_constants(const LinearForm& lf) {
    BoundConstants bc;
    std::function<void(const LinearForm&, int)> go = [&](const LinearForm& f, int scope) {
        for (auto& c : f.clauses) {
            bc.N = std::max(bc.N, c.base.size());
            int consts = 0;
            std::set<Atom> cs = c.guard.constants();
            for (Atom a : c.base.fixed_atoms())
                if (is_constant(a)) cs.insert(a);
            consts = static_cast<int>(cs.size());
            bc.M = std::max(bc.M, scope + consts);
            if (c.periods) go(*c.periods, scope + static_cast<int>(c.binders.size()));
        }
    };
    go(lf, 0);
    return bc;
}

RatExpr substitute(const RatExpr& base, const std::function<RatExpr(const VecTemplate::Item&)>& family) {
    using K = RatExpr::Kind;
    switch (base.kind()) {
    case K::zero: return base;
    case K::single: {
        std::vector<RatExpr> parts;
        for (auto& item : base.tmpl().items) {
            auto one = item;
            one.count = 1;
            auto img = family(one);
            for (int i = 0; i < item.count; ++i) parts.push_back(img);
        }
        return RatExpr::sum(std::move(parts));
    }
    case K::sum: {
        std::vector<RatExpr> parts;
        for (auto& k : base.kids()) parts.push_back(substitute(k, family));
        return RatExpr::sum(std::move(parts));
    }
    case K::star: return RatExpr::star(substitute(base.kids()[0], family));
    case K::onion: {
        std::vector<RatExpr> parts;
        for (auto& k : base.kids()) parts.push_back(substitute(k, family));
        return RatExpr::onion(base.binders(), base.guard(), std::move(parts), base.binder_names());
    }
    case K::external: throw Error(ErrorKind::form, "cannot substitute into an intensional node");
    }
    return base;
}

namespace {

RatExpr gsh_level(int i, int n, Term x) {
    Label head = i == 1 ? label("r") : label("d" + std::to_string(i - 1));
    int y = new_var();
    auto guard = Constraint::ne(Term::v(y), x);
    std::string yname(1, static_cast<char>('a' + i));
    VecTemplate t;
    t.add(head, x);
    if (i == n) {
        t.add(label("l"), Term::v(y));
        return RatExpr::onion({y}, guard, {RatExpr::single(t)}, {yname});
    }
    t.add(label("u" + std::to_string(i)), Term::v(y));
    return RatExpr::onion({y}, guard, {RatExpr::sum({RatExpr::single(t), RatExpr::star(gsh_level(i + 1, n, Term::v(y)))})},
                          {yname});
}

}  // namespace

RatExpr builtin_expression(const std::string& name, const std::vector<int>& params) {
    if (name == "par_two") {
        int a = new_var(), b = new_var();
        VecTemplate two;
        two.add(no_label, Term::v(a), 2);
        VecTemplate one;
        one.add(no_label, Term::v(b));
        return RatExpr::onion({a}, Constraint::top(),
                              {RatExpr::sum({RatExpr::single(two),
                                             RatExpr::star(RatExpr::onion({b}, Constraint::top(), {RatExpr::single(one)}, {"b"}))})},
                              {"a"});
    }
    if (name == "par_first") {
        int a = new_var(), b = new_var();
        VecTemplate ta, tb;
        ta.add(no_label, Term::v(a));
        tb.add(no_label, Term::v(b));
        auto others = RatExpr::onion({b}, Constraint::ne(Term::v(b), Term::v(a)), {RatExpr::single(tb)}, {"b"});
        return RatExpr::onion({a}, Constraint::top(), {RatExpr::sum({RatExpr::single(ta), RatExpr::star(others)})}, {"a"});
    }
    if (name == "par_mirror") {
        int a = new_var();
        VecTemplate t;
        t.add(label("l"), Term::v(a)).add(label("r"), Term::v(a));
        return RatExpr::star(RatExpr::onion({a}, Constraint::top(), {RatExpr::single(t)}, {"a"}));
    }
    if (name == "R_example") {
        int a = new_var(), b = new_var();
        VecTemplate ta, tp;
        ta.add(no_label, Term::v(a));
        tp.add(no_label, Term::v(a)).add(no_label, Term::v(b), 2);
        auto p = RatExpr::onion({b}, Constraint::ne(Term::v(b), Term::v(a)), {RatExpr::single(tp)}, {"b"});
        return RatExpr::onion({a}, Constraint::top(), {RatExpr::sum({RatExpr::single(ta), RatExpr::star(p)})}, {"a"});
    }
    if (name == "gsh") {
        int n = params.empty() ? 3 : params[0];
        if (n < 1) throw Error(ErrorKind::parameter, "gsh needs n ≥ 1");
        return RatExpr::star(gsh_level(1, n, Term::c(atom("a"))));
    }
    throw Error(ErrorKind::lookup, "unknown expression " + name);
}

}  // namespace rlang

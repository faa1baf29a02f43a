#include "rlang/foundation.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace rlang {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::order: return "order";
    case ErrorKind::constant: return "constant";
    case ErrorKind::arity: return "arity";
    case ErrorKind::reference: return "reference";
    case ErrorKind::alphabet: return "alphabet";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::form: return "form";
    case ErrorKind::lookup: return "lookup";
    case ErrorKind::emptiness: return "emptiness";
    case ErrorKind::control: return "control";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::insertion: return "insertion";
    case ErrorKind::length: return "length";
    case ErrorKind::profile: return "profile";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::threshold: return "threshold";
    case ErrorKind::support: return "support";
    case ErrorKind::parse: return "parse";
    }
    return "?";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(error_kind_name(kind)) + " error: " + what), kind_(kind) {}

namespace {

struct AtomInfo {
    std::string name;
    bool constant;
    int fresh_index;  // -1 for named atoms
};

struct Registry {
    std::mutex mu;
    std::vector<AtomInfo> atoms;
    std::map<std::pair<std::string, int>, int> index;  // (name, kind) -> id; kind 0 plain, 1 constant, 2 fresh
    std::vector<std::string> labels{""};
    std::unordered_map<std::string, int> label_index{{"", 0}};

    // Single-letter names get stable ids so that canonical order is alphabetical for them.
    Registry() {
        for (char c = 'a'; c <= 'z'; ++c) {
            index.emplace(std::make_pair(std::string(1, c), 0), static_cast<int>(atoms.size()));
            atoms.push_back({std::string(1, c), false, -1});
        }
    }

    int intern(const std::string& name, int kind, int fresh_index) {
        std::lock_guard lock(mu);
        auto key = std::make_pair(name, kind);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(atoms.size());
        atoms.push_back({name, kind == 1, fresh_index});
        index.emplace(key, id);
        return id;
    }

    AtomInfo info(Atom a) {
        std::lock_guard lock(mu);
        if (a.id < 0 || a.id >= static_cast<int>(atoms.size()))
            throw Error(ErrorKind::reference, "unknown atom id " + std::to_string(a.id));
        return atoms[a.id];
    }
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

Atom atom(std::string_view name) {
    if (name.empty()) throw Error(ErrorKind::parse, "empty atom name");
    if (name[0] == '$') return constant(name.substr(1));
    if (name[0] == '_') {
        int i = std::stoi(std::string(name.substr(1)));
        return fresh_atom(i);
    }
    return Atom{registry().intern(std::string(name), 0, -1)};
}

Atom constant(std::string_view name) { return Atom{registry().intern(std::string(name), 1, -1)}; }

Atom fresh_atom(int i) { return Atom{registry().intern(std::to_string(i), 2, i)}; }

std::string atom_name(Atom a) {
    auto info = registry().info(a);
    if (info.constant) return "$" + info.name;
    if (info.fresh_index >= 0) return "_" + info.name;
    return info.name;
}

bool is_constant(Atom a) { return registry().info(a).constant; }
bool is_fresh(Atom a) { return registry().info(a).fresh_index >= 0; }

std::vector<Atom> fresh_avoiding(const std::set<Atom>& avoid, int n) {
    std::vector<Atom> out;
    for (int i = 0; static_cast<int>(out.size()) < n; ++i) {
        Atom a = fresh_atom(i);
        if (!avoid.count(a)) out.push_back(a);
    }
    return out;
}

std::vector<Atom> atoms(std::initializer_list<std::string_view> names) {
    std::vector<Atom> out;
    for (auto n : names) out.push_back(atom(n));
    return out;
}

Label label(std::string_view name) {
    auto& r = registry();
    std::lock_guard lock(r.mu);
    std::string s(name);
    auto it = r.label_index.find(s);
    if (it != r.label_index.end()) return it->second;
    int id = static_cast<int>(r.labels.size());
    r.labels.push_back(s);
    r.label_index.emplace(s, id);
    return id;
}

std::string label_name(Label l) {
    auto& r = registry();
    std::lock_guard lock(r.mu);
    if (l < 0 || l >= static_cast<int>(r.labels.size())) throw Error(ErrorKind::reference, "unknown label");
    return r.labels[l];
}

std::string to_string(const Letter& l) {
    if (l.label == no_label) return atom_name(l.atom);
    return label_name(l.label) + ":" + atom_name(l.atom);
}

namespace {

Letter parse_letter(const std::string& tok) {
    auto colon = tok.find(':');
    if (colon == std::string::npos) return Letter{no_label, atom(tok)};
    return Letter{label(tok.substr(0, colon)), atom(tok.substr(colon + 1))};
}

std::vector<std::string> split_ws(std::string_view s) {
    std::istringstream in{std::string(s)};
    std::vector<std::string> out;
    std::string t;
    while (in >> t) out.push_back(t);
    return out;
}

}  // namespace

DataWord word_of(std::string_view spaced) {
    DataWord w;
    for (auto& t : split_ws(spaced)) w.push_back(parse_letter(t));
    return w;
}

std::string to_string(const DataWord& w) {
    if (w.empty()) return "ε";
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += ' ';
        s += to_string(w[i]);
    }
    return s;
}

std::set<Atom> atoms_of(const DataWord& w) {
    std::set<Atom> s;
    for (auto& l : w) s.insert(l.atom);
    return s;
}

DataVector::DataVector(std::vector<Entry> entries) : entries_(std::move(entries)) { normalize(); }

void DataVector::normalize() {
    std::sort(entries_.begin(), entries_.end(), [](auto& x, auto& y) { return x.first < y.first; });
    std::vector<Entry> merged;
    for (auto& e : entries_) {
        if (e.second < 0) throw Error(ErrorKind::order, "negative count for " + rlang::to_string(e.first));
        if (!merged.empty() && merged.back().first == e.first)
            merged.back().second += e.second;
        else
            merged.push_back(e);
    }
    std::erase_if(merged, [](auto& e) { return e.second == 0; });
    entries_ = std::move(merged);
    size_ = 0;
    for (auto& e : entries_) size_ += e.second;
}

DataVector DataVector::single(Letter l, int count) { return DataVector({{l, count}}); }

int DataVector::operator[](const Letter& l) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), l,
                               [](const Entry& e, const Letter& x) { return e.first < x; });
    return (it != entries_.end() && it->first == l) ? it->second : 0;
}

std::vector<Letter> DataVector::dom() const {
    std::vector<Letter> d;
    for (auto& e : entries_) d.push_back(e.first);
    return d;
}

std::set<Atom> DataVector::atoms() const {
    std::set<Atom> s;
    for (auto& e : entries_) s.insert(e.first.atom);
    return s;
}

int DataVector::count_atom(Atom a) const {
    int n = 0;
    for (auto& e : entries_)
        if (e.first.atom == a) n += e.second;
    return n;
}

DataVector& DataVector::operator+=(const DataVector& o) {
    if (o.entries_.empty()) return *this;
    std::vector<Entry> out;
    out.reserve(entries_.size() + o.entries_.size());
    auto i = entries_.begin();
    auto j = o.entries_.begin();
    while (i != entries_.end() || j != o.entries_.end()) {
        if (j == o.entries_.end() || (i != entries_.end() && i->first < j->first)) {
            out.push_back(*i++);
        } else if (i == entries_.end() || j->first < i->first) {
            out.push_back(*j++);
        } else {
            out.emplace_back(i->first, i->second + j->second);
            ++i;
            ++j;
        }
    }
    entries_ = std::move(out);
    size_ += o.size_;
    return *this;
}

DataVector DataVector::minus(const DataVector& u) const {
    std::vector<Entry> out = entries_;
    for (auto& e : u.entries_) {
        int have = (*this)[e.first];
        if (have < e.second)
            throw Error(ErrorKind::order, "subtrahend exceeds minuend at letter " + rlang::to_string(e.first));
        for (auto& o : out)
            if (o.first == e.first) o.second -= e.second;
    }
    return DataVector(std::move(out));
}

bool DataVector::leq(const DataVector& o) const {
    if (size_ > o.size_) return false;
    for (auto& e : entries_)
        if (o[e.first] < e.second) return false;
    return true;
}

std::vector<Letter> DataVector::saturated_in(const DataVector& whole) const {
    if (!leq(whole)) throw Error(ErrorKind::order, "saturation needs u ≤ v");
    std::vector<Letter> out;
    for (auto& e : entries_)
        if (whole[e.first] == e.second) out.push_back(e.first);
    return out;
}

DataVector DataVector::scaled(int k) const {
    std::vector<Entry> out = entries_;
    for (auto& e : out) e.second *= k;
    return DataVector(std::move(out));
}

std::strong_ordering DataVector::operator<=>(const DataVector& o) const {
    if (auto c = size_ <=> o.size_; c != 0) return c;
    return entries_ <=> o.entries_;
}

std::size_t DataVector::hash() const {
    std::size_t h = 1469598103934665603ull;
    for (auto& e : entries_) {
        h ^= static_cast<std::size_t>(e.first.label) * 0x9e3779b97f4a7c15ull;
        h = (h << 7) ^ (h >> 3) ^ static_cast<std::size_t>(e.first.atom.id) * 1099511628211ull;
        h ^= static_cast<std::size_t>(e.second) * 0xc2b2ae3d27d4eb4full;
        h *= 1099511628211ull;
    }
    return h;
}

DataVector parikh(const DataWord& w) {
    std::vector<DataVector::Entry> es;
    for (auto& l : w) es.emplace_back(l, 1);
    return DataVector(std::move(es));
}

std::string to_string(const DataVector& v) {
    if (v.empty()) return "0";
    std::string s;
    for (auto& [l, n] : v.entries()) {
        if (!s.empty()) s += ' ';
        if (n != 1) s += std::to_string(n);
        s += to_string(l);
    }
    return s;
}

DataVector vector_of(std::string_view spaced) {
    std::vector<DataVector::Entry> es;
    for (auto& t : split_ws(spaced)) {
        if (t == "0") continue;
        std::size_t k = 0;
        while (k < t.size() && std::isdigit(static_cast<unsigned char>(t[k]))) ++k;
        int n = k ? std::stoi(t.substr(0, k)) : 1;
        es.emplace_back(parse_letter(t.substr(k)), n);
    }
    return DataVector(std::move(es));
}

Permutation::Permutation(std::map<Atom, Atom> m) {
    std::set<Atom> dom, img;
    for (auto& [a, b] : m) {
        dom.insert(a);
        img.insert(b);
    }
    if (dom != img || img.size() != m.size()) throw Error(ErrorKind::form, "permutation is not a bijection of its carrier");
    for (auto& [a, b] : m)
        if (a != b) map_.emplace(a, b);
}

Permutation Permutation::swap(Atom a, Atom b) {
    if (a == b) return {};
    return Permutation({{a, b}, {b, a}});
}

Permutation Permutation::cycle(const std::vector<Atom>& as) {
    std::map<Atom, Atom> m;
    for (std::size_t i = 0; i < as.size(); ++i) m[as[i]] = as[(i + 1) % as.size()];
    return Permutation(std::move(m));
}

Atom Permutation::operator()(Atom a) const {
    auto it = map_.find(a);
    return it == map_.end() ? a : it->second;
}

Permutation Permutation::then(const Permutation& next) const {
    std::map<Atom, Atom> m;
    std::set<Atom> carrier;
    for (auto& [a, b] : map_) carrier.insert(a);
    for (auto& [a, b] : next.map_) carrier.insert(a);
    for (Atom a : carrier) m[a] = next((*this)(a));
    return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
    std::map<Atom, Atom> m;
    for (auto& [a, b] : map_) m[b] = a;
    return Permutation(std::move(m));
}

bool Permutation::is_identity() const { return map_.empty(); }

int Permutation::order() const {
    std::set<Atom> seen;
    int result = 1;
    for (auto& [a, b] : map_) {
        if (seen.count(a)) continue;
        int len = 0;
        Atom x = a;
        do {
            seen.insert(x);
            x = (*this)(x);
            ++len;
        } while (x != a);
        result = std::lcm(result, len);
    }
    return result;
}

void Permutation::check_fixes(const std::set<Atom>& fixed) const {
    for (auto& [a, b] : map_)
        if (is_constant(a) || fixed.count(a))
            throw Error(ErrorKind::constant, "permutation moves constant " + atom_name(a));
}

DataWord Permutation::apply(const DataWord& w) const {
    check_fixes();
    DataWord out = w;
    for (auto& l : out) l.atom = (*this)(l.atom);
    return out;
}

DataVector Permutation::apply(const DataVector& v) const {
    check_fixes();
    std::vector<DataVector::Entry> es;
    for (auto& [l, n] : v.entries()) es.emplace_back(Letter{l.label, (*this)(l.atom)}, n);
    return DataVector(std::move(es));
}

std::vector<Atom> Permutation::apply(const std::vector<Atom>& as) const {
    std::vector<Atom> out;
    for (Atom a : as) out.push_back((*this)(a));
    return out;
}

std::set<Atom> Permutation::apply(const std::set<Atom>& as) const {
    std::set<Atom> out;
    for (Atom a : as) out.insert((*this)(a));
    return out;
}

Constraint Constraint::top() { return Constraint(std::make_shared<Node>(Node{Kind::truth, {}, {}, {}})); }
Constraint Constraint::bottom() { return Constraint(std::make_shared<Node>(Node{Kind::falsity, {}, {}, {}})); }
Constraint Constraint::eq(Term a, Term b) { return Constraint(std::make_shared<Node>(Node{Kind::eq, a, b, {}})); }
Constraint Constraint::ne(Term a, Term b) { return neg(eq(a, b)); }
Constraint Constraint::neg(Constraint c) { return Constraint(std::make_shared<Node>(Node{Kind::neg, {}, {}, {std::move(c)}})); }

Constraint Constraint::all(std::vector<Constraint> cs) {
    std::erase_if(cs, [](const Constraint& c) { return c.kind() == Kind::truth; });
    if (cs.empty()) return top();
    if (cs.size() == 1) return cs[0];
    return Constraint(std::make_shared<Node>(Node{Kind::conj, {}, {}, std::move(cs)}));
}

Constraint Constraint::any(std::vector<Constraint> cs) {
    if (cs.empty()) return bottom();
    if (cs.size() == 1) return cs[0];
    return Constraint(std::make_shared<Node>(Node{Kind::disj, {}, {}, std::move(cs)}));
}

Constraint Constraint::distinct(const std::vector<Term>& ts) {
    std::vector<Constraint> cs;
    for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t j = i + 1; j < ts.size(); ++j) cs.push_back(ne(ts[i], ts[j]));
    return all(std::move(cs));
}

Constraint Constraint::all_equal(const std::vector<Term>& ts) {
    std::vector<Constraint> cs;
    for (std::size_t i = 1; i < ts.size(); ++i) cs.push_back(eq(ts[0], ts[i]));
    return all(std::move(cs));
}

bool Constraint::eval(const std::vector<Atom>& assignment) const {
    return eval([&](int v) -> Atom {
        if (v >= static_cast<int>(assignment.size()) || !assignment[v].valid())
            throw Error(ErrorKind::reference, "no value for variable " + std::to_string(v));
        return assignment[v];
    });
}

bool Constraint::eval(const std::function<Atom(int)>& lookup) const {
    switch (node_->kind) {
    case Kind::truth: return true;
    case Kind::falsity: return false;
    case Kind::eq: {
        Atom x = node_->a.is_var() ? lookup(node_->a.var) : node_->a.atom;
        Atom y = node_->b.is_var() ? lookup(node_->b.var) : node_->b.atom;
        return x == y;
    }
    case Kind::neg: return !node_->kids[0].eval(lookup);
    case Kind::conj:
        for (auto& k : node_->kids)
            if (!k.eval(lookup)) return false;
        return true;
    case Kind::disj:
        for (auto& k : node_->kids)
            if (k.eval(lookup)) return true;
        return false;
    }
    return false;
}

int Constraint::max_var() const {
    auto vs = vars();
    return vs.empty() ? -1 : *vs.rbegin();
}

std::set<int> Constraint::vars() const {
    std::set<int> out;
    std::function<void(const Constraint&)> go = [&](const Constraint& c) {
        if (c.kind() == Kind::eq) {
            if (c.lhs().is_var()) out.insert(c.lhs().var);
            if (c.rhs().is_var()) out.insert(c.rhs().var);
        }
        for (auto& k : c.children()) go(k);
    };
    go(*this);
    return out;
}

std::set<Atom> Constraint::constants() const {
    std::set<Atom> out;
    std::function<void(const Constraint&)> go = [&](const Constraint& c) {
        if (c.kind() == Kind::eq) {
            if (!c.lhs().is_var()) out.insert(c.lhs().atom);
            if (!c.rhs().is_var()) out.insert(c.rhs().atom);
        }
        for (auto& k : c.children()) go(k);
    };
    go(*this);
    return out;
}

Constraint Constraint::rename(const std::function<Term(const Term&)>& f) const {
    switch (node_->kind) {
    case Kind::truth:
    case Kind::falsity: return *this;
    case Kind::eq: return eq(f(node_->a), f(node_->b));
    case Kind::neg: return neg(node_->kids[0].rename(f));
    case Kind::conj:
    case Kind::disj: {
        std::vector<Constraint> ks;
        for (auto& k : node_->kids) ks.push_back(k.rename(f));
        return node_->kind == Kind::conj ? all(std::move(ks)) : any(std::move(ks));
    }
    }
    return *this;
}

std::string Constraint::to_string(const std::function<std::string(int)>& var_name) const {
    auto term = [&](const Term& t) { return t.is_var() ? var_name(t.var) : atom_name(t.atom); };
    switch (node_->kind) {
    case Kind::truth: return "true";
    case Kind::falsity: return "false";
    case Kind::eq: return "(= " + term(node_->a) + " " + term(node_->b) + ")";
    case Kind::neg: return "(not " + node_->kids[0].to_string(var_name) + ")";
    case Kind::conj:
    case Kind::disj: {
        std::string s = node_->kind == Kind::conj ? "(and" : "(or";
        for (auto& k : node_->kids) s += " " + k.to_string(var_name);
        return s + ")";
    }
    }
    return "?";
}

Constraint operator&&(const Constraint& a, const Constraint& b) { return Constraint::all({a, b}); }
Constraint operator||(const Constraint& a, const Constraint& b) { return Constraint::any({a, b}); }
Constraint operator!(const Constraint& a) { return Constraint::neg(a); }

OrbitFormula::OrbitFormula(std::vector<int> rgs, int nvars, std::vector<Atom> consts)
    : rgs_(std::move(rgs)), consts_(std::move(consts)) {
    nvars_ = nvars < 0 ? static_cast<int>(rgs_.size()) : nvars;
    if (nvars_ + static_cast<int>(consts_.size()) != static_cast<int>(rgs_.size()))
        throw Error(ErrorKind::form, "orbit formula size mismatch");
    int next = 0;
    for (int c : rgs_) {
        if (c > next || c < 0) throw Error(ErrorKind::form, "orbit formula is not a restricted growth string");
        if (c == next) ++next;
    }
    nclasses_ = next;
}

std::optional<Atom> OrbitFormula::class_constant(int c) const {
    for (std::size_t i = 0; i < consts_.size(); ++i)
        if (rgs_[nvars_ + i] == c) return consts_[i];
    return std::nullopt;
}

std::vector<int> OrbitFormula::class_minima() const {
    std::vector<int> mins(nclasses_, -1);
    for (int i = 0; i < size(); ++i)
        if (mins[rgs_[i]] < 0) mins[rgs_[i]] = i;
    return mins;
}

std::vector<std::vector<int>> OrbitFormula::blocks() const {
    std::vector<std::vector<int>> bs(nclasses_);
    for (int i = 0; i < size(); ++i) bs[rgs_[i]].push_back(i);
    return bs;
}

bool OrbitFormula::holds(const std::vector<Atom>& vals) const {
    auto value = [&](int i) { return i < nvars_ ? vals[i] : consts_[i - nvars_]; };
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j)
            if ((rgs_[i] == rgs_[j]) != (value(i) == value(j))) return false;
    return true;
}

Constraint OrbitFormula::to_constraint() const {
    auto term = [&](int i) { return i < nvars_ ? Term::v(i) : Term::c(consts_[i - nvars_]); };
    std::vector<Constraint> cs;
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j) {
            if (i >= nvars_ && j >= nvars_) continue;
            cs.push_back(rgs_[i] == rgs_[j] ? Constraint::eq(term(i), term(j)) : Constraint::ne(term(i), term(j)));
        }
    return Constraint::all(std::move(cs));
}

OrbitFormula OrbitFormula::restrict(const std::vector<int>& items) const {
    std::map<int, int> renum;
    std::vector<int> out;
    for (int i : items) {
        int c = rgs_.at(i);
        auto it = renum.find(c);
        if (it == renum.end()) it = renum.emplace(c, static_cast<int>(renum.size())).first;
        out.push_back(it->second);
    }
    return OrbitFormula(std::move(out));
}

auto OrbitFormula::operator<=>(const OrbitFormula& o) const {
    auto mine = class_minima(), theirs = o.class_minima();
    if (auto c = mine <=> theirs; c != 0) return c;
    return rgs_ <=> o.rgs_;
}

std::string OrbitFormula::to_string(const std::function<std::string(int)>& var_name) const {
    auto item = [&](int i) { return i < nvars_ ? var_name(i) : atom_name(consts_[i - nvars_]); };
    std::string s = "{";
    auto bs = blocks();
    for (std::size_t b = 0; b < bs.size(); ++b) {
        if (b) s += " | ";
        for (std::size_t k = 0; k < bs[b].size(); ++k) {
            if (k) s += ",";
            s += item(bs[b][k]);
        }
    }
    return s + "}";
}

namespace {

void rgs_rec(std::vector<int>& cur, int n, int maxc, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == n) {
        out.push_back(cur);
        return;
    }
    for (int c = 0; c <= maxc + 1; ++c) {
        cur.push_back(c);
        rgs_rec(cur, n, std::max(maxc, c), out);
        cur.pop_back();
    }
}

std::vector<std::vector<int>> all_rgs(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    if (n == 0) return {{}};
    rgs_rec(cur, n, -1, out);
    return out;
}

}  // namespace

std::vector<OrbitFormula> enumerate_orbit_formulas(int p) {
    if (p <= 0) throw Error(ErrorKind::arity, "orbit formulas need at least one variable");
    std::vector<OrbitFormula> out;
    for (auto& r : all_rgs(p)) out.emplace_back(r);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Kleene evaluation of c when only the first `known` variables have classes.
std::optional<bool> partial_eval(const Constraint& c, const std::vector<int>& cls, int known,
                                 const std::map<Atom, int>& const_cls) {
    switch (c.kind()) {
    case Constraint::Kind::truth: return true;
    case Constraint::Kind::falsity: return false;
    case Constraint::Kind::eq: {
        if (c.lhs() == c.rhs()) return true;
        auto side = [&](const Term& t) -> std::optional<int> {
            if (!t.is_var()) return const_cls.at(t.atom);
            if (t.var < known) return cls[t.var];
            return std::nullopt;
        };
        auto a = side(c.lhs()), b = side(c.rhs());
        if (!a || !b) return std::nullopt;
        return *a == *b;
    }
    case Constraint::Kind::neg: {
        auto v = partial_eval(c.children()[0], cls, known, const_cls);
        if (!v) return std::nullopt;
        return !*v;
    }
    case Constraint::Kind::conj: {
        bool open = false;
        for (auto& k : c.children()) {
            auto v = partial_eval(k, cls, known, const_cls);
            if (v && !*v) return false;
            open |= !v;
        }
        if (open) return std::nullopt;
        return true;
    }
    case Constraint::Kind::disj: {
        bool open = false;
        for (auto& k : c.children()) {
            auto v = partial_eval(k, cls, known, const_cls);
            if (v && *v) return true;
            open |= !v;
        }
        if (open) return std::nullopt;
        return false;
    }
    }
    return std::nullopt;
}

}  // namespace

std::vector<OrbitFormula> decompose_constraint(const Constraint& c, int nvars, const std::vector<Atom>& constants) {
    for (int v : c.vars())
        if (v >= nvars) throw Error(ErrorKind::reference, "constraint mentions undeclared variable " + std::to_string(v));
    std::set<Atom> declared(constants.begin(), constants.end());
    for (Atom a : c.constants())
        if (!declared.count(a)) throw Error(ErrorKind::reference, "constraint mentions undeclared constant " + atom_name(a));
    // Constants take classes 0..K-1; variables are then placed one by one and
    // branches are cut as soon as the partial assignment falsifies c.
    int k = static_cast<int>(constants.size());
    std::map<Atom, int> const_cls;
    for (int i = 0; i < k; ++i) const_cls[constants[i]] = i;
    std::vector<int> cls(nvars);
    std::vector<OrbitFormula> out;
    std::function<void(int, int)> rec = [&](int i, int used) {
        auto v = partial_eval(c, cls, i, const_cls);
        if (v && !*v) return;
        if (i == nvars) {
            std::vector<int> items(cls);
            for (int j = 0; j < k; ++j) items.push_back(j);
            std::map<int, int> ren;
            for (auto& x : items) {
                auto it = ren.emplace(x, static_cast<int>(ren.size())).first;
                x = it->second;
            }
            out.emplace_back(items, nvars, constants);
            return;
        }
        for (int j = 0; j <= used; ++j) {
            cls[i] = j;
            rec(i + 1, j == used ? used + 1 : used);
        }
    };
    rec(0, k);
    std::sort(out.begin(), out.end());
    return out;
}

bool evaluate_constraint(const Constraint& c, const std::map<int, Atom>& assignment) {
    return c.eval([&](int v) {
        auto it = assignment.find(v);
        if (it == assignment.end()) throw Error(ErrorKind::reference, "no value for variable " + std::to_string(v));
        return it->second;
    });
}

void for_each_completion(const OrbitFormula& f, const std::vector<std::optional<Atom>>& known,
                         const std::vector<Atom>& candidates,
                         const std::function<void(const std::vector<Atom>&)>& emit) {
    int n = f.nvars();
    std::vector<std::optional<Atom>> cls(f.classes());
    for (int c = 0; c < f.classes(); ++c) cls[c] = f.class_constant(c);
    for (int i = 0; i < n; ++i) {
        if (!known[i]) continue;
        auto& slot = cls[f.cls(i)];
        if (slot && *slot != *known[i]) return;
        slot = known[i];
    }
    std::set<Atom> used;
    for (auto& v : cls)
        if (v && !used.insert(*v).second) return;
    std::vector<int> open;
    for (int c = 0; c < f.classes(); ++c)
        if (!cls[c]) open.push_back(c);
    std::vector<Atom> vals(n);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == open.size()) {
            for (int v = 0; v < n; ++v) vals[v] = *cls[f.cls(v)];
            emit(vals);
            return;
        }
        for (Atom a : candidates) {
            if (used.count(a)) continue;
            used.insert(a);
            cls[open[i]] = a;
            rec(i + 1);
            used.erase(a);
        }
        cls[open[i]].reset();
    };
    rec(0);
}

Universe make_universe(std::set<Atom> s) { return Universe(s.begin(), s.end()); }

Universe universe_of(std::initializer_list<std::string_view> names) {
    std::set<Atom> s;
    for (auto n : names) s.insert(atom(n));
    return make_universe(std::move(s));
}

Universe named_universe(int n) {
    std::set<Atom> s;
    for (int i = 0; i < n; ++i) {
        std::string name;
        int k = i;
        do {
            name.insert(name.begin(), static_cast<char>('a' + k % 26));
            k = k / 26 - 1;
        } while (k >= 0);
        s.insert(atom(name));
    }
    return make_universe(std::move(s));
}

}  // namespace rlang

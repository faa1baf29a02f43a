#include "rlang/theta.hpp"

#include <algorithm>
#include <cctype>

namespace rlang {

namespace {

bool subset(const std::set<Atom>& small, const std::vector<Atom>& big) {
    return std::all_of(small.begin(), small.end(), [&](Atom x) { return std::binary_search(big.begin(), big.end(), x); });
}

bool same(const std::set<Atom>& X, const std::vector<Atom>& B) {
    return X.size() == B.size() && subset(X, B);
}

std::string atom_set_string(const std::set<Atom>& s) {
    std::string out = "{";
    bool first = true;
    for (Atom a : s) {
        if (!first) out += ",";
        out += atom_name(a);
        first = false;
    }
    return out + "}";
}

}  // namespace

ThetaElem::ThetaElem(Atom first, std::set<Atom> second) : a(first), B(second.begin(), second.end()) {
    if (second.count(first)) throw Error(ErrorKind::form, "first component " + atom_name(first) + " occurs in its set");
}

bool ThetaElem::contains(Atom b) const { return std::binary_search(B.begin(), B.end(), b); }

ThetaSet::ThetaSet(int arity, std::set<ThetaElem> e) : p(arity) {
    for (auto& x : e) insert(x);
}

void ThetaSet::insert(const ThetaElem& e) {
    if (static_cast<int>(e.B.size()) != p)
        throw Error(ErrorKind::arity, to_string(e) + " does not have arity " + std::to_string(p));
    elems.insert(e);
}

std::set<Atom> ThetaSet::atoms() const {
    std::set<Atom> out;
    for (auto& e : elems) {
        out.insert(e.a);
        out.insert(e.B.begin(), e.B.end());
    }
    return out;
}

std::set<Atom> ThetaSet::firsts() const {
    std::set<Atom> out;
    for (auto& e : elems) out.insert(e.a);
    return out;
}

std::string to_string(const ThetaElem& e) {
    return "(" + atom_name(e.a) + "," + atom_set_string({e.B.begin(), e.B.end()}) + ")";
}

std::string to_string(const ThetaSet& s) {
    if (s.empty()) return "{}";
    std::string out;
    for (auto& e : s.elems) {
        if (!out.empty()) out += "; ";
        out += to_string(e);
    }
    return out;
}

ThetaSet parse_theta(std::string_view text, int p) {
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    auto fail = [&](const std::string& what) -> Error {
        return Error(ErrorKind::parse, what + " at offset " + std::to_string(i) + " in \"" + std::string(text) + "\"");
    };
    auto expect = [&](char c) {
        skip();
        if (i >= text.size() || text[i] != c) throw fail(std::string("expected '") + c + "'");
        ++i;
    };
    auto name = [&] {
        skip();
        std::size_t start = i;
        while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' || text[i] == '$')) ++i;
        if (start == i) throw fail("expected an atom");
        auto n = text.substr(start, i - start);
        return n[0] == '$' ? constant(n.substr(1)) : atom(n);
    };
    std::vector<ThetaElem> elems;
    skip();
    if (text.substr(i) == "{}") i = text.size();
    while (true) {
        skip();
        if (i >= text.size()) break;
        expect('(');
        Atom a = name();
        expect(',');
        expect('{');
        std::set<Atom> B;
        skip();
        if (i < text.size() && text[i] != '}') {
            B.insert(name());
            skip();
            while (i < text.size() && text[i] == ',') {
                ++i;
                B.insert(name());
                skip();
            }
        }
        expect('}');
        expect(')');
        elems.emplace_back(a, B);
        skip();
        if (i < text.size() && text[i] == ';') ++i;
    }
    if (p < 0) {
        if (elems.empty()) throw Error(ErrorKind::parse, "arity of an empty set literal is unknown");
        p = static_cast<int>(elems.front().B.size());
    }
    ThetaSet s(p);
    for (auto& e : elems) s.insert(e);
    return s;
}

ThetaSet permute(const ThetaSet& s, const Permutation& pi) {
    ThetaSet out(s.p);
    for (auto& e : s.elems) out.insert(ThetaElem(pi(e.a), pi.apply(std::set<Atom>(e.B.begin(), e.B.end()))));
    return out;
}

bool restrains(const ThetaSet& s, Atom z, const std::vector<Atom>& W) {
    if (std::find(W.begin(), W.end(), z) != W.end()) return false;
    return std::all_of(s.elems.begin(), s.elems.end(), [&](const ThetaElem& e) {
        return std::find(W.begin(), W.end(), e.a) != W.end() || e.contains(z);
    });
}

std::optional<Restraint> find_restraint(const ThetaSet& s) {
    auto used = s.atoms();
    std::vector<Atom> zs(used.begin(), used.end());
    zs.push_back(fresh_avoiding(used, 1).front());
    for (Atom z : zs) {
        // Every element missing z in its set must have its first component in W.
        std::set<Atom> forced;
        for (auto& e : s.elems)
            if (!e.contains(z)) forced.insert(e.a);
        if (forced.count(z) || static_cast<int>(forced.size()) > s.p) continue;
        auto avoid = used;
        avoid.insert(z);
        std::vector<Atom> W(forced.begin(), forced.end());
        for (Atom f : fresh_avoiding(avoid, s.p - static_cast<int>(forced.size()))) W.push_back(f);
        std::sort(W.begin(), W.end());
        return Restraint{z, W};
    }
    return std::nullopt;
}

const char* control_type_name(ControlType t) {
    switch (t) {
        case ControlType::null: return "NULL";
        case ControlType::LC: return "LC";
        case ControlType::RC: return "RC";
        case ControlType::FC: return "FC";
        case ControlType::URC: return "URC";
    }
    return "?";
}

std::string to_string(const Control& c) {
    return std::string(control_type_name(c.type)) + "(X=" + atom_set_string(c.X) + ",Y=" + atom_set_string(c.Y) + ")";
}

bool is_control(const ThetaSet& s, const std::set<Atom>& X, const std::set<Atom>& Y) {
    return std::all_of(s.elems.begin(), s.elems.end(), [&](const ThetaElem& e) { return Y.count(e.a) || subset(X, e.B); });
}

bool weak_good_control(const ThetaSet& s, const Control& c) {
    auto all = [&](auto pred) { return std::all_of(s.elems.begin(), s.elems.end(), pred); };
    switch (c.type) {
        case ControlType::null: return s.empty();
        case ControlType::LC: return all([&](const ThetaElem& e) { return c.Y.count(e.a) > 0; });
        case ControlType::RC: return all([&](const ThetaElem& e) { return same(c.X, e.B); });
        case ControlType::FC: return all([&](const ThetaElem& e) { return c.Y.count(e.a) || same(c.X, e.B); });
        case ControlType::URC: return is_control(s, c.X, c.Y);
    }
    return false;
}

bool is_good_control(const ThetaSet& s, const Control& c) {
    if (c.type == ControlType::null) return s.empty();
    if (s.empty() || static_cast<int>(c.X.size()) > s.p) return false;
    if (!weak_good_control(s, c)) return false;
    auto firsts = s.firsts();
    bool y_witnessed = std::all_of(c.Y.begin(), c.Y.end(), [&](Atom y) { return firsts.count(y) > 0; });
    bool x_witnessed = std::any_of(s.elems.begin(), s.elems.end(), [&](const ThetaElem& e) { return same(c.X, e.B); });
    bool maximal = static_cast<int>(c.X.size()) == s.p;
    switch (c.type) {
        case ControlType::LC: return y_witnessed;
        case ControlType::RC: return maximal && x_witnessed;
        case ControlType::FC: return maximal && y_witnessed && x_witnessed;
        case ControlType::URC: return !maximal && y_witnessed && !find_restraint(reduce(s, c.X, c.Y));
        default: return false;
    }
}

bool insertion_condition(const ThetaElem& e, const Control& c) {
    switch (c.type) {
        case ControlType::LC: return c.Y.count(e.a) > 0;
        case ControlType::RC: return same(c.X, e.B);
        case ControlType::FC: return c.Y.count(e.a) || same(c.X, e.B);
        case ControlType::URC: return c.Y.count(e.a) || subset(c.X, e.B);
        default: return false;
    }
}

ThetaSet reduce(const ThetaSet& s, const std::set<Atom>& X, const std::set<Atom>& Y) {
    ThetaSet out(s.p - static_cast<int>(X.size()));
    for (auto& e : s.elems) {
        if (Y.count(e.a)) continue;
        if (!subset(X, e.B))
            throw Error(ErrorKind::control, "(" + atom_set_string(X) + "," + atom_set_string(Y) + ") does not control " + to_string(e));
        std::set<Atom> rest;
        for (Atom b : e.B)
            if (!X.count(b)) rest.insert(b);
        out.insert(ThetaElem(e.a, rest));
    }
    return out;
}

namespace {

struct RawControl {
    std::set<Atom> X, Y;
    bool left = false;  // recursion bottomed out with every first component in Y
};

RawControl control_recursion(const ThetaSet& s) {
    auto r = find_restraint(s);
    if (!r) return {};
    std::set<Atom> W(r->W.begin(), r->W.end());
    auto firsts = s.firsts();
    if (std::all_of(firsts.begin(), firsts.end(), [&](Atom a) { return W.count(a) > 0; })) return {{}, firsts, true};
    auto inner = control_recursion(reduce(s, {r->z}, W));
    inner.X.insert(r->z);
    inner.Y.insert(W.begin(), W.end());
    return inner;
}

}  // namespace

Control good_control(const ThetaSet& s) {
    if (s.empty()) throw Error(ErrorKind::emptiness, "good control of the empty set");
    auto raw = control_recursion(s);
    auto firsts = s.firsts();
    Control c;
    if (raw.left) {
        c = {ControlType::LC, {}, firsts};
    } else {
        c.X = raw.X;
        for (Atom y : raw.Y)
            if (firsts.count(y)) c.Y.insert(y);
        if (static_cast<int>(c.X.size()) < s.p) {
            c.type = ControlType::URC;
        } else if (std::all_of(s.elems.begin(), s.elems.end(), [&](const ThetaElem& e) { return same(c.X, e.B); })) {
            c = {ControlType::RC, c.X, {}};
        } else if (std::all_of(s.elems.begin(), s.elems.end(), [&](const ThetaElem& e) { return c.Y.count(e.a) > 0; })) {
            c = {ControlType::LC, {}, c.Y};
        } else {
            c.type = ControlType::FC;
        }
    }
    if (!is_good_control(s, c)) throw Error(ErrorKind::control, "computed control " + to_string(c) + " is not good for " + to_string(s));
    return c;
}

Insertion insertion_place(const ThetaSet& s, const Control& c, const ThetaElem& cd) {
    if (!is_good_control(s, c)) throw Error(ErrorKind::control, to_string(c) + " is not a good control of " + to_string(s));
    if (static_cast<int>(cd.B.size()) != s.p || cd.contains(cd.a))
        throw Error(ErrorKind::precondition, to_string(cd) + " is not an element of arity " + std::to_string(s.p));
    if (!insertion_condition(cd, c))
        throw Error(ErrorKind::precondition, to_string(cd) + " violates the insertion condition of " + to_string(c));
    std::set<Atom> D(cd.B.begin(), cd.B.end());
    std::optional<ThetaElem> chosen;
    for (auto& e : s.elems)
        if (e.a == cd.a) {
            chosen = e;
            break;
        }
    if (!chosen && same(c.X, cd.B) && c.type != ControlType::URC) {
        for (auto& e : s.elems)
            if (same(c.X, e.B)) {
                chosen = e;
                break;
            }
    }
    if (!chosen && c.type == ControlType::URC) {
        std::set<Atom> rest;
        for (Atom d : D)
            if (!c.X.count(d)) rest.insert(d);
        for (auto& e : reduce(s, c.X, c.Y).elems)
            if (!rest.count(e.a) && !e.contains(cd.a)) {
                std::set<Atom> full(e.B.begin(), e.B.end());
                full.insert(c.X.begin(), c.X.end());
                chosen = ThetaElem(e.a, full);
                break;
            }
    }
    if (!chosen) throw Error(ErrorKind::insertion, "no insertion place for " + to_string(cd) + " in " + to_string(s));
    Insertion out{*chosen, s, s};
    out.replaced.elems.erase(*chosen);
    out.replaced.insert(ThetaElem(chosen->a, D));
    out.replaced.insert(ThetaElem(cd.a, {chosen->B.begin(), chosen->B.end()}));
    out.extended = out.replaced;
    out.extended.insert(*chosen);
    if (!is_good_control(out.replaced, c) || !is_good_control(out.extended, c))
        throw Error(ErrorKind::insertion, "insertion of " + to_string(cd) + " lost " + to_string(c));
    return out;
}

namespace {

// Witness selection for an unrestrained set: p+1 distinct first components,
// then for every atom b of their sets p+1 more among the elements avoiding b.
// An element with first component b already defeats every (b, W), so it
// alone suffices for b.
ThetaSet compact_unrestrained(const ThetaSet& s) {
    int p = s.p;
    ThetaSet out(p);
    auto restrained = [&] { return Error(ErrorKind::control, to_string(s) + " is restrained"); };
    std::set<Atom> seen;
    for (auto& e : s.elems)
        if (static_cast<int>(seen.size()) <= p && seen.insert(e.a).second) out.insert(e);
    if (static_cast<int>(seen.size()) <= p) throw restrained();
    std::set<Atom> P2;
    for (auto& e : out.elems) P2.insert(e.B.begin(), e.B.end());
    for (Atom b : P2) {
        auto own = std::find_if(s.elems.begin(), s.elems.end(), [&](const ThetaElem& e) { return e.a == b; });
        if (own != s.elems.end()) {
            out.insert(*own);
            continue;
        }
        std::set<Atom> firsts;
        for (auto& e : s.elems)
            if (static_cast<int>(firsts.size()) <= p && !e.contains(b) && firsts.insert(e.a).second) out.insert(e);
        if (static_cast<int>(firsts.size()) <= p) throw restrained();
    }
    return out;
}

}  // namespace

std::size_t compact_bound(int p, const Control& c) {
    std::size_t q = static_cast<std::size_t>(p);
    if (c.type == ControlType::URC && c.X.empty() && c.Y.empty()) return q * q * q + 2 * q * q + 2 * q + 1;
    return 6 * q * q * q + c.Y.size();
}

ThetaSet compact_subset(const ThetaSet& s, const Control& c) {
    if (!is_good_control(s, c)) throw Error(ErrorKind::control, to_string(c) + " is not a good control of " + to_string(s));
    ThetaSet out(s.p);
    for (Atom y : c.Y)
        for (auto& e : s.elems)
            if (e.a == y) {
                out.insert(e);
                break;
            }
    if (c.type == ControlType::RC || c.type == ControlType::FC) {
        for (auto& e : s.elems)
            if (same(c.X, e.B)) {
                out.insert(e);
                break;
            }
    }
    if (c.type == ControlType::URC) {
        for (auto& e : compact_unrestrained(reduce(s, c.X, c.Y)).elems) {
            std::set<Atom> full(e.B.begin(), e.B.end());
            full.insert(c.X.begin(), c.X.end());
            out.insert(ThetaElem(e.a, full));
        }
    }
    if (!is_good_control(out, c)) throw Error(ErrorKind::control, "compact subset lost " + to_string(c));
    return out;
}

std::optional<std::pair<int, int>> find_matching(const ThetaSeq& seq, const std::optional<Control>& c) {
    int n = static_cast<int>(seq.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            auto& x = seq[i];
            auto& y = seq[j];
            if (x.contains(y.a) || y.contains(x.a)) continue;
            if (c) {
                ThetaSet swapped(static_cast<int>(x.B.size()));
                swapped.elems.insert(ThetaElem(x.a, {y.B.begin(), y.B.end()}));
                swapped.elems.insert(ThetaElem(y.a, {x.B.begin(), x.B.end()}));
                if (!weak_good_control(swapped, *c)) continue;
            }
            return std::pair{i, j};
        }
    return std::nullopt;
}

}  // namespace rlang

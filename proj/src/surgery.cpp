#include "rlang/surgery.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <set>

namespace rlang {

// ---------------------------------------------------------------------------
// Anti-paths

PairWord parse_pair_word(std::string_view text) {
    PairWord w;
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    auto fail = [&](const std::string& what) {
        return Error(ErrorKind::parse, what + " at offset " + std::to_string(i) + " in \"" + std::string(text) + "\"");
    };
    auto name = [&] {
        skip();
        std::size_t start = i;
        while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' || text[i] == '$')) ++i;
        if (start == i) throw fail("expected an atom");
        auto n = text.substr(start, i - start);
        return n[0] == '$' ? constant(n.substr(1)) : atom(n);
    };
    auto expect = [&](char c) {
        skip();
        if (i >= text.size() || text[i] != c) throw fail(std::string("expected '") + c + "'");
        ++i;
    };
    for (skip(); i < text.size(); skip()) {
        expect('(');
        Atom b = name();
        expect(',');
        Atom a = name();
        expect(')');
        w.emplace_back(b, a);
    }
    return w;
}

std::string to_string(const PairWord& w) {
    std::string out;
    for (auto& [b, a] : w) out += "(" + atom_name(b) + "," + atom_name(a) + ")";
    return out;
}

std::string to_string(const PairVector& v) {
    if (v.empty()) return "0";
    std::string out;
    for (auto& [l, n] : v) {
        if (!out.empty()) out += " ";
        if (n != 1) out += std::to_string(n);
        out += "(" + atom_name(l.first) + "," + atom_name(l.second) + ")";
    }
    return out;
}

PairVector pair_parikh(const PairWord& w) {
    PairVector v;
    for (auto& l : w) ++v[l];
    return v;
}

bool is_antipath(const PairWord& w) {
    if (w.empty()) return false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (w[i].second == w[i + 1].first) return false;
    return true;
}

bool is_anticycle(const PairWord& w) { return is_antipath(w) && w.back().second != w.front().first; }

ThetaSet antipath_set(const PairWord& w) {
    ThetaSet s(1);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) s.insert(ThetaElem(w[i].second, {w[i + 1].first}));
    return s;
}

SurgeryConstants unrestrained_constants() { return {41, 4}; }
SurgeryConstants restrained_constants() { return {24, 8}; }

SurgeryConstants chi_constants(int p, int states) {
    long long P = p, S2 = static_cast<long long>(states) * states;
    long long m1 = 7 * P * P * P * S2 + 2;
    long long m3 = S2 * (2 * P + 1) * (P * P + 1) + 1;
    long long m2 = 3 * m3 + 1;
    // least N0 with (N0 - 3 m1) / (m1 + 1) > m2
    long long N0 = 3 * m1 + m2 * (m1 + 1) + 1;
    return {N0, m2};
}

std::string to_string(const ApClass& c) {
    if (c.unrestrained) return "unrestrained";
    return "restrained type " + std::to_string(c.type) + " by (" + atom_name(c.z) + "," + atom_name(c.w) + ")";
}

ApClass antipath_classify(const PairWord& w) {
    if (!is_antipath(w)) throw Error(ErrorKind::form, to_string(w) + " is not an anti-path");
    auto A = antipath_set(w);
    auto r = find_restraint(A);
    if (!r) return {true, 0, {}, {}};
    auto used = A.atoms();
    auto firsts = A.firsts();
    std::set<Atom> seconds;
    for (auto& e : A.elems) seconds.insert(e.B.front());
    if (firsts.size() <= 1) {
        Atom wa = firsts.empty() ? r->W.front() : *firsts.begin();
        used.insert(wa);
        Atom z = r->z != wa ? r->z : fresh_avoiding(used, 1).front();
        return {false, 1, z, wa};
    }
    if (seconds.size() == 1) {
        Atom z = *seconds.begin();
        used.insert(z);
        Atom wa = r->W.front() != z ? r->W.front() : fresh_avoiding(used, 1).front();
        return {false, 2, z, wa};
    }
    return {false, 3, r->z, r->W.front()};
}

bool in_restrained_class(const PairWord& w, Atom z, Atom wa) {
    if (!is_antipath(w) || z == wa) return false;
    bool left = false, right = false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        Atom a = w[i].second, b = w[i + 1].first;
        if (a != wa && b != z) return false;
        left = left || a == wa;
        right = right || b == z;
    }
    return left && right;
}

bool cycle_compatible(const PairWord& rho, Atom z, Atom w) {
    if (!is_anticycle(rho)) return false;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        Atom a = rho[i].second, b = rho[(i + 1) % rho.size()].first;
        if (a != w && b != z) return false;
    }
    return true;
}

PairWord antipath_insert(const PairWord& sigma, const PairWord& rho) {
    if (!is_anticycle(rho)) throw Error(ErrorKind::form, to_string(rho) + " is not an anti-cycle");
    auto cls = antipath_classify(sigma);
    Atom d0 = rho.front().first, last = rho.back().second;
    std::size_t at = 0;
    if (cls.unrestrained) {
        auto ins = insertion_place(antipath_set(sigma), {ControlType::URC, {}, {}}, ThetaElem(last, {d0}));
        std::size_t i = 0;
        while (!(sigma[i].second == ins.chosen.a && sigma[i + 1].first == ins.chosen.B.front())) ++i;
        at = i + 1;
    } else if (cls.type == 3 && cycle_compatible(rho, cls.z, cls.w)) {
        if (last == cls.w) {
            at = std::find_if(sigma.begin(), sigma.end(), [&](const AtomPair& l) { return l.second == cls.w; }) - sigma.begin() + 1;
        } else {
            at = std::find_if(sigma.begin(), sigma.end(), [&](const AtomPair& l) { return l.first == cls.z; }) - sigma.begin();
        }
    } else {
        throw Error(ErrorKind::insertion, to_string(rho) + " cannot be inserted into " + to_string(sigma) + " (" + to_string(cls) + ")");
    }
    PairWord out(sigma.begin(), sigma.begin() + static_cast<long>(at));
    out.insert(out.end(), rho.begin(), rho.end());
    out.insert(out.end(), sigma.begin() + static_cast<long>(at), sigma.end());
    bool kept = cls.unrestrained ? antipath_classify(out).unrestrained : in_restrained_class(out, cls.z, cls.w);
    if (!is_antipath(out) || !kept) throw Error(ErrorKind::insertion, "insertion into " + to_string(sigma) + " lost its class");
    return out;
}

namespace {

// Positions of maximal runs of unmarked letters, in order.
std::vector<std::pair<std::size_t, std::size_t>> unmarked_runs(const std::vector<bool>& marked) {
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    std::size_t i = 0;
    while (i < marked.size()) {
        if (marked[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < marked.size() && !marked[j]) ++j;
        runs.emplace_back(i, j - i);
        i = j;
    }
    return runs;
}

ApShortening cut(const PairWord& sigma, std::size_t from, std::size_t to) {
    ApShortening out;
    out.removed.assign(sigma.begin() + static_cast<long>(from), sigma.begin() + static_cast<long>(to));
    out.word.assign(sigma.begin(), sigma.begin() + static_cast<long>(from));
    out.word.insert(out.word.end(), sigma.begin() + static_cast<long>(to), sigma.end());
    return out;
}

}  // namespace

ApShortening antipath_shorten(const PairWord& sigma) {
    auto cls = antipath_classify(sigma);
    if (!cls.unrestrained && cls.type != 3)
        throw Error(ErrorKind::precondition, to_string(sigma) + " is " + to_string(cls) + "; only unrestrained and type 3 shorten");
    auto k = cls.unrestrained ? unrestrained_constants() : restrained_constants();
    if (static_cast<long long>(sigma.size()) < k.N0)
        throw Error(ErrorKind::length, "anti-path of length " + std::to_string(sigma.size()) + " is below " + std::to_string(k.N0));
    std::vector<bool> marked(sigma.size(), false);
    std::size_t window = cls.unrestrained ? 5 : 8;
    if (cls.unrestrained) {
        for (auto& e : compact_subset(antipath_set(sigma), {ControlType::URC, {}, {}}).elems) {
            std::size_t i = 0;
            while (!(sigma[i].second == e.a && sigma[i + 1].first == e.B.front())) ++i;
            marked[i] = marked[i + 1] = true;
        }
    } else {
        for (std::size_t i = 0; i + 1 < sigma.size(); ++i)
            if (sigma[i].second == cls.w) {
                marked[i] = true;
                break;
            }
        for (std::size_t i = 1; i < sigma.size(); ++i)
            if (sigma[i].first == cls.z) {
                marked[i] = true;
                break;
            }
    }
    for (auto [start, len] : unmarked_runs(marked)) {
        if (len < window) continue;
        // window letters <f_0,e_1> ... <f_{n},e_{n+1}>; element k pairs e_k with f_k
        std::vector<std::size_t> ks;
        for (std::size_t k2 = 1; k2 < window; ++k2) ks.push_back(k2);
        if (!cls.unrestrained) {
            std::vector<std::size_t> left, right;
            for (auto k2 : ks) {
                if (sigma[start + k2 - 1].second == cls.w) left.push_back(k2);
                if (sigma[start + k2].first == cls.z) right.push_back(k2);
            }
            ks = left.size() >= 4 ? left : right;
            ks.resize(4);
        }
        ThetaSeq seq;
        for (auto k2 : ks) seq.push_back(ThetaElem(sigma[start + k2 - 1].second, {sigma[start + k2].first}));
        auto m = find_matching(seq);
        if (!m) break;
        auto out = cut(sigma, start + ks[m->first], start + ks[m->second]);
        bool kept = cls.unrestrained ? antipath_classify(out.word).unrestrained : in_restrained_class(out.word, cls.z, cls.w);
        bool cycle = cls.unrestrained ? is_anticycle(out.removed) : cycle_compatible(out.removed, cls.z, cls.w);
        if (!kept || !cycle || static_cast<long long>(out.removed.size()) > k.N1)
            throw Error(ErrorKind::length, "shortening of " + to_string(sigma) + " failed its checks");
        return out;
    }
    throw Error(ErrorKind::length, "no unmarked window in " + to_string(sigma));
}

// ---------------------------------------------------------------------------
// Altering sets

GammaLetter atom_step(int s, Atom a, int t) { return {false, s, t, {a}}; }

GammaLetter set_step(int t, std::vector<Atom> B, int s) {
    std::sort(B.begin(), B.end());
    return {true, t, s, B};
}

std::string to_string(const GammaLetter& l) {
    std::string body;
    if (l.set) {
        body = "{";
        for (std::size_t i = 0; i < l.atoms.size(); ++i) body += (i ? "," : "") + atom_name(l.atoms[i]);
        body += "}";
    } else {
        body = atom_name(l.atoms.front());
    }
    return "<" + std::to_string(l.from) + "," + body + "," + std::to_string(l.to) + ">";
}

std::string to_string(const AlteringWord& w) {
    std::string out;
    for (auto& l : w) out += to_string(l);
    return out;
}

std::string to_string(const ControlProfile& chi) {
    std::string out;
    for (auto& [ts, c] : chi) {
        if (c.type == ControlType::null) continue;
        if (!out.empty()) out += " ";
        out += "(" + std::to_string(ts.first) + "," + std::to_string(ts.second) + ")=" + to_string(c);
    }
    return out.empty() ? "NULL" : out;
}

GammaVector gamma_parikh(const AlteringWord& w) {
    GammaVector v;
    for (auto& l : w) ++v[l];
    return v;
}

namespace {

bool has(const std::vector<Atom>& B, Atom a) { return std::find(B.begin(), B.end(), a) != B.end(); }

// Letters alternate atom/set with chained states; `open` allows a leading set letter.
bool well_formed(const AlteringWord& w, int k, bool open) {
    if (w.empty()) return false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        bool want_set = open ? i % 2 == 0 : i % 2 == 1;
        auto& l = w[i];
        if (l.set != want_set) return false;
        if (l.set) {
            if (static_cast<int>(l.atoms.size()) != k || !std::is_sorted(l.atoms.begin(), l.atoms.end()) ||
                std::adjacent_find(l.atoms.begin(), l.atoms.end()) != l.atoms.end())
                return false;
        } else if (l.atoms.size() != 1) {
            return false;
        }
        if (i > 0 && w[i - 1].to != l.from) return false;
    }
    if (w.back().set) return false;
    for (std::size_t i = open ? 1 : 0; i + 2 < w.size(); i += 2) {
        Atom a = w[i].atoms.front(), c = w[i + 2].atoms.front();
        if (a == c || has(w[i + 1].atoms, a) || has(w[i + 1].atoms, c)) return false;
    }
    return true;
}

Control null_control() { return {}; }

const Control& lookup(const ControlProfile& chi, int t, int s) {
    static const Control none = null_control();
    auto it = chi.find({t, s});
    return it == chi.end() ? none : it->second;
}

std::set<std::pair<int, int>> state_pairs(const AlteringWord& w, std::size_t from) {
    std::set<std::pair<int, int>> out;
    for (std::size_t i = from; i < w.size(); ++i)
        if (w[i].set) out.insert({w[i].from, w[i].to});
    return out;
}

ThetaElem element_at(const AlteringWord& w, std::size_t set_index) {
    std::set<Atom> B(w[set_index].atoms.begin(), w[set_index].atoms.end());
    B.insert(w[set_index + 1].atoms.front());
    return ThetaElem(w[set_index - 1].atoms.front(), B);
}

}  // namespace

bool is_altering_word(const AlteringWord& w, int k) { return well_formed(w, k, false); }

ThetaSet altering_pairs(const AlteringWord& w, int t, int s, int k) {
    ThetaSet out(k + 1);
    for (std::size_t i = 1; i + 1 < w.size(); i += 2)
        if (w[i].set && w[i].from == t && w[i].to == s) out.insert(element_at(w, i));
    return out;
}

ControlProfile altering_profile(const AlteringWord& w, int states, int k) {
    if (!is_altering_word(w, k)) throw Error(ErrorKind::form, to_string(w) + " is not an altering-set word");
    ControlProfile chi;
    for (int t = 0; t < states; ++t)
        for (int s = 0; s < states; ++s) {
            auto A = altering_pairs(w, t, s, k);
            chi[{t, s}] = A.empty() ? null_control() : good_control(A);
        }
    return chi;
}

bool profile_consistent(const AlteringWord& w, const ControlProfile& chi, int k) {
    if (!is_altering_word(w, k)) return false;
    for (auto& [ts, c] : chi)
        if (!is_good_control(altering_pairs(w, ts.first, ts.second, k), c)) return false;
    for (auto& ts : state_pairs(w, 0))
        if (!chi.count(ts)) return false;
    return true;
}

bool remainder_check(const AlteringWord& rho, const ControlProfile& chi, int k) {
    if (rho.size() < 2 || !well_formed(rho, k, true)) return false;
    AlteringWord tau(rho.begin() + 1, rho.end());
    auto& E = rho.front();
    Atom f = tau.front().atoms.front(), d = tau.back().atoms.front();
    if (has(E.atoms, f) || tau.back().to != E.from) return false;
    if (d == f || has(E.atoms, d)) return false;
    std::set<Atom> DE(E.atoms.begin(), E.atoms.end());
    DE.insert(f);
    auto& c = lookup(chi, E.from, E.to);
    if (c.type == ControlType::null || !insertion_condition(ThetaElem(d, DE), c)) return false;
    for (auto& ts : state_pairs(tau, 0))
        if (!weak_good_control(altering_pairs(tau, ts.first, ts.second, k), lookup(chi, ts.first, ts.second))) return false;
    return true;
}

AlteringWord altering_insert(const AlteringWord& sigma, const AlteringWord& rho, const ControlProfile& chi, int k) {
    if (!profile_consistent(sigma, chi, k)) throw Error(ErrorKind::profile, to_string(sigma) + " is not consistent with " + to_string(chi));
    if (!remainder_check(rho, chi, k)) throw Error(ErrorKind::profile, to_string(rho) + " is not a remainder for " + to_string(chi));
    int t = rho.front().from, s = rho.front().to;
    std::set<Atom> DE(rho.front().atoms.begin(), rho.front().atoms.end());
    DE.insert(rho[1].atoms.front());
    auto ins = insertion_place(altering_pairs(sigma, t, s, k), lookup(chi, t, s), ThetaElem(rho.back().atoms.front(), DE));
    std::size_t at = 1;
    while (!(sigma[at].from == t && sigma[at].to == s && element_at(sigma, at) == ins.chosen)) at += 2;
    AlteringWord out(sigma.begin(), sigma.begin() + static_cast<long>(at));
    out.insert(out.end(), rho.begin(), rho.end());
    out.insert(out.end(), sigma.begin() + static_cast<long>(at), sigma.end());
    if (!profile_consistent(out, chi, k)) throw Error(ErrorKind::profile, "insertion of " + to_string(rho) + " broke the profile");
    return out;
}

AlteringShortening altering_shorten(const AlteringWord& sigma, const ControlProfile& chi, int k) {
    if (!profile_consistent(sigma, chi, k)) throw Error(ErrorKind::profile, to_string(sigma) + " is not consistent with the profile");
    int p = k + 1;
    int states = 0;
    for (auto& [ts, c] : chi) states = std::max({states, ts.first + 1, ts.second + 1});
    auto K = chi_constants(p, states);
    if (static_cast<long long>(sigma.size()) <= K.N0)
        throw Error(ErrorKind::length, "altering word of length " + std::to_string(sigma.size()) + " is not above " + std::to_string(K.N0));
    std::vector<bool> marked(sigma.size(), false);
    marked.front() = marked.back() = true;
    for (auto& [ts, c] : chi) {
        if (c.type == ControlType::null) continue;
        for (auto& e : compact_subset(altering_pairs(sigma, ts.first, ts.second, k), c).elems) {
            std::size_t at = 1;
            while (!(sigma[at].from == ts.first && sigma[at].to == ts.second && element_at(sigma, at) == e)) at += 2;
            marked[at - 1] = marked[at] = marked[at + 1] = true;
        }
    }
    for (auto [start, len] : unmarked_runs(marked)) {
        if (static_cast<long long>(len) < K.N1) continue;
        std::size_t end = start + static_cast<std::size_t>(K.N1);
        std::map<std::pair<int, int>, std::vector<std::size_t>> triples;
        for (std::size_t i = start + 1; i + 1 < end; ++i)
            if (sigma[i].set) triples[{sigma[i].from, sigma[i].to}].push_back(i);
        for (auto& [ts, idx] : triples) {
            auto& c = lookup(chi, ts.first, ts.second);
            if (idx.size() <= static_cast<std::size_t>((2 * p + 1) * (static_cast<int>(c.Y.size()) + 1))) continue;
            ThetaSeq seq;
            for (auto i : idx) seq.push_back(element_at(sigma, i));
            auto m = find_matching(seq, c);
            if (!m) continue;
            std::size_t from = idx[m->first], to = idx[m->second];
            AlteringShortening out;
            out.removed.assign(sigma.begin() + static_cast<long>(from), sigma.begin() + static_cast<long>(to));
            out.word.assign(sigma.begin(), sigma.begin() + static_cast<long>(from));
            out.word.insert(out.word.end(), sigma.begin() + static_cast<long>(to), sigma.end());
            if (!profile_consistent(out.word, chi, k) || !remainder_check(out.removed, chi, k) ||
                static_cast<long long>(out.removed.size()) > K.N1)
                throw Error(ErrorKind::profile, "shortening failed its checks");
            return out;
        }
    }
    throw Error(ErrorKind::length, "no unmarked infix supports a shortening");
}

// ---------------------------------------------------------------------------
// Bounded identity checks over orbit representatives.
//
// Atoms are small ids; ids below `fixed` are pinned, the rest are named in
// first-occurrence order, so every orbit of words under permutations fixing
// the pinned atoms is enumerated at least once.

namespace {

struct SmallLetter {
    int tag = 0;
    int n = 0;
    std::array<int, 4> at{};
    bool set = false;

    auto operator<=>(const SmallLetter& o) const {
        if (auto c = tag <=> o.tag; c != 0) return c;
        if (auto c = n <=> o.n; c != 0) return c;
        for (int i = 0; i < n; ++i)
            if (auto c = at[i] <=> o.at[i]; c != 0) return c;
        return std::strong_ordering::equal;
    }
    bool operator==(const SmallLetter& o) const { return (*this <=> o) == 0; }
};

using SmallVector = std::vector<SmallLetter>;

// Canonical representative of a multiset of letters under permutations fixing
// the pinned ids: letters are consumed greedily by smallest renamed form, ties
// are branched, and the least resulting sequence wins.
class Canonizer {
public:
    explicit Canonizer(int fixed) : fixed_(fixed) {}

    SmallVector operator()(SmallVector raw) {
        std::sort(raw.begin(), raw.end());
        raw_ = std::move(raw);
        used_.assign(raw_.size(), false);
        map_.fill(-1);
        for (int i = 0; i < fixed_; ++i) map_[i] = i;
        next_ = fixed_;
        cur_.clear();
        best_.clear();
        have_ = false;
        rec();
        return best_;
    }

private:
    int fixed_;
    SmallVector raw_, cur_, best_;
    std::vector<bool> used_;
    std::array<int, 64> map_{};
    int next_ = 0;
    bool have_ = false;

    SmallLetter renamed(const SmallLetter& l) const {
        SmallLetter r = l;
        int fresh = next_;
        std::array<int, 4> local{};
        std::array<int, 4> src{};
        int nl = 0;
        for (int i = 0; i < l.n; ++i) {
            int a = l.at[i];
            if (map_[a] >= 0) {
                r.at[i] = map_[a];
                continue;
            }
            int j = 0;
            while (j < nl && src[j] != a) ++j;
            if (j == nl) {
                src[nl] = a;
                local[nl++] = fresh++;
            }
            r.at[i] = local[j];
        }
        if (r.set) std::sort(r.at.begin(), r.at.begin() + r.n);
        return r;
    }

    bool worse_than_best(const SmallLetter& next) const {
        if (!have_) return false;
        for (std::size_t i = 0; i < cur_.size(); ++i) {
            if (cur_[i] < best_[i]) return false;
            if (best_[i] < cur_[i]) return true;
        }
        return best_[cur_.size()] < next;
    }

    void rec() {
        if (cur_.size() == raw_.size()) {
            if (!have_ || cur_ < best_) best_ = cur_;
            have_ = true;
            return;
        }
        std::optional<SmallLetter> least;
        std::vector<std::size_t> cands;
        for (std::size_t i = 0; i < raw_.size(); ++i) {
            if (used_[i]) continue;
            if (i > 0 && !used_[i - 1] && raw_[i] == raw_[i - 1]) continue;
            auto r = renamed(raw_[i]);
            if (!least || r < *least) {
                least = r;
                cands.clear();
            }
            if (r == *least) cands.push_back(i);
        }
        if (worse_than_best(*least)) return;
        for (auto i : cands) {
            const auto& l = raw_[i];
            std::vector<int> unmapped;
            for (int j = 0; j < l.n; ++j)
                if (map_[l.at[j]] < 0 && std::find(unmapped.begin(), unmapped.end(), l.at[j]) == unmapped.end())
                    unmapped.push_back(l.at[j]);
            if (l.set) std::sort(unmapped.begin(), unmapped.end());
            do {
                for (std::size_t j = 0; j < unmapped.size(); ++j) map_[unmapped[j]] = next_ + static_cast<int>(j);
                next_ += static_cast<int>(unmapped.size());
                used_[i] = true;
                cur_.push_back(*least);
                rec();
                cur_.pop_back();
                used_[i] = false;
                next_ -= static_cast<int>(unmapped.size());
                for (int a : unmapped) map_[a] = -1;
            } while (l.set && std::next_permutation(unmapped.begin(), unmapped.end()));
        }
    }
};

// Restricted-growth choice of an atom id: pinned ids, used ids, or the next new one.
struct Naming {
    int universe, next;
    int limit() const { return std::min(next + 1, universe); }
};

// Enumerates concatenations of anti-path segments; segments after the first are anti-cycles.
void enumerate_pair_segments(const std::vector<int>& lens, int universe, int fixed,
                             const std::function<void(const std::vector<std::pair<int, int>>&)>& emit) {
    int total = 0;
    std::vector<int> seg_start, seg_of;
    for (std::size_t s = 0; s < lens.size(); ++s) {
        for (int i = 0; i < lens[s]; ++i) {
            seg_of.push_back(static_cast<int>(s));
            seg_start.push_back(total);
        }
        total += lens[s];
    }
    std::vector<std::pair<int, int>> w(total);
    std::function<void(int, int)> rec = [&](int pos, int next) {
        if (pos == total) return emit(w);
        bool first = seg_start[pos] == pos;
        bool closes = seg_of[pos] > 0 && (pos + 1 == total || seg_start[pos + 1] == pos + 1);
        Naming nb{universe, next};
        for (int b = 0; b < nb.limit(); ++b) {
            if (!first && w[pos - 1].second == b) continue;
            int n1 = b == next ? next + 1 : next;
            Naming na{universe, n1};
            for (int a = 0; a < na.limit(); ++a) {
                if (closes && a == (pos == seg_start[pos] ? b : w[seg_start[pos]].first)) continue;
                w[pos] = {b, a};
                rec(pos + 1, a == n1 ? n1 + 1 : n1);
            }
        }
    };
    rec(0, fixed);
}

// Compositions of `budget` into parts in [1, cap], nondecreasing.
void for_each_split(int budget, int cap, int min_part, std::vector<int>& parts, const std::function<void()>& f) {
    f();
    for (int part = min_part; part <= std::min(cap, budget); ++part) {
        parts.push_back(part);
        for_each_split(budget - part, cap, part, parts, f);
        parts.pop_back();
    }
}

bool theta1_unrestrained(const std::vector<std::pair<int, int>>& w, int from, int to) {
    // pairs (a_i, b_i) for consecutive letters in [from, to)
    std::array<int, 64> seen_a{};
    int distinct_a = 0;
    for (int i = from; i + 1 < to; ++i)
        if (!seen_a[w[i].second]++) ++distinct_a;
    if (distinct_a <= 1) return false;
    for (int i = from + 1; i < to; ++i) {
        int z = w[i].first;
        int forced = -1;
        bool ok = true;
        for (int j = from; j + 1 < to && ok; ++j) {
            if (w[j + 1].first == z) continue;
            int a = w[j].second;
            if (a == z || (forced >= 0 && forced != a)) ok = false;
            forced = a;
        }
        if (ok) return false;
    }
    return true;
}

bool small_restrained_class(const std::vector<std::pair<int, int>>& w, int from, int to, int z, int wa) {
    bool left = false, right = false;
    for (int i = from; i + 1 < to; ++i) {
        int a = w[i].second, b = w[i + 1].first;
        if (a != wa && b != z) return false;
        left = left || a == wa;
        right = right || b == z;
    }
    return left && right;
}

bool small_cycle_compatible(const std::vector<std::pair<int, int>>& w, int from, int to, int z, int wa) {
    for (int i = from; i < to; ++i) {
        int a = w[i].second, b = w[i + 1 == to ? from : i + 1].first;
        if (a != wa && b != z) return false;
    }
    return true;
}

SmallVector pair_letters(const std::vector<std::pair<int, int>>& w) {
    SmallVector v;
    for (auto [b, a] : w) {
        SmallLetter l;
        l.n = 2;
        l.at[0] = b;
        l.at[1] = a;
        v.push_back(l);
    }
    return v;
}

struct SideSets {
    std::set<SmallVector> lhs, rhs;
};

std::string describe_pairs(const SmallVector& v, const Universe& u) {
    PairVector out;
    for (auto& l : v) ++out[{u[l.at[0]], u[l.at[1]]}];
    return to_string(out);
}

IdentityVerdict compare(const SideSets& s, const std::function<std::string(const SmallVector&)>& show) {
    IdentityVerdict v;
    v.lhs = s.lhs.size();
    v.rhs = s.rhs.size();
    std::optional<std::pair<SmallVector, std::string>> worst;
    auto consider = [&](const std::set<SmallVector>& a, const std::set<SmallVector>& b, const char* side) {
        for (auto& x : a)
            if (!b.count(x)) {
                bool smaller = !worst || x.size() < worst->first.size() || (x.size() == worst->first.size() && x < worst->first);
                if (smaller) worst = {x, side};
            }
    };
    consider(s.lhs, s.rhs, "lhs");
    consider(s.rhs, s.lhs, "rhs");
    if (worst) {
        v.equal = false;
        v.counterexample = show(worst->first);
        v.side = worst->second;
    }
    return v;
}

IdentityVerdict antipath_identity(bool restrained, const Universe& u, int bound) {
    int U = static_cast<int>(u.size());
    int fixed = restrained ? 2 : 0;
    auto K = restrained ? restrained_constants() : unrestrained_constants();
    Canonizer canon(fixed);
    auto path_ok = [&](const std::vector<std::pair<int, int>>& w, int from, int to) {
        return restrained ? small_restrained_class(w, from, to, 0, 1) : theta1_unrestrained(w, from, to);
    };
    SideSets sets;
    std::set<SmallVector> raw_seen;
    auto add = [&](std::set<SmallVector>& into, const std::vector<std::pair<int, int>>& w) {
        auto v = pair_letters(w);
        std::sort(v.begin(), v.end());
        if (raw_seen.insert(v).second) into.insert(canon(v));
    };
    for (int n = 1; n <= bound; ++n)
        enumerate_pair_segments({n}, U, fixed, [&](const std::vector<std::pair<int, int>>& w) {
            if (path_ok(w, 0, n)) add(sets.lhs, w);
        });
    raw_seen.clear();
    for (int n = 1; n <= std::min<long long>(bound, K.N0); ++n) {
        std::vector<int> parts;
        for_each_split(bound - n, static_cast<int>(K.N1), 1, parts, [&] {
            std::vector<int> lens{n};
            lens.insert(lens.end(), parts.begin(), parts.end());
            enumerate_pair_segments(lens, U, fixed, [&](const std::vector<std::pair<int, int>>& w) {
                if (!path_ok(w, 0, n)) return;
                int at = n;
                for (int len : parts) {
                    if (restrained && !small_cycle_compatible(w, at, at + len, 0, 1)) return;
                    at += len;
                }
                add(sets.rhs, w);
            });
        });
    }
    return compare(sets, [&](const SmallVector& v) { return describe_pairs(v, u); });
}

// ---- altering sets ----

struct GammaSpec {
    int atoms_sigma = 0;           // atom letters of the leading word
    std::vector<int> remainders;   // atom letters of each remainder's inner word
};

struct SmallGamma {
    bool set = false;
    int from = 0, to = 0;
    std::array<int, 3> at{};
};

// Enumerates a leading altering word followed by remainders (each a set letter
// then an inner altering word returning to the set letter's source state).
void enumerate_gamma(const GammaSpec& spec, int states, int k, int universe, int fixed,
                     const std::function<void(const std::vector<SmallGamma>&, const std::vector<int>&)>& emit) {
    struct Slot {
        bool set;
        int seg;
        bool seg_first, seg_last;
    };
    std::vector<Slot> slots;
    std::vector<int> seg_begin;
    for (int i = 0; i < 2 * spec.atoms_sigma - 1; ++i)
        slots.push_back({i % 2 == 1, 0, i == 0, i == 2 * spec.atoms_sigma - 2});
    seg_begin.push_back(0);
    for (std::size_t r = 0; r < spec.remainders.size(); ++r) {
        seg_begin.push_back(static_cast<int>(slots.size()));
        int len = 2 * spec.remainders[r];
        for (int i = 0; i < len; ++i) slots.push_back({i % 2 == 0, static_cast<int>(r) + 1, i == 0, i == len - 1});
    }
    std::vector<SmallGamma> w(slots.size());
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int next) {
        if (pos == slots.size()) return emit(w, seg_begin);
        auto& sl = slots[pos];
        bool rem = sl.seg > 0;
        std::vector<int> froms;
        if (sl.seg_first) {
            for (int s = 0; s < states; ++s) froms.push_back(s);
        } else {
            froms.push_back(w[pos - 1].to);
        }
        for (int from : froms) {
            std::vector<int> tos;
            if (sl.seg_last && rem) {
                tos.push_back(w[seg_begin[sl.seg]].from);
            } else {
                for (int s = 0; s < states; ++s) tos.push_back(s);
            }
            for (int to : tos) {
                w[pos].set = sl.set;
                w[pos].from = from;
                w[pos].to = to;
                if (sl.set) {
                    std::function<void(int, int, int)> pick = [&](int j, int lo, int nx) {
                        if (j == k) return rec(pos + 1, nx);
                        for (int a = lo; a < std::min(nx + 1, universe); ++a) {
                            if (!sl.seg_first && a == w[pos - 1].at[0]) continue;
                            w[pos].at[j] = a;
                            pick(j + 1, a + 1, a == nx ? nx + 1 : nx);
                        }
                    };
                    pick(0, 0, next);
                } else {
                    for (int a = 0; a < std::min(next + 1, universe); ++a) {
                        bool after_set = !(sl.seg_first && !rem);
                        if (after_set) {
                            auto& B = w[pos - 1];
                            if (std::find(B.at.begin(), B.at.begin() + k, a) != B.at.begin() + k) continue;
                            bool after_e = rem && pos - 1 == static_cast<std::size_t>(seg_begin[sl.seg]);
                            if (!after_e && w[pos - 2].at[0] == a) continue;
                        }
                        if (sl.seg_last && rem) {
                            auto& E = w[seg_begin[sl.seg]];
                            if (std::find(E.at.begin(), E.at.begin() + k, a) != E.at.begin() + k) continue;
                            if (w[seg_begin[sl.seg] + 1].at[0] == a) continue;
                        }
                        w[pos].at[0] = a;
                        rec(pos + 1, a == next ? next + 1 : next);
                    }
                }
            }
        }
    };
    rec(0, fixed);
}

AlteringWord to_word(const std::vector<SmallGamma>& w, std::size_t from, std::size_t to, int k, const Universe& u) {
    AlteringWord out;
    for (std::size_t i = from; i < to; ++i) {
        if (w[i].set) {
            std::vector<Atom> B;
            for (int j = 0; j < k; ++j) B.push_back(u[w[i].at[j]]);
            out.push_back(set_step(w[i].from, B, w[i].to));
        } else {
            out.push_back(atom_step(w[i].from, u[w[i].at[0]], w[i].to));
        }
    }
    return out;
}

SmallVector gamma_letters(const std::vector<SmallGamma>& w, int states, int k) {
    SmallVector v;
    for (auto& g : w) {
        SmallLetter l;
        l.set = g.set;
        l.tag = (g.set ? states * states : 0) + g.from * states + g.to;
        l.n = g.set ? k : 1;
        for (int j = 0; j < l.n; ++j) l.at[j] = g.at[j];
        if (l.set) std::sort(l.at.begin(), l.at.begin() + l.n);
        v.push_back(l);
    }
    return v;
}

std::string describe_gamma(const SmallVector& v, int states, int k, const Universe& u) {
    GammaVector out;
    for (auto& l : v) {
        bool set = l.tag >= states * states;
        int st = l.tag % (states * states);
        std::vector<Atom> as;
        for (int j = 0; j < l.n; ++j) as.push_back(u[l.at[j]]);
        ++out[set ? set_step(st / states, as, st % states) : atom_step(st / states, as.front(), st % states)];
    }
    std::string s;
    for (auto& [l, n] : out) s += (s.empty() ? "" : " ") + (n != 1 ? std::to_string(n) : "") + to_string(l);
    (void)k;
    return s;
}

IdentityVerdict qchi_identity(const Universe& u, int bound, int states, int k) {
    int U = static_cast<int>(u.size());
    auto K = chi_constants(k + 1, states);
    // Profiles realised by words within the bound, with their atoms renamed to the first ids.
    std::map<std::string, std::pair<ControlProfile, int>> profiles;
    for (int n = 1; 2 * n - 1 <= bound; ++n)
        enumerate_gamma({n, {}}, states, k, U, 0, [&](const std::vector<SmallGamma>& w, const std::vector<int>&) {
            auto chi = altering_profile(to_word(w, 0, w.size(), k, u), states, k);
            std::set<Atom> pinned;
            for (auto& [ts, c] : chi) {
                pinned.insert(c.X.begin(), c.X.end());
                pinned.insert(c.Y.begin(), c.Y.end());
            }
            std::map<Atom, Atom> ren;
            int i = 0;
            for (Atom a : pinned) ren[a] = u[i++];
            for (auto& [ts, c] : chi) {
                std::set<Atom> X, Y;
                for (Atom a : c.X) X.insert(ren[a]);
                for (Atom a : c.Y) Y.insert(ren[a]);
                c.X = X;
                c.Y = Y;
            }
            profiles.emplace(to_string(chi), std::pair{chi, static_cast<int>(pinned.size())});
        });
    IdentityVerdict total;
    for (auto& [name, entry] : profiles) {
        auto& [chi, fixed] = entry;
        Canonizer canon(fixed);
        SideSets sets;
        for (int n = 1; 2 * n - 1 <= bound; ++n)
            enumerate_gamma({n, {}}, states, k, U, fixed, [&](const std::vector<SmallGamma>& w, const std::vector<int>&) {
                if (profile_consistent(to_word(w, 0, w.size(), k, u), chi, k)) sets.lhs.insert(canon(gamma_letters(w, states, k)));
            });
        for (int n = 1; 2 * n - 1 <= std::min<long long>(bound, K.N0); ++n) {
            int budget = bound - (2 * n - 1);
            std::vector<int> parts;
            // remainder with m inner atom letters has 2m letters, m >= 2
            for_each_split(budget / 2, static_cast<int>(K.N1 / 2), 2, parts, [&] {
                enumerate_gamma({n, parts}, states, k, U, fixed, [&](const std::vector<SmallGamma>& w, const std::vector<int>& begins) {
                    if (!profile_consistent(to_word(w, 0, static_cast<std::size_t>(2 * n - 1), k, u), chi, k)) return;
                    for (std::size_t r = 1; r < begins.size(); ++r) {
                        std::size_t end = r + 1 < begins.size() ? static_cast<std::size_t>(begins[r + 1]) : w.size();
                        if (!remainder_check(to_word(w, static_cast<std::size_t>(begins[r]), end, k, u), chi, k)) return;
                    }
                    sets.rhs.insert(canon(gamma_letters(w, states, k)));
                });
            });
        }
        auto v = compare(sets, [&](const SmallVector& x) { return describe_gamma(x, states, k, u) + " under " + name; });
        total.lhs += v.lhs;
        total.rhs += v.rhs;
        if (!v.equal && total.equal) {
            total.equal = false;
            total.counterexample = v.counterexample;
            total.side = v.side;
        }
    }
    return total;
}

}  // namespace

IdentityVerdict semilinear_identity_check(IdentityKind kind, const Universe& universe, int size_bound, IdentityParams params) {
    if (static_cast<int>(universe.size()) < size_bound + 2)
        throw Error(ErrorKind::reference, "universe of " + std::to_string(universe.size()) + " atoms is too small for size " +
                                              std::to_string(size_bound));
    if (universe.size() > 60) throw Error(ErrorKind::reference, "universe too large for orbit enumeration");
    switch (kind) {
        case IdentityKind::unrestrained_ap: return antipath_identity(false, universe, size_bound);
        case IdentityKind::restrained_ap: return antipath_identity(true, universe, size_bound);
        case IdentityKind::qchi:
            if (params.k < 0 || params.k > 3 || params.states < 1)
                throw Error(ErrorKind::parameter, "qchi check supports 0 <= k <= 3 and at least one state");
            return qchi_identity(universe, size_bound, params.states, params.k);
    }
    return {};
}

}  // namespace rlang

#include "rlang/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace rlang {

Provider Provider::of(Fma a, std::string name) {
    Provider p;
    p.kind = Kind::automaton;
    p.name = std::move(name);
    p.labels = a.labels;
    p.constants = {a.constants.begin(), a.constants.end()};
    p.automaton = std::move(a);
    return p;
}

Provider Provider::of(Fma a, Configuration from, Configuration to, std::string name) {
    auto p = of(std::move(a), std::move(name));
    p.between = std::pair{std::move(from), std::move(to)};
    return p;
}

Provider Provider::of(Rcfg g, std::string name) {
    Provider p;
    p.kind = Kind::grammar;
    p.name = std::move(name);
    p.labels = g.labels;
    p.constants = {g.constants.begin(), g.constants.end()};
    p.grammar = std::move(g);
    return p;
}

Provider Provider::of(RatExpr e, std::string name) {
    Provider p;
    p.kind = Kind::expression;
    p.name = std::move(name);
    p.constants = e.constants();
    p.expression = std::move(e);
    return p;
}

Provider Provider::words(std::string name, std::function<bool(const DataWord&)> test, std::set<Atom> constants,
                         std::set<Label> labels) {
    Provider p;
    p.kind = Kind::word_predicate;
    p.name = std::move(name);
    p.word_test = std::move(test);
    p.constants = std::move(constants);
    p.labels = std::move(labels);
    return p;
}

Provider Provider::vectors(std::string name, std::function<bool(const DataVector&)> test, std::set<Atom> constants,
                           std::set<Label> labels) {
    Provider p;
    p.kind = Kind::vector_predicate;
    p.name = std::move(name);
    p.vector_test = std::move(test);
    p.constants = std::move(constants);
    p.labels = std::move(labels);
    return p;
}

namespace {

void require_constants(const Provider& p, const Universe& universe) {
    for (Atom c : p.constants)
        if (std::find(universe.begin(), universe.end(), c) == universe.end())
            throw Error(ErrorKind::constant, p.name + ": universe lacks constant " + atom_name(c));
}

std::vector<Letter> letters(const Provider& p, const Universe& universe) {
    std::vector<Letter> out;
    for (Label l : p.labels)
        for (Atom a : universe) out.push_back({l, a});
    std::sort(out.begin(), out.end());
    return out;
}

void all_words(const std::vector<Letter>& alphabet, int max_len, const std::function<void(const DataWord&)>& f) {
    DataWord w;
    std::function<void()> rec = [&] {
        f(w);
        if (static_cast<int>(w.size()) == max_len) return;
        for (const Letter& l : alphabet) {
            w.push_back(l);
            rec();
            w.pop_back();
        }
    };
    rec();
}

void all_vectors(const std::vector<Letter>& alphabet, int bound, const std::function<void(const DataVector&)>& f) {
    std::vector<DataVector::Entry> es;
    std::function<void(std::size_t, int)> rec = [&](std::size_t from, int left) {
        f(DataVector(es));
        if (left == 0) return;
        for (std::size_t i = from; i < alphabet.size(); ++i) {
            bool same = !es.empty() && es.back().first == alphabet[i];
            if (same)
                ++es.back().second;
            else
                es.push_back({alphabet[i], 1});
            rec(i, left - 1);
            if (same)
                --es.back().second;
            else
                es.pop_back();
        }
    };
    rec(0, bound);
}

template <class F>
auto with_provenance(const Provider& p, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), p.name + ": " + e.what());
    }
}

}  // namespace

VectorSet provider_vectors(const Provider& p, const Universe& universe, int size_bound) {
    require_constants(p, universe);
    return with_provenance(p, [&]() -> VectorSet {
        switch (p.kind) {
            case Provider::Kind::automaton:
                if (p.between) {
                    VectorSet out;
                    for (auto& w : langof_between(*p.automaton, p.between->first, p.between->second, universe, size_bound))
                        out.insert(parikh(w));
                    return out;
                }
                return parikh_bounded(*p.automaton, universe, size_bound);
            case Provider::Kind::grammar:
                return parikh_bounded(*p.grammar, universe, size_bound);
            case Provider::Kind::expression:
                return members_bounded(*p.expression, universe, size_bound);
            case Provider::Kind::word_predicate: {
                VectorSet out;
                all_words(letters(p, universe), size_bound, [&](const DataWord& w) {
                    if (p.word_test(w)) out.insert(parikh(w));
                });
                return out;
            }
            case Provider::Kind::vector_predicate: {
                VectorSet out;
                all_vectors(letters(p, universe), size_bound, [&](const DataVector& v) {
                    if (p.vector_test(v)) out.insert(v);
                });
                return out;
            }
        }
        return {};
    });
}

std::set<DataWord> provider_words(const Provider& p, const Universe& universe, int max_len) {
    require_constants(p, universe);
    return with_provenance(p, [&]() -> std::set<DataWord> {
        switch (p.kind) {
            case Provider::Kind::automaton:
                if (p.between) return langof_between(*p.automaton, p.between->first, p.between->second, universe, max_len);
                return enumerate_language(*p.automaton, universe, max_len);
            case Provider::Kind::grammar:
                return derive_bounded(*p.grammar, universe, max_len);
            case Provider::Kind::word_predicate: {
                std::set<DataWord> out;
                all_words(letters(p, universe), max_len, [&](const DataWord& w) {
                    if (p.word_test(w)) out.insert(w);
                });
                return out;
            }
            default:
                throw Error(ErrorKind::form, "a vector set has no word language");
        }
    });
}

bool word_before(const DataWord& a, const DataWord& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

namespace {

// The least element of the symmetric difference under `before`.
template <class Set, class Before>
void compare(const Set& x, const Set& y, Before before, Verdict& out,
             std::optional<typename Set::value_type>& witness) {
    out.first_size = x.size();
    out.second_size = y.size();
    auto consider = [&](const typename Set::value_type& e, bool first) {
        if (!witness || before(e, *witness)) {
            witness = e;
            out.witness_in_first = first;
        }
    };
    for (auto& e : x)
        if (!y.count(e)) consider(e, true);
    for (auto& e : y)
        if (!x.count(e)) consider(e, false);
    out.equal = !witness;
}

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Verdict parikh_equal_bounded(const Provider& x, const Provider& y, const Universe& universe, int size_bound) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    compare(provider_vectors(x, universe, size_bound), provider_vectors(y, universe, size_bound),
            [](const DataVector& a, const DataVector& b) { return a < b; }, v, v.vector_witness);
    v.seconds = since(t0);
    return v;
}

Verdict language_equal_bounded(const Provider& x, const Provider& y, const Universe& universe, int max_len) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    compare(provider_words(x, universe, max_len), provider_words(y, universe, max_len), word_before, v, v.word_witness);
    v.seconds = since(t0);
    return v;
}

std::string to_string(const Verdict& v) {
    std::ostringstream os;
    os << (v.equal ? "equal" : "unequal") << " (" << v.first_size << " vs " << v.second_size << " members)";
    if (v.vector_witness) os << "; " << to_string(*v.vector_witness);
    if (v.word_witness) os << "; word " << (v.word_witness->empty() ? "<empty>" : to_string(*v.word_witness));
    if (!v.equal) os << " only in " << (v.witness_in_first ? "first" : "second");
    return os.str();
}

}  // namespace rlang

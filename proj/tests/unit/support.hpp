#pragma once

#include <catch_amalgamated.hpp>
#include <random>

#include "rlang/foundation.hpp"

template <>
struct Catch::StringMaker<rlang::Letter> {
    static std::string convert(const rlang::Letter& l) { return rlang::to_string(l); }
};

template <>
struct Catch::StringMaker<rlang::DataVector> {
    static std::string convert(const rlang::DataVector& v) { return rlang::to_string(v); }
};

namespace testsupport {

using Rng = std::mt19937_64;

inline int below(Rng& rng, int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); }

inline rlang::DataVector random_vector(Rng& rng, const rlang::Universe& u, int max_size) {
    int n = below(rng, max_size + 1);
    std::vector<rlang::DataVector::Entry> es;
    for (int i = 0; i < n; ++i) es.push_back({rlang::Letter{rlang::no_label, u[below(rng, static_cast<int>(u.size()))]}, 1});
    return rlang::DataVector(es);
}

inline rlang::DataWord random_word(Rng& rng, const rlang::Universe& u, int max_len) {
    rlang::DataWord w;
    int n = below(rng, max_len + 1);
    for (int i = 0; i < n; ++i) w.push_back({rlang::no_label, u[below(rng, static_cast<int>(u.size()))]});
    return w;
}

inline rlang::Permutation random_permutation(Rng& rng, const rlang::Universe& u) {
    auto img = u;
    std::shuffle(img.begin(), img.end(), rng);
    std::map<rlang::Atom, rlang::Atom> m;
    for (std::size_t i = 0; i < u.size(); ++i) m[u[i]] = img[i];
    return rlang::Permutation(m);
}

inline rlang::Constraint random_constraint(Rng& rng, int nvars, const std::vector<rlang::Atom>& consts, int depth) {
    using rlang::Constraint;
    using rlang::Term;
    auto term = [&]() {
        int k = below(rng, nvars + static_cast<int>(consts.size()));
        return k < nvars ? Term::v(k) : Term::c(consts[k - nvars]);
    };
    if (depth == 0 || below(rng, 3) == 0) {
        auto e = Constraint::eq(term(), term());
        return below(rng, 2) ? e : !e;
    }
    auto a = random_constraint(rng, nvars, consts, depth - 1);
    auto b = random_constraint(rng, nvars, consts, depth - 1);
    switch (below(rng, 3)) {
    case 0: return a && b;
    case 1: return a || b;
    default: return !a;
    }
}

}  // namespace testsupport

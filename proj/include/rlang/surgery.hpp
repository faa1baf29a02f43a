#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rlang/foundation.hpp"
#include "rlang/theta.hpp"

namespace rlang {

// Anti-path letters <b_{i-1}, a_i> as (first, second).
using AtomPair = std::pair<Atom, Atom>;
using PairWord = std::vector<AtomPair>;
using PairVector = std::map<AtomPair, int>;

PairWord parse_pair_word(std::string_view text);  // "(b0,a1)(b1,a2)"
std::string to_string(const PairWord& w);
std::string to_string(const PairVector& v);
PairVector pair_parikh(const PairWord& w);

bool is_antipath(const PairWord& w);
bool is_anticycle(const PairWord& w);
// {(a_i, {b_i})}: the second component of each letter with the first of the next.
ThetaSet antipath_set(const PairWord& w);

struct SurgeryConstants {
    long long N0 = 0, N1 = 0;
};

SurgeryConstants unrestrained_constants();
SurgeryConstants restrained_constants();
// Least integers satisfying the shortening chain for p and |S| states.
SurgeryConstants chi_constants(int p, int states);

struct ApClass {
    bool unrestrained = false;
    int type = 0;  // 1, 2 or 3 when restrained
    Atom z, w;
};

std::string to_string(const ApClass& c);
ApClass antipath_classify(const PairWord& w);
// Restrained by (z,w) with both a letter <x,w> and a letter <z,y> inducing elements.
bool in_restrained_class(const PairWord& w, Atom z, Atom wa);
// A_rho together with the closing pair is restrained by (z,w).
bool cycle_compatible(const PairWord& rho, Atom z, Atom w);

PairWord antipath_insert(const PairWord& sigma, const PairWord& rho);

struct ApShortening {
    PairWord word;
    PairWord removed;
};

ApShortening antipath_shorten(const PairWord& sigma);

// Altering-set words over (S × Atoms × S) ∪ (S × Atoms^(k) × S).
struct GammaLetter {
    bool set = false;
    int from = 0, to = 0;
    std::vector<Atom> atoms;  // one atom, or the sorted set

    auto operator<=>(const GammaLetter&) const = default;
};

using AlteringWord = std::vector<GammaLetter>;
using GammaVector = std::map<GammaLetter, int>;
using ControlProfile = std::map<std::pair<int, int>, Control>;

GammaLetter atom_step(int s, Atom a, int t);
GammaLetter set_step(int t, std::vector<Atom> B, int s);
std::string to_string(const GammaLetter& l);
std::string to_string(const AlteringWord& w);
std::string to_string(const ControlProfile& chi);
GammaVector gamma_parikh(const AlteringWord& w);

bool is_altering_word(const AlteringWord& w, int k);
ThetaSet altering_pairs(const AlteringWord& w, int t, int s, int k);
ControlProfile altering_profile(const AlteringWord& w, int states, int k);
bool profile_consistent(const AlteringWord& w, const ControlProfile& chi, int k);
bool remainder_check(const AlteringWord& rho, const ControlProfile& chi, int k);

AlteringWord altering_insert(const AlteringWord& sigma, const AlteringWord& rho, const ControlProfile& chi, int k);

struct AlteringShortening {
    AlteringWord word;
    AlteringWord removed;
};

AlteringShortening altering_shorten(const AlteringWord& sigma, const ControlProfile& chi, int k);

enum class IdentityKind { unrestrained_ap, restrained_ap, qchi };

struct IdentityParams {
    int states = 1;
    int k = 1;
};

struct IdentityVerdict {
    bool equal = true;
    std::size_t lhs = 0, rhs = 0;  // orbit representatives compared
    std::string counterexample;   // empty when equal
    std::string side;             // "lhs" or "rhs": the side holding the counterexample
};

// Bounded check of a surgery identity over atoms of `universe`, by orbit
// representatives. restrained_ap fixes (z,w) to the first two atoms.
IdentityVerdict semilinear_identity_check(IdentityKind kind, const Universe& universe, int size_bound,
                                          IdentityParams params = {});

}  // namespace rlang

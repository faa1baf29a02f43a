#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rlang/foundation.hpp"

namespace rlang {

// Pair (a, B) with |B| = p and a ∉ B; B is kept sorted.
struct ThetaElem {
    Atom a;
    std::vector<Atom> B;

    ThetaElem() = default;
    ThetaElem(Atom first, std::set<Atom> second);
    bool contains(Atom b) const;
    auto operator<=>(const ThetaElem&) const = default;
};

struct ThetaSet {
    int p = 1;
    std::set<ThetaElem> elems;

    ThetaSet() = default;
    explicit ThetaSet(int arity, std::set<ThetaElem> e = {});
    void insert(const ThetaElem& e);
    std::set<Atom> atoms() const;
    std::set<Atom> firsts() const;
    bool empty() const { return elems.empty(); }
    int size() const { return static_cast<int>(elems.size()); }
    bool operator==(const ThetaSet&) const = default;
};

std::string to_string(const ThetaElem& e);
std::string to_string(const ThetaSet& s);
// "(a,{b,c}); (d,{e,f})"; the arity is taken from the first element
// (or from `p` for an empty literal).
ThetaSet parse_theta(std::string_view text, int p = -1);
ThetaSet permute(const ThetaSet& s, const Permutation& pi);

struct Restraint {
    Atom z;
    std::vector<Atom> W;
};

bool restrains(const ThetaSet& s, Atom z, const std::vector<Atom>& W);
// First restraining pair with z in atom order (then one fresh atom), W padded
// with fresh atoms; none iff the set is unrestrained.
std::optional<Restraint> find_restraint(const ThetaSet& s);

enum class ControlType { null, LC, RC, FC, URC };
const char* control_type_name(ControlType t);

struct Control {
    ControlType type = ControlType::null;
    std::set<Atom> X, Y;
};

std::string to_string(const Control& c);

bool is_control(const ThetaSet& s, const std::set<Atom>& X, const std::set<Atom>& Y);
bool is_good_control(const ThetaSet& s, const Control& c);
bool weak_good_control(const ThetaSet& s, const Control& c);
bool insertion_condition(const ThetaElem& e, const Control& c);

ThetaSet reduce(const ThetaSet& s, const std::set<Atom>& X, const std::set<Atom>& Y);
Control good_control(const ThetaSet& s);

struct Insertion {
    ThetaElem chosen;
    ThetaSet replaced;  // chosen swapped for (a,D) and (c,B)
    ThetaSet extended;  // replaced plus chosen
};

Insertion insertion_place(const ThetaSet& s, const Control& c, const ThetaElem& cd);
ThetaSet compact_subset(const ThetaSet& s, const Control& c);
std::size_t compact_bound(int p, const Control& c);

using ThetaSeq = std::vector<ThetaElem>;
// 0-based (i, j), i < j, first in lexicographic order.
std::optional<std::pair<int, int>> find_matching(const ThetaSeq& seq, const std::optional<Control>& c = std::nullopt);

}  // namespace rlang

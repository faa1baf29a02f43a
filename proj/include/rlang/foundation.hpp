#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rlang {

enum class ErrorKind {
    order,
    constant,
    arity,
    reference,
    alphabet,
    configuration,
    form,
    lookup,
    emptiness,
    control,
    precondition,
    insertion,
    length,
    profile,
    parameter,
    threshold,
    support,
    parse,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// Atoms are interned; equality and order are by id, and ids follow interning order.
struct Atom {
    int id = -1;

    bool valid() const { return id >= 0; }
    auto operator<=>(const Atom&) const = default;
};

Atom atom(std::string_view name);
Atom constant(std::string_view name);
// i-th atom of the reserved fresh namespace; never collides with named atoms.
Atom fresh_atom(int i);
std::string atom_name(Atom a);
bool is_constant(Atom a);
bool is_fresh(Atom a);
// First n fresh atoms outside `avoid`, in fresh-index order.
std::vector<Atom> fresh_avoiding(const std::set<Atom>& avoid, int n);
std::vector<Atom> atoms(std::initializer_list<std::string_view> names);

// Label 0 is the empty label, used for label-less letters.
using Label = int;
Label label(std::string_view name);
std::string label_name(Label l);
constexpr Label no_label = 0;

struct Letter {
    Label label = no_label;
    Atom atom;

    auto operator<=>(const Letter&) const = default;
};

std::string to_string(const Letter& l);

using DataWord = std::vector<Letter>;

DataWord word_of(std::string_view spaced);  // "a b h:c" -> letters
std::string to_string(const DataWord& w);
std::set<Atom> atoms_of(const DataWord& w);

// Finite multiset of letters, stored sorted with positive counts only.
class DataVector {
public:
    using Entry = std::pair<Letter, int>;

    DataVector() = default;
    explicit DataVector(std::vector<Entry> entries);

    static DataVector single(Letter l, int count = 1);

    int operator[](const Letter& l) const;
    int size() const { return size_; }
    bool empty() const { return entries_.empty(); }
    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<Letter> dom() const;
    std::set<Atom> atoms() const;
    int count_atom(Atom a) const;

    DataVector& operator+=(const DataVector& o);
    friend DataVector operator+(DataVector a, const DataVector& b) { return a += b; }
    // Throws ErrorKind::order naming a letter where u exceeds *this.
    DataVector minus(const DataVector& u) const;
    bool leq(const DataVector& o) const;
    // Letters whose count in *this equals their count in `whole`; requires *this ≤ whole.
    std::vector<Letter> saturated_in(const DataVector& whole) const;
    DataVector scaled(int k) const;

    // Size first, then lexicographic over entries.
    std::strong_ordering operator<=>(const DataVector& o) const;
    bool operator==(const DataVector& o) const { return entries_ == o.entries_; }
    std::size_t hash() const;

private:
    void normalize();
    std::vector<Entry> entries_;
    int size_ = 0;
};

DataVector parikh(const DataWord& w);
std::string to_string(const DataVector& v);
DataVector vector_of(std::string_view spaced);  // "2a b h:c"

struct DataVectorHash {
    std::size_t operator()(const DataVector& v) const { return v.hash(); }
};

// Finite bijection, identity elsewhere.
class Permutation {
public:
    Permutation() = default;
    // Throws ErrorKind::form if `m` is not a bijection of its carrier.
    explicit Permutation(std::map<Atom, Atom> m);
    static Permutation swap(Atom a, Atom b);
    static Permutation cycle(const std::vector<Atom>& as);

    Atom operator()(Atom a) const;
    Permutation then(const Permutation& next) const;
    Permutation inverse() const;
    bool is_identity() const;
    int order() const;
    const std::map<Atom, Atom>& mapping() const { return map_; }
    // Throws ErrorKind::constant if an interned constant or an atom of `fixed` moves.
    void check_fixes(const std::set<Atom>& fixed = {}) const;

    DataWord apply(const DataWord& w) const;
    DataVector apply(const DataVector& v) const;
    std::vector<Atom> apply(const std::vector<Atom>& as) const;
    std::set<Atom> apply(const std::set<Atom>& as) const;

private:
    std::map<Atom, Atom> map_;
};

// Term of an equality literal: a numbered variable or a constant atom.
struct Term {
    int var = -1;
    Atom atom;

    static Term v(int i) { return {i, Atom{}}; }
    static Term c(Atom a) { return {-1, a}; }
    bool is_var() const { return var >= 0; }
    auto operator<=>(const Term&) const = default;
};

class Constraint {
public:
    enum class Kind { truth, falsity, eq, neg, conj, disj };

    static Constraint top();
    static Constraint bottom();
    static Constraint eq(Term a, Term b);
    static Constraint ne(Term a, Term b);
    static Constraint neg(Constraint c);
    static Constraint all(std::vector<Constraint> cs);
    static Constraint any(std::vector<Constraint> cs);
    static Constraint distinct(const std::vector<Term>& ts);
    static Constraint all_equal(const std::vector<Term>& ts);

    Kind kind() const { return node_->kind; }
    const Term& lhs() const { return node_->a; }
    const Term& rhs() const { return node_->b; }
    const std::vector<Constraint>& children() const { return node_->kids; }
    const void* id() const { return node_.get(); }

    // Throws ErrorKind::reference when a variable lacks a value.
    bool eval(const std::vector<Atom>& assignment) const;
    bool eval(const std::function<Atom(int)>& lookup) const;
    int max_var() const;
    std::set<int> vars() const;
    std::set<Atom> constants() const;
    Constraint rename(const std::function<Term(const Term&)>& f) const;

    std::string to_string(const std::function<std::string(int)>& var_name) const;

private:
    struct Node {
        Kind kind;
        Term a, b;
        std::vector<Constraint> kids;
    };
    explicit Constraint(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

Constraint operator&&(const Constraint& a, const Constraint& b);
Constraint operator||(const Constraint& a, const Constraint& b);
Constraint operator!(const Constraint& a);

// Set partition of n items as a restricted growth string. When built over
// variables plus constants, items [0, nvars) are variables and the rest constants.
class OrbitFormula {
public:
    OrbitFormula() = default;
    explicit OrbitFormula(std::vector<int> rgs, int nvars = -1, std::vector<Atom> consts = {});

    int size() const { return static_cast<int>(rgs_.size()); }
    int nvars() const { return nvars_; }
    int classes() const { return nclasses_; }
    int cls(int i) const { return rgs_[i]; }
    bool same(int i, int j) const { return rgs_[i] == rgs_[j]; }
    const std::vector<int>& rgs() const { return rgs_; }
    const std::vector<Atom>& constants() const { return consts_; }
    // Constant pinned to class c, if any.
    std::optional<Atom> class_constant(int c) const;
    std::vector<int> class_minima() const;
    std::vector<std::vector<int>> blocks() const;

    bool holds(const std::vector<Atom>& var_values) const;
    Constraint to_constraint() const;
    // Restriction to a subset of the variable items, renumbered in the given order.
    OrbitFormula restrict(const std::vector<int>& items) const;

    auto operator<=>(const OrbitFormula& o) const;
    bool operator==(const OrbitFormula& o) const { return rgs_ == o.rgs_ && consts_ == o.consts_; }

    std::string to_string(const std::function<std::string(int)>& var_name) const;

private:
    std::vector<int> rgs_;
    int nvars_ = 0;
    int nclasses_ = 0;
    std::vector<Atom> consts_;
};

// Set partitions of p items in canonical order (sorted class minima, then RGS).
std::vector<OrbitFormula> enumerate_orbit_formulas(int p);

// Disjoint orbit formulas over vars ∪ constants whose union is exactly c.
std::vector<OrbitFormula> decompose_constraint(const Constraint& c, int nvars,
                                               const std::vector<Atom>& constants = {});

bool evaluate_constraint(const Constraint& c, const std::map<int, Atom>& assignment);

// Calls emit for every assignment of f's variables that agrees with `known` and
// satisfies f. Variables in classes without a known value or constant take
// pairwise distinct values from `candidates`.
void for_each_completion(const OrbitFormula& f, const std::vector<std::optional<Atom>>& known,
                         const std::vector<Atom>& candidates,
                         const std::function<void(const std::vector<Atom>&)>& emit);

// Sorted atom universe helpers.
using Universe = std::vector<Atom>;
Universe make_universe(std::set<Atom> s);
Universe universe_of(std::initializer_list<std::string_view> names);
Universe named_universe(int n);  // a, b, c, ...

}  // namespace rlang

template <>
struct std::hash<rlang::DataVector> {
    std::size_t operator()(const rlang::DataVector& v) const { return v.hash(); }
};

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "rlang/automata.hpp"
#include "rlang/foundation.hpp"
#include "rlang/grammar.hpp"

namespace rlang {

// The separator letter #.
Atom separator();

// (t1 t2)^n0 ## (t2 t3 t4)^n1 ## ... ## (t2k t2k+1 t2k+2)^nk ## (t2k+2 t2k+3)^nk+1,
// read left to right, or right to left when `reversed`.
struct SepStructure {
    int k = 0;
    std::vector<int> n;     // k+2 exponents
    std::vector<Atom> tau;  // 2k+3 atoms
    bool reversed = false;

    bool operator==(const SepStructure&) const = default;
};

std::string to_string(const SepStructure& s);
// Throws ErrorKind::form on wrong sizes, exponents below one or a separator atom.
DataWord sep_build(const SepStructure& s);
DataVector sep_vector(const SepStructure& s);
// Orientation is chosen so that (tau, n) is lexicographically no larger than its
// reversal; the flag records whether the word had to be read backwards.
std::optional<SepStructure> sep_parse(const DataWord& w);
// The representation sep_parse returns for sep_build(s).
SepStructure sep_canonical(SepStructure s);

// Every structure whose word has Parikh image v. Requires |dom v| = v(#) + 2
// (all atoms distinct); throws ErrorKind::precondition otherwise.
std::vector<SepStructure> sep_witnesses(const DataVector& v);

// Distinct atoms from the universe, exponents C * 4^(i+1).
SepStructure sep_stable_word(int k, int C, const Universe& universe);

struct StabilityCase {
    DataVector w;
    std::vector<std::string> witnesses;
    bool preserved = true;   // every witness keeps the base structure
    bool propagates = true;  // raised atoms raise their neighbours
};

struct StabilityReport {
    DataVector base;
    std::string structure;
    long long examined = 0;            // perturbations enumerated
    std::vector<StabilityCase> cases;  // the realisable ones

    int violations() const;
};

// All w <= v with w(#) = 0 and |w| < C, in size-then-lexicographic order.
std::vector<DataVector> small_perturbations(const DataVector& v, int C);

StabilityReport stability_check(int k, int C, const Universe& universe);

// Full depth-d tree with counters C * M^(position in shortlex + 1) over fresh atoms.
G3Tree g3_stable_tree(int depth, int C, int M);
DataVector g3_tree_vector(const G3Tree& t);
// Every g3 tree whose word has Parikh image v; requires |dom v| = 1 + v(#).
std::vector<G3Tree> g3_witnesses(const DataVector& v);
// Same atoms per node and same children, ignoring child order and counters.
bool same_unordered_tree(const G3Tree& a, const G3Tree& b);
StabilityReport g3_stability_check(int depth, int C, int M);

using Rational = boost::rational<long long>;

struct Interval {
    Rational lo, hi;

    bool operator==(const Interval&) const = default;
};

struct IntervalTreeInstance {
    int depth = 1;
    std::vector<std::pair<std::string, std::string>> leaves;  // left to right
    std::map<std::string, Interval> intervals;
};

// Labels of every vertex in heap order (root first); throws ErrorKind::form
// when the leaf count does not match the depth.
std::vector<std::pair<std::string, std::string>> vertex_labels(const IntervalTreeInstance& inst);
// Unique leaf labels, intervals exactly for the used labels, local intersection
// at every vertex. Malformed instances throw ErrorKind::form.
bool interval_validate(const IntervalTreeInstance& inst);
// Largest number of label intervals sharing a point; closed ends count.
int interval_max_overlap(const IntervalTreeInstance& inst);
// The union of the intervals of each sub-tree is an interval.
bool subtree_unions_connected(const IntervalTreeInstance& inst);

IntervalTreeInstance random_interval_instance(int depth, std::uint64_t seed);

struct IntervalSearchResult {
    IntervalTreeInstance instance;
    int achieved = 0;
    bool exhaustive = false;  // the search proved `achieved` optimal
    long long examined = 0;
};

// Depth <= 3: complete search over endpoint orders on a grid of 2n points.
// Deeper: `budget` random instances from `seed`.
IntervalSearchResult interval_search(int depth, long long budget, std::uint64_t seed = 1);

std::string interval_document(const IntervalTreeInstance& inst);
IntervalTreeInstance parse_interval_document(std::string_view text);
std::string to_string(const Rational& q);

using RegisterValuation = std::vector<Atom>;

// Throws ErrorKind::form on repeated atoms and ErrorKind::arity on length mismatch.
bool compatible(const RegisterValuation& r, const RegisterValuation& rp, const std::set<Atom>& A);
// Least j, then least i < j.
std::optional<std::pair<int, int>> find_compatible_pair(const std::vector<RegisterValuation>& seq, const std::set<Atom>& A);

struct PumpBounds {
    long long f2 = 0, f3 = 0, f4 = 0;
};

// k atoms; block size b >= 1 scales counts of letters per step.
PumpBounds pump_bounds(const Fma& a, int k);

struct PumpResult {
    DataWord sigma1, sigma2, sigma3, omega;
    DataWord pumped;  // sigma1 sigma2 omega sigma3
    Run run;          // accepting run on `pumped`
    int order = 1;    // order of the register permutation
    PumpBounds bounds;
};

// Throws ErrorKind::threshold when tau occurs at most f2 times.
PumpResult pump_word(const Fma& a, const DataWord& w, const Run& run, const Letter& tau);

}  // namespace rlang

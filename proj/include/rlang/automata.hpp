#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rlang/foundation.hpp"
#include "rlang/ratset.hpp"

namespace rlang {

enum class StepKind { pres_eq, pres_diff, up_diff };
const char* step_kind_name(StepKind k);

// Shape of a restricted one-register constraint; `blocks` partitions the block
// variables (empty partition for PresEq).
struct RestrictedTag {
    StepKind kind = StepKind::pres_eq;
    OrbitFormula blocks;

    bool preserving() const { return kind != StepKind::up_diff; }
    auto operator<=>(const RestrictedTag&) const = default;
    bool operator==(const RestrictedTag&) const = default;
};

std::string to_string(const RestrictedTag& t);

// Variables of a rule reading p letters with r registers: x_i, then y_j, then x'_i.
struct VarLayout {
    int r = 1;
    int p = 0;

    int x(int i) const { return i; }
    int y(int j) const { return r + j; }
    int xp(int i) const { return r + p + i; }
    int count() const { return 2 * r + p; }
    std::string name(int v) const;
};

struct Rule {
    int src = 0;
    std::vector<Label> block;
    Constraint phi = Constraint::top();
    int dst = 0;

    int width() const { return static_cast<int>(block.size()); }
};

// Restricted constraint over the layout (r = 1, p = block length).
Constraint restricted_constraint(const RestrictedTag& tag, int p);

struct Fma {
    std::vector<std::string> states;
    int init = 0;
    std::set<int> accepting;
    std::set<Label> labels;
    std::vector<Atom> constants;
    int r = 1;
    // One entry per register; an empty entry lets the run start with any value.
    std::vector<std::optional<Atom>> r0;
    std::vector<Rule> rules;

    int add_state(const std::string& name, bool accept = false);
    int state(const std::string& name) const;
    int block_size() const;
    VarLayout layout(const Rule& rl) const { return {r, rl.width()}; }
    // Throws on undeclared labels, variables, constants or repeated initial registers.
    void validate() const;
};

struct Configuration {
    int state = 0;
    std::vector<Atom> regs;

    auto operator<=>(const Configuration&) const = default;
};

std::string to_string(const Fma& a, const Configuration& c);

struct Step {
    int rule = -1;
    DataWord block;
    Configuration to;
};

struct Run {
    Configuration start;
    std::vector<Step> steps;

    DataWord word() const;
    Configuration end() const { return steps.empty() ? start : steps.back().to; }
};

// Checks every step of `run` against the automaton.
bool valid_run(const Fma& a, const Run& run);

// pool < 0 selects the default of 2r fresh guessing atoms.
std::optional<Run> accepts(const Fma& a, const DataWord& w, int pool = -1);
std::optional<Run> run_between(const Fma& a, const Configuration& from, const Configuration& to, const DataWord& w,
                               int pool = -1);
std::set<DataWord> enumerate_language(const Fma& a, const Universe& universe, int max_len, int pool = -1);
VectorSet parikh_bounded(const Fma& a, const Universe& universe, int max_len, int pool = -1);
std::set<DataWord> langof_between(const Fma& a, const Configuration& from, const Configuration& to,
                                  const Universe& universe, int max_len, int pool = -1);

std::optional<RestrictedTag> classify_rule(const Fma& a, const Rule& rl);
bool is_restricted(const Fma& a);
// Requires one register and no constants.
Fma to_restricted(const Fma& a);

struct AlteringPath {
    struct Segment {
        int from;
        Atom reg;
        int to;
    };
    std::vector<Segment> segments;
    std::vector<DataWord> blocks;  // blocks[i] sits between segments i and i+1
    std::vector<int> block_rules;

    std::string to_string(const Fma& a) const;
};

AlteringPath run_decompose(const Fma& a, const Run& run);

// Parikh image of the preserving-only runs from (s, reg) to (t, reg), as a
// linear form of height at most one; `reg` may be a variable bound outside.
LinearForm preserving_form(const Fma& a, int s, int t, Term reg);
LinearForm preserving_parikh(const Fma& a, int s, Atom reg, int t);

// Parikh image of the runs between (s, ·) and (t, ·) of a restricted automaton;
// the two arguments of the returned node are the register values at both ends.
RatExpr synth_parikh_sh2(const Fma& a, int s, int t);
RatExpr synth_parikh_sh2(const Fma& a, const Configuration& from, const Configuration& to);
// Union over initial and accepting configurations.
RatExpr synth_language_parikh(const Fma& a);

// example_two, B_first, C_last, L_four, gsh3_auto, sep_L.
Fma builtin_automaton(const std::string& name);
std::vector<std::string> builtin_automaton_names();

}  // namespace rlang

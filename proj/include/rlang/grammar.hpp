#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rlang/foundation.hpp"
#include "rlang/ratset.hpp"

namespace rlang {

// Body symbol of a production: a label (one atom variable), a constant
// terminal (no variable) or a nonterminal (r register variables).
struct Symbol {
    enum class Kind { label, constant, nonterminal };
    Kind kind = Kind::label;
    int id = 0;  // Label, Atom id or nonterminal index

    static Symbol lab(Label h) { return {Kind::label, h}; }
    static Symbol con(Atom a) { return {Kind::constant, a.id}; }
    static Symbol nt(int v) { return {Kind::nonterminal, v}; }
    auto operator<=>(const Symbol&) const = default;
};

struct Production {
    int head = 0;
    Constraint phi = Constraint::top();
    std::vector<Symbol> body;
};

// Variables of a production: x_1..x_r, then per body symbol its own block.
struct ProdLayout {
    int r = 1;
    std::vector<int> first;  // first variable of each body symbol, -1 for constants
    int count = 0;

    int x(int i) const { return i; }
    int y(int pos, int i = 0) const { return first[pos] + i; }
};

struct Rcfg {
    std::vector<std::string> vars;
    std::set<Label> labels;
    std::vector<Atom> constants;
    int start = 0;
    int r = 1;
    std::vector<std::optional<Atom>> r0;
    std::vector<Production> prods;

    int add_var(const std::string& name);
    int var(const std::string& name) const;
    int branching() const;
    ProdLayout layout(const Production& p) const;
    void validate() const;
};

struct DerivationTree {
    struct Part {
        Letter letter;
        int child = -1;  // node index when the part is a nonterminal
        auto operator<=>(const Part&) const = default;
        bool operator==(const Part&) const = default;
    };
    struct Node {
        int var = 0;
        std::vector<Atom> regs;
        int prod = -1;
        std::vector<Part> parts;
    };
    std::vector<Node> nodes;  // nodes[0] is the root

    DataWord word() const;
    int size() const { return static_cast<int>(nodes.size()); }
};

bool valid_derivation(const Rcfg& g, const DerivationTree& t);

// Bounded derivation by a least fixpoint over configurations reachable from
// the initial ones; pool < 0 selects the default fresh pool.
std::set<DataWord> derive_bounded(const Rcfg& g, const Universe& universe, int max_len, int pool = -1);
std::map<DataWord, DerivationTree> derive_with_trees(const Rcfg& g, const Universe& universe, int max_len, int pool = -1);
VectorSet parikh_bounded(const Rcfg& g, const Universe& universe, int size_bound, int pool = -1);

enum class GrammarTag { all_eq, all_diff };
std::optional<GrammarTag> classify_production(const Rcfg& g, const Production& p);
bool is_restricted(const Rcfg& g);
Rcfg to_restricted_cfg(const Rcfg& g);

// mirror, gsh (params {n}, default 3), g3.
Rcfg builtin_grammar(const std::string& name, const std::vector<int>& params = {});
std::vector<std::string> builtin_grammar_names();

// Binary tree of a g3 derivation. Internal nodes carry (left, anchor, right);
// leaves carry two atoms: (left, new) under a left edge, (new, right) under a right edge.
struct G3Tree {
    struct Node {
        std::vector<Atom> atoms;
        int count = 1;
        std::vector<Node> kids;  // none or two

        bool leaf() const { return atoms.size() == 2; }
    };
    Node root;

    int node_count() const;
    std::string to_string() const;
};

// Throws ErrorKind::form if the derivation does not come from g3.
G3Tree g3_tree(const Rcfg& g3, const DerivationTree& d);
// Word generated by a tree; checks the inheritance rule (ErrorKind::form).
DataWord g3_word(const G3Tree& t);
DerivationTree g3_derivation(const Rcfg& g3, const G3Tree& t);
// Full binary tree of the given depth with distinct atoms everywhere except
// forced inheritances; counts[i] is the counter of the i-th node in shortlex order.
G3Tree g3_full_tree(int depth, const std::vector<int>& counts, const std::vector<Atom>& atoms);
int g3_full_atoms(int depth);

}  // namespace rlang

#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "rlang/foundation.hpp"

namespace rlang {

using VectorSet = std::set<DataVector>;

// Binder variables are globally numbered so that expressions can be combined freely.
int new_var();

using Env = std::vector<std::pair<int, Atom>>;  // sorted by variable
Atom lookup(const Env& env, int var);
Env extend(Env env, int var, Atom a);

// Vector whose atoms are binder variables or fixed atoms.
struct VecTemplate {
    struct Item {
        Label label;
        Term atom;
        int count;
    };
    std::vector<Item> items;

    static VecTemplate of(const DataVector& v);
    VecTemplate& add(Label l, Term t, int count = 1);
    VecTemplate operator+(const VecTemplate& o) const;
    int size() const;
    std::set<int> vars() const;
    std::set<Atom> fixed_atoms() const;
    DataVector instantiate(const Env& env) const;
    VecTemplate rename(const std::map<int, int>& m) const;
};

// Escape hatch for orbit-finite sets defined by a computation rather than a
// template, e.g. the altering-path image built by the synthesis pipeline.
class IntensionalSet {
public:
    virtual ~IntensionalSet() = default;
    virtual std::string describe() const = 0;
    virtual int star_height() const = 0;
    virtual std::set<Atom> constants() const { return {}; }
    // Members with atoms inside `universe` and size at most `bound`; args are the
    // resolved atom parameters.
    virtual VectorSet members(const std::vector<Atom>& args, const Universe& universe, int bound) const = 0;
};

class RatExpr {
public:
    enum class Kind { zero, single, sum, star, onion, external };

    static RatExpr zero();
    static RatExpr single(VecTemplate t);
    static RatExpr single(const DataVector& v);
    static RatExpr sum(std::vector<RatExpr> parts);
    static RatExpr star(RatExpr body);
    // Union over binder assignments satisfying `guard` of the union of `bodies`.
    static RatExpr onion(std::vector<int> binders, Constraint guard, std::vector<RatExpr> bodies,
                         std::vector<std::string> names = {});
    static RatExpr alt(std::vector<RatExpr> bodies);
    static RatExpr external(std::shared_ptr<const IntensionalSet> set, std::vector<Term> args = {});

    Kind kind() const { return node_->kind; }
    const VecTemplate& tmpl() const { return node_->tmpl; }
    const std::vector<RatExpr>& kids() const { return node_->kids; }
    const std::vector<int>& binders() const { return node_->binders; }
    const std::vector<std::string>& binder_names() const { return node_->names; }
    const Constraint& guard() const { return node_->guard; }
    const std::shared_ptr<const IntensionalSet>& ext() const { return node_->ext; }
    const std::vector<Term>& args() const { return node_->args; }
    const void* id() const { return node_.get(); }

    std::set<int> free_vars() const;
    std::set<Atom> constants() const;
    std::string to_string() const;

private:
    struct Node {
        explicit Node(Kind k) : kind(k) {}
        Kind kind;
        VecTemplate tmpl;
        std::vector<RatExpr> kids;
        std::vector<int> binders;
        std::vector<std::string> names;
        Constraint guard = Constraint::top();
        std::shared_ptr<const IntensionalSet> ext;
        std::vector<Term> args;
    };
    explicit RatExpr(std::shared_ptr<Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

std::string var_name(int v);

int syntactic_star_height(const RatExpr& e);

// Throws ErrorKind::reference if a constant of e lies outside the universe.
VectorSet members_bounded(const RatExpr& e, const Universe& universe, int size_bound, const Env& env = {});
bool contains(const RatExpr& e, const DataVector& v);

struct LinearForm {
    struct Clause {
        std::vector<int> binders;
        std::vector<std::string> names;
        Constraint guard = Constraint::top();
        VecTemplate base;
        std::shared_ptr<LinearForm> periods;  // null at height 0
    };
    int height = 0;
    std::vector<Clause> clauses;

    RatExpr to_expr() const;
    LinearForm fresh_copy() const;  // binders renamed to new variables
};

// Exact; the height equals the syntactic star-height of e. Intensional nodes are rejected.
LinearForm to_linear_form(const RatExpr& e);

struct ParsingTree {
    struct Node {
        DataVector vec;
        std::set<Atom> support;
        std::vector<Node> kids;
    };
    Node root;

    DataVector value() const;
    int depth() const;
    std::string to_string() const;
};

using TreePath = std::vector<int>;  // child indices from the root

std::optional<ParsingTree> build_parsing_tree(const LinearForm& lf, const DataVector& v, const Universe& universe);
bool validate_parsing_tree(const LinearForm& lf, const ParsingTree& t);

struct TreeEdit {
    enum class Kind { prune, duplicate, permute };
    Kind kind;
    TreePath node;
    Permutation perm;
};

// Throws ErrorKind::support when a permutation moves the node's support set and
// ErrorKind::form when the edited tree fails revalidation.
ParsingTree tree_edit(const LinearForm& lf, const ParsingTree& t, const TreeEdit& edit);

struct BoundConstants {
    int N = 0;
    int M = 0;
};
BoundConstants bound_constants(const LinearForm& lf);

RatExpr substitute(const RatExpr& base, const std::function<RatExpr(const VecTemplate::Item&)>& family);

// par_two, par_first, par_mirror, R_example, gsh (params: {n}).
RatExpr builtin_expression(const std::string& name, const std::vector<int>& params = {});

}  // namespace rlang

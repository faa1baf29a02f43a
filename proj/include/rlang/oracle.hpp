#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>

#include "rlang/automata.hpp"
#include "rlang/foundation.hpp"
#include "rlang/grammar.hpp"
#include "rlang/ratset.hpp"

namespace rlang {

// Anything that can list its members up to a bound: an automaton (optionally
// between two configurations), a grammar, an expression, or a predicate.
struct Provider {
    enum class Kind { automaton, grammar, expression, word_predicate, vector_predicate };

    Kind kind = Kind::expression;
    std::string name;
    std::optional<Fma> automaton;
    std::optional<std::pair<Configuration, Configuration>> between;
    std::optional<Rcfg> grammar;
    std::optional<RatExpr> expression;
    std::function<bool(const DataWord&)> word_test;
    std::function<bool(const DataVector&)> vector_test;
    std::set<Label> labels{no_label};  // alphabet of predicates
    std::set<Atom> constants;

    static Provider of(Fma a, std::string name = "automaton");
    static Provider of(Fma a, Configuration from, Configuration to, std::string name = "automaton");
    static Provider of(Rcfg g, std::string name = "grammar");
    static Provider of(RatExpr e, std::string name = "expression");
    static Provider words(std::string name, std::function<bool(const DataWord&)> test, std::set<Atom> constants = {},
                          std::set<Label> labels = {no_label});
    static Provider vectors(std::string name, std::function<bool(const DataVector&)> test,
                            std::set<Atom> constants = {}, std::set<Label> labels = {no_label});
};

// Members with atoms from `universe`. Failures are rethrown with the provider
// name prefixed; a universe missing a required constant throws ErrorKind::constant.
VectorSet provider_vectors(const Provider& p, const Universe& universe, int size_bound);
// Expressions and vector predicates have no word semantics: ErrorKind::form.
std::set<DataWord> provider_words(const Provider& p, const Universe& universe, int max_len);

struct Verdict {
    bool equal = true;
    std::optional<DataVector> vector_witness;
    std::optional<DataWord> word_witness;
    bool witness_in_first = false;  // which side the witness belongs to
    std::size_t first_size = 0, second_size = 0;
    double seconds = 0;
};

// Shorter first, then lexicographic.
bool word_before(const DataWord& a, const DataWord& b);

Verdict parikh_equal_bounded(const Provider& x, const Provider& y, const Universe& universe, int size_bound);
Verdict language_equal_bounded(const Provider& x, const Provider& y, const Universe& universe, int max_len);

std::string to_string(const Verdict& v);

}  // namespace rlang

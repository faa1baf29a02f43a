#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "rlang/automata.hpp"
#include "rlang/grammar.hpp"
#include "rlang/ratset.hpp"
#include "rlang/separation.hpp"
#include "rlang/surgery.hpp"
#include "rlang/theta.hpp"

namespace rlang {

// Versioned JSON documents, one per kind:
//   automaton, grammar, expression, theta-set, anti-path, interval-instance.
// Atoms are written by name: constants with '$', fresh atoms with '_'.
// Serialising a parsed canonical document reproduces it byte for byte.
inline constexpr int document_version = 1;

std::string to_document(const Fma& a);
std::string to_document(const Rcfg& g);
// Binder variables are renumbered from 0 in order of appearance. Computed
// (intensional) nodes have no document and throw ErrorKind::form.
std::string to_document(const RatExpr& e);
std::string to_document(const ThetaSet& s);
std::string to_document(const PairWord& w);
std::string to_document(const IntervalTreeInstance& inst);

using DocumentObject = std::variant<Fma, Rcfg, RatExpr, ThetaSet, PairWord, IntervalTreeInstance>;

// Throws ErrorKind::parse on malformed text, unknown kinds or versions.
DocumentObject parse_document(std::string_view text);
std::string document_kind(const DocumentObject& d);

}  // namespace rlang

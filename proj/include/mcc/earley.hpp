// Earley recognition over a token graph, shared packed parse forests, and
// constraint pruning.

#ifndef MCC_EARLEY_HPP_
#define MCC_EARLEY_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcc/grammar.hpp"
#include "mcc/lexer.hpp"

namespace mcc {

struct Derivation {
  ProductionId production = 0;
  std::vector<std::size_t> children;  // forest node indices
};

struct ForestNode {
  SymbolId symbol = 0;
  // Extent in chart positions: token start offsets, or the input length.
  std::size_t start = 0;
  std::size_t end = 0;
  std::optional<std::size_t> token;  // set for terminal nodes
  std::vector<Derivation> derivations;
};

struct ParseTree {
  SymbolId symbol = 0;
  std::optional<ProductionId> production;  // nonterminals
  std::optional<std::size_t> token;        // terminals: index into the forest's tokens
  Span span;                               // byte range covered
  std::vector<ParseTree> children;
};

// Acyclic shared packed forest. Several roots appear when pruning splits the
// start node into differently attributed variants.
class ParseForest {
 public:
  const Grammar& grammar() const { return *grammar_; }
  const std::vector<ForestNode>& nodes() const { return nodes_; }
  const std::vector<std::size_t>& roots() const { return roots_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  bool empty() const { return roots_.empty(); }

 private:
  friend class ForestBuilder;
  friend ParseForest prune_constraints(const ParseForest&, const ValidatedModel&);

  const Grammar* grammar_ = nullptr;
  std::vector<ForestNode> nodes_;
  std::vector<std::size_t> roots_;
  std::vector<Token> tokens_;
};

// All derivations of the start symbol over complete token-graph paths. Trees
// that repeat a (symbol, extent) pair along a root path are excluded. The
// grammar must outlive the forest. Throws ParseError with the farthest
// position reached and the terminals expected there.
ParseForest parse(const Grammar& grammar, const TokenGraph& tokens);

// Splits and filters the forest so that only trees satisfying the model's
// associativity, priority and composition constraints remain.
ParseForest prune_constraints(const ParseForest& forest, const ValidatedModel& model);

// Number of trees, saturating at `cap`.
std::uint64_t count_trees(const ParseForest& forest, std::uint64_t cap = UINT64_MAX);

// Up to `limit` trees in derivation-index lexicographic order.
std::vector<ParseTree> enumerate_trees(const ParseForest& forest, std::size_t limit);

std::string forest_dot(const ParseForest& forest);

// Compact bracketed rendering, e.g. BinaryExpression(LiteralExpression(...) ...).
std::string tree_string(const ParseTree& tree, const Grammar& grammar, const std::vector<Token>& tokens);

}  // namespace mcc

#endif  // MCC_EARLEY_HPP_

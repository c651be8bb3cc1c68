// Context-free grammars generated from abstract syntax models.

#ifndef MCC_GRAMMAR_HPP_
#define MCC_GRAMMAR_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/model.hpp"

namespace mcc {

using SymbolId = std::size_t;
using ProductionId = std::size_t;

struct Symbol {
  std::string name;
  bool terminal = false;
  // Terminals: the element type a token of this symbol instantiates (basic
  // types), or nothing for anonymous delimiters.
  std::optional<TypeId> element;
  // Terminals: how tokens are recognized.
  std::optional<PatternSpec> pattern;
};

enum class Origin {
  composition,
  selection,
  repetitionRecursive,
  repetitionBase,
  optionalEpsilon,
  optionalPresent,
  delimiter,
  permutation,
};

std::string_view to_string(Origin origin);

struct Production {
  SymbolId lhs = 0;
  std::vector<SymbolId> rhs;  // empty for epsilon
  Origin origin = Origin::composition;
  std::optional<TypeId> elementType;  // originating element type
  std::map<std::size_t, std::string> memberBindings;  // rhs index -> member name
};

class Grammar {
 public:
  const std::vector<Symbol>& symbols() const { return symbols_; }
  const Symbol& symbol(SymbolId id) const { return symbols_[id]; }
  const std::vector<Production>& productions() const { return productions_; }
  const Production& production(ProductionId id) const { return productions_[id]; }
  SymbolId start() const { return start_; }

  std::vector<SymbolId> nonterminals() const;
  std::vector<SymbolId> terminals() const;
  std::optional<SymbolId> find(std::string_view name) const;

  // Productions with the given left-hand side, in order.
  const std::vector<ProductionId>& productions_of(SymbolId lhs) const { return by_lhs_[lhs]; }
  bool nullable(SymbolId id) const { return nullable_[id]; }

  // Symbol of an element type (terminal for basic types).
  SymbolId symbol_of(TypeId type) const { return element_symbols_.at(type); }

  // Checks the (N, Sigma, P, S) invariants; throws InvalidModel on violation.
  void check() const;

 private:
  friend class GrammarBuilder;

  std::vector<Symbol> symbols_;
  std::vector<Production> productions_;
  std::vector<std::vector<ProductionId>> by_lhs_;
  std::vector<bool> nullable_;
  std::map<std::string, SymbolId, std::less<>> index_;
  std::map<TypeId, SymbolId> element_symbols_;
  SymbolId start_ = 0;
};

// Incremental construction of a grammar. The ASM-to-grammar mapping steps are
// exposed separately so each can be exercised on its own.
class GrammarBuilder {
 public:
  explicit GrammarBuilder(const ValidatedModel& model);

  SymbolId nonterminal(const std::string& name);
  SymbolId element_symbol(TypeId type);
  // Anonymous terminal for a delimiter pattern; identical patterns share one.
  SymbolId delimiter(const PatternSpec& pattern);

  ProductionId add(Production p);

  // Rhs fragment: prefix terminals, the core symbols, then suffix terminals.
  std::vector<SymbolId> delimiter_wrap(const std::vector<PatternSpec>& prefix, std::vector<SymbolId> core,
                                       const std::vector<PatternSpec>& suffix);

  // List nonterminal for a repeatable member, creating its productions on
  // first use. Returns the symbol to place in the owner's production.
  SymbolId repetition(const Member& member, SymbolId element);

  // The productions defining a list of `element` with the given bounds.
  std::vector<Production> repetition_productions(SymbolId list, SymbolId element,
                                                 std::optional<SymbolId> separator, std::size_t min,
                                                 std::size_t max) const;

  // One production per ordering of `fragments`, each fragment kept intact.
  std::vector<Production> permutation_productions(TypeId composite, SymbolId lhs,
                                                  const std::vector<std::vector<SymbolId>>& fragments,
                                                  const std::vector<std::string>& names,
                                                  const std::vector<SymbolId>& prefix,
                                                  const std::vector<SymbolId>& suffix) const;

  Grammar finish(SymbolId start);

 private:
  const ValidatedModel& model_;
  Grammar g_;
  std::map<std::string, SymbolId> delimiters_;
  std::map<std::string, SymbolId> lists_;
  std::map<std::string, std::size_t> list_names_;
};

inline constexpr std::size_t kMaxFreeOrderMembers = 6;
inline constexpr std::size_t kMaxBoundedExpansion = 8;

// The full ASM-to-CSM mapping. Deterministic in the model.
Grammar generate_grammar(const ValidatedModel& model);

// BNF rendering: one line per left-hand side, then the lexical definitions.
std::string print_grammar(const Grammar& grammar, const ValidatedModel& model);

// Display form of a symbol: <Name> for element symbols, 'x' for literal
// delimiters, /re/ for other delimiters.
std::string display(const Grammar& grammar, SymbolId id);

}  // namespace mcc

#endif  // MCC_GRAMMAR_HPP_

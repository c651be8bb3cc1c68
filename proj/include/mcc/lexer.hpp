// Ambiguity-preserving lexer producing a DAG of candidate tokens.

#ifndef MCC_LEXER_HPP_
#define MCC_LEXER_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/grammar.hpp"
#include "mcc/regex.hpp"
#include "mcc/registry.hpp"

namespace mcc {

struct LexOptions {
  // Emit every match length per recognizer instead of only the longest.
  bool all_lengths = false;
};

struct Recognizer {
  SymbolId symbol = 0;  // terminal symbol; unused for ignore patterns
  std::string name;
  PatternSpec spec;
  std::optional<Regex> regex;
  Matcher matcher;

  // Match lengths at `offset`, ascending; longest only unless `all` is set.
  std::vector<std::size_t> match(std::string_view input, std::size_t offset, bool all) const;
};

struct Lexicon {
  std::vector<Recognizer> recognizers;
  std::vector<Recognizer> ignores;
  LexOptions options;
};

// One recognizer per terminal of `grammar`, plus the model's ignore patterns.
// Throws PatternCompileError for bad regexes or unregistered matchers.
Lexicon compile_lexicon(const ValidatedModel& model, const Grammar& grammar, const Registry* registry = nullptr,
                        LexOptions options = {});

struct Token {
  SymbolId symbol = 0;
  std::string typeName;
  std::string lexeme;
  std::size_t start = 0;
  std::size_t end = 0;
  // Offset where the next token may start: `end` advanced past ignored spans.
  std::size_t next = 0;
  std::size_t recognizer = 0;
};

struct TokenGraph {
  std::vector<Token> nodes;  // sorted by (start, end, recognizer)
  std::vector<std::vector<std::size_t>> edges;
  std::vector<std::size_t> startNodes;
  std::vector<std::size_t> endNodes;
  std::vector<Span> ignored;
  std::size_t length = 0;
  std::size_t startOffset = 0;  // first offset not covered by an ignored span

  bool linear() const;
};

// Maximal spans matched by ignore patterns, scanning left to right.
std::vector<Span> ignore_spans(const Lexicon& lexicon, std::string_view input);

// Every recognizer match at every admissible offset, before precedence
// filtering and path pruning.
std::vector<Token> raw_tokens(const Lexicon& lexicon, std::string_view input);

// Tokens lying on some complete path from input start to input end.
// Throws LexicalError at the farthest reachable offset when no path exists.
TokenGraph tokenize(const Lexicon& lexicon, std::string_view input);

std::string token_graph_dot(const TokenGraph& graph);

// Escapes a string for a double-quoted DOT label.
std::string dot_escape(std::string_view text);

}  // namespace mcc

#endif  // MCC_LEXER_HPP_

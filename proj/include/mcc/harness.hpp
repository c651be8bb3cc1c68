// Testing support: declarative assertions over models, a brute-force
// reference parser, and random models and inputs for property checks.

#ifndef MCC_HARNESS_HPP_
#define MCC_HARNESS_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mcc/earley.hpp"
#include "mcc/weave.hpp"

namespace mcc {

// ---- Reference parser -------------------------------------------------------

inline constexpr std::size_t kOracleMaxTokens = 12;
inline constexpr std::size_t kOracleMaxTrees = 200000;

// Every derivation tree of the start symbol over a linear token sequence, by
// exhaustive span splitting. Tokens sharing one span are alternatives at the
// same position; `tokens` must be ordered by span. A tree is excluded when a
// node repeats the (symbol, extent) of one of its ancestors. Throws
// OracleBoundExceeded past kOracleMaxTokens positions or `max_trees` trees.
std::vector<ParseTree> oracle_parse(const Grammar& grammar, const std::vector<Token>& tokens,
                                    std::size_t max_trees = kOracleMaxTrees);

// Whether a single tree satisfies the associativity, priority and composition
// constraints of `model`, checked directly on the tree.
bool oracle_satisfies(const ParseTree& tree, const Grammar& grammar, const ValidatedModel& model);

std::vector<ParseTree> oracle_filter(const std::vector<ParseTree>& trees, const Grammar& grammar,
                                     const ValidatedModel& model);

// Rendering that identifies a tree by productions and token indices only.
std::string tree_key(const ParseTree& tree);

// ---- Random models and inputs ----------------------------------------------

// Small valid model (at most 6 element types, at most 3 members each) with
// single-character token patterns that never overlap. Deterministic per seed.
Model random_model(std::uint64_t seed);

// Sentences of a grammar whose terminals are literal patterns.
class SentenceGenerator {
 public:
  SentenceGenerator(const Grammar& grammar, std::uint64_t seed);

  // A random derivation's yield, or nothing if none of the attempts stayed
  // within `max_tokens`.
  std::optional<std::vector<std::string>> walk(std::size_t max_tokens);
  // One random deletion, insertion, duplication or swap.
  std::vector<std::string> mutate(std::vector<std::string> tokens);

  static std::string join(const std::vector<std::string>& tokens);

 private:
  bool expand(SymbolId symbol, std::size_t depth, std::size_t max_tokens, std::vector<std::string>& out);
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

  const Grammar& grammar_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> height_;  // minimal derivation height per symbol
};

// Literal text a single-character pattern matches.
std::string sample_text(const PatternSpec& pattern);

struct PairReport {
  bool agree = false;
  bool skipped = false;  // overlapping tokens, or tree counts beyond the bound
  bool parsed = false;   // the input has at least one tree
  std::uint64_t engineRaw = 0, oracleRaw = 0, enginePruned = 0, oraclePruned = 0;
  std::string detail;
};

// Compares the engine with the reference parser on one input, before and
// after constraint pruning.
PairReport compare_with_oracle(const ValidatedModel& model, const std::string& input,
                               std::size_t max_trees = 20000);

// ---- Assertions ---------------------------------------------------------------

enum class AssertionKind { matches, notMatches, matchCount, evaluatesTo, resolvesTo };

std::string_view to_string(AssertionKind kind);

struct Assertion {
  AssertionKind kind = AssertionKind::matches;
  std::string model;
  std::string input;
  std::uint64_t count = 0;  // matchCount
  double value = 0;         // evaluatesTo
  double tolerance = 1e-9;
  Span refSite, declSite;  // resolvesTo
  std::size_t line = 0;    // source line in a test file, 1-based
};

enum class Semantics { none, calculator, imperative };

struct TestModel {
  std::shared_ptr<const Parser> parser;
  Semantics semantics = Semantics::none;
};

// Named models; starts with calculator, calculator-free (constraints
// stripped) and imperative.
class ModelCatalog {
 public:
  ModelCatalog();
  void add(const std::string& name, TestModel model) { models_[name] = std::move(model); }
  const TestModel* find(const std::string& name) const;

 private:
  std::map<std::string, TestModel> models_;
};

struct AssertionOutcome {
  bool pass = false;
  std::string diagnostics;
};

// Runs the full pipeline; failures of any stage are reported, never thrown.
AssertionOutcome run_assertion(const Assertion& assertion, const ModelCatalog& catalog);

// Test-file syntax, one item per line, '#' starts a comment:
//   model <name> "<path>" [stripped]
//   matches <model> "<input>"
//   notMatches <model> "<input>"
//   matchCount <model> "<input>" <n>
//   evaluatesTo <model> "<input>" <value> [<tolerance>]
//   resolvesTo <model> "<input>" <refStart>:<refEnd> <declStart>:<declEnd>
// Inputs accept \" \\ \n and \t escapes. Model paths are relative to `base_dir`.
// Throws Error(FormatError) naming the line.
std::vector<Assertion> parse_test_file(const std::string& text, const std::string& base_dir, ModelCatalog& catalog);

// TAP output; returns the number of failed assertions.
std::size_t run_test_file(const std::string& path, std::ostream& out);

}  // namespace mcc

#endif  // MCC_HARNESS_HPP_

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "mcc/harness.hpp"
#include "mcc/languages.hpp"
#include "mcc/model_file.hpp"
#include "support.hpp"

namespace mcc {
namespace {

// Char-level recognizer for calculator expressions without whitespace:
//   E -> number | ( E ) | [+-] E | E [+-*/] E
//   number -> [0-9]+ | [0-9]+ . [0-9]*
class CalculatorReference {
 public:
  explicit CalculatorReference(std::string s) : s_(std::move(s)) {}

  bool accepts() { return expr(0, s_.size()); }

 private:
  bool number(std::size_t i, std::size_t j) const {
    std::size_t k = i;
    while (k < j && std::isdigit(static_cast<unsigned char>(s_[k]))) ++k;
    if (k == i) return false;
    if (k == j) return true;
    if (s_[k] != '.') return false;
    for (++k; k < j; ++k) {
      if (!std::isdigit(static_cast<unsigned char>(s_[k]))) return false;
    }
    return true;
  }

  bool expr(std::size_t i, std::size_t j) {
    if (i >= j) return false;
    auto key = std::make_pair(i, j);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool ok = number(i, j) || (s_[i] == '(' && s_[j - 1] == ')' && expr(i + 1, j - 1)) ||
              ((s_[i] == '+' || s_[i] == '-') && expr(i + 1, j));
    for (std::size_t k = i + 1; !ok && k + 1 < j; ++k) {
      if (std::string_view("+-*/").find(s_[k]) != std::string_view::npos) ok = expr(i, k) && expr(k + 1, j);
    }
    return memo_[key] = ok;
  }

  std::string s_;
  std::map<std::pair<std::size_t, std::size_t>, bool> memo_;
};

bool engine_accepts(const Parser& p, const std::string& s) {
  try {
    return p.count(s, false) > 0;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::LexicalError || e.code() == ErrorCode::ParseError) return false;
    throw;
  }
}

TEST(LanguagePreservation, CalculatorExhaustiveUpToFive) {
  Parser p = calculator_parser();
  const std::string alphabet = "1.+-*()";
  std::size_t accepted = 0, total = 0;
  std::vector<std::string> frontier{""};
  for (std::size_t len = 1; len <= 5; ++len) {
    std::vector<std::string> next;
    for (const auto& prefix : frontier) {
      for (char c : alphabet) next.push_back(prefix + c);
    }
    for (const auto& s : next) {
      const bool expected = CalculatorReference(s).accepts();
      ASSERT_EQ(engine_accepts(p, s), expected) << "'" << s << "'";
      accepted += expected;
      ++total;
    }
    frontier = std::move(next);
  }
  EXPECT_EQ(total, 7u + 49u + 343u + 2401u + 16807u);
  EXPECT_GT(accepted, 200u);
}

TEST(LanguagePreservation, CalculatorSampledUpToEight) {
  Parser p = calculator_parser();
  const std::string alphabet = "12.+-*/()";
  std::mt19937 rng(5);
  std::size_t accepted = 0;
  for (int i = 0; i < 20000; ++i) {
    std::string s;
    const std::size_t len = 6 + rng() % 3;
    for (std::size_t k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
    const bool expected = CalculatorReference(s).accepts();
    ASSERT_EQ(engine_accepts(p, s), expected) << "'" << s << "'";
    accepted += expected;
  }
  EXPECT_GT(accepted, 100u);
}

// '[' (x (',' x)*)? '!'? ']'
bool list_reference(const std::string& s) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') return false;
  std::string body = s.substr(1, s.size() - 2);
  if (!body.empty() && body.back() == '!') body.pop_back();
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != (i % 2 == 0 ? 'x' : ',')) return false;
  }
  return body.empty() || body.size() % 2 == 1;
}

TEST(LanguagePreservation, SeparatedListExhaustiveUpToSeven) {
  Parser p(load_model_text(R"(language L start Top
element Top {
  prefix "\[";
  member items : X list min 0 separator ",";
  member bang : Bang optional;
  suffix "\]";
}
basic X pattern "x"
basic Bang pattern "!"
)"));
  const std::string alphabet = "[]x,!";
  std::vector<std::string> frontier{""};
  std::size_t accepted = 0;
  for (std::size_t len = 1; len <= 7; ++len) {
    std::vector<std::string> next;
    for (const auto& prefix : frontier) {
      for (char c : alphabet) next.push_back(prefix + c);
    }
    for (const auto& s : next) {
      const bool expected = list_reference(s);
      ASSERT_EQ(engine_accepts(p, s), expected) << "'" << s << "'";
      accepted += expected;
    }
    frontier = std::move(next);
  }
  EXPECT_EQ(accepted, 7u);  // [] [!] [x] [x!] [x,x] [x,x!] [x,x,x]
}

TEST(OracleEquivalence, RandomModelsAndInputs) {
  std::size_t parsed = 0, ambiguous = 0, cut = 0;
  const std::size_t n = test::run_oracle_pairs(100, 8, [&](const test::OraclePair& pair) {
    EXPECT_TRUE(pair.report.agree) << "seed " << pair.seed << " input '" << pair.input << "': " << pair.report.detail;
    parsed += pair.report.parsed;
    ambiguous += pair.report.oracleRaw > 1;
    cut += pair.report.oraclePruned < pair.report.oracleRaw;
  });
  EXPECT_EQ(n, 100u);
  // The suite should exercise ambiguity and pruning, not only trivial inputs.
  EXPECT_GT(parsed, 30u);
  EXPECT_GT(ambiguous, 3u);
  EXPECT_GT(cut, 1u);
}

TEST(OracleEquivalence, CorpusModels) {
  const ValidatedModel calc = load_model_text(calculator_model_text());
  const ValidatedModel free = validate_or_throw(strip_evaluation_order(calc.model()));
  const ValidatedModel imp = load_model_text(imperative_model_text());
  std::vector<std::pair<const ValidatedModel*, std::string>> cases = {
      {&calc, "1+2*3-4"},     {&calc, "-1*-2"},        {&calc, "((1))"},      {&calc, "1/2/3/4"},
      {&free, "1+2*3-4"},     {&free, "-1*-2"},        {&free, "1-2-3-4"},    {&calc, "1++2"},
      {&imp, "function main() return 1;"},             {&imp, "function main() return -x;"},
      {&imp, "function main() return f(1,2);"},        {&imp, "function main() begin end"},
  };
  for (const auto& [model, input] : cases) {
    PairReport r = compare_with_oracle(*model, input);
    EXPECT_FALSE(r.skipped) << input;
    EXPECT_TRUE(r.agree) << input << ": " << r.detail;
  }
}

TEST(PruningSoundness, EverySurvivorSatisfiesEveryRejectedViolates) {
  const ValidatedModel calc = load_model_text(calculator_model_text());
  const Grammar g = generate_grammar(calc);
  const Lexicon lex = compile_lexicon(calc, g);
  for (const char* input : {"1+2*3-4", "-1-2", "1*2/3*4", "1-2+3", "2*(3+4)-5"}) {
    const ParseForest raw = parse(g, tokenize(lex, input));
    const ParseForest pruned = prune_constraints(raw, calc);
    std::set<std::string> kept;
    for (const ParseTree& t : enumerate_trees(pruned, 1000)) {
      EXPECT_TRUE(oracle_satisfies(t, g, calc)) << input;
      kept.insert(tree_key(t));
    }
    for (const ParseTree& t : enumerate_trees(raw, 1000)) {
      if (!kept.count(tree_key(t))) {
        EXPECT_FALSE(oracle_satisfies(t, g, calc)) << input;
      }
    }
    EXPECT_EQ(kept.size(), 1u) << input;
  }
}

TEST(Assertions, SideEffectFreeAndOrderIndependent) {
  ModelCatalog catalog;
  std::vector<Assertion> all = parse_test_file(read_file(test::source_path("tests/data/calc.tests")),
                                               test::source_path("tests/data"), catalog);
  std::vector<bool> first;
  for (const Assertion& a : all) first.push_back(run_assertion(a, catalog).pass);
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937 rng(3);
  for (int round = 0; round < 3; ++round) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) EXPECT_EQ(run_assertion(all[i], catalog).pass, first[i]) << all[i].line;
  }
}

TEST(Lexer, NodeCountBoundOnRandomModels) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ValidatedModel m = validate_or_throw(random_model(seed));
    const Grammar g = generate_grammar(m);
    const Lexicon lex = compile_lexicon(m, g, nullptr, LexOptions{true});
    SentenceGenerator gen(g, seed);
    auto s = gen.walk(10);
    if (!s) continue;
    const std::string text = SentenceGenerator::join(*s);
    const TokenGraph graph = tokenize(lex, text);
    EXPECT_LE(graph.nodes.size(), text.size() * lex.recognizers.size());
  }
}

}  // namespace
}  // namespace mcc

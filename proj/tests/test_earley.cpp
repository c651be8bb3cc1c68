#include <gtest/gtest.h>

#include <set>

#include "mcc/earley.hpp"
#include "mcc/languages.hpp"
#include "mcc/model_file.hpp"
#include "mcc/weave.hpp"
#include "support.hpp"

namespace mcc {
namespace {

struct Pipeline {
  explicit Pipeline(std::string_view text) : model(load_model_text(text)), grammar(generate_grammar(model)),
                                             lexicon(compile_lexicon(model, grammar)) {}
  ParseForest raw(std::string_view input) const { return parse(grammar, tokenize(lexicon, input)); }
  ParseForest pruned(std::string_view input) const { return prune_constraints(raw(input), model); }
  std::uint64_t count(std::string_view input, bool prune) const {
    return count_trees(prune ? pruned(input) : raw(input));
  }

  ValidatedModel model;
  Grammar grammar;
  Lexicon lexicon;
};

Pipeline calculator() { return Pipeline(calculator_model_text()); }

std::string free_calculator_text() { return print_model(strip_evaluation_order(calculator().model.model())); }

TEST(Earley, CatalanCountsWithoutConstraints) {
  Pipeline free(free_calculator_text());
  // Binary bracketings of n operands: 1, 1, 2, 5, 14.
  EXPECT_EQ(free.count("1", false), 1u);
  EXPECT_EQ(free.count("1*2", false), 1u);
  EXPECT_EQ(free.count("1*2*3", false), 2u);
  EXPECT_EQ(free.count("1*2*3*4", false), 5u);
  EXPECT_EQ(free.count("1*2*3*4*5", false), 14u);
}

TEST(Earley, PruningLeavesOneTree) {
  Pipeline c = calculator();
  for (const char* input : {"1+2*3", "1-2-3", "8/4/2", "1--2", "-1+2", "(1+2)*3", "10/(2+3)*0.5+1"}) {
    EXPECT_EQ(c.count(input, true), 1u) << input;
  }
  EXPECT_EQ(c.count("1+2*3", false), 2u);
}

TEST(Earley, PrunedTreeShape) {
  Pipeline c = calculator();
  ParseForest f = c.pruned("1+2*3");
  auto trees = enumerate_trees(f, 10);
  ASSERT_EQ(trees.size(), 1u);
  const std::string s = tree_string(trees[0], c.grammar, f.tokens());
  // The multiplication is nested as the right operand of the addition.
  const auto add = s.find("AdditionOperator");
  const auto mul = s.find("MultiplicationOperator");
  ASSERT_NE(add, std::string::npos);
  ASSERT_NE(mul, std::string::npos);
  EXPECT_LT(add, mul);
  EXPECT_EQ(trees[0].span, (Span{0, 5}));
}

TEST(Earley, ParseErrorAtFarthestPosition) {
  Pipeline c = calculator();
  try {
    c.raw("1+");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 2u);
    EXPECT_FALSE(e.expected().empty());
  }
  try {
    c.raw("(1+2");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
    EXPECT_NE(std::find(e.expected().begin(), e.expected().end(), "')'"), e.expected().end());
  }
}

TEST(Earley, EmptyInputWithNullableStart) {
  Pipeline p(R"(language L start Block
element Block {
  member items : Item list min 0;
}
basic Item pattern "x"
)");
  EXPECT_EQ(p.count("", false), 1u);
  EXPECT_EQ(p.count("xxx", false), 1u);
  EXPECT_EQ(test::error_of([&] { p.raw("y"); }), ErrorCode::LexicalError);
  Pipeline c = calculator();
  EXPECT_EQ(test::error_of([&] { c.raw(""); }), ErrorCode::ParseError);
}

TEST(Earley, EnumerateRespectsLimitAndOrder) {
  Pipeline free(free_calculator_text());
  ParseForest f = free.raw("1*2*3*4");
  auto all = enumerate_trees(f, 100);
  EXPECT_EQ(all.size(), 5u);
  auto two = enumerate_trees(f, 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(tree_string(two[0], free.grammar, f.tokens()), tree_string(all[0], free.grammar, f.tokens()));
  EXPECT_EQ(tree_string(two[1], free.grammar, f.tokens()), tree_string(all[1], free.grammar, f.tokens()));
  std::set<std::string> distinct;
  for (const auto& t : all) distinct.insert(tree_string(t, free.grammar, f.tokens()));
  EXPECT_EQ(distinct.size(), 5u);
  EXPECT_EQ(count_trees(f, 3), 3u);
}

constexpr const char* kDanglingElse = R"(language D start S
ignore "\s+"
abstract S
element If : S {
  composition %s;
  prefix "if";
  member c : C;
  member then : S;
  member else : S optional prefix "else";
}
element Stmt : S {
  member x : X;
}
basic C pattern "c"
basic X pattern "x"
)";

std::string dangling(const char* policy) {
  std::string text = kDanglingElse;
  text.replace(text.find("%s"), 2, policy);
  return text;
}

// Whether the outermost If owns the else branch.
bool outer_owns_else(const std::string& model_text, const std::string& input) {
  Parser parser(load_model_text(model_text));
  Asg asg = parser.parse(input);
  return asg.node(asg.root).member("else")->present();
}

TEST(Earley, DanglingElse) {
  Pipeline eager(dangling("eager"));
  Pipeline lazy(dangling("lazy"));
  const std::string input = "if c if c x else x";
  EXPECT_EQ(eager.count(input, false), 2u);
  EXPECT_EQ(eager.count(input, true), 1u);
  EXPECT_EQ(lazy.count(input, true), 1u);
  EXPECT_FALSE(outer_owns_else(dangling("eager"), input));
  EXPECT_TRUE(outer_owns_else(dangling("lazy"), input));
  // Without nesting there is nothing to decide.
  EXPECT_EQ(eager.count("if c x else x", true), 1u);
  EXPECT_EQ(lazy.count("if c x else x", true), 1u);
  EXPECT_EQ(lazy.count("if c x", true), 1u);
}

TEST(Earley, RightAssociativity) {
  Pipeline p(R"(language P start E
abstract E
element Bin : E {
  member l : E;
  member op : Op;
  member r : E;
}
basic N : E pattern "[0-9]"
abstract Op {
  assoc right;
}
basic Pow : Op pattern "\^" priority 1
)");
  EXPECT_EQ(p.count("1^2^3", true), 1u);
  Parser parser(p.model);
  Asg asg = parser.parse("1^2^3");
  const AsgNode& root = asg.node(asg.root);
  EXPECT_EQ(asg.node(root.member("l")->node()).span, (Span{0, 1}));
  EXPECT_EQ(asg.node(root.member("r")->node()).span, (Span{2, 5}));
}

TEST(Earley, NonAssociativeRejectsChains) {
  Pipeline p(R"(language P start E
abstract E
element Bin : E {
  member l : E;
  member op : Op;
  member r : E;
}
basic N : E pattern "[0-9]"
abstract Op {
  assoc non;
}
basic Eq : Op pattern "=" priority 1
)");
  EXPECT_EQ(p.count("1=2", true), 1u);
  EXPECT_EQ(p.count("1=2=3", false), 2u);
  EXPECT_EQ(p.count("1=2=3", true), 0u);
}

TEST(Earley, CyclicGrammarTerminates) {
  Pipeline p(R"(language Cy start A
abstract A
element Wrap : A {
  member inner : A;
}
basic T : A pattern "t"
)");
  // A -> Wrap -> A is a unit cycle; the Wrap tree repeats A over one extent.
  EXPECT_EQ(p.count("t", false), 1u);
}

TEST(Earley, TokenAlternativesShareAPosition) {
  Pipeline c = calculator();
  ParseForest f = c.raw("1+2");
  // Both '+' tokens reach the token graph; only the binary reading parses.
  EXPECT_EQ(f.tokens().size(), 4u);
  EXPECT_EQ(count_trees(f), 1u);
  EXPECT_EQ(c.count("1+ +2", true), 1u);
  EXPECT_NE(forest_dot(f).find("digraph"), std::string::npos);
}

}  // namespace
}  // namespace mcc

#include <gtest/gtest.h>

#include <cstring>
#include <map>
#include <set>

#include "json.hpp"
#include "mcc/languages.hpp"
#include "mcc/model_file.hpp"
#include "mcc/weave.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace mcc {
namespace {

std::string cylinder_program() { return read_file(test::source_path("programs/cylinder.imp")); }

const AsgNode& only_child(const Asg& asg, const AsgNode& n, std::string_view member) {
  return asg.node(n.member(member)->node());
}

TEST(Instantiate, LiteralValues) {
  Parser p = calculator_parser();
  Asg a = p.parse("2");
  EXPECT_EQ(a.node(a.root).typeName, "IntegerLiteral");
  EXPECT_EQ(std::get<std::int64_t>(*a.node(a.root).value), 2);
  Asg r = p.parse("0.5");
  EXPECT_EQ(r.node(r.root).typeName, "RealLiteral");
  EXPECT_DOUBLE_EQ(std::get<double>(*r.node(r.root).value), 0.5);
}

TEST(Instantiate, GroupDropsDelimiters) {
  Parser p = calculator_parser();
  Asg a = p.parse("(1)");
  const AsgNode& g = a.node(a.root);
  EXPECT_EQ(g.typeName, "GroupExpression");
  ASSERT_EQ(g.members.size(), 1u);
  EXPECT_EQ(g.members[0].first, "e");
  EXPECT_EQ(only_child(a, g, "e").typeName, "IntegerLiteral");
  EXPECT_EQ(only_child(a, g, "e").span, (Span{1, 2}));
}

TEST(Instantiate, MixedExpressionShape) {
  Parser p = calculator_parser();
  Asg a = p.parse("10/(2+3)*0.5+1");
  const AsgNode& root = a.node(a.root);
  EXPECT_EQ(root.typeName, "BinaryExpression");
  EXPECT_EQ(only_child(a, root, "op").typeName, "AdditionOperator");
  const AsgNode& mul = only_child(a, root, "e1");
  EXPECT_EQ(only_child(a, mul, "op").typeName, "MultiplicationOperator");
  const AsgNode& div = only_child(a, mul, "e1");
  EXPECT_EQ(only_child(a, div, "op").typeName, "DivisionOperator");
  EXPECT_EQ(only_child(a, div, "e2").typeName, "GroupExpression");
}

TEST(Instantiate, SpansNestAndParentsMatch) {
  Parser p = imperative_parser();
  Asg a = p.parse(cylinder_program());
  for (const AsgNode& n : a.nodes) {
    if (n.predefined) continue;
    for (NodeId c : a.children(n.id)) {
      EXPECT_EQ(a.node(c).parent, n.id);
      EXPECT_LE(n.span.start, a.node(c).span.start);
      EXPECT_GE(n.span.end, a.node(c).span.end);
    }
  }
}

// Calculator without evaluation-order constraints plus one custom predicate.
Parser constrained_free_calculator(const std::string& type, const std::string& id, ConstraintPredicate pred) {
  Model m = strip_evaluation_order(load_model_text(calculator_model_text()).model());
  m.find(type)->constraints.customConstraints.push_back(id);
  Registry r;
  r.constraints[id] = std::move(pred);
  return Parser(validate_or_throw(m, &r), r);
}

TEST(CustomConstraints, RejectsValuesAboveLimit) {
  Parser p = constrained_free_calculator("IntegerLiteral", "byte", [](const Asg&, const AsgNode& n) {
    return std::get<std::int64_t>(*n.value) <= 255;
  });
  EXPECT_NO_THROW(p.parse("255"));
  EXPECT_TRUE(test::error_of([&] { p.parse("300"); }).has_value());
  auto violations = apply_custom_constraints(instantiate(enumerate_trees(p.forest("300"), 1).at(0), p.grammar(),
                                                         p.forest("300").tokens(), p.model()),
                                             p.model(), p.registry());
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].constraint, "byte");
}

TEST(CustomConstraints, NoPredicatesIsFine) {
  Parser p = calculator_parser();
  ParseForest f = p.forest("1+2");
  Asg a = instantiate(enumerate_trees(f, 1).at(0), p.grammar(), f.tokens(), p.model());
  EXPECT_TRUE(apply_custom_constraints(a, p.model(), Registry{}).empty());
}

TEST(CustomConstraints, PredicateSelectsAmongAmbiguousTrees) {
  // Reject a binary expression whose left operand is itself binary.
  Parser p = constrained_free_calculator("BinaryExpression", "rightNested", [](const Asg& asg, const AsgNode& n) {
    return asg.node(n.member("e1")->node()).typeName != "BinaryExpression";
  });
  EXPECT_EQ(p.count("1+2*3"), 2u);
  std::vector<Asg> survivors = p.parse_all("1+2*3");
  ASSERT_EQ(survivors.size(), 1u);
  EXPECT_DOUBLE_EQ(evaluate(survivors[0], p.model(), calculator_callbacks()), 7.0);
  EXPECT_DOUBLE_EQ(evaluate(p.parse("2*3+1"), p.model(), calculator_callbacks()), 8.0);
}

TEST(CustomConstraints, FailingPredicateIsReported) {
  Parser p = constrained_free_calculator("IntegerLiteral", "boom", [](const Asg&, const AsgNode&) -> bool {
    throw std::runtime_error("boom");
  });
  EXPECT_EQ(test::error_of([&] { p.parse("1"); }), ErrorCode::ConstraintPredicateError);
}

TEST(References, CylinderProgramEdges) {
  Parser p = imperative_parser();
  Asg a = p.parse(cylinder_program());
  EXPECT_EQ(a.referenceEdges.size(), 31u);
  std::size_t calls = 0;
  for (const ReferenceEdge& e : a.referenceEdges) {
    const AsgNode& from = a.node(e.from);
    const Reference& ref = from.member(e.member)->reference();
    const std::string type = from.typeName == "FunctionCallExpression" ? "Function" : "Variable";
    calls += type == "Function";
    EXPECT_EQ(a.node(e.to).typeName, type);
    EXPECT_EQ(test::naive_lookup(a, e.from, ref.lexeme, type), e.to) << ref.lexeme << " at " << ref.span.start;
  }
  EXPECT_EQ(calls, 9u);

  auto edge_for = [&](const std::string& lexeme) {
    std::vector<NodeId> targets;
    for (const ReferenceEdge& e : a.referenceEdges) {
      if (a.node(e.from).member(e.member)->reference().lexeme == lexeme) targets.push_back(e.to);
    }
    return targets;
  };
  const std::string text = cylinder_program();
  auto decl = [&](const std::string& name) {
    for (const AsgNode& n : a.nodes) {
      if (n.typeName == "Function" && !n.predefined &&
          a.node(n.member("identifier")->node()).lexeme == name) {
        return n.id;
      }
    }
    return NodeId(-1);
  };
  EXPECT_EQ(edge_for("cylinderVolume"), std::vector<NodeId>{decl("cylinderVolume")});
  EXPECT_EQ(edge_for("rectangleArea"), std::vector<NodeId>{decl("rectangleArea")});
  EXPECT_EQ(a.node(decl("cylinderVolume")).span.start, text.find("function cylinderVolume"));
}

TEST(References, Recursion) {
  Parser p = imperative_parser();
  Asg a = p.parse("function main() function fact(n) if (n <= 1) return 1; else return n*fact(n-1); return fact(5);");
  NodeId fact = 0;
  for (const AsgNode& n : a.nodes) {
    if (n.typeName == "Identifier" && n.lexeme == "fact" && a.node(*n.parent).typeName == "Function") fact = *n.parent;
  }
  std::size_t self = 0;
  for (const ReferenceEdge& e : a.referenceEdges) {
    if (a.node(e.from).member(e.member)->reference().lexeme != "fact") continue;
    EXPECT_EQ(e.to, fact);
    // The inner call sits inside fact's own body.
    if (a.node(e.from).span.start > a.node(fact).span.start && a.node(e.from).span.end <= a.node(fact).span.end) {
      ++self;
    }
  }
  EXPECT_EQ(self, 1u);
  std::istringstream in;
  std::ostringstream out;
  EXPECT_DOUBLE_EQ(run_imperative(a, p.model(), in, out).returnValue, 120.0);
}

TEST(References, ShadowingPicksInnermost) {
  Parser p = imperative_parser();
  const std::string program =
      "function main() variables x; function f() variables x; begin x = 1; return x; end "
      "begin x = 2; return f() + x; end";
  Asg a = p.parse(program);
  std::map<std::size_t, NodeId> by_offset;  // reference offset -> declaration
  for (const ReferenceEdge& e : a.referenceEdges) {
    by_offset[a.node(e.from).member(e.member)->reference().span.start] = e.to;
  }
  const std::size_t outer_decl = program.find("x;");
  const std::size_t inner_decl = program.find("x;", outer_decl + 1);
  auto decl_at = [&](std::size_t offset) { return a.node(by_offset.at(offset)).span.start; };
  EXPECT_EQ(decl_at(program.find("x = 1")), inner_decl);
  EXPECT_EQ(decl_at(program.find("return x") + 7), inner_decl);
  EXPECT_EQ(decl_at(program.find("x = 2")), outer_decl);
  EXPECT_EQ(decl_at(program.find("+ x") + 2), outer_decl);
  std::istringstream in;
  std::ostringstream out;
  EXPECT_DOUBLE_EQ(run_imperative(a, p.model(), in, out).returnValue, 3.0);
}

TEST(References, CataphoraWithinOneScope) {
  Parser p = imperative_parser();
  const std::string program = "function main() function f() return g(); function g() return 7; return f();";
  Asg a = p.parse(program);
  bool found = false;
  for (const ReferenceEdge& e : a.referenceEdges) {
    const Reference& r = a.node(e.from).member(e.member)->reference();
    if (r.lexeme != "g") continue;
    found = true;
    EXPECT_LT(r.span.start, a.node(e.to).span.start);
    EXPECT_EQ(a.node(e.to).span.start, program.find("function g"));
  }
  EXPECT_TRUE(found);
  std::istringstream in;
  std::ostringstream out;
  EXPECT_DOUBLE_EQ(run_imperative(a, p.model(), in, out).returnValue, 7.0);
}

TEST(References, Errors) {
  Parser p = imperative_parser();
  try {
    p.parse("function main() return y;");
    FAIL() << "expected an unresolved reference";
  } catch (const UnresolvedReferenceError& e) {
    EXPECT_EQ(e.lexeme(), "y");
    EXPECT_EQ(e.span(), (Span{23, 24}));
  }
  EXPECT_EQ(test::error_of([&] { p.parse("function main() variables a, a; return 0;"); }),
            ErrorCode::DuplicateDeclaration);
  EXPECT_EQ(test::error_of([&] { p.parse("function main() function h() return 1; function h() return 2; return 0;"); }),
            ErrorCode::DuplicateDeclaration);
}

TEST(References, TypeFilteredLookupKeepsFunctionsVisible) {
  Parser p = imperative_parser();
  Asg a = p.parse("function main() variables sin; begin sin = 2; return sin(0) + sin; end");
  std::istringstream in;
  std::ostringstream out;
  EXPECT_DOUBLE_EQ(run_imperative(a, p.model(), in, out).returnValue, 2.0);
}

TEST(References, ClosureAndScopeMonotonicity) {
  Parser p = imperative_parser();
  Asg a = p.parse(cylinder_program());
  for (const AsgNode& n : a.nodes) {
    for (const auto& [name, v] : n.members) {
      for (const Reference& r : v.references) EXPECT_TRUE(r.target.has_value()) << name;
    }
  }
  std::set<std::string> lexemes;
  for (const Scope& s : a.scopes) {
    for (const auto& [k, _] : s.bindings) lexemes.insert(k);
  }
  const TypeId var = p.model().id_of("Variable");
  const TypeId fun = p.model().id_of("Function");
  std::size_t checked = 0;
  for (std::size_t c = 0; c < a.scopes.size(); ++c) {
    if (!a.scopes[c].parent) continue;
    const std::size_t parent = *a.scopes[c].parent;
    for (const auto& x : lexemes) {
      if (a.scopes[c].bindings.count(x)) continue;
      for (TypeId t : {var, fun}) {
        EXPECT_EQ(a.lookup(p.model(), c, x, t), a.lookup(p.model(), parent, x, t)) << x;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100u);
}

TEST(Evaluate, CalculatorValues) {
  Parser p = calculator_parser();
  EXPECT_DOUBLE_EQ(eval_calculator(p, "10/(2+3)*0.5+1"), 2.0);
  EXPECT_DOUBLE_EQ(eval_calculator(p, "-2"), -2.0);
  EXPECT_DOUBLE_EQ(eval_calculator(p, "8-4-2"), 2.0);
  EXPECT_DOUBLE_EQ(eval_calculator(p, "+3"), 3.0);
  EXPECT_TRUE(std::isinf(eval_calculator(p, "1/0")));
}

TEST(Evaluate, MissingCallback) {
  Parser p = calculator_parser();
  Callbacks partial = calculator_callbacks();
  partial.erase("DivisionOperator");
  partial.erase("BinaryOperator");
  EXPECT_DOUBLE_EQ(evaluate(p.parse("1+2"), p.model(), partial), 3.0);
  EXPECT_EQ(test::error_of([&] { evaluate(p.parse("1/2"), p.model(), partial); }), ErrorCode::MissingCallback);
}

TEST(Evaluate, SupertypeFallback) {
  Parser p = calculator_parser();
  Callbacks cb = calculator_callbacks();
  cb.erase("IntegerLiteral");
  cb.erase("RealLiteral");
  cb["LiteralExpression"] = [](EvalContext&) { return 42.0; };
  EXPECT_DOUBLE_EQ(evaluate(p.parse("1+0.5"), p.model(), cb), 84.0);
}

TEST(Evaluate, RepeatedEvaluationIsBitIdentical) {
  Parser p = calculator_parser();
  for (const char* e : {"10/(2+3)*0.5+1", "1/3", "0.1+0.2", "-(7/9)*3.3"}) {
    Asg a = p.parse(e);
    const double x = evaluate(a, p.model(), calculator_callbacks());
    const double y = evaluate(a, p.model(), calculator_callbacks());
    EXPECT_EQ(std::memcmp(&x, &y, sizeof x), 0) << e;
  }
}

TEST(Export, JsonFieldOrder) {
  Parser p = imperative_parser();
  Asg a = p.parse("function main() variables x; begin x = 1; return x; end");
  auto doc = nlohmann::ordered_json::parse(asg_json(a));
  std::vector<std::string> top;
  for (auto it = doc.begin(); it != doc.end(); ++it) top.push_back(it.key());
  EXPECT_EQ(top, (std::vector<std::string>{"nodes", "root", "refEdges"}));
  for (const auto& n : doc["nodes"]) {
    std::vector<std::string> keys;
    for (auto it = n.begin(); it != n.end(); ++it) keys.push_back(it.key());
    EXPECT_EQ(keys, (std::vector<std::string>{"id", "type", "span", "value", "members"}));
  }
  ASSERT_EQ(doc["refEdges"].size(), 2u);
  std::vector<std::string> keys;
  for (auto it = doc["refEdges"][0].begin(); it != doc["refEdges"][0].end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"from", "member", "to"}));
  EXPECT_EQ(doc["refEdges"][0]["member"], "variable");
}

TEST(Export, DotDashesReferenceEdges) {
  Parser p = imperative_parser();
  Asg a = p.parse(cylinder_program());
  const std::string dot = asg_dot(a);
  std::size_t dashed = 0;
  for (std::size_t at = dot.find("dashed"); at != std::string::npos; at = dot.find("dashed", at + 1)) ++dashed;
  EXPECT_EQ(dashed, a.referenceEdges.size());
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
}

TEST(Export, PrettyPrintRoundTrip) {
  Parser calc = calculator_parser();
  for (const char* e : {"10/(2+3)*0.5+1", "-2", "1--2", "((1))", "8/4/2", "2+3*4"}) {
    Asg a = calc.parse(e);
    const std::string text = pretty_print(a, calc.model());
    EXPECT_EQ(asg_shape(calc.parse(text)), asg_shape(a)) << e << " -> " << text;
  }
  Parser imp = imperative_parser();
  Asg program = imp.parse(cylinder_program());
  const std::string text = pretty_print(program, imp.model());
  EXPECT_EQ(asg_shape(imp.parse(text)), asg_shape(program));
}

}  // namespace
}  // namespace mcc

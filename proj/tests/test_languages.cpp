#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mcc/languages.hpp"
#include "mcc/model_file.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace mcc {
namespace {

class ExpressionGenerator {
 public:
  explicit ExpressionGenerator(std::uint64_t seed) : rng_(seed) {}

  std::string expression(int depth) {
    std::string out = term(depth);
    const int extra = static_cast<int>(rng_() % 4);
    for (int i = 0; i < extra; ++i) out += space() + "+-*/"[rng_() % 4] + space() + term(depth);
    return out;
  }

 private:
  std::string term(int depth) {
    std::string prefix;
    while (rng_() % 5 == 0) prefix += rng_() % 2 ? "-" : "+";
    if (depth > 0 && rng_() % 4 == 0) return prefix + "(" + expression(depth - 1) + ")";
    std::string n = std::to_string(rng_() % 100);
    if (rng_() % 3 == 0) n += "." + std::to_string(rng_() % 100);
    return prefix + n;
  }
  std::string space() { return rng_() % 3 == 0 ? " " : ""; }

  std::mt19937_64 rng_;
};

bool close(double a, double b, double rel) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::fabs(a - b) <= rel * std::max(1.0, std::fabs(b));
}

TEST(Calculator, AgreesWithShuntingYard) {
  Parser p = calculator_parser();
  ExpressionGenerator gen(2024);
  for (int i = 0; i < 1000; ++i) {
    const std::string e = gen.expression(3);
    const double expected = test::ShuntingYard::eval(e);
    const double got = eval_calculator(p, e);
    EXPECT_TRUE(close(got, expected, 1e-9)) << e << ": " << got << " vs " << expected;
  }
}

TEST(Calculator, WorkedExamples) {
  Parser p = calculator_parser();
  EXPECT_EQ(format_number(eval_calculator(p, "10/(2+3)*0.5+1")), "2");
  EXPECT_DOUBLE_EQ(eval_calculator(p, "8-4-2"), 2);
  EXPECT_DOUBLE_EQ(eval_calculator(p, "8/4/2"), 1);
  EXPECT_DOUBLE_EQ(eval_calculator(p, "2+3*4"), 14);
  EXPECT_DOUBLE_EQ(eval_calculator(p, "1--2"), 3);
}

TEST(Calculator, NumberFormatting) {
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(-0.5), "-0.5");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.30000000000000004");
  EXPECT_EQ(format_number(1e20), "1e+20");
  EXPECT_EQ(format_number(1.0 / 0.0), "inf");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

struct Outcome {
  double value = 0;
  bool returned = false;
  std::string printed;
};

Outcome run(const std::string& program, const std::string& input = "") {
  Parser p = imperative_parser();
  Asg a = p.parse(program);
  std::istringstream in(input);
  std::ostringstream out;
  RunResult r = run_imperative(a, p.model(), in, out);
  return {r.returnValue, r.returned, out.str()};
}

TEST(Imperative, CylinderProgram) {
  const std::string program = read_file(test::source_path("programs/cylinder.imp"));
  Outcome ok = run(program, "2\n3\n");
  const double pi = std::acos(-1.0);
  // power(pi*radius, 2) * height
  EXPECT_NEAR(std::stod(ok.printed), (pi * 2) * (pi * 2) * 3, 1e-9);
  EXPECT_FALSE(ok.returned);
  Outcome bad = run(program, "-1\n3\n");
  EXPECT_EQ(bad.printed, "");
  EXPECT_TRUE(bad.returned);
  EXPECT_EQ(bad.value, -1);
}

TEST(Imperative, Builtins) {
  EXPECT_DOUBLE_EQ(run("function main() return power(2,10);").value, 1024);
  EXPECT_DOUBLE_EQ(run("function main() return root(81);").value, 9);
  EXPECT_DOUBLE_EQ(run("function main() return root(27,3);").value, 3);
  EXPECT_NEAR(run("function main() return log(e);").value, 1, 1e-15);
  EXPECT_DOUBLE_EQ(run("function main() return log(8,2);").value, 3);
  EXPECT_DOUBLE_EQ(run("function main() return floor(2.7) + ceil(2.2) + round(2.5);").value, 8);
  EXPECT_NEAR(run("function main() return sin(pi/2) + cos(0) + tan(0);").value, 2, 1e-15);
  EXPECT_NEAR(run("function main() return arcsin(1) + arccos(1) + arctan(0);").value, std::acos(-1.0) / 2, 1e-15);
  EXPECT_EQ(run("function main() begin print(read() + read()); print(0.5); end", "1\n\n2\n").printed, "3\n0.5\n");
}

TEST(Imperative, ControlFlow) {
  const char* loop =
      "function main() variables i, s; begin i = 0; s = 0; "
      "while (i < 10) begin i = i + 1; s = s + i; end return s; end";
  EXPECT_DOUBLE_EQ(run(loop).value, 55);
  const char* fib =
      "function main() function fib(n) if (n < 2) return n; else return fib(n-1) + fib(n-2); return fib(15);";
  EXPECT_DOUBLE_EQ(run(fib).value, 610);
  EXPECT_DOUBLE_EQ(run("function main() if (1 == 1 && !(2 != 2) || 0) return 4; else return 5;").value, 4);
  EXPECT_DOUBLE_EQ(run("function main() return (3 >= 3) + (2 > 3) + (1 <= 0);").value, 1);
  // Short-circuit: the division by an unread value never runs.
  EXPECT_EQ(run("function main() if (0 && read()) print(1);").printed, "");
}

TEST(Imperative, NestedFunctionsReadEnclosingVariables) {
  const char* program =
      "function main() variables k; function scale(x) return k*x; begin k = 3; return scale(5); end";
  EXPECT_DOUBLE_EQ(run(program).value, 15);
}

TEST(Imperative, RuntimeErrors) {
  EXPECT_EQ(test::error_of([] { run("function main() return read();"); }), ErrorCode::RuntimeEvalError);
  EXPECT_EQ(test::error_of([] { run("function main() return power(1);"); }), ErrorCode::RuntimeEvalError);
  EXPECT_EQ(test::error_of([] {
              run("function main() function f(a) return a; return f(1, 2);");
            }),
            ErrorCode::RuntimeEvalError);
  EXPECT_EQ(test::error_of([] { run("function main() function f() return f(); return f();"); }),
            ErrorCode::RuntimeEvalError);
}

}  // namespace
}  // namespace mcc

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"
#include "mcc/cli.hpp"
#include "support.hpp"

namespace mcc {
namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result cli(std::vector<std::string> args, const std::string& stdin_text = "", bool color = false) {
  args.insert(args.begin(), "mcc");
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = run_cli(args, in, out, err, color);
  return {code, out.str(), err.str()};
}

std::string model(const std::string& name) { return test::source_path("models/" + name); }

class Scratch {
 public:
  Scratch() : dir_(std::filesystem::temp_directory_path() / ("mcc_cli_" + std::to_string(::getpid()))) {
    std::filesystem::create_directories(dir_);
  }
  ~Scratch() { std::filesystem::remove_all(dir_); }
  std::string file(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return (dir_ / name).string();
  }

 private:
  std::filesystem::path dir_;
};

TEST(Cli, Check) {
  Result r = cli({"check", model("calculator.mcc")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("ok: Calculator, 15 element types, ", 0), 0u) << r.out;
  Scratch s;
  Result bad = cli({"check", s.file("bad.mcc", "language L start S\nelement S {\n  member x : Nope;\n}\n")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("error[UnknownType]"), std::string::npos) << bad.err;
  Result syntax = cli({"check", s.file("syntax.mcc", "language L start S\nabstract S {\n  assoc up;\n}\n")});
  EXPECT_EQ(syntax.code, 1);
  EXPECT_NE(syntax.err.find("error[FormatError]"), std::string::npos);
  EXPECT_NE(syntax.err.find(":3:"), std::string::npos) << syntax.err;
}

TEST(Cli, GrammarMatchesGolden) {
  Result r = cli({"grammar", model("calculator.mcc")});
  EXPECT_EQ(r.code, 0);
  std::ifstream golden(test::source_path("tests/data/calculator.grammar"));
  std::stringstream expected;
  expected << golden.rdbuf();
  EXPECT_EQ(r.out, expected.str());
  EXPECT_EQ(cli({"grammar", "calculator"}).out, r.out);
}

TEST(Cli, ParseJson) {
  Result r = cli({"parse", model("calculator.mcc"), "-"}, "10/(2+3)*0.5+1");
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  const auto& root = doc["nodes"][doc["root"].get<std::size_t>()];
  EXPECT_EQ(root["type"], "BinaryExpression");
  const auto& op = doc["nodes"][root["members"]["op"].get<std::size_t>()];
  EXPECT_EQ(op["type"], "AdditionOperator");
}

TEST(Cli, ParseFailuresAndAmbiguity) {
  Result r = cli({"parse", model("calculator.mcc")}, "1+");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error[ParseError]"), std::string::npos);
  EXPECT_NE(r.err.find("<stdin>:1:3"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("   | 1+"), std::string::npos);

  Scratch s;
  const std::string free_model = s.file("free.mcc",
                                        "language Free start E\nabstract E\nelement B : E {\n  member l : E;\n"
                                        "  member op : O;\n  member r : E;\n}\nbasic N : E pattern \"[0-9]\"\n"
                                        "basic O pattern \"\\+\"\n");
  Result amb = cli({"parse", free_model}, "1+2+3");
  EXPECT_EQ(amb.code, 2);
  EXPECT_NE(amb.err.find("error[AmbiguousParse]"), std::string::npos);
  EXPECT_NE(amb.err.find("2 parses"), std::string::npos) << amb.err;
  Result all = cli({"parse", free_model, "--all-parses"}, "1+2+3");
  EXPECT_EQ(all.code, 0);
  EXPECT_EQ(nlohmann::json::parse(all.out).size(), 2u);
  EXPECT_EQ(cli({"parse", free_model, "--count"}, "1+2+3+4").out, "5\n");
}

TEST(Cli, ParseDumps) {
  Result tokens = cli({"parse", "calculator", "--dump", "tokens"}, "1+2");
  EXPECT_NE(tokens.out.find("PlusOperator:+@[1,2)"), std::string::npos);
  EXPECT_NE(tokens.out.find("AdditionOperator:+@[1,2)"), std::string::npos);
  EXPECT_EQ(cli({"parse", "calculator", "--dump", "forest"}, "1").out.rfind("digraph", 0), 0u);
  Result dot = cli({"parse", model("imperative.mcc"), test::source_path("programs/cylinder.imp"), "--dump", "dot"});
  ASSERT_EQ(dot.code, 0) << dot.err;
  std::size_t dashed = 0;
  for (auto at = dot.out.find("dashed"); at != std::string::npos; at = dot.out.find("dashed", at + 1)) ++dashed;
  EXPECT_EQ(dashed, 31u);
  EXPECT_EQ(cli({"parse", "calculator", "--dump", "xml"}, "1").code, 105);
}

TEST(Cli, Predefine) {
  Scratch s;
  const std::string m = s.file("refs.mcc",
                               "language R start U\nelement U {\n  member target : D ref;\n}\n"
                               "element D {\n  member name : Id id;\n}\nbasic Id pattern \"[a-z]+\"\n");
  EXPECT_EQ(cli({"parse", m}, "x").code, 1);
  Result r = cli({"parse", m, "--predefine", "D:x"}, "x");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["refEdges"].size(), 1u);
  EXPECT_EQ(cli({"parse", m, "--predefine", "nocolon"}, "x").code, 1);
}

TEST(Cli, EvalCalc) {
  Result r = cli({"eval", "--lang", "calc"}, "10/(2+3)*0.5+1\n\n8-4-2\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "2\n2\n");
  Result bad = cli({"eval", "--lang", "calc"}, "1+1\n2*\n");
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(bad.out, "2\n");
  EXPECT_NE(bad.err.find("<stdin>:2:3"), std::string::npos) << bad.err;
}

TEST(Cli, EvalImp) {
  Scratch s;
  const std::string program = test::source_path("programs/cylinder.imp");
  Result ok = cli({"eval", "--lang", "imp", program, "--stdin", s.file("in.txt", "2\n3\n")});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(ok.out, "118.4352528130723\n");
  Result neg = cli({"eval", "--lang", "imp", program, "--print-return"}, "-1\n3\n");
  EXPECT_EQ(neg.out, "");
  EXPECT_EQ(neg.err, "main returned -1\n");
  EXPECT_EQ(neg.code, 255);
  EXPECT_EQ(cli({"eval", "--lang", "imp", "-"}, "function main() return 7;").code, 7);
  Result unresolved = cli({"eval", "--lang", "imp", "-"}, "function main() return zz;");
  EXPECT_EQ(unresolved.code, 1);
  EXPECT_NE(unresolved.err.find("error[UnresolvedReference]"), std::string::npos);
  EXPECT_EQ(cli({"eval", "--lang", "imp", program, "--stdin", "/nonexistent"}).code, 1);
}

TEST(Cli, Test) {
  Result r = cli({"test", test::source_path("tests/data/calc.tests")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("TAP version 13\n", 0), 0u);
  Scratch s;
  EXPECT_EQ(cli({"test", s.file("f.tests", "matches calculator \"1+\"\n")}).code, 1);
  Result empty = cli({"test", s.file("e.tests", "")});
  EXPECT_EQ(empty.code, 0);
  EXPECT_NE(empty.out.find("0 assertions"), std::string::npos);
  Result malformed = cli({"test", s.file("m.tests", "bogus\n")});
  EXPECT_EQ(malformed.code, 2);
  EXPECT_NE(malformed.err.find("m.tests:1:1"), std::string::npos) << malformed.err;
}

TEST(Cli, Colors) {
  Result plain = cli({"eval", "--lang", "calc"}, "1+\n");
  EXPECT_EQ(plain.err.find("\x1b["), std::string::npos);
  Result colored = cli({"eval", "--lang", "calc"}, "1+\n", true);
  EXPECT_NE(colored.err.find("\x1b[1;31m"), std::string::npos);
  ::setenv("MCC_COLOR", "0", 1);
  EXPECT_FALSE(color_from_environment());
  ::setenv("MCC_COLOR", "1", 1);
  EXPECT_TRUE(color_from_environment());
  ::unsetenv("MCC_COLOR");
}

TEST(Cli, Usage) {
  EXPECT_NE(cli({}).code, 0);
  Result help = cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("parse"), std::string::npos);
  EXPECT_NE(cli({"frobnicate"}).code, 0);
}

}  // namespace
}  // namespace mcc

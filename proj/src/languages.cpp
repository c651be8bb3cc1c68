#include "mcc/languages.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "mcc/builtin_models.hpp"
#include "mcc/model_file.hpp"

namespace mcc {

std::string_view calculator_model_text() { return kCalculatorModelText; }
std::string_view imperative_model_text() { return kImperativeModelText; }

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  if (value == std::floor(value) && std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, r.ptr);
}

namespace {

double number_of(const AsgNode& n) {
  if (!n.value) throw Error(ErrorCode::RuntimeEvalError, n.typeName + " carries no value", n.span);
  if (auto i = std::get_if<std::int64_t>(&*n.value)) return static_cast<double>(*i);
  if (auto d = std::get_if<double>(&*n.value)) return *d;
  throw Error(ErrorCode::RuntimeEvalError, n.typeName + " does not hold a number", n.span);
}

void add_expression_callbacks(Callbacks& cb) {
  cb["BinaryExpression"] = [](EvalContext& c) {
    return c.apply(c.member("op").node(), {c.member("e1").node(), c.member("e2").node()});
  };
  cb["UnaryExpression"] = [](EvalContext& c) { return c.apply(c.member("op").node(), {c.member("e").node()}); };
  cb["GroupExpression"] = [](EvalContext& c) { return c.eval_member("e"); };
  cb["LiteralExpression"] = [](EvalContext& c) { return number_of(c.node()); };
  cb["PlusOperator"] = [](EvalContext& c) { return c.operand(0); };
  cb["MinusOperator"] = [](EvalContext& c) { return -c.operand(0); };
  cb["AdditionOperator"] = [](EvalContext& c) { return c.operand(0) + c.operand(1); };
  cb["SubtractionOperator"] = [](EvalContext& c) { return c.operand(0) - c.operand(1); };
  cb["MultiplicationOperator"] = [](EvalContext& c) { return c.operand(0) * c.operand(1); };
  cb["DivisionOperator"] = [](EvalContext& c) { return c.operand(0) / c.operand(1); };
}

}  // namespace

Callbacks calculator_callbacks() {
  Callbacks cb;
  add_expression_callbacks(cb);
  return cb;
}

Parser calculator_parser() { return Parser(load_model_text(calculator_model_text())); }

double eval_calculator(const Parser& parser, std::string_view expression) {
  Asg asg = parser.parse(expression);
  return evaluate(asg, parser.model(), calculator_callbacks());
}

std::vector<Predefined> imperative_globals() {
  std::vector<Predefined> out;
  for (const char* f : {"read", "print", "sin", "cos", "tan", "arcsin", "arccos", "arctan", "floor", "ceil", "round",
                        "power", "root", "log"}) {
    out.push_back({f, "Function"});
  }
  out.push_back({"pi", "Variable"});
  out.push_back({"e", "Variable"});
  return out;
}

Parser imperative_parser() {
  return Parser(load_model_text(imperative_model_text()), {}, {}, imperative_globals());
}

namespace {

struct ReturnSignal {
  double value;
};

constexpr std::size_t kMaxCallDepth = 2000;

class Interpreter {
 public:
  Interpreter(const Asg& asg, std::istream& in, std::ostream& out) : asg_(asg), in_(in), out_(out) {
    globals_["pi"] = M_PI;
    globals_["e"] = M_E;
  }

  Callbacks callbacks() {
    Callbacks cb;
    add_expression_callbacks(cb);
    auto zero = [](EvalContext&) { return 0.0; };
    cb["Function"] = zero;
    cb["Variable"] = zero;
    cb["Identifier"] = zero;
    cb["Program"] = [this](EvalContext& c) {
      auto [value, returned] = call(c, c.member("main").node(), {});
      result_ = {value, returned};
      return value;
    };
    cb["BlockStatement"] = [](EvalContext& c) {
      for (NodeId s : c.member("statements").nodes) c.eval(s);
      return 0.0;
    };
    cb["AssignmentStatement"] = [this](EvalContext& c) {
      const Reference& r = c.member("variable").reference();
      double v = c.eval_member("expression");
      slot(*r.target, r.span) = v;
      return 0.0;
    };
    cb["IfStatement"] = [](EvalContext& c) {
      if (c.eval_member("condition") != 0) {
        c.eval_member("then");
      } else if (c.member("else").present()) {
        c.eval_member("else");
      }
      return 0.0;
    };
    cb["WhileStatement"] = [](EvalContext& c) {
      while (c.eval_member("condition") != 0) c.eval_member("body");
      return 0.0;
    };
    cb["ReturnStatement"] = [](EvalContext& c) -> double { throw ReturnSignal{c.eval_member("expression")}; };
    cb["ExpressionStatement"] = [](EvalContext& c) {
      c.eval_member("expression");
      return 0.0;
    };
    cb["VariableExpression"] = [this](EvalContext& c) {
      const Reference& r = c.member("variable").reference();
      return slot(*r.target, r.span);
    };
    cb["FunctionCallExpression"] = [this](EvalContext& c) {
      const Reference& r = c.member("function").reference();
      const auto& args = c.member("arguments").nodes;
      const AsgNode& fn = asg_.node(*r.target);
      if (fn.predefined) return builtin(c, fn.lexeme, args, c.node().span);
      std::vector<double> values;
      for (NodeId a : args) values.push_back(c.eval(a));
      return call(c, fn.id, values).first;
    };
    cb["NotOperator"] = [](EvalContext& c) { return c.operand(0) == 0 ? 1.0 : 0.0; };
    cb["LessThanOperator"] = [](EvalContext& c) { return c.operand(0) < c.operand(1) ? 1.0 : 0.0; };
    cb["LessOrEqualOperator"] = [](EvalContext& c) { return c.operand(0) <= c.operand(1) ? 1.0 : 0.0; };
    cb["GreaterThanOperator"] = [](EvalContext& c) { return c.operand(0) > c.operand(1) ? 1.0 : 0.0; };
    cb["GreaterOrEqualOperator"] = [](EvalContext& c) { return c.operand(0) >= c.operand(1) ? 1.0 : 0.0; };
    cb["EqualOperator"] = [](EvalContext& c) { return c.operand(0) == c.operand(1) ? 1.0 : 0.0; };
    cb["NotEqualOperator"] = [](EvalContext& c) { return c.operand(0) != c.operand(1) ? 1.0 : 0.0; };
    cb["AndOperator"] = [](EvalContext& c) { return c.operand(0) != 0 && c.operand(1) != 0 ? 1.0 : 0.0; };
    cb["OrOperator"] = [](EvalContext& c) { return c.operand(0) != 0 || c.operand(1) != 0 ? 1.0 : 0.0; };
    return cb;
  }

  RunResult result() const { return result_; }

 private:
  struct Frame {
    NodeId function;
    std::map<NodeId, double> variables;
  };

  std::pair<double, bool> call(EvalContext& c, NodeId function, const std::vector<double>& args) {
    const AsgNode& fn = asg_.node(function);
    const auto& params = fn.member("parameters")->nodes;
    if (params.size() != args.size()) {
      throw Error(ErrorCode::RuntimeEvalError,
                  "function '" + asg_.node(fn.member("identifier")->node()).lexeme + "' expects " +
                      std::to_string(params.size()) + " arguments, got " + std::to_string(args.size()),
                  fn.span);
    }
    if (frames_.size() >= kMaxCallDepth) {
      throw Error(ErrorCode::RuntimeEvalError, "call depth limit exceeded", fn.span);
    }
    Frame frame{function, {}};
    for (std::size_t i = 0; i < params.size(); ++i) frame.variables[params[i]] = args[i];
    for (NodeId v : fn.member("variables")->nodes) frame.variables[v] = 0;
    frames_.push_back(std::move(frame));
    struct Pop {
      std::vector<Frame>& f;
      ~Pop() { f.pop_back(); }
    } pop{frames_};
    try {
      c.eval(fn.member("body")->node());
    } catch (const ReturnSignal& r) {
      return {r.value, true};
    }
    return {0.0, false};
  }

  // Storage of a variable declaration: the innermost active frame of the
  // function that declares it, or the predefined globals.
  double& slot(NodeId declaration, Span use) {
    const AsgNode& d = asg_.node(declaration);
    if (d.predefined) return globals_[d.lexeme];
    for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
      auto v = it->variables.find(declaration);
      if (v != it->variables.end()) return v->second;
    }
    throw Error(ErrorCode::RuntimeEvalError, "variable is not live here", use);
  }

  double builtin(EvalContext& c, const std::string& name, const std::vector<NodeId>& args, Span span) {
    std::vector<double> v;
    for (NodeId a : args) v.push_back(c.eval(a));
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (v.size() < lo || v.size() > hi) {
        throw Error(ErrorCode::RuntimeEvalError, "wrong number of arguments to '" + name + "'", span);
      }
    };
    if (name == "read") {
      arity(0, 0);
      std::string line;
      while (std::getline(in_, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        char* end = nullptr;
        double x = std::strtod(line.c_str(), &end);
        if (end == line.c_str()) throw Error(ErrorCode::RuntimeEvalError, "read(): not a number: " + line, span);
        return x;
      }
      throw Error(ErrorCode::RuntimeEvalError, "read(): no more input", span);
    }
    if (name == "print") {
      arity(1, SIZE_MAX);
      for (double x : v) out_ << format_number(x) << "\n";
      return 0;
    }
    if (name == "power") {
      arity(2, 2);
      return std::pow(v[0], v[1]);
    }
    if (name == "root") {
      arity(1, 2);
      return v.size() == 1 ? std::sqrt(v[0]) : std::pow(v[0], 1.0 / v[1]);
    }
    if (name == "log") {
      arity(1, 2);
      return v.size() == 1 ? std::log(v[0]) : std::log(v[0]) / std::log(v[1]);
    }
    arity(1, 1);
    if (name == "sin") return std::sin(v[0]);
    if (name == "cos") return std::cos(v[0]);
    if (name == "tan") return std::tan(v[0]);
    if (name == "arcsin") return std::asin(v[0]);
    if (name == "arccos") return std::acos(v[0]);
    if (name == "arctan") return std::atan(v[0]);
    if (name == "floor") return std::floor(v[0]);
    if (name == "ceil") return std::ceil(v[0]);
    if (name == "round") return std::round(v[0]);
    throw Error(ErrorCode::RuntimeEvalError, "unknown predefined function '" + name + "'", span);
  }

  const Asg& asg_;
  std::istream& in_;
  std::ostream& out_;
  std::vector<Frame> frames_;
  std::map<std::string, double> globals_;
  RunResult result_;
};

}  // namespace

RunResult run_imperative(const Asg& program, const ValidatedModel& model, std::istream& in, std::ostream& out) {
  Interpreter interpreter(program, in, out);
  Callbacks cb = interpreter.callbacks();
  evaluate(program, model, cb);
  return interpreter.result();
}

}  // namespace mcc

#include "mcc/cli.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "mcc/harness.hpp"
#include "mcc/languages.hpp"
#include "mcc/model_file.hpp"

namespace mcc {

bool color_from_environment() {
  if (const char* v = std::getenv("MCC_COLOR")) {
    if (std::string_view(v) == "0") return false;
    if (std::string_view(v) == "1") return true;
  }
  return ::isatty(STDERR_FILENO) != 0;
}

void report_error(std::ostream& err, const Error& error, std::string_view source, const std::string& origin,
                  bool color) {
  const char* red = color ? "\x1b[1;31m" : "";
  const char* blue = color ? "\x1b[1;34m" : "";
  const char* reset = color ? "\x1b[0m" : "";
  err << red << "error[" << to_string(error.code()) << "]" << reset << ": " << error.what() << "\n";

  std::size_t line = 0, column = 0;
  if (auto f = dynamic_cast<const FormatError*>(&error)) {
    line = f->line();
    column = f->column();
  } else if (error.span() && error.span()->start <= source.size()) {
    // End-of-input failures point just past the last visible character.
    const std::size_t visible = source.find_last_not_of(" \t\r\n") + 1;
    const std::size_t at = std::min(error.span()->start, visible);
    line = 1;
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < at; ++i) {
      if (source[i] == '\n') {
        ++line;
        line_start = i + 1;
      }
    }
    column = at - line_start + 1;
  }
  if (line == 0) return;
  err << blue << "  --> " << reset << origin << ":" << line << ":" << column << "\n";

  std::size_t begin = 0;
  for (std::size_t l = 1; l < line && begin < source.size(); ++l) {
    begin = source.find('\n', begin);
    begin = begin == std::string_view::npos ? source.size() : begin + 1;
  }
  if (begin >= source.size() && !source.empty()) return;
  const std::size_t end = std::min(source.find('\n', begin), source.size());
  const std::string text(source.substr(begin, end - begin));
  std::size_t width = 1;
  if (error.span() && !dynamic_cast<const FormatError*>(&error)) {
    width = std::max<std::size_t>(1, std::min(error.span()->end, begin + text.size()) -
                                         std::min(error.span()->start, begin + text.size()));
  }
  err << blue << "   | " << reset << text << "\n";
  err << blue << "   | " << reset << std::string(column - 1, ' ') << red << std::string(width, '^') << reset << "\n";
}

namespace {

struct Loaded {
  ValidatedModel model;
  std::string source;
  std::string origin;
};

// A .mcc path, or one of the built-in names when no such file exists.
Loaded load_model_arg(const std::string& arg) {
  if (!std::filesystem::exists(arg)) {
    if (arg == "calculator") return {load_model_text(calculator_model_text()), std::string(calculator_model_text()), arg};
    if (arg == "imperative") return {load_model_text(imperative_model_text()), std::string(imperative_model_text()), arg};
  }
  std::string text = read_file(arg);
  return {load_model_text(text), text, arg};
}

std::string read_input(const std::string& path, std::istream& in) {
  if (path == "-") {
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }
  return read_file(path);
}

class Cli {
 public:
  Cli(std::istream& in, std::ostream& out, std::ostream& err, bool color)
      : in_(in), out_(out), err_(err), color_(color) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Model-based parser generator: grammars, parsing and evaluation from abstract syntax models",
                 "mcc"};
    app.require_subcommand(1);

    std::string model_path, input_path = "-", dump = "json", lang, stdin_path, test_path;
    std::vector<std::string> predefined;
    bool count = false, all = false, print_return = false;

    auto* check = app.add_subcommand("check", "Validate a model file");
    check->add_option("model", model_path, "Model file (.mcc) or built-in name")->required();

    auto* grammar = app.add_subcommand("grammar", "Print the grammar generated from a model");
    grammar->add_option("model", model_path, "Model file (.mcc) or built-in name")->required();

    auto* parse = app.add_subcommand("parse", "Parse an input and export its abstract syntax graph");
    parse->add_option("model", model_path, "Model file (.mcc) or built-in name")->required();
    parse->add_option("input", input_path, "Input file, '-' for standard input");
    parse->add_option("--dump", dump, "Output: json, dot, tokens (token graph) or forest")
        ->check(CLI::IsMember({"json", "dot", "tokens", "forest"}));
    parse->add_flag("--count", count, "Print the number of trees surviving constraint pruning");
    parse->add_flag("--all-parses", all, "Export every surviving graph instead of failing on ambiguity");
    parse->add_option("--predefine", predefined, "Predefined declaration Type:name, visible everywhere");

    auto* eval = app.add_subcommand("eval", "Run a program in a built-in language");
    eval->add_option("--lang", lang, "calc or imp")->required()->check(CLI::IsMember({"calc", "imp"}));
    eval->add_option("input", input_path, "Program or expressions, '-' for standard input");
    eval->add_option("--stdin", stdin_path, "File read by read() in imp programs");
    eval->add_flag("--print-return", print_return, "Report main's return value on stderr");

    auto* test = app.add_subcommand("test", "Run an assertion file, TAP output");
    test->add_option("file", test_path, "Test file")->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      return app.exit(e, out_, err_);
    }

    try {
      if (*check) return cmd_check(model_path);
      if (*grammar) return cmd_grammar(model_path);
      if (*parse) return cmd_parse(model_path, input_path, dump, count, all, predefined);
      if (*eval) return cmd_eval(lang, input_path, stdin_path, print_return);
      if (*test) return cmd_test(test_path);
    } catch (const Error& e) {
      report_error(err_, e, source_, origin_, color_);
      return 1;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return 1;
    }
    return 1;
  }

 private:
  Loaded load(const std::string& path) {
    origin_ = path;
    if (std::filesystem::exists(path)) source_ = read_file(path);
    Loaded m = load_model_arg(path);
    source_.clear();
    origin_.clear();
    return m;
  }

  int cmd_check(const std::string& path) {
    Loaded m = load(path);
    Grammar g = generate_grammar(m.model);
    out_ << "ok: " << m.model.name() << ", " << m.model.size() << " element types, " << g.productions().size()
         << " productions\n";
    for (const auto& w : m.model.warnings()) out_ << "warning: " << w << "\n";
    return 0;
  }

  int cmd_grammar(const std::string& path) {
    Loaded m = load(path);
    out_ << print_grammar(generate_grammar(m.model), m.model);
    return 0;
  }

  int cmd_parse(const std::string& path, const std::string& input_path, const std::string& dump, bool count,
                bool all, const std::vector<std::string>& predefined) {
    Loaded m = load(path);
    std::vector<Predefined> globals;
    if (m.model.name() == "Imperative") globals = imperative_globals();
    for (const auto& p : predefined) {
      auto colon = p.find(':');
      if (colon == std::string::npos) throw Error(ErrorCode::InvalidModel, "--predefine expects Type:name, got " + p);
      globals.push_back({p.substr(colon + 1), p.substr(0, colon)});
    }
    Parser parser(m.model, {}, {}, globals);

    const std::string input = read_input(input_path, in_);
    source_ = input;
    origin_ = input_path == "-" ? "<stdin>" : input_path;

    if (count) {
      out_ << parser.count(input) << "\n";
      return 0;
    }
    if (dump == "tokens") {
      out_ << token_graph_dot(parser.tokenize(input));
      return 0;
    }
    if (dump == "forest") {
      out_ << forest_dot(parser.forest(input));
      return 0;
    }

    std::vector<Asg> asgs;
    if (all) {
      asgs = parser.parse_all(input);
    } else {
      try {
        asgs.push_back(parser.parse(input));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AmbiguousParse) throw;
        report_error(err_, e, source_, origin_, color_);
        return 2;
      }
    }
    if (dump == "dot") {
      for (const Asg& a : asgs) out_ << asg_dot(a);
    } else if (all) {
      out_ << "[\n";
      for (std::size_t i = 0; i < asgs.size(); ++i) out_ << asg_json(asgs[i]) << (i + 1 < asgs.size() ? ",\n" : "\n");
      out_ << "]\n";
    } else {
      out_ << asg_json(asgs.front()) << "\n";
    }
    return 0;
  }

  int cmd_eval(const std::string& lang, const std::string& input_path, const std::string& stdin_path,
               bool print_return) {
    const std::string input = read_input(input_path, in_);
    source_ = input;
    origin_ = input_path == "-" ? "<stdin>" : input_path;

    if (lang == "calc") {
      Parser parser = calculator_parser();
      std::istringstream lines(input);
      std::string line;
      std::size_t offset = 0;
      while (std::getline(lines, line)) {
        const std::size_t here = offset;
        offset += line.size() + 1;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
          out_ << format_number(eval_calculator(parser, line)) << "\n";
        } catch (const Error& e) {
          report_error(err_, shifted(e, here), source_, origin_, color_);
          return 1;
        }
      }
      return 0;
    }

    Parser parser = imperative_parser();
    Asg program = parser.parse(input);
    std::ifstream file;
    std::istringstream empty;
    std::istream* reads = &in_;
    if (!stdin_path.empty()) {
      file.open(stdin_path);
      if (!file) throw Error(ErrorCode::IoError, "cannot open " + stdin_path);
      reads = &file;
    } else if (input_path == "-") {
      reads = &empty;
    }
    RunResult r = run_imperative(program, parser.model(), *reads, out_);
    if (print_return && r.returned) err_ << "main returned " << format_number(r.returnValue) << "\n";
    if (!r.returned || !std::isfinite(r.returnValue)) return 0;
    return static_cast<int>(static_cast<long long>(r.returnValue) & 0xFF);
  }

  int cmd_test(const std::string& path) {
    try {
      return run_test_file(path, out_) == 0 ? 0 : 1;
    } catch (const Error& e) {
      origin_ = path;
      source_ = std::filesystem::exists(path) ? read_file(path) : "";
      report_error(err_, e, source_, origin_, color_);
      return 2;
    }
  }

  // The error with its span moved from line-relative to input-relative.
  static Error shifted(const Error& e, std::size_t by) {
    if (!e.span()) return e;
    return Error(e.code(), e.what(), Span{e.span()->start + by, e.span()->end + by});
  }

  std::istream& in_;
  std::ostream& out_;
  std::ostream& err_;
  bool color_;
  std::string source_;
  std::string origin_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
            bool color) {
  return Cli(in, out, err, color).run(args);
}

}  // namespace mcc

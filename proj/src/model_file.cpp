#include "mcc/model_file.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace mcc {

namespace {

struct Tok {
  enum class Kind { word, number, string, punct, end } kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  std::vector<Tok> scan() {
    std::vector<Tok> out;
    while (true) {
      skip_space();
      const std::size_t line = line_, column = column_;
      if (pos_ >= text_.size()) {
        out.push_back({Tok::Kind::end, "", line, column});
        return out;
      }
      const char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string w;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
          w += advance();
        }
        out.push_back({Tok::Kind::word, w, line, column});
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::string w;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) w += advance();
        out.push_back({Tok::Kind::number, w, line, column});
      } else if (c == '"') {
        advance();
        std::string s;
        while (true) {
          if (pos_ >= text_.size() || text_[pos_] == '\n') throw FormatError(line, column, "unterminated string");
          char d = advance();
          if (d == '"') break;
          if (d == '\\' && pos_ < text_.size()) {
            char e = advance();
            if (e == '"') {
              s += '"';
            } else {
              s += d;
              s += e;
            }
            continue;
          }
          s += d;
        }
        out.push_back({Tok::Kind::string, s, line, column});
      } else if (c == ':' || c == ';' || c == '{' || c == '}' || c == '*' || c == '@') {
        out.push_back({Tok::Kind::punct, std::string(1, advance()), line, column});
      } else {
        throw FormatError(line, column, std::string("unexpected character '") + c + "'");
      }
    }
  }

 private:
  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class Reader {
 public:
  explicit Reader(std::string_view text) : toks_(Scanner(text).scan()) {}

  Model read() {
    Model m;
    bool header = false;
    while (peek().kind != Tok::Kind::end) {
      const Tok& t = peek();
      if (t.kind != Tok::Kind::word) fail(t, "expected a declaration keyword");
      if (t.text == "language") {
        next();
        m.name = word("language name");
        keyword("start");
        m.startType = word("start type");
        header = true;
      } else if (t.text == "ignore") {
        next();
        m.ignorePatterns.push_back(pattern());
      } else if (t.text == "abstract" || t.text == "basic" || t.text == "element") {
        m.elements.push_back(element());
      } else {
        fail(t, "unknown keyword '" + t.text + "'");
      }
    }
    if (!header) fail(peek(), "missing 'language <Name> start <Type>' line");
    return m;
  }

 private:
  const Tok& peek() const { return toks_[pos_]; }
  const Tok& next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }

  [[noreturn]] static void fail(const Tok& t, const std::string& message) {
    throw FormatError(t.line, t.column, message);
  }

  bool at_word(std::string_view w) const { return peek().kind == Tok::Kind::word && peek().text == w; }
  bool at_punct(char c) const { return peek().kind == Tok::Kind::punct && peek().text[0] == c; }

  std::string word(const std::string& what) {
    if (peek().kind != Tok::Kind::word) fail(peek(), "expected " + what);
    return next().text;
  }
  void keyword(std::string_view w) {
    if (!at_word(w)) fail(peek(), "expected '" + std::string(w) + "'");
    next();
  }
  void punct(char c) {
    if (!at_punct(c)) fail(peek(), std::string("expected '") + c + "'");
    next();
  }
  unsigned number() {
    if (peek().kind != Tok::Kind::number) fail(peek(), "expected a number");
    const Tok& t = next();
    try {
      return static_cast<unsigned>(std::stoul(t.text));
    } catch (const std::exception&) {
      fail(t, "number out of range");
    }
  }
  std::string string(const std::string& what) {
    if (peek().kind != Tok::Kind::string) fail(peek(), "expected " + what);
    return next().text;
  }

  PatternSpec pattern() {
    PatternSpec p;
    if (at_punct('@')) {
      next();
      p = PatternSpec::matcher(word("matcher id"));
    } else {
      p = PatternSpec::regex(string("a quoted pattern"));
    }
    if (at_word("precedence")) {
      next();
      p.precedence = number();
    }
    return p;
  }

  ElementType element() {
    ElementType e;
    const std::string kind = next().text;
    e.kind = kind == "abstract" ? ElementKind::abstract : kind == "basic" ? ElementKind::basic : ElementKind::composite;
    e.name = word("element name");
    if (at_punct(':')) {
      next();
      e.supertype = word("supertype name");
    }
    if (e.kind == ElementKind::basic) {
      if (at_word("pattern")) {
        next();
        e.pattern = PatternSpec::regex(string("a quoted pattern"));
      } else if (at_word("matcher")) {
        next();
        e.pattern = PatternSpec::matcher(word("matcher id"));
      } else {
        fail(peek(), "expected 'pattern' or 'matcher'");
      }
      while (true) {
        if (at_word("precedence")) {
          next();
          e.pattern->precedence = number();
        } else if (at_word("value")) {
          next();
          const Tok& t = peek();
          std::string v = word("value kind");
          if (v == "int") e.valueKind = ValueKind::integer;
          else if (v == "float") e.valueKind = ValueKind::floating;
          else if (v == "string") e.valueKind = ValueKind::string;
          else fail(t, "unknown value kind '" + v + "'");
        } else if (at_word("priority")) {
          next();
          e.constraints.priority = number();
        } else {
          break;
        }
      }
    } else if (at_word("scope")) {
      next();
      e.scopeDefining = true;
    }
    if (at_punct('{')) {
      block(e);
    } else if (e.kind == ElementKind::composite) {
      fail(peek(), "expected '{'");
    }
    return e;
  }

  void block(ElementType& e) {
    punct('{');
    while (!at_punct('}')) {
      const Tok& t = peek();
      const std::string item = word("a block item");
      if (item == "assoc") {
        const Tok& v = peek();
        std::string a = word("associativity");
        if (a == "left") e.constraints.associativity = Associativity::leftToRight;
        else if (a == "right") e.constraints.associativity = Associativity::rightToLeft;
        else if (a == "non") e.constraints.associativity = Associativity::nonAssociative;
        else fail(v, "unknown associativity '" + a + "'");
      } else if (item == "priority") {
        e.constraints.priority = number();
      } else if (item == "composition") {
        const Tok& v = peek();
        std::string c = word("composition policy");
        if (c == "eager") e.constraints.composition = Composition::eager;
        else if (c == "lazy") e.constraints.composition = Composition::lazy;
        else fail(v, "unknown composition policy '" + c + "'");
      } else if (item == "prefix") {
        e.prefix.push_back(pattern());
      } else if (item == "suffix") {
        e.suffix.push_back(pattern());
      } else if (item == "freeorder") {
        e.constraints.freeOrder = true;
      } else if (item == "scope") {
        e.scopeDefining = true;
      } else if (item == "constraint") {
        e.constraints.customConstraints.push_back(word("constraint id"));
      } else if (item == "tag") {
        e.semanticTag = word("semantic tag");
      } else if (item == "member") {
        e.members.push_back(member(e));
      } else {
        fail(t, "unknown block item '" + item + "'");
      }
      punct(';');
    }
    punct('}');
  }

  Member member(ElementType& owner) {
    Member m;
    m.name = word("member name");
    punct(':');
    m.typeName = word("member type");
    bool list = false, max_set = false;
    while (!at_punct(';')) {
      const Tok& t = peek();
      const std::string opt = word("a member option");
      if (opt == "optional") {
        m.optional = true;
      } else if (opt == "list") {
        list = true;
      } else if (opt == "separator") {
        m.separator = pattern();
      } else if (opt == "min") {
        m.multiplicity.min = number();
        list = true;
      } else if (opt == "max") {
        if (at_punct('*')) {
          next();
          m.multiplicity.max = kUnbounded;
        } else {
          m.multiplicity.max = number();
        }
        max_set = true;
        list = true;
      } else if (opt == "ref") {
        m.isReference = true;
      } else if (opt == "id") {
        if (owner.idMember) fail(t, "element already has an identifier member");
        owner.idMember = m.name;
      } else if (opt == "value") {
        m.isValueBinding = true;
      } else if (opt == "position") {
        m.position = number();
      } else if (opt == "prefix") {
        m.prefix.push_back(pattern());
      } else if (opt == "suffix") {
        m.suffix.push_back(pattern());
      } else {
        fail(t, "unknown member option '" + opt + "'");
      }
    }
    if (list && !max_set) m.multiplicity.max = kUnbounded;
    return m;
  }

  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      out += s[i];
      out += s[++i];
    } else if (s[i] == '"') {
      out += "\\\"";
    } else {
      out += s[i];
    }
  }
  return out + "\"";
}

std::string pattern_text(const PatternSpec& p) {
  std::string out =
      p.form == PatternSpec::Form::customMatcher ? "@" + p.expression : quote(p.expression);
  if (p.precedence) out += " precedence " + std::to_string(*p.precedence);
  return out;
}

}  // namespace

Model parse_model_text(std::string_view text) { return Reader(text).read(); }

ValidatedModel load_model_text(std::string_view text, const Registry* registry) {
  return validate_or_throw(parse_model_text(text), registry);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ValidatedModel load_model_file(const std::string& path, const Registry* registry) {
  return load_model_text(read_file(path), registry);
}

std::string print_model(const Model& model) {
  std::ostringstream out;
  out << "language " << model.name << " start " << model.startType << "\n";
  for (const auto& p : model.ignorePatterns) out << "ignore " << pattern_text(p) << "\n";
  for (const auto& e : model.elements) {
    out << "\n";
    switch (e.kind) {
      case ElementKind::abstract: out << "abstract "; break;
      case ElementKind::basic: out << "basic "; break;
      case ElementKind::composite: out << "element "; break;
    }
    out << e.name;
    if (e.supertype) out << " : " << *e.supertype;
    std::vector<std::string> items;
    if (e.kind == ElementKind::basic) {
      if (e.pattern) {
        if (e.pattern->form == PatternSpec::Form::customMatcher) out << " matcher " << e.pattern->expression;
        else out << " pattern " << quote(e.pattern->expression);
        if (e.pattern->precedence) out << " precedence " << *e.pattern->precedence;
      }
      if (e.valueKind != ValueKind::none) out << " value " << to_string(e.valueKind);
      if (e.constraints.priority) out << " priority " << *e.constraints.priority;
      if (e.scopeDefining) items.push_back("scope");
    } else {
      if (e.scopeDefining) out << " scope";
      if (e.constraints.priority) items.push_back("priority " + std::to_string(*e.constraints.priority));
    }
    if (e.constraints.associativity != Associativity::none) {
      items.push_back("assoc " + std::string(to_string(e.constraints.associativity)));
    }
    if (e.constraints.composition != Composition::none) {
      items.push_back("composition " + std::string(to_string(e.constraints.composition)));
    }
    if (e.constraints.freeOrder) items.push_back("freeorder");
    for (const auto& p : e.prefix) items.push_back("prefix " + pattern_text(p));
    for (const auto& p : e.suffix) items.push_back("suffix " + pattern_text(p));
    for (const auto& c : e.constraints.customConstraints) items.push_back("constraint " + c);
    if (e.semanticTag) items.push_back("tag " + *e.semanticTag);
    for (const auto& m : e.members) {
      std::string s = "member " + m.name + " : " + m.typeName;
      if (m.optional) s += " optional";
      if (m.multiplicity.min != 1 || m.multiplicity.max != 1) {
        s += " list";
        if (m.multiplicity.min != 1) s += " min " + std::to_string(m.multiplicity.min);
        if (!m.multiplicity.unbounded()) s += " max " + std::to_string(m.multiplicity.max);
      }
      if (m.separator) s += " separator " + pattern_text(*m.separator);
      if (m.isReference) s += " ref";
      if (e.idMember && *e.idMember == m.name) s += " id";
      if (m.isValueBinding) s += " value";
      if (m.position) s += " position " + std::to_string(*m.position);
      for (const auto& p : m.prefix) s += " prefix " + pattern_text(p);
      for (const auto& p : m.suffix) s += " suffix " + pattern_text(p);
      items.push_back(s);
    }
    if (!items.empty() || e.kind == ElementKind::composite) {
      out << " {\n";
      for (const auto& i : items) out << "  " << i << ";\n";
      out << "}";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace mcc

#include "mcc/regex.hpp"

#include <algorithm>
#include <memory>
#include <utility>

#include "mcc/error.hpp"

namespace mcc {

std::pair<char32_t, std::size_t> decode_utf8(std::string_view input, std::size_t offset) {
  auto byte = [&](std::size_t i) { return static_cast<unsigned char>(input[i]); };
  const unsigned char lead = byte(offset);
  auto malformed = [&] { return std::pair<char32_t, std::size_t>{0xDC00u + lead, 1}; };
  if (lead < 0x80) return {lead, 1};

  std::size_t length = 0;
  char32_t value = 0;
  if ((lead & 0xE0) == 0xC0) {
    length = 2;
    value = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    length = 3;
    value = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    length = 4;
    value = lead & 0x07;
  } else {
    return malformed();
  }
  if (offset + length > input.size()) return malformed();
  for (std::size_t i = 1; i < length; ++i) {
    const unsigned char c = byte(offset + i);
    if ((c & 0xC0) != 0x80) return malformed();
    value = (value << 6) | (c & 0x3F);
  }
  static constexpr char32_t kMinimum[] = {0, 0, 0x80, 0x800, 0x10000};
  if (value < kMinimum[length] || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) {
    return malformed();
  }
  return {value, length};
}

namespace {

using Ranges = std::vector<std::pair<char32_t, char32_t>>;

// Parse tree of a pattern; quantifiers are expanded when building the NFA.
struct Node {
  enum class Kind { empty, chars, concat, alternate, repeat } kind = Kind::empty;
  Ranges ranges;
  bool negated = false;
  std::vector<std::unique_ptr<Node>> children;
  std::size_t min = 0;
  std::size_t max = 0;  // kInfinite for unbounded
};

constexpr std::size_t kInfinite = static_cast<std::size_t>(-1);
constexpr std::size_t kMaxCounted = 1000;

Ranges digit_ranges() { return {{U'0', U'9'}}; }
Ranges word_ranges() { return {{U'0', U'9'}, {U'A', U'Z'}, {U'_', U'_'}, {U'a', U'z'}}; }
Ranges space_ranges() { return {{U'\t', U'\r'}, {U' ', U' '}}; }

Ranges complement(Ranges ranges) {
  std::sort(ranges.begin(), ranges.end());
  Ranges out;
  char32_t next = 0;
  for (auto [lo, hi] : ranges) {
    if (lo > next) out.emplace_back(next, lo - 1);
    if (hi + 1 > next) next = hi + 1;
  }
  if (next <= 0x10FFFF) out.emplace_back(next, 0x10FFFF);
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view pattern) : pattern_(pattern) {}

  std::unique_ptr<Node> parse() {
    auto node = alternation();
    if (pos_ != pattern_.size()) fail("unbalanced ')'");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::PatternCompileError,
                "invalid pattern '" + std::string(pattern_) + "' at " + std::to_string(pos_) + ": " + what);
  }

  bool at_end() const { return pos_ >= pattern_.size(); }
  char peek() const { return pattern_[pos_]; }

  char32_t next_char() {
    auto [cp, len] = decode_utf8(pattern_, pos_);
    pos_ += len;
    return cp;
  }

  std::unique_ptr<Node> alternation() {
    auto first = concatenation();
    if (at_end() || peek() != '|') return first;
    auto node = std::make_unique<Node>();
    node->kind = Node::Kind::alternate;
    node->children.push_back(std::move(first));
    while (!at_end() && peek() == '|') {
      ++pos_;
      node->children.push_back(concatenation());
    }
    return node;
  }

  std::unique_ptr<Node> concatenation() {
    auto node = std::make_unique<Node>();
    node->kind = Node::Kind::concat;
    while (!at_end() && peek() != '|' && peek() != ')') {
      node->children.push_back(quantified());
    }
    return node;
  }

  std::optional<std::size_t> number() {
    std::size_t start = pos_;
    std::size_t value = 0;
    while (!at_end() && peek() >= '0' && peek() <= '9') {
      value = value * 10 + static_cast<std::size_t>(peek() - '0');
      if (value > kMaxCounted) fail("repetition count too large");
      ++pos_;
    }
    if (pos_ == start) return std::nullopt;
    return value;
  }

  std::unique_ptr<Node> quantified() {
    auto atom_node = atom();
    while (!at_end()) {
      std::size_t min = 0;
      std::size_t max = 0;
      const char c = peek();
      if (c == '*') {
        min = 0;
        max = kInfinite;
        ++pos_;
      } else if (c == '+') {
        min = 1;
        max = kInfinite;
        ++pos_;
      } else if (c == '?') {
        min = 0;
        max = 1;
        ++pos_;
      } else if (c == '{') {
        const std::size_t save = pos_;
        ++pos_;
        auto lo = number();
        if (!lo) {
          // Not a counted repetition; treat '{' as a literal like ECMAScript does.
          pos_ = save;
          break;
        }
        min = *lo;
        max = min;
        if (!at_end() && peek() == ',') {
          ++pos_;
          auto hi = number();
          max = hi ? *hi : kInfinite;
        }
        if (at_end() || peek() != '}') fail("unterminated repetition");
        ++pos_;
        if (max != kInfinite && max < min) fail("repetition bounds out of order");
      } else {
        break;
      }
      if (!at_end() && peek() == '?') ++pos_;  // lazy marker: irrelevant for match ends
      auto rep = std::make_unique<Node>();
      rep->kind = Node::Kind::repeat;
      rep->min = min;
      rep->max = max;
      rep->children.push_back(std::move(atom_node));
      atom_node = std::move(rep);
    }
    return atom_node;
  }

  std::unique_ptr<Node> chars(Ranges ranges, bool negated = false) {
    auto node = std::make_unique<Node>();
    node->kind = Node::Kind::chars;
    node->ranges = std::move(ranges);
    node->negated = negated;
    return node;
  }

  unsigned hex_digits(std::size_t count) {
    unsigned value = 0;
    for (std::size_t i = 0; i < count; ++i) {
      if (at_end()) fail("truncated hex escape");
      const char c = peek();
      unsigned digit;
      if (c >= '0' && c <= '9') digit = static_cast<unsigned>(c - '0');
      else if (c >= 'a' && c <= 'f') digit = static_cast<unsigned>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') digit = static_cast<unsigned>(c - 'A' + 10);
      else fail("bad hex escape");
      value = value * 16 + digit;
      ++pos_;
    }
    return value;
  }

  // Parses the escape after a backslash. Returns a class for \d-style escapes.
  Ranges escape(bool& is_class, bool& negated) {
    if (at_end()) fail("dangling backslash");
    is_class = false;
    negated = false;
    const char c = peek();
    ++pos_;
    auto single = [](char32_t cp) { return Ranges{{cp, cp}}; };
    switch (c) {
      case 'n': return single(U'\n');
      case 't': return single(U'\t');
      case 'r': return single(U'\r');
      case 'f': return single(U'\f');
      case 'v': return single(U'\v');
      case '0': return single(U'\0');
      case 'x': return single(hex_digits(2));
      case 'u': return single(hex_digits(4));
      case 'd': is_class = true; return digit_ranges();
      case 'w': is_class = true; return word_ranges();
      case 's': is_class = true; return space_ranges();
      case 'D': is_class = true; negated = true; return digit_ranges();
      case 'W': is_class = true; negated = true; return word_ranges();
      case 'S': is_class = true; negated = true; return space_ranges();
      case 'b': case 'B': fail("word boundaries are not supported");
      default:
        if (c >= '1' && c <= '9') fail("backreferences are not supported");
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) fail("unknown escape");
        --pos_;
        return single(next_char());
    }
  }

  std::unique_ptr<Node> bracket() {
    bool negated = false;
    if (!at_end() && peek() == '^') {
      negated = true;
      ++pos_;
    }
    Ranges ranges;
    bool first = true;
    while (true) {
      if (at_end()) fail("unterminated character class");
      if (peek() == ']' && !first) {
        ++pos_;
        break;
      }
      first = false;
      char32_t lo;
      if (peek() == '\\') {
        ++pos_;
        bool is_class = false;
        bool neg = false;
        Ranges r = escape(is_class, neg);
        if (is_class) {
          if (neg) r = complement(std::move(r));
          ranges.insert(ranges.end(), r.begin(), r.end());
          continue;
        }
        lo = r.front().first;
      } else {
        lo = next_char();
      }
      char32_t hi = lo;
      if (pos_ + 1 < pattern_.size() && peek() == '-' && pattern_[pos_ + 1] != ']') {
        ++pos_;
        if (peek() == '\\') {
          ++pos_;
          bool is_class = false;
          bool neg = false;
          Ranges r = escape(is_class, neg);
          if (is_class) fail("class escape used as range bound");
          hi = r.front().first;
        } else {
          hi = next_char();
        }
        if (hi < lo) fail("character range out of order");
      }
      ranges.emplace_back(lo, hi);
    }
    return chars(std::move(ranges), negated);
  }

  std::unique_ptr<Node> atom() {
    const char c = peek();
    switch (c) {
      case '(': {
        ++pos_;
        if (pos_ + 1 < pattern_.size() && peek() == '?') {
          if (pattern_[pos_ + 1] != ':') fail("lookaround is not supported");
          pos_ += 2;
        }
        auto inner = alternation();
        if (at_end() || peek() != ')') fail("missing ')'");
        ++pos_;
        return inner;
      }
      case '[':
        ++pos_;
        return bracket();
      case '.':
        ++pos_;
        return chars({{U'\n', U'\n'}, {U'\r', U'\r'}, {0x2028, 0x2029}}, true);
      case '\\': {
        ++pos_;
        bool is_class = false;
        bool negated = false;
        Ranges r = escape(is_class, negated);
        return chars(std::move(r), negated);
      }
      case '*': case '+': case '?':
        fail("quantifier without operand");
      case '^': case '$':
        fail("anchors are not supported");
      default: {
        char32_t cp = next_char();
        return chars({{cp, cp}});
      }
    }
  }

  std::string_view pattern_;
  std::size_t pos_ = 0;
};

// Returns the fixed string a node denotes, if it denotes exactly one.
std::optional<std::u32string> literal_of(const Node& node) {
  switch (node.kind) {
    case Node::Kind::empty:
      return std::u32string{};
    case Node::Kind::chars:
      if (!node.negated && node.ranges.size() == 1 && node.ranges[0].first == node.ranges[0].second) {
        return std::u32string(1, node.ranges[0].first);
      }
      return std::nullopt;
    case Node::Kind::concat: {
      std::u32string out;
      for (const auto& child : node.children) {
        auto part = literal_of(*child);
        if (!part) return std::nullopt;
        out += *part;
      }
      return out;
    }
    case Node::Kind::alternate:
      return std::nullopt;
    case Node::Kind::repeat: {
      if (node.min != node.max) return std::nullopt;
      auto part = literal_of(*node.children[0]);
      if (!part) return std::nullopt;
      std::u32string out;
      for (std::size_t i = 0; i < node.min; ++i) out += *part;
      return out;
    }
  }
  return std::nullopt;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

}  // namespace

class RegexCompiler {
 public:
  explicit RegexCompiler(Regex& re) : re_(re) {}

  // Fragment with a single entry state and a list of dangling exits.
  struct Fragment {
    int start;
    std::vector<std::pair<int, bool>> exits;  // (state, use out2)
  };

  int add(Regex::State::Kind kind) {
    re_.states_.push_back(Regex::State{kind, {}, false, -1, -1});
    if (re_.states_.size() > 200000) {
      throw Error(ErrorCode::PatternCompileError, "pattern '" + re_.pattern_ + "' is too large");
    }
    return static_cast<int>(re_.states_.size() - 1);
  }

  void patch(const Fragment& f, int target) {
    for (auto [state, second] : f.exits) {
      if (second) re_.states_[state].out2 = target;
      else re_.states_[state].out = target;
    }
  }

  Fragment build(const Node& node) {
    using Kind = Regex::State::Kind;
    switch (node.kind) {
      case Node::Kind::empty: {
        int s = add(Kind::epsilon);
        return {s, {{s, false}}};
      }
      case Node::Kind::chars: {
        int s = add(Kind::chars);
        for (auto [lo, hi] : node.ranges) re_.states_[s].ranges.push_back({lo, hi});
        re_.states_[s].negated = node.negated;
        return {s, {{s, false}}};
      }
      case Node::Kind::concat: {
        if (node.children.empty()) {
          int s = add(Kind::epsilon);
          return {s, {{s, false}}};
        }
        Fragment result = build(*node.children[0]);
        for (std::size_t i = 1; i < node.children.size(); ++i) {
          Fragment next = build(*node.children[i]);
          patch(result, next.start);
          result.exits = std::move(next.exits);
        }
        return result;
      }
      case Node::Kind::alternate: {
        Fragment result = build(*node.children[0]);
        for (std::size_t i = 1; i < node.children.size(); ++i) {
          Fragment other = build(*node.children[i]);
          int s = add(Kind::split);
          re_.states_[s].out = result.start;
          re_.states_[s].out2 = other.start;
          result.start = s;
          result.exits.insert(result.exits.end(), other.exits.begin(), other.exits.end());
        }
        return result;
      }
      case Node::Kind::repeat:
        return repeat(*node.children[0], node.min, node.max);
    }
    throw Error(ErrorCode::PatternCompileError, "unreachable regex node");
  }

  Fragment repeat(const Node& child, std::size_t min, std::size_t max) {
    using Kind = Regex::State::Kind;
    int entry = add(Kind::epsilon);
    Fragment result{entry, {{entry, false}}};
    for (std::size_t i = 0; i < min; ++i) {
      Fragment copy = build(child);
      patch(result, copy.start);
      result.exits = std::move(copy.exits);
    }
    if (max == kInfinite) {
      int loop = add(Kind::split);
      Fragment body = build(child);
      re_.states_[loop].out = body.start;
      patch(body, loop);
      patch(result, loop);
      result.exits = {{loop, true}};
    } else {
      std::vector<std::pair<int, bool>> skipped;
      for (std::size_t i = min; i < max; ++i) {
        int opt = add(Kind::split);
        Fragment body = build(child);
        re_.states_[opt].out = body.start;
        patch(result, opt);
        skipped.push_back({opt, true});
        result.exits = std::move(body.exits);
      }
      result.exits.insert(result.exits.end(), skipped.begin(), skipped.end());
    }
    return result;
  }

  void compile(const Node& root) {
    Fragment f = build(root);
    int accept = add(Regex::State::Kind::match);
    patch(f, accept);
    re_.start_ = f.start;
  }

 private:
  Regex& re_;
};

Regex::Regex(std::string_view pattern) : pattern_(pattern) {
  Parser parser(pattern);
  auto root = parser.parse();
  RegexCompiler(*this).compile(*root);
  if (auto lit = literal_of(*root)) {
    std::string utf8;
    for (char32_t cp : *lit) append_utf8(utf8, cp);
    literal_ = std::move(utf8);
  }
}

template <class OnAccept>
void Regex::run(std::string_view input, std::size_t offset, OnAccept&& on_accept) const {
  std::vector<int> current;
  std::vector<int> next;
  std::vector<std::size_t> seen(states_.size(), static_cast<std::size_t>(-1));
  std::size_t generation = 0;

  auto add_state = [&](auto&& self, std::vector<int>& list, int s) -> void {
    if (s < 0 || seen[s] == generation) return;
    seen[s] = generation;
    const State& st = states_[s];
    if (st.kind == State::Kind::epsilon) {
      self(self, list, st.out);
    } else if (st.kind == State::Kind::split) {
      self(self, list, st.out);
      self(self, list, st.out2);
    } else {
      list.push_back(s);
    }
  };

  add_state(add_state, current, start_);
  std::size_t pos = offset;
  while (!current.empty()) {
    bool accepted = false;
    for (int s : current) {
      if (states_[s].kind == State::Kind::match) accepted = true;
    }
    if (accepted && pos > offset) on_accept(pos - offset);
    if (pos >= input.size()) break;

    auto [cp, len] = decode_utf8(input, pos);
    ++generation;
    next.clear();
    for (int s : current) {
      const State& st = states_[s];
      if (st.kind != State::Kind::chars) continue;
      bool in = false;
      for (const Range& r : st.ranges) {
        if (cp >= r.lo && cp <= r.hi) {
          in = true;
          break;
        }
      }
      if (in != st.negated) add_state(add_state, next, st.out);
    }
    std::swap(current, next);
    pos += len;
  }
}

std::optional<std::size_t> Regex::longest_match(std::string_view input, std::size_t offset) const {
  std::optional<std::size_t> best;
  run(input, offset, [&](std::size_t length) { best = length; });
  return best;
}

std::vector<std::size_t> Regex::all_matches(std::string_view input, std::size_t offset) const {
  std::vector<std::size_t> lengths;
  run(input, offset, [&](std::size_t length) { lengths.push_back(length); });
  return lengths;
}

bool Regex::full_match(std::string_view text) const {
  if (text.empty()) {
    // run() only reports non-empty matches; check acceptance of the start closure.
    std::vector<int> stack{start_};
    std::vector<bool> seen(states_.size(), false);
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      if (s < 0 || seen[s]) continue;
      seen[s] = true;
      const State& st = states_[s];
      if (st.kind == State::Kind::match) return true;
      if (st.kind == State::Kind::epsilon || st.kind == State::Kind::split) {
        stack.push_back(st.out);
        stack.push_back(st.out2);
      }
    }
    return false;
  }
  bool whole = false;
  run(text, 0, [&](std::size_t length) { whole = whole || length == text.size(); });
  return whole;
}

std::optional<std::string> Regex::literal() const { return literal_; }

}  // namespace mcc

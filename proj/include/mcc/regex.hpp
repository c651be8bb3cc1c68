// Small regular-expression engine used by the lexer.
//
// Patterns are compiled to a Thompson NFA over Unicode scalar values; the input
// is UTF-8 and all offsets are byte offsets. Matching is always anchored at a
// given offset and reports match ends rather than the first match found, which
// is what an ambiguity-preserving lexer needs.
//
// Supported syntax: literals, escapes (\n \t \r \f \v \0 \xHH \uHHHH \d \D \w
// \W \s \S and escaped metacharacters), '.', bracket classes with ranges and
// negation, groups '(...)' and '(?:...)', alternation, and the quantifiers
// '*', '+', '?', '{n}', '{n,}', '{n,m}' (lazy suffixes are accepted and ignored).

#ifndef MCC_REGEX_HPP_
#define MCC_REGEX_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcc {

class Regex {
 public:
  // Throws Error(PatternCompileError) on malformed input.
  explicit Regex(std::string_view pattern);

  const std::string& pattern() const { return pattern_; }

  // Length of the longest non-empty match starting at `offset`.
  std::optional<std::size_t> longest_match(std::string_view input, std::size_t offset) const;

  // Lengths of every non-empty match starting at `offset`, ascending.
  std::vector<std::size_t> all_matches(std::string_view input, std::size_t offset) const;

  // True if the whole of `text` matches.
  bool full_match(std::string_view text) const;

  // If the pattern denotes exactly one fixed string, that string.
  std::optional<std::string> literal() const;

 private:
  struct Range {
    char32_t lo;
    char32_t hi;
  };
  struct State {
    enum class Kind { match, split, epsilon, chars } kind;
    std::vector<Range> ranges;  // chars: accepted code points
    bool negated = false;
    int out = -1;
    int out2 = -1;
  };

  template <class OnAccept>
  void run(std::string_view input, std::size_t offset, OnAccept&& on_accept) const;

  std::string pattern_;
  std::vector<State> states_;
  int start_ = -1;
  std::optional<std::string> literal_;

  friend class RegexCompiler;
};

// Decodes one scalar value at `offset`, returning it and its byte length.
// Malformed bytes decode as a single unit mapped into U+DC80..U+DCFF.
std::pair<char32_t, std::size_t> decode_utf8(std::string_view input, std::size_t offset);

}  // namespace mcc

#endif  // MCC_REGEX_HPP_

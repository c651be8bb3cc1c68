#include <gtest/gtest.h>

#include <random>
#include <regex>

#include "mcc/regex.hpp"
#include "support.hpp"

namespace mcc {
namespace {

// Longest match at `offset` by trying every end position against std::regex.
std::optional<std::size_t> reference_longest(const std::regex& re, const std::string& s, std::size_t offset) {
  std::optional<std::size_t> best;
  for (std::size_t end = offset + 1; end <= s.size(); ++end) {
    if (std::regex_match(s.begin() + offset, s.begin() + end, re)) best = end - offset;
  }
  return best;
}

std::vector<std::size_t> reference_all(const std::regex& re, const std::string& s, std::size_t offset) {
  std::vector<std::size_t> out;
  for (std::size_t end = offset + 1; end <= s.size(); ++end) {
    if (std::regex_match(s.begin() + offset, s.begin() + end, re)) out.push_back(end - offset);
  }
  return out;
}

std::string random_pattern(std::mt19937& rng, int depth) {
  const int roll = static_cast<int>(rng() % (depth > 3 ? 4 : 10));
  switch (roll) {
    case 0: return "a";
    case 1: return "b";
    case 2: return "[ab]";
    case 3: return ".";
    case 4: return random_pattern(rng, depth + 1) + random_pattern(rng, depth + 1);
    case 5: return "(" + random_pattern(rng, depth + 1) + "|" + random_pattern(rng, depth + 1) + ")";
    case 6: return "(" + random_pattern(rng, depth + 1) + ")*";
    case 7: return "(" + random_pattern(rng, depth + 1) + ")+";
    case 8: return "(" + random_pattern(rng, depth + 1) + ")?";
    default: return "[^a]" + random_pattern(rng, depth + 1);
  }
}

TEST(Regex, AgreesWithStdRegexOnRandomPatterns) {
  std::mt19937 rng(7);
  int compared = 0;
  for (int i = 0; i < 300; ++i) {
    const std::string pattern = random_pattern(rng, 0);
    const Regex mine(pattern);
    const std::regex reference(pattern, std::regex::ECMAScript);
    for (int j = 0; j < 10; ++j) {
      std::string input;
      const std::size_t len = rng() % 7;
      for (std::size_t k = 0; k < len; ++k) input += "abc"[rng() % 3];
      for (std::size_t offset = 0; offset < input.size(); ++offset) {
        ASSERT_EQ(mine.longest_match(input, offset), reference_longest(reference, input, offset))
            << "pattern " << pattern << " input " << input << " offset " << offset;
        ASSERT_EQ(mine.all_matches(input, offset), reference_all(reference, input, offset))
            << "pattern " << pattern << " input " << input << " offset " << offset;
        ++compared;
      }
    }
  }
  EXPECT_GT(compared, 1000);
}

TEST(Regex, CalculatorPatterns) {
  const Regex integer("[0-9]+");
  const Regex real("[0-9]+\\.[0-9]*");
  EXPECT_EQ(integer.longest_match("12.5", 0), 2u);
  EXPECT_EQ(real.longest_match("12.5", 0), 4u);
  EXPECT_EQ(real.longest_match("12.", 0), 3u);
  EXPECT_EQ(real.longest_match("12", 0), std::nullopt);
  EXPECT_EQ(Regex("\\+").longest_match("1+2", 1), 1u);
  EXPECT_EQ(Regex("\\/").longest_match("/", 0), 1u);
}

TEST(Regex, EscapesAndCounters) {
  EXPECT_TRUE(Regex("\\d{2,3}").full_match("123"));
  EXPECT_FALSE(Regex("\\d{2,3}").full_match("1234"));
  EXPECT_TRUE(Regex("\\s+").full_match(" \t\n"));
  EXPECT_TRUE(Regex("\\w+").full_match("a_1"));
  EXPECT_TRUE(Regex("[^\\n]*").full_match("abc"));
  EXPECT_EQ(Regex("//[^\\n]*").longest_match("x // c\ny", 2), 4u);
  EXPECT_TRUE(Regex("(?:ab)+").full_match("abab"));
  EXPECT_TRUE(Regex("a{3}").full_match("aaa"));
  EXPECT_TRUE(Regex("a{2,}").full_match("aaaa"));
}

TEST(Regex, Utf8ScalarValues) {
  const std::string e_acute = "\xC3\xA9";
  EXPECT_EQ(Regex(".").longest_match(e_acute, 0), 2u);
  EXPECT_TRUE(Regex("[\\u00e0-\\u00ff]").full_match(e_acute));
}

TEST(Regex, Literal) {
  EXPECT_EQ(Regex("\\(").literal(), "(");
  EXPECT_EQ(Regex("function").literal(), "function");
  EXPECT_EQ(Regex("[0-9]+").literal(), std::nullopt);
}

TEST(Regex, MalformedPatternsFail) {
  for (const char* bad : {"(", "[a", "a{2,1}", "*", "a)"}) {
    EXPECT_EQ(test::error_of([&] { Regex r(bad); }), ErrorCode::PatternCompileError) << bad;
  }
}

}  // namespace
}  // namespace mcc

// Error types shared by every stage of the pipeline.

#ifndef MCC_ERROR_HPP_
#define MCC_ERROR_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcc {

enum class ErrorCode {
  // Model validation.
  UnknownType,
  CyclicInheritance,
  PatternCompileError,
  MultiplicityError,
  DanglingReferenceTarget,
  InvalidModel,
  AmbiguousPriority,
  // Grammar generation.
  PermutationLimitExceeded,
  BoundedExpansionLimit,
  NameCollision,
  // Lexing and parsing.
  LexicalError,
  ParseError,
  // Weaving.
  ValueParseError,
  ConstraintPredicateError,
  UnresolvedReference,
  DuplicateDeclaration,
  AmbiguousParse,
  MissingCallback,
  RuntimeEvalError,
  // Tooling.
  FormatError,
  OracleBoundExceeded,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Half-open byte range in the input.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<Span> span = std::nullopt)
      : std::runtime_error(message), code_(code), span_(span) {}

  ErrorCode code() const noexcept { return code_; }
  const std::optional<Span>& span() const noexcept { return span_; }

 private:
  ErrorCode code_;
  std::optional<Span> span_;
};

// Farthest-failure report from the chart parser.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& message)
      : Error(ErrorCode::ParseError, message, Span{offset, offset}),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class LexicalError : public Error {
 public:
  LexicalError(std::size_t offset, const std::string& message)
      : Error(ErrorCode::LexicalError, message, Span{offset, offset}), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class FormatError : public Error {
 public:
  FormatError(std::size_t line, std::size_t column, const std::string& message)
      : Error(ErrorCode::FormatError,
              std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class UnresolvedReferenceError : public Error {
 public:
  UnresolvedReferenceError(std::string lexeme, Span span, std::vector<std::string> candidates,
                           const std::string& message)
      : Error(ErrorCode::UnresolvedReference, message, span),
        lexeme_(std::move(lexeme)),
        candidates_(std::move(candidates)) {}

  const std::string& lexeme() const noexcept { return lexeme_; }
  // Same-named declarations of an incompatible type found in enclosing scopes.
  const std::vector<std::string>& candidates() const noexcept { return candidates_; }

 private:
  std::string lexeme_;
  std::vector<std::string> candidates_;
};

}  // namespace mcc

#endif  // MCC_ERROR_HPP_

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace twistprod {

enum class ErrorCode {
  kSyntax,
  kUnknownIdentifier,
  kArity,
  kNonConstantExponent,
  kDomain,
  kDimension,
  kNotPositiveDefinite,
  kNonPositiveTwist,
  kMixedBlockField,
  kRankDeficient,
  kDegenerateSplit,
  kMissingTargetSplit,
  kFlatnessRequired,
  kNotIsometric,
  kScenario,
  kScene,
};

const char* to_string(ErrorCode code);

/// Base for every error raised by the engine. The code identifies the
/// failure family; the message carries the specifics.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Syntax, unknown identifier or arity error in the expression language.
/// offset is a byte offset into the parsed source.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t offset, const std::string& message)
      : Error(code, message + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation outside a function's domain. subexpression is the pretty
/// printed node that failed.
class DomainError : public Error {
 public:
  DomainError(const std::string& subexpression, const std::string& reason)
      : Error(ErrorCode::kDomain,
              "domain violation in '" + subexpression + "': " + reason),
        subexpression_(subexpression) {}

  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

/// Scene-file failure with 1-based line information (0 when not tied to a
/// line).
class SceneError : public Error {
 public:
  SceneError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kScene,
              line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace twistprod

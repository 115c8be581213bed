#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlspec {

struct Loc {
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t offset = 0;

  friend bool operator==(const Loc&, const Loc&) = default;
};

std::string to_string(const Loc& loc);

/// Syntax, type, interface and import errors: the user's fault.
class CompileError : public std::runtime_error {
 public:
  CompileError(Loc loc, const std::string& message)
      : std::runtime_error(to_string(loc) + ": " + message), loc_(loc), message_(message) {}
  explicit CompileError(const std::string& message) : std::runtime_error(message), message_(message) {}

  const Loc& loc() const { return loc_; }
  const std::string& message() const { return message_; }

 private:
  Loc loc_;
  std::string message_;
};

/// Errors raised while evaluating a well-formed program.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or stale `.unit` / textual IR input.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Compiler bugs (failed scheme matching, broken IR invariants).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A specialized array access met an array whose runtime representation
/// disagrees with its static kind.
class KindSoundnessViolation : public InternalError {
 public:
  using InternalError::InternalError;
};

}  // namespace mlspec

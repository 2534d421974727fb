#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wsvm {

using Index = std::ptrdiff_t;

/// Bad argument or violated precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file. `line()` is 1-based, 0 when not line specific.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A factorization met a non-positive pivot.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The path engine could not make progress (cycling, event budget, a
/// broken invariant).
class PathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wsvm

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace engage {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A record parsed but violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A feature or metric is mathematically undefined for the given input.
class UndefinedError : public Error {
 public:
  using Error::Error;
};

/// Linear system could not be solved (typically lambda = 0 on degenerate data).
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Model applied to a design matrix with a different column layout.
class SignatureMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace engage

#pragma once

#include <stdexcept>
#include <string>

namespace mattefuse {

// Bad caller input: negative sigma, mismatched shapes, out-of-range options.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Unreadable or unwritable files, undecodable PNGs, unsupported layouts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a content contract (off-level guidance
// pixels, inconsistent dataset pairs).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scene / catalog description files that fail to parse. Carries the 1-based
// line of the offending node when known (0 otherwise).
class ParseError : public ArgumentError {
 public:
  ParseError(const std::string& file, int line, const std::string& what)
      : ArgumentError(file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace mattefuse

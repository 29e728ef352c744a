#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reviewnet {

/// A file could not be opened, read, or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input; `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Input is well-formed but does not have the columns or shape we need.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command-line or config input.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Artifacts produced by different runs/configs were combined.
class FingerprintMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reviewnet

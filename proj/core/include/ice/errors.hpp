#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ice {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid construction parameters (zero dims, bad alphabet, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data that violates an operation's contract.
class DataError : public Error {
 public:
  using Error::Error;
};

// Operation called in the wrong lifecycle state.
class StateError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or shape mismatches during parameter updates.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Text input that failed to parse. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line,
                            std::size_t column) {
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

}  // namespace ice

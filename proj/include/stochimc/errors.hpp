#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace stochimc {

// Invalid argument outside a function's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A requested value cannot be reached with the configured limits.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The circuit does not fit the subarray.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(std::string what, std::size_t required_rows, std::size_t required_cols,
                std::size_t available_rows, std::size_t available_cols)
      : std::runtime_error(std::move(what)),
        required_rows(required_rows),
        required_cols(required_cols),
        available_rows(available_rows),
        available_cols(available_cols) {}

  std::size_t required_rows;
  std::size_t required_cols;
  std::size_t available_rows;
  std::size_t available_cols;
};

class CycleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

enum class NetlistIssue {
  Syntax,
  UnknownKind,
  ArityMismatch,
  MultipleDrivers,
  DanglingNet,
  Duplicate,
  UnknownNet,
};

// Structural or syntactic problem in a netlist. Line and column are 1-based, 0 when unknown.
class NetlistError : public std::runtime_error {
 public:
  NetlistError(NetlistIssue issue, const std::string& message, std::size_t line = 0,
               std::size_t column = 0)
      : std::runtime_error(format(message, line, column)),
        issue(issue),
        line(line),
        column(column) {}

  NetlistIssue issue;
  std::size_t line;
  std::size_t column;

 private:
  static std::string format(const std::string& message, std::size_t line, std::size_t column) {
    if (line == 0) return message;
    return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  }
};

// Malformed input file; offset is the byte position of the problem.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : std::runtime_error("offset " + std::to_string(offset) + ": " + message), offset(offset) {}

  std::size_t offset;
};

}  // namespace stochimc

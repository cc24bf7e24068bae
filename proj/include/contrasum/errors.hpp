#pragma once

#include <stdexcept>
#include <string>

namespace contrasum {

// I/O failures: missing files, unwritable outputs.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data (bad JSONL line, bad checkpoint header, ...).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data that parses but violates a documented invariant (empty field, ...).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller broke an API precondition (out-of-range layer index, tau <= 0, ...).
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Incompatible tensor shapes; message names both shapes.
struct ShapeError : std::logic_error {
  explicit ShapeError(const std::string& msg) : std::logic_error(msg) {}
};

// Bad run configuration (unknown key, invalid value, missing path).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace contrasum

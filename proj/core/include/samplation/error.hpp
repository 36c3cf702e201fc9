#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace samplation {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values (prevalence vectors, fractions, learning rates).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

/// Structurally valid input that violates the dataset schema.
class SchemaError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Feature dimensions or label cardinalities that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A requested sample size the source cannot satisfy.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// An allocation that exceeds the capacity of a reserve.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::size_t group)
      : Error(what), group_(group) {}

  std::size_t group() const noexcept { return group_; }

 private:
  std::size_t group_;
};

/// Synthetic data cannot be produced for a group (too few real seeds).
class GenerationError : public Error {
 public:
  GenerationError(const std::string& what, std::size_t group)
      : Error(what), group_(group) {}

  std::size_t group() const noexcept { return group_; }

 private:
  std::size_t group_;
};

/// Optimisation failed (empty data, divergence).
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// File system failures (unreadable input, unwritable output).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace samplation

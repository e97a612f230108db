#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oucl {

// Root of every error this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lexical or grammatical error; line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Syntactically valid input that breaks a language restriction
// (repeated antecedent atom, nested conditional, X ~> X, reserved names).
class WellFormednessError : public ParseError {
 public:
  using ParseError::ParseError;
};

class TemporalViolation : public Error {
 public:
  using Error::Error;
};

class ScopeTooLarge : public Error {
 public:
  using Error::Error;
};

class InvalidWitness : public Error {
 public:
  using Error::Error;
};

// A non-intervened square of the variable tape would be rewritten with a different value.
class WriteConflict : public Error {
 public:
  using Error::Error;
};

// Runtime fault of a simulation program other than a write conflict
// (negative tape index, division by zero, unknown label).
class ProgramError : public Error {
 public:
  using Error::Error;
};

class ExtractionIncomplete : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class InvalidCertificate : public Error {
 public:
  using Error::Error;
};

}  // namespace oucl

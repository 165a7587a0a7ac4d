#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace modhtan {

/** Argument outside the mathematical domain of an operation. */
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/** Result not representable in Real. */
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/** Malformed input file; carries the 1-based line number. */
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/** Class label outside the expected domain. */
class LabelDomainError : public ParseError {
 public:
  using ParseError::ParseError;
};

/** Damped normal equations could not be factorized even after raising mu. */
class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace modhtan

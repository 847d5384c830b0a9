#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wdnd {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a precondition (missing pipe in an assignment, open walk, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// The instance itself is unusable: unknown pattern, disconnected node, ...
class InstanceError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text, located by 1-based line number.
class ParseError : public InstanceError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InstanceError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A formula was evaluated outside of its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// No feasible solution could be produced (uniform largest type fails,
/// or exhaustive enumeration found nothing).
class InfeasibleInstance : public Error {
 public:
  using Error::Error;
};

}  // namespace wdnd

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace routh {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by elementary functions outside their domain (log of a nonpositive
/// number, division by zero, differentiating abs/sqrt at 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A domain error that has been attributed to an expression node.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::size_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Syntax error or unknown identifier while parsing an expression.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), message_(what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }
  /// The message without the offset suffix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t offset_;
};

/// Malformed model data: dimension mismatches, bad indices, missing fields.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is singular (or numerically so).
class RegularityError : public Error {
 public:
  RegularityError(const std::string& what, double rcond)
      : Error(what + " (rcond " + std::to_string(rcond) + ")"), rcond_(rcond) {}

  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (last residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// The cocycle / dimension combination falls outside the reductions we build.
class UnsupportedCaseError : public Error {
 public:
  using Error::Error;
};

/// Requested check needs data the model does not carry.
class UnsupportedCheckError : public Error {
 public:
  using Error::Error;
};

}  // namespace routh

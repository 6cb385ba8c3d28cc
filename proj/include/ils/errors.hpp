#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ils {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (dimension mismatch, bad config).
class ContractViolation : public Error {
public:
  using Error::Error;
};

/// Input is well-formed but mathematically degenerate (zero matrix, p = 0, ...).
class DegenerateInput : public Error {
public:
  using Error::Error;
};

/// Requested mode exceeds a configured size cap or is otherwise not allowed.
class ConfigurationError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(const std::string& message, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class BoundsError : public Error {
public:
  using Error::Error;
};

/// CG met p^T A p <= 0: the operator is not SPD.
class IndefiniteOperator : public Error {
public:
  IndefiniteOperator(const std::string& message, std::size_t iteration)
      : Error(message), iteration_(iteration) {}

  [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }

private:
  std::size_t iteration_;
};

/// NaN or Inf appeared inside a Krylov basis.
class NumericalFailure : public Error {
public:
  NumericalFailure(const std::string& message, std::size_t iteration)
      : Error(message), iteration_(iteration) {}

  [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }

private:
  std::size_t iteration_;
};

/// The reference solver used for ERR could not produce a solution.
class OracleFailure : public Error {
public:
  using Error::Error;
};

class DivergenceDetected : public Error {
public:
  DivergenceDetected(const std::string& message, std::size_t iteration)
      : Error(message), iteration_(iteration) {}

  [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }

private:
  std::size_t iteration_;
};

class EstimateUnreliable : public Error {
public:
  EstimateUnreliable(const std::string& message, double previous_window, double last_window)
      : Error(message), previous_window_(previous_window), last_window_(last_window) {}

  [[nodiscard]] double previous_window() const noexcept { return previous_window_; }
  [[nodiscard]] double last_window() const noexcept { return last_window_; }

private:
  double previous_window_;
  double last_window_;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace ils

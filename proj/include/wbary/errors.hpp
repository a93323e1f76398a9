#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wbary {

/// Dimension mismatch between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cost matrix with a negative entry.
class InvalidCostError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a function (log of zero, negative mass).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Solver parameters that cannot produce a valid configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested variant is not supported by an oracle.
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solver produced a non-finite value. Carries the iteration where it happened;
/// `inner` is the inner (prox) sweep index for nested solvers, or npos.
class NumericalFailure : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  NumericalFailure(const std::string& what, std::size_t iteration,
                   std::size_t inner = npos)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) +
                           (inner == npos ? std::string()
                                          : ", inner " + std::to_string(inner)) +
                           ")"),
        iteration_(iteration),
        inner_(inner) {}

  std::size_t iteration() const noexcept { return iteration_; }
  std::size_t inner() const noexcept { return inner_; }

 private:
  std::size_t iteration_;
  std::size_t inner_;
};

/// Malformed input file; `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace wbary

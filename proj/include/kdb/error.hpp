#pragma once

#include <stdexcept>
#include <string>

namespace kdb {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside an operation's domain (e.g. delta_p < -N_m, n > 170 for the Hermite path).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite intermediate or overflow.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Root or eigenvalue search that could not bracket or converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Adaptive step size fell below the configured minimum.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

// Population leaked into the truncation boundary.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, double tail) : Error(what), tail_(tail) {}
  double tail() const { return tail_; }

 private:
  double tail_;
};

// Sampling grid too small or malformed.
class GridError : public Error {
 public:
  using Error::Error;
};

// Configuration file rejected by schema validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Request beyond a deliberate scale cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace kdb

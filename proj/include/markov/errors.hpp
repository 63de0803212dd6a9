#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace markov {

// Base class of every exception thrown by this library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A call violated its contract: bad dimension, index out of range,
// mismatched alphabet or order.
class contract_error : public error {
 public:
  using error::error;
};

// A dense materialization would exceed the configured entry cap.
class capacity_error : public error {
 public:
  using error::error;
};

// Input outside the mathematical domain of an operation (e.g. the bandit
// closed form when delta*(1-p) - p is not positive).
class domain_error : public error {
 public:
  using error::error;
};

// An internal numeric consistency check failed.
class numeric_error : public error {
 public:
  using error::error;
};

// An iterative solver exhausted its budget. Carries the last residual so
// callers can report how far the iteration got.
class convergence_error : public numeric_error {
 public:
  convergence_error(const std::string& message, std::size_t iterations, double residual)
      : numeric_error(message), iterations(iterations), residual(residual) {}

  std::size_t iterations;
  double residual;
};

// Model file problems: missing file, parse failure, schema violation.
class io_error : public error {
 public:
  using error::error;
};

}  // namespace markov

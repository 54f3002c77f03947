#pragma once

#include <stdexcept>
#include <string>

namespace qfikit {

// Precondition or invariant violation on an input value.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation requires a full-rank (or sufficiently supported) operator.
class RankError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Iterative scheme failed to reach its tolerance; carries the last residual.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace qfikit

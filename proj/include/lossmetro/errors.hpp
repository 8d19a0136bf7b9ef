#pragma once

#include <stdexcept>
#include <string>

namespace lossmetro {

/// Input violates a documented precondition (bad layout, infeasible spec,
/// unknown config key, ...). The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested probe does not fit in the given per-mode cutoff.
class CutoffTooSmall : public ValidationError {
 public:
  CutoffTooSmall(const std::string& what, int required_cutoff)
      : ValidationError(what), required_cutoff_(required_cutoff) {}

  int required_cutoff() const noexcept { return required_cutoff_; }

 private:
  int required_cutoff_;
};

/// Numerical breakdown: degenerate state family, flat likelihood, non-PSD
/// operator beyond tolerance. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lossmetro

#pragma once

#include <stdexcept>
#include <string>

namespace tdqmc {

/// Invalid input: bad config values, mismatched grids, missing references.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state that cannot be normalized (zero norm).
class DegenerateStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear algebra breakdown (singular tridiagonal pivot, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver did not converge, or a relaxation ran away.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tdqmc

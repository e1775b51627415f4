#pragma once

#include <stdexcept>

namespace phmm {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or out-of-range indices.
struct ArgumentError : Error {
  using Error::Error;
};

/// Structural model problems (reducible chains, unreachable states).
struct ModelError : Error {
  using Error::Error;
};

/// Malformed or degenerate observation data.
struct DataError : Error {
  using Error::Error;
};

/// Non-finite intermediate values in a numerical routine.
struct NumericError : Error {
  using Error::Error;
};

/// Requested quantity has no finite value.
struct DivergenceError : Error {
  using Error::Error;
};

/// Model-check preconditions cannot be met on the given sequences.
struct CheckError : Error {
  using Error::Error;
};

/// Curvature information unusable for uncertainty quantification.
struct UncertaintyError : Error {
  using Error::Error;
};

/// File access or parse failures.
struct IoError : Error {
  using Error::Error;
};

}  // namespace phmm

#pragma once

#include <stdexcept>
#include <string>

namespace mvf {

// Base class for all errors thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File / format problems: missing files, malformed headers, bad indices.
struct IoError : Error {
  using Error::Error;
};

// Data that violates a documented invariant (ranges, dimensions, masks).
struct ValidationError : Error {
  using Error::Error;
};

// NaNs, solver aborts, degenerate inputs to numerical routines.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace mvf

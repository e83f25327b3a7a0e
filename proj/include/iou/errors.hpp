#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iou {

// Base type for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Box width or height is not strictly positive.
struct DegenerateBoxError : Error {
  using Error::Error;
};

// A coordinate is NaN or infinite.
struct NonFiniteError : Error {
  using Error::Error;
};

// Convexification power must be > 1.
struct InvalidPowerError : Error {
  using Error::Error;
};

// Value outside the domain of the requested operation.
struct DomainError : Error {
  using Error::Error;
};

// A gradient update produced a box that violates the box invariants.
struct DegenerateStepError : Error {
  using Error::Error;
};

// An operation that needs at least one element got none.
struct EmptyInputError : Error {
  using Error::Error;
};

// A sampling report was requested with zero samples.
struct EmptySampleError : Error {
  using Error::Error;
};

// Malformed textual input; carries the 1-based line number.
struct ParseError : Error {
  ParseError(const std::string& message, std::size_t line_number)
      : Error("line " + std::to_string(line_number) + ": " + message),
        line(line_number) {}
  std::size_t line;
};

}  // namespace iou

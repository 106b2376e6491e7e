#pragma once

#include <stdexcept>
#include <string>

namespace fredholm {

struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NoPositiveSingularValue : std::runtime_error {
  NoPositiveSingularValue() : std::runtime_error("matrix has no positive singular value") {}
};

// Raised when a computed quantity contradicts an identity that must hold.
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainTooThin : GeometryError {
  using GeometryError::GeometryError;
};

}  // namespace fredholm

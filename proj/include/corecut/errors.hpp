#pragma once

#include <stdexcept>
#include <string>

namespace corecut {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments: dimension mismatches, out-of-domain points, violated preconditions.
struct InvalidInputError : Error {
    using Error::Error;
};

// Geometrically degenerate input: zero-length direction, collinear triangle, empty polygon.
struct DegenerateInputError : Error {
    using Error::Error;
};

// Numerical consistency violated (e.g. arccosh argument far below 1).
struct NumericalError : Error {
    using Error::Error;
};

// Monte Carlo sampling failed: domain too thin, empty region.
struct SamplingError : Error {
    using Error::Error;
};

// Operation not defined for the given space (e.g. blocking radius at k = 0).
struct UnsupportedError : Error {
    using Error::Error;
};

// Malformed files or configuration.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace corecut

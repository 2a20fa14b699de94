#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eikonal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A function was evaluated outside its domain (log of a nonpositive
/// number, a point on or outside the unit disk, a non-finite result).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The generating function in a denominator vanished (g or g').
class SingularFamilyError : public Error {
public:
    using Error::Error;
};

/// A caller-side precondition was violated (degenerate x3, bad sizes).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Numerical procedure failed (quadrature, least squares).
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace eikonal

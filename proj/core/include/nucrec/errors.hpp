#pragma once

#include <stdexcept>
#include <string>

namespace nucrec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes or lengths that do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical kernel failed (non-convergence, non-finite input).
class NumericFailure : public Error {
public:
    using Error::Error;
};

/// The measurement map is rank deficient where full row rank is required.
class DegenerateMap : public Error {
public:
    using Error::Error;
};

/// The r x r pivot block of a Schur-complement split is (near) singular.
class DegenerateDecomposition : public Error {
public:
    using Error::Error;
};

/// No null-space violation is present, so no counterexample can be built.
class NoCounterexample : public Error {
public:
    using Error::Error;
};

/// The reference matrix for a recovery check is zero.
class InvalidReference : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace nucrec

#pragma once

#include <stdexcept>
#include <string>

namespace pinv {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A field, mask or coefficient does not match the grid it is used with.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A region is too thin for the finite-difference stencil requested.
class StencilError : public Error {
public:
    using Error::Error;
};

/// Sparse factorization or solve failed.
class SolverError : public Error {
public:
    using Error::Error;
};

/// A division floor or a normal-component condition is violated.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// An assumption required by an operation does not hold for its inputs.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Input fields are not a discrete solution of the stated system.
class NotASolutionError : public Error {
public:
    using Error::Error;
};

/// Too few independent rows to determine the unknowns.
class RankDeficiencyError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration; the message names the offending field.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace pinv

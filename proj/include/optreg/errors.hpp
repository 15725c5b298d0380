#pragma once

#include <stdexcept>
#include <string>

namespace optreg {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad inputs: malformed matrices, inconsistent dimensions, invalid options.
/// The CLI maps these to exit code 2.
struct ValidationError : Error {
    using Error::Error;
};

struct DimensionMismatch : ValidationError {
    using ValidationError::ValidationError;
};

struct NonSymmetric : ValidationError {
    using ValidationError::ValidationError;
};

struct NotPositiveDefinite : ValidationError {
    using ValidationError::ValidationError;
};

struct InvalidArgument : ValidationError {
    using ValidationError::ValidationError;
};

struct EmptyTrajectory : ValidationError {
    using ValidationError::ValidationError;
};

/// Numerical failures inside a solver. The CLI maps these to exit code 3.
struct SolverError : Error {
    using Error::Error;
};

struct EigenFailure : SolverError {
    using SolverError::SolverError;
};

struct NotStabilizable : SolverError {
    using SolverError::SolverError;
};

struct SolverDivergence : SolverError {
    using SolverError::SolverError;
};

struct IndefiniteResult : SolverError {
    using SolverError::SolverError;
};

// Violations of the second-order synthesis hypotheses (real, distinct,
// nonzero eigenvalues). Each names the hypothesis that failed.
struct ComplexEigenvalues : ValidationError {
    using ValidationError::ValidationError;
};

struct RepeatedEigenvalues : ValidationError {
    using ValidationError::ValidationError;
};

struct ZeroEigenvalue : ValidationError {
    using ValidationError::ValidationError;
};

/// State outside the one-arc reachable set of the switching relation.
struct DomainError : Error {
    using Error::Error;
};

/// State from which no admissible bounded control can reach the origin.
struct OutsideStabilityRegion : Error {
    using Error::Error;
};

} // namespace optreg

#pragma once

#include <stdexcept>
#include <string>

namespace diraclab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad problem definitions, malformed config files.
struct ConfigError : Error {
    using Error::Error;
};

// Numerical machinery failed to deliver the requested accuracy.
struct NumericError : Error {
    using Error::Error;
};

struct AllMinorsZero : ConfigError {
    AllMinorsZero() : ConfigError("boundary matrix rows are linearly dependent (all minors vanish)") {}
};

struct DomainError : Error {
    using Error::Error;
};

struct QuadratureFailure : NumericError {
    using NumericError::NumericError;
};

struct DegenerateFit : NumericError {
    using NumericError::NumericError;
};

struct EndpointDataUnavailable : NumericError {
    using NumericError::NumericError;
};

struct StepSizeUnderflow : NumericError {
    using NumericError::NumericError;
};

struct OverflowGuard : NumericError {
    using NumericError::NumericError;
};

struct TruncationCapReached : NumericError {
    using NumericError::NumericError;
};

struct MethodUnavailable : Error {
    using Error::Error;
};

struct SectorViolation : Error {
    using Error::Error;
};

struct BoundaryZero : NumericError {
    using NumericError::NumericError;
};

struct PhaseTrackingFailure : NumericError {
    using NumericError::NumericError;
};

struct ChainConstructionFailure : NumericError {
    using NumericError::NumericError;
};

struct BudgetExceeded : Error {
    using Error::Error;
};

}  // namespace diraclab

#pragma once

#include <stdexcept>
#include <string>

namespace fif {

/// Failure categories surfaced by the library. The CLI maps these onto its
/// exit-code contract (1 usage/config, 2 verification failure, 3 solver
/// non-convergence).
enum class ErrorCode {
    // input validation
    NonMonotonicKnots,
    TooFewKnots,
    NonFiniteKnot,
    IndexOutOfRange,
    PointOutsideDomain,
    OutOfDomain,
    LatticeMismatch,
    DegeneratePair,
    DepthTooLarge,
    OperatorNotDeclaredLinear,
    // verification failures
    SharedPointViolation,
    DataConstraintViolation,
    ContractionViolation,
    MatchingViolation,
    BaseCornerMismatch,
    ScalingBoundViolation,
    BoundViolation,
    LinearityViolation,
    NotAdmissible,
    ConstraintsUnverified,
    // solver
    NotConverged,
    ContractionConditionFailed,
    // expression / config / io
    SyntaxError,
    UnknownIdentifier,
    EvalDomainError,
    IoError,
    SchemaError,
    CrossFieldError,
    UsageError,
};

const char* to_string(ErrorCode code) noexcept;

class FifError : public std::runtime_error {
public:
    FifError(ErrorCode code, const std::string& message);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

/// CLI exit code for an error category: 1 usage/config, 2 verification
/// failure, 3 non-convergence.
int exit_code_for(ErrorCode code) noexcept;

}  // namespace fif

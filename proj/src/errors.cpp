#include "fif/errors.hpp"

namespace fif {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonMonotonicKnots: return "NonMonotonicKnots";
        case ErrorCode::TooFewKnots: return "TooFewKnots";
        case ErrorCode::NonFiniteKnot: return "NonFiniteKnot";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::PointOutsideDomain: return "PointOutsideDomain";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::LatticeMismatch: return "LatticeMismatch";
        case ErrorCode::DegeneratePair: return "DegeneratePair";
        case ErrorCode::DepthTooLarge: return "DepthTooLarge";
        case ErrorCode::OperatorNotDeclaredLinear: return "OperatorNotDeclaredLinear";
        case ErrorCode::SharedPointViolation: return "SharedPointViolation";
        case ErrorCode::DataConstraintViolation: return "DataConstraintViolation";
        case ErrorCode::ContractionViolation: return "ContractionViolation";
        case ErrorCode::MatchingViolation: return "MatchingViolation";
        case ErrorCode::BaseCornerMismatch: return "BaseCornerMismatch";
        case ErrorCode::ScalingBoundViolation: return "ScalingBoundViolation";
        case ErrorCode::BoundViolation: return "BoundViolation";
        case ErrorCode::LinearityViolation: return "LinearityViolation";
        case ErrorCode::NotAdmissible: return "NotAdmissible";
        case ErrorCode::ConstraintsUnverified: return "ConstraintsUnverified";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::ContractionConditionFailed: return "ContractionConditionFailed";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
        case ErrorCode::EvalDomainError: return "EvalDomainError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::CrossFieldError: return "CrossFieldError";
        case ErrorCode::UsageError: return "UsageError";
    }
    return "UnknownError";
}

FifError::FifError(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) {
    throw FifError(code, message);
}

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SharedPointViolation:
        case ErrorCode::DataConstraintViolation:
        case ErrorCode::ContractionViolation:
        case ErrorCode::MatchingViolation:
        case ErrorCode::BaseCornerMismatch:
        case ErrorCode::ScalingBoundViolation:
        case ErrorCode::BoundViolation:
        case ErrorCode::LinearityViolation:
        case ErrorCode::NotAdmissible:
        case ErrorCode::ConstraintsUnverified:
            return 2;
        case ErrorCode::NotConverged:
            return 3;
        default:
            return 1;
    }
}

}  // namespace fif

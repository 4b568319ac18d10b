#include "ethsim/errors.hpp"

namespace ethsim {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NotAbelian: return "NotAbelian";
        case ErrorKind::GenericityFailure: return "GenericityFailure";
        case ErrorKind::ZeroProbability: return "ZeroProbability";
        case ErrorKind::NotMember: return "NotMember";
        case ErrorKind::TooManyProjections: return "TooManyProjections";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::NotInFutureAlgebra: return "NotInFutureAlgebra";
        case ErrorKind::AmbiguousPointer: return "AmbiguousPointer";
        case ErrorKind::TreeTooLarge: return "TreeTooLarge";
        case ErrorKind::DepthExceeded: return "DepthExceeded";
        case ErrorKind::EmptyProtocol: return "EmptyProtocol";
        case ErrorKind::SeparationFailure: return "SeparationFailure";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ValidationError: return "ValidationError";
        case ErrorKind::NoEvent: return "NoEvent";
        case ErrorKind::NonConvergence: return "NonConvergence";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace ethsim

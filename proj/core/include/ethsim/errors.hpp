#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ethsim {

enum class ErrorKind {
    NotHermitian,
    DimensionMismatch,
    NotAbelian,
    GenericityFailure,
    ZeroProbability,
    NotMember,
    TooManyProjections,
    OutOfRange,
    NotInFutureAlgebra,
    AmbiguousPointer,
    TreeTooLarge,
    DepthExceeded,
    EmptyProtocol,
    SeparationFailure,
    ParseError,
    ValidationError,
    NoEvent,
    NonConvergence,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace ethsim

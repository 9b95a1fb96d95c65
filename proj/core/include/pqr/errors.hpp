#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pqr {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    SizeOverflow,
    SchurNonConvergence,
    EigenvalueSumNearZero,
    NonRealSolution,
    Unstabilizable,
    RefinementStagnation,
    MissingCoefficient,
    ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; what() carries a
// human-readable message prefixed with the error kind.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Compact "%.6g" rendering of a floating-point value for messages.
std::string format_number(double value);

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

}  // namespace pqr

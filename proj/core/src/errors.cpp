#include "pqr/errors.hpp"

#include <cstdio>

namespace pqr {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid argument";
        case ErrorCode::DimensionMismatch: return "dimension mismatch";
        case ErrorCode::SizeOverflow: return "size overflow";
        case ErrorCode::SchurNonConvergence: return "schur non-convergence";
        case ErrorCode::EigenvalueSumNearZero: return "eigenvalue-sum near zero";
        case ErrorCode::NonRealSolution: return "non-real solution";
        case ErrorCode::Unstabilizable: return "unstabilizable pair";
        case ErrorCode::RefinementStagnation: return "refinement stagnation";
        case ErrorCode::MissingCoefficient: return "missing coefficient";
        case ErrorCode::ParseError: return "parse error";
    }
    return "unknown error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace pqr

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ammfee {

enum class ErrorCode {
    DomainError,
    NoConvergence,
    DegenerateCurve,
    RangeError,
    ArbitrageViolation,
    OutOfBounds,
    InsufficientData,
    DegenerateInput,
    EmptyInput,
    UnsortedInput,
    ParseError,
    InvalidArgument,
};

inline std::string_view toString(ErrorCode code) {
    switch (code) {
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateCurve: return "DegenerateCurve";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::ArbitrageViolation: return "ArbitrageViolation";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnsortedInput: return "UnsortedInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI) can dispatch on it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(toString(code)) + ": " + detail)
        , code_(code)
        , detail_(detail) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
    throw Error(code, detail);
}

}  // namespace ammfee

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace viewcal {

/// Machine-readable failure categories surfaced by every module.
enum class ErrorCode {
    SingularBlock,
    SingularMap,
    SingularConditionalCovariance,
    DivergentEntropy,
    NonIntegrableTilt,
    NotConverged,
    InconclusiveSample,
    NonSampleableConditional,
    InsufficientSamples,
    NonIntegrablePayoff,
    SingularV,
    ZeroCorrelation,
    QuadratureFailure,
    InadmissibleTail,
    InsufficientData,
    InvalidArgument,
    Validation,
    Io,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::SingularBlock: return "SingularBlock";
        case ErrorCode::SingularMap: return "SingularMap";
        case ErrorCode::SingularConditionalCovariance: return "SingularConditionalCovariance";
        case ErrorCode::DivergentEntropy: return "DivergentEntropy";
        case ErrorCode::NonIntegrableTilt: return "NonIntegrableTilt";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::InconclusiveSample: return "InconclusiveSample";
        case ErrorCode::NonSampleableConditional: return "NonSampleableConditional";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::NonIntegrablePayoff: return "NonIntegrablePayoff";
        case ErrorCode::SingularV: return "SingularV";
        case ErrorCode::ZeroCorrelation: return "ZeroCorrelation";
        case ErrorCode::QuadratureFailure: return "QuadratureFailure";
        case ErrorCode::InadmissibleTail: return "InadmissibleTail";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Validation: return "Validation";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
    if (!condition) fail(code, what);
}

}  // namespace viewcal

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace orlicz_dyn {

enum class ErrorCode {
    InvalidParameter,
    OutOfGrid,
    Unbounded,
    ConjugateDiverges,
    ModelMismatch,
    EmptySet,
    SupportEscapesK,
    DisjointnessViolated,
    NotChaoticAtN,
    InvalidConfig,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::OutOfGrid: return "OutOfGrid";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::ConjugateDiverges: return "ConjugateDiverges";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::SupportEscapesK: return "SupportEscapesK";
    case ErrorCode::DisjointnessViolated: return "DisjointnessViolated";
    case ErrorCode::NotChaoticAtN: return "NotChaoticAtN";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace orlicz_dyn

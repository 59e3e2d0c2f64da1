#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hinf_autopilot {

enum class ErrorCode {
    ShapeError,
    NoStabilizingSolution,
    IndefiniteSolution,
    UnstableSystem,
    BracketInvalid,
    StepTooLarge,
    NonFiniteDerivative,
    NonFiniteState,
    ClosedLoopUnstable,
    SynthesisFailed,
    InvalidArgument,
    ConfigError,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ShapeError: return "SHAPE_ERROR";
        case ErrorCode::NoStabilizingSolution: return "NO_STABILIZING_SOLUTION";
        case ErrorCode::IndefiniteSolution: return "INDEFINITE_SOLUTION";
        case ErrorCode::UnstableSystem: return "UNSTABLE_SYSTEM";
        case ErrorCode::BracketInvalid: return "BRACKET_INVALID";
        case ErrorCode::StepTooLarge: return "STEP_TOO_LARGE";
        case ErrorCode::NonFiniteDerivative: return "NON_FINITE_DERIVATIVE";
        case ErrorCode::NonFiniteState: return "NON_FINITE_STATE";
        case ErrorCode::ClosedLoopUnstable: return "CLOSED_LOOP_UNSTABLE";
        case ErrorCode::SynthesisFailed: return "SYNTHESIS_FAILED";
        case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
        case ErrorCode::ConfigError: return "CONFIG_ERROR";
    }
    return "UNKNOWN";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace hinf_autopilot

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "errors.hpp"
#include "vehicle_model.hpp"

namespace hinf_autopilot {

constexpr double kServoTimeConstant = 0.1;                 // s
constexpr double kServoRateLimit = 25.0 * kDegToRad;       // rad/s
constexpr double kGyroNaturalFrequency = 80.0 * std::numbers::pi;  // rad/s
constexpr double kGyroTwoZetaOmega = 40.0 * std::numbers::pi;      // rad/s
constexpr double kGyroMaxStep = 1e-3;                      // s

/// Thrust-vector servo: first-order lag 1/(tau s + 1) with a deflection-rate limit.
struct ServoState {
    double delta = 0.0; // rad
    double tau = kServoTimeConstant;
    double rate_limit = kServoRateLimit;
};

/// Deflection rate the servo would command before the limit is applied.
[[nodiscard]] inline double servo_unconstrained_rate(const ServoState& s, double delta_c) {
    return (delta_c - s.delta) / s.tau;
}

[[nodiscard]] inline bool servo_rate_limited(const ServoState& s, double delta_c) {
    return std::abs(servo_unconstrained_rate(s, delta_c)) > s.rate_limit;
}

// Forward Euler on the clamped rate; the clamp makes the right-hand side
// non-smooth, so a higher-order scheme gains nothing here.
[[nodiscard]] inline ServoState servo_step(const ServoState& s, double delta_c, double dt) {
    if (!(dt > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "servo_step: dt must be positive");
    }
    if (!(s.tau > 0.0) || !(s.rate_limit > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "servo_step: tau and rate_limit must be positive");
    }
    const double rate = std::clamp(servo_unconstrained_rate(s, delta_c), -s.rate_limit, s.rate_limit);
    ServoState next = s;
    next.delta = s.delta + rate * dt;
    return next;
}

/// Rate gyro omega_n^2 / (s^2 + 2 zeta omega_n s + omega_n^2), realised as
/// x1' = x2, x2' = omega_n^2 (q - x1) - 2 zeta omega_n x2; the measurement is x1.
struct GyroState {
    double x1 = 0.0; // rad/s
    double x2 = 0.0; // rad/s^2
    double omega_n = kGyroNaturalFrequency;
    double two_zeta_omega = kGyroTwoZetaOmega;

    [[nodiscard]] double damping() const { return two_zeta_omega / (2.0 * omega_n); }
    [[nodiscard]] double measurement() const { return x1; }
};

[[nodiscard]] inline GyroState gyro_settled(double q) { return GyroState{q, 0.0}; }

/// One classical RK4 step with q_true held over the step.
[[nodiscard]] inline GyroState gyro_step(const GyroState& s, double q_true, double dt) {
    if (!(dt > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "gyro_step: dt must be positive");
    }
    if (dt > kGyroMaxStep) {
        throw Error(ErrorCode::StepTooLarge, "gyro_step: dt exceeds the 1e-3 s stability guard");
    }
    const double wn2 = s.omega_n * s.omega_n;
    const auto f = [&](double x1, double x2) {
        return std::pair{x2, wn2 * (q_true - x1) - s.two_zeta_omega * x2};
    };
    const auto [k1a, k1b] = f(s.x1, s.x2);
    const auto [k2a, k2b] = f(s.x1 + 0.5 * dt * k1a, s.x2 + 0.5 * dt * k1b);
    const auto [k3a, k3b] = f(s.x1 + 0.5 * dt * k2a, s.x2 + 0.5 * dt * k2b);
    const auto [k4a, k4b] = f(s.x1 + dt * k3a, s.x2 + dt * k3b);
    GyroState next = s;
    next.x1 = s.x1 + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    next.x2 = s.x2 + dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    return next;
}

} // namespace hinf_autopilot

#pragma once

#include <Eigen/Dense>

#include "vehicle_model.hpp"

// Published launch-vehicle pitch-channel data: coefficient snapshots at two
// flight times and the Riccati solutions / gains printed for them (4 decimals).
namespace hinf_autopilot::reference {

inline constexpr double kLtiDesignTime = 60.0;   // s
inline constexpr double kLtiDesignGamma = 20.0;
inline constexpr double kLtvDesignTime = 100.0;  // s
inline constexpr double kLtvDesignGamma = 7.8;

[[nodiscard]] inline DynamicCoefficients coefficients_t60() {
    DynamicCoefficients c;
    c.Z_v = -0.054252;
    c.Z_q = 608.84;
    c.Z_theta = -6.4939;
    c.Z_delta = -3.4855;
    c.M_v = -0.003439;
    c.M_q = -0.18404;
    c.M_delta = -1.9594;
    return c;
}

[[nodiscard]] inline DynamicCoefficients coefficients_t100() {
    DynamicCoefficients c;
    c.Z_v = -0.0020551;
    c.Z_q = 1827.8;
    c.Z_theta = -6.4939;
    c.Z_delta = -6.2007;
    c.M_v = 0.0002725;
    c.M_q = -0.014108;
    c.M_delta = -2.1086;
    return c;
}

/// Printed Riccati solution at t = 60 s, gamma = 20.
[[nodiscard]] inline Matrix3 printed_x_t60() {
    Matrix3 x;
    // clang-format off
    x << 25.4427, 0.7938, 0.0405,
         0.7938,  0.809,  0.0013,
         0.0405,  0.0013, 0.0001;
    // clang-format on
    return x;
}

/// Printed Riccati solution at t = 100 s, gamma = 7.8.
[[nodiscard]] inline Matrix3 printed_x_t100() {
    Matrix3 x;
    // clang-format off
    x << 63.3031,  0.6819,  0.034,
         0.6819,   1.8298, -0.0002,
         0.034,   -0.0002,  0.0000;
    // clang-format on
    return x;
}

/// Printed gain row at t = 60 s.
[[nodiscard]] inline Eigen::RowVector3d printed_k_t60() { return {1.4141, 1.5804, 0.0024}; }

/// Gain row at t = 100 s; only the product form B^T X is printed there, so
/// these are that product over the printed matrices, rounded to 4 decimals.
[[nodiscard]] inline Eigen::RowVector3d printed_k_t100() { return {1.2270, 3.8597, -0.0004}; }

/// Two anchors, linear between them and clamped outside.
[[nodiscard]] inline CoefficientSchedule default_schedule() {
    return CoefficientSchedule({{kLtiDesignTime, coefficients_t60()}, {kLtvDesignTime, coefficients_t100()}});
}

/// Placeholder pitch-over program [rad/s]: 0 until 2 s, ramp to -0.015 by 12 s,
/// hold to 60 s, ramp back to 0 by 80 s.
[[nodiscard]] inline CommandProfile default_command_profile() {
    return CommandProfile({{0.0, 0.0}, {2.0, 0.0}, {12.0, -0.015}, {60.0, -0.015}, {80.0, 0.0}});
}

} // namespace hinf_autopilot::reference

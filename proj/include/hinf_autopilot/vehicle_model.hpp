#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace hinf_autopilot {

using Vector3 = Eigen::Vector3d;
using Vector2 = Eigen::Vector2d;
using Matrix3 = Eigen::Matrix3d;

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Pitch-channel small-perturbation coefficients at one flight instant.
/// Values are kept in the source data's native units.
struct DynamicCoefficients {
    double Z_v = 0.0;
    double Z_q = 0.0;
    double Z_theta = 0.0;
    double Z_delta = 0.0;
    double M_v = 0.0;
    double M_q = 0.0;
    double M_delta = 0.0;

    [[nodiscard]] std::array<double, 7> as_array() const { return {Z_v, Z_q, Z_theta, Z_delta, M_v, M_q, M_delta}; }

    [[nodiscard]] static DynamicCoefficients from_array(const std::array<double, 7>& v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    }

    [[nodiscard]] bool finite() const {
        const auto v = as_array();
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    }

    friend bool operator==(const DynamicCoefficients&, const DynamicCoefficients&) = default;
};

/// Breakpoint table of coefficients, piecewise-linear in time and clamped
/// outside the covered interval.
class CoefficientSchedule {
public:
    using Breakpoint = std::pair<double, DynamicCoefficients>;

    explicit CoefficientSchedule(std::vector<Breakpoint> breakpoints) : breakpoints_(std::move(breakpoints)) {
        if (breakpoints_.empty()) {
            throw Error(ErrorCode::InvalidArgument, "coefficient schedule needs at least one breakpoint");
        }
        for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
            if (!std::isfinite(breakpoints_[i].first) || !breakpoints_[i].second.finite()) {
                throw Error(ErrorCode::InvalidArgument, "coefficient schedule contains non-finite values");
            }
            if (i > 0 && !(breakpoints_[i].first > breakpoints_[i - 1].first)) {
                throw Error(ErrorCode::InvalidArgument, "coefficient schedule times must be strictly increasing");
            }
        }
    }

    [[nodiscard]] const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }

private:
    std::vector<Breakpoint> breakpoints_;
};

[[nodiscard]] inline DynamicCoefficients coefficients_at(const CoefficientSchedule& schedule, double t) {
    const auto& bp = schedule.breakpoints();
    if (t <= bp.front().first) {
        return bp.front().second;
    }
    if (t >= bp.back().first) {
        return bp.back().second;
    }
    const auto upper = std::upper_bound(bp.begin(), bp.end(), t,
                                        [](double value, const auto& b) { return value < b.first; });
    const auto lower = upper - 1;
    const double frac = (t - lower->first) / (upper->first - lower->first);
    const auto a = lower->second.as_array();
    const auto b = upper->second.as_array();
    std::array<double, 7> out{};
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a[i] + frac * (b[i] - a[i]);
    }
    return DynamicCoefficients::from_array(out);
}

/// Tracking plant on the augmented state [int e, e, v_z] with e = q_c - q.
struct PlantModel {
    Matrix3 A = Matrix3::Zero();
    Vector3 B = Vector3::Zero();
    Eigen::Matrix<double, 3, 2> B_w = Eigen::Matrix<double, 3, 2>::Zero();
    Eigen::RowVector3d C_meas = Eigen::RowVector3d(0.0, 1.0, 0.0);
};

[[nodiscard]] inline PlantModel assemble_pitch_plant(const DynamicCoefficients& c) {
    PlantModel p;
    // clang-format off
    p.A <<  0.0,        1.0,      0.0,
            0.0,        c.M_q,   -c.M_v,
           -c.Z_theta, -c.Z_q,    c.Z_v;
    p.B << 0.0, -c.M_delta, c.Z_delta;
    p.B_w << 0.0, 0.0,
             0.0, 1.0,
             1.0, 0.0;
    // clang-format on
    return p;
}

/// Pitch-rate command q_c(t) [rad/s], piecewise linear between breakpoints and
/// held constant outside them. The running integral is accumulated in closed form.
class CommandProfile {
public:
    using Breakpoint = std::pair<double, double>;

    CommandProfile() : CommandProfile(std::vector<Breakpoint>{{0.0, 0.0}}) {}

    explicit CommandProfile(std::vector<Breakpoint> breakpoints) : breakpoints_(std::move(breakpoints)) {
        if (breakpoints_.empty()) {
            throw Error(ErrorCode::InvalidArgument, "command profile needs at least one breakpoint");
        }
        for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
            if (!std::isfinite(breakpoints_[i].first) || !std::isfinite(breakpoints_[i].second)) {
                throw Error(ErrorCode::InvalidArgument, "command profile contains non-finite values");
            }
            if (i > 0 && !(breakpoints_[i].first > breakpoints_[i - 1].first)) {
                throw Error(ErrorCode::InvalidArgument, "command profile times must be strictly increasing");
            }
        }
        // cumulative_[i] = integral from 0 to t_i.
        cumulative_.resize(breakpoints_.size());
        cumulative_[0] = segment_integral(0.0, breakpoints_[0].first);
        for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
            const auto& [t0, q0] = breakpoints_[i - 1];
            const auto& [t1, q1] = breakpoints_[i];
            cumulative_[i] = cumulative_[i - 1] + 0.5 * (q0 + q1) * (t1 - t0);
        }
    }

    [[nodiscard]] static CommandProfile constant(double q_c) { return CommandProfile({{0.0, q_c}}); }

    [[nodiscard]] const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }

    [[nodiscard]] double rate(double t) const {
        const auto& bp = breakpoints_;
        if (t <= bp.front().first) {
            return bp.front().second;
        }
        if (t >= bp.back().first) {
            return bp.back().second;
        }
        const std::size_t i = segment_index(t);
        const auto& [t0, q0] = bp[i];
        const auto& [t1, q1] = bp[i + 1];
        return q0 + (t - t0) / (t1 - t0) * (q1 - q0);
    }

    /// Slope of q_c; right-continuous at breakpoints, zero in the clamped regions.
    [[nodiscard]] double rate_derivative(double t) const {
        const auto& bp = breakpoints_;
        if (t < bp.front().first || t >= bp.back().first) {
            return 0.0;
        }
        const std::size_t i = segment_index(t);
        return (bp[i + 1].second - bp[i].second) / (bp[i + 1].first - bp[i].first);
    }

    /// Integral of q_c from 0 to t (negative t integrates backwards).
    [[nodiscard]] double integral(double t) const {
        const auto& bp = breakpoints_;
        if (t <= bp.front().first) {
            return cumulative_[0] - (bp.front().first - t) * bp.front().second;
        }
        if (t >= bp.back().first) {
            return cumulative_.back() + (t - bp.back().first) * bp.back().second;
        }
        const std::size_t i = segment_index(t);
        const double q_t = rate(t);
        return cumulative_[i] + 0.5 * (bp[i].second + q_t) * (t - bp[i].first);
    }

private:
    // Integral over [a, b] of the clamped profile, for a, b <= first breakpoint.
    [[nodiscard]] double segment_integral(double a, double b) const { return (b - a) * breakpoints_.front().second; }

    // Index i with t_i <= t < t_{i+1}; requires t inside the breakpoint range.
    [[nodiscard]] std::size_t segment_index(double t) const {
        const auto upper = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t,
                                            [](double value, const auto& b) { return value < b.first; });
        return static_cast<std::size_t>(upper - breakpoints_.begin()) - 1;
    }

    std::vector<Breakpoint> breakpoints_;
    std::vector<double> cumulative_;
};

/// Command-driven term [0; dq_c/dt - M_q q_c; Z_q q_c + Z_theta int q_c].
[[nodiscard]] inline Vector3 affine_forcing(const DynamicCoefficients& c, const CommandProfile& profile, double t) {
    const double q_c = profile.rate(t);
    return {0.0, profile.rate_derivative(t) - c.M_q * q_c, c.Z_q * q_c + c.Z_theta * profile.integral(t)};
}

[[nodiscard]] inline Vector3 pitch_derivative(const Vector3& x, double u, const Vector2& w,
                                              const DynamicCoefficients& c, const CommandProfile& profile,
                                              double t) {
    const PlantModel plant = assemble_pitch_plant(c);
    return plant.A * x + plant.B * u + plant.B_w * w + affine_forcing(c, profile, t);
}

struct Attitude {
    double theta = 0.0; // rad
    double q = 0.0;     // rad/s
};

/// q = q_c - e and theta = int q_c - int e.
[[nodiscard]] inline Attitude reconstruct_attitude(const CommandProfile& profile, const Vector3& x, double t) {
    return {profile.integral(t) - x(0), profile.rate(t) - x(1)};
}

} // namespace hinf_autopilot

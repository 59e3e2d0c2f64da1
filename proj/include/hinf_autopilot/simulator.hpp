#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "actuators.hpp"
#include "controller.hpp"
#include "disturbance.hpp"
#include "errors.hpp"
#include "integrator.hpp"
#include "reference_data.hpp"
#include "vehicle_model.hpp"

namespace hinf_autopilot {

enum class FeedbackSource { TrueState, GyroRate };
enum class PlantMode { Ltv, LtiFrozen };

inline constexpr double kMaxStep = 1e-3; // s

struct Scenario {
    std::string name = "custom";
    CoefficientSchedule schedule = reference::default_schedule();
    CommandProfile profile = reference::default_command_profile();
    DisturbanceSpec disturbances;
    DesignPoint design;
    double t0 = 0.0;
    double tf = 1.0;
    double dt = kDefaultStep;
    FeedbackSource feedback_source = FeedbackSource::TrueState;
    PlantMode plant_mode = PlantMode::Ltv;
    bool servo_enabled = true;
    double servo_rate_limit = kServoRateLimit; // rad/s
    Vector3 initial_state = Vector3::Zero();

    void validate() const {
        if (!(t0 < tf)) {
            throw Error(ErrorCode::InvalidArgument, "scenario needs t0 < tf");
        }
        if (!(dt > 0.0) || dt > kMaxStep) {
            throw Error(ErrorCode::InvalidArgument, "scenario dt must lie in (0, 1e-3] s");
        }
        if (!(servo_rate_limit > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "servo rate limit must be positive");
        }
        if (!initial_state.allFinite()) {
            throw Error(ErrorCode::InvalidArgument, "initial state must be finite");
        }
    }
};

struct TraceSample {
    double t = 0.0;
    Vector3 x = Vector3::Zero(); // [int e, e, v_z]
    double theta = 0.0;          // rad
    double q = 0.0;              // rad/s
    double delta = 0.0;          // achieved deflection, rad
    double u = 0.0;              // commanded deflection, rad
    Vector2 w = Vector2::Zero();
    double q_measured = 0.0;     // rad/s
    bool rate_limited = false;
};

struct SimulationTrace {
    double dt = kDefaultStep;
    std::vector<TraceSample> samples;
};

struct Metrics {
    double rms_e = 0.0;
    double max_abs_e = 0.0;
    double rms_theta_err = 0.0;
    double max_abs_delta = 0.0;
    double servo_saturation_fraction = 0.0;
    double energy_ratio = 0.0; // int e^2 dt / int |w|^2 dt
};

struct SimulationResult {
    SimulationTrace trace;
    Metrics metrics;
    ControllerGain gain;
    std::optional<double> diverged_at; // time of the first non-finite sample
};

/// Whole-trace metrics. Energies use the trapezoid rule; e is the measured
/// output channel C_meas x and the attitude error is int e.
[[nodiscard]] inline Metrics compute_metrics(const SimulationTrace& trace, const CommandProfile& /*profile*/) {
    Metrics m;
    const auto& s = trace.samples;
    if (s.empty()) {
        return m;
    }
    double sum_e2 = 0.0;
    double sum_theta2 = 0.0;
    std::size_t limited = 0;
    for (const auto& smp : s) {
        const double e = smp.x(1);
        sum_e2 += e * e;
        sum_theta2 += smp.x(0) * smp.x(0);
        m.max_abs_e = std::max(m.max_abs_e, std::abs(e));
        m.max_abs_delta = std::max(m.max_abs_delta, std::abs(smp.delta));
        limited += smp.rate_limited ? 1 : 0;
    }
    const auto n = static_cast<double>(s.size());
    m.rms_e = std::sqrt(sum_e2 / n);
    m.rms_theta_err = std::sqrt(sum_theta2 / n);
    m.servo_saturation_fraction = static_cast<double>(limited) / n;

    double energy_y = 0.0;
    double energy_w = 0.0;
    for (std::size_t k = 1; k < s.size(); ++k) {
        const double h = s[k].t - s[k - 1].t;
        energy_y += 0.5 * h * (s[k].x(1) * s[k].x(1) + s[k - 1].x(1) * s[k - 1].x(1));
        energy_w += 0.5 * h * (s[k].w.squaredNorm() + s[k - 1].w.squaredNorm());
    }
    m.energy_ratio = energy_w > 0.0 ? energy_y / energy_w : 0.0;
    return m;
}

/// Closed-loop run. Per step: controller, servo, plant (RK4 with u and w held),
/// then gyro on the reconstructed pitch rate.
[[nodiscard]] inline SimulationResult simulate(const Scenario& scenario) {
    scenario.validate();
    SimulationResult result;
    try {
        result.gain = synthesize(scenario.design).gain;
    } catch (const Error& e) {
        throw Error(ErrorCode::SynthesisFailed, e.what());
    }

    const auto& profile = scenario.profile;
    const bool frozen = scenario.plant_mode == PlantMode::LtiFrozen;
    const DynamicCoefficients frozen_coeffs = scenario.design.coeffs;
    const auto coeffs_at = [&](double t) {
        return frozen ? frozen_coeffs : coefficients_at(scenario.schedule, t);
    };

    const double dt = scenario.dt;
    const auto steps = static_cast<std::size_t>(std::llround((scenario.tf - scenario.t0) / dt));
    result.trace.dt = dt;
    result.trace.samples.reserve(steps + 1);

    Vector3 x = scenario.initial_state;
    ServoState servo;
    servo.rate_limit = scenario.servo_rate_limit;
    GyroState gyro = gyro_settled(reconstruct_attitude(profile, x, scenario.t0).q);

    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = scenario.t0 + static_cast<double>(k) * dt;
        const Attitude att = reconstruct_attitude(profile, x, t);

        Vector3 x_ctrl = x;
        if (scenario.feedback_source == FeedbackSource::GyroRate) {
            x_ctrl(1) = profile.rate(t) - gyro.measurement();
        }
        const double u = control_law(result.gain, x_ctrl);

        TraceSample smp;
        smp.t = t;
        smp.x = x;
        smp.theta = att.theta;
        smp.q = att.q;
        smp.u = u;
        smp.q_measured = gyro.measurement();
        if (scenario.servo_enabled) {
            smp.rate_limited = servo_rate_limited(servo, u);
            servo = servo_step(servo, u, dt);
            smp.delta = servo.delta;
        } else {
            smp.delta = u;
        }
        smp.w = disturbance_sample(scenario.disturbances, t, dt);

        const bool finite = x.allFinite() && std::isfinite(smp.theta) && std::isfinite(smp.q) &&
                            std::isfinite(smp.u) && std::isfinite(smp.delta) && std::isfinite(smp.q_measured);
        if (!finite) {
            result.diverged_at = t;
            break;
        }
        result.trace.samples.push_back(smp);
        if (k == steps) {
            break;
        }

        const double delta = smp.delta;
        const Vector2 w = smp.w;
        try {
            x = rk4_step(
                [&](const Vector3& state, double tau) {
                    return pitch_derivative(state, delta, w, coeffs_at(tau), profile, tau);
                },
                x, t, dt);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NonFiniteDerivative) {
                throw;
            }
            result.diverged_at = t + dt;
            break;
        }
        gyro = gyro_step(gyro, profile.rate(t + dt) - x(1), dt);
    }

    result.metrics = compute_metrics(result.trace, profile);
    return result;
}

// ---------------------------------------------------------------------------
// Shipped scenarios
// ---------------------------------------------------------------------------

inline constexpr double kScenarioStart = 60.0;
inline constexpr double kScenarioEnd = 160.0;

/// Placeholder exogenous inputs: sine 0.02 at 2 rad/s on channel 0, step 0.05 at
/// t = 90 s on channel 1.
[[nodiscard]] inline DisturbanceSpec default_disturbance() {
    DisturbanceSpec d;
    d.channels[0].push_back(SineSignal{0.02, 2.0, 0.0});
    d.channels[1].push_back(StepSignal{90.0, 0.05});
    return d;
}

/// Time-varying plant, gain frozen at t = 100 s, gamma = 7.8.
[[nodiscard]] inline Scenario paper_ltv_scenario() {
    Scenario s;
    s.name = "paper-ltv";
    s.design = published_ltv_design();
    s.disturbances = default_disturbance();
    s.t0 = kScenarioStart;
    s.tf = kScenarioEnd;
    s.plant_mode = PlantMode::Ltv;
    return s;
}

/// Plant frozen at t = 60 s, gamma = 20.
[[nodiscard]] inline Scenario paper_lti_scenario() {
    Scenario s;
    s.name = "paper-lti";
    s.design = published_lti_design();
    s.disturbances = default_disturbance();
    s.t0 = kScenarioStart;
    s.tf = kScenarioEnd;
    s.plant_mode = PlantMode::LtiFrozen;
    return s;
}

/// Equilibrium check: no command, no disturbance, zero state.
[[nodiscard]] inline Scenario zero_scenario() {
    Scenario s = paper_lti_scenario();
    s.name = "zero";
    s.profile = CommandProfile::constant(0.0);
    s.disturbances = {};
    s.tf = s.t0 + 10.0;
    return s;
}

} // namespace hinf_autopilot

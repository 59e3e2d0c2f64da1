#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hinf_autopilot/simulator.hpp"
#include "test_support.hpp"

namespace hinf_autopilot {
namespace {

double max_rate(const SimulationTrace& trace, double initial_delta = 0.0) {
    double prev = initial_delta;
    double worst = 0.0;
    for (const auto& s : trace.samples) {
        worst = std::max(worst, std::abs(s.delta - prev) / trace.dt);
        prev = s.delta;
    }
    return worst;
}

Scenario short_lti(double duration) {
    Scenario s = paper_lti_scenario();
    s.tf = s.t0 + duration;
    return s;
}

TEST(Disturbance, Examples) {
    EXPECT_EQ(disturbance_sample(DisturbanceSpec{}, 3.0), Vector2::Zero());

    DisturbanceSpec step;
    step.channels[1].push_back(StepSignal{5.0, 0.1});
    EXPECT_EQ(disturbance_sample(step, 4.9)(1), 0.0);
    EXPECT_EQ(disturbance_sample(step, 5.0)(1), 0.1);
    EXPECT_EQ(disturbance_sample(step, 5.0)(0), 0.0);

    DisturbanceSpec sine;
    sine.channels[0].push_back(SineSignal{0.2, 1.0, 0.0});
    EXPECT_NEAR(disturbance_sample(sine, std::numbers::pi / 2)(0), 0.2, 1e-15);

    DisturbanceSpec ramp;
    ramp.channels[0].push_back(RampSignal{1.0, 0.5});
    EXPECT_EQ(disturbance_sample(ramp, 0.5)(0), 0.0);
    EXPECT_DOUBLE_EQ(disturbance_sample(ramp, 3.0)(0), 1.0);
}

TEST(Disturbance, SumOfPrimitives) {
    DisturbanceSpec d;
    d.channels[0].push_back(StepSignal{0.0, 0.1});
    d.channels[0].push_back(StepSignal{1.0, 0.2});
    EXPECT_NEAR(disturbance_sample(d, 2.0)(0), 0.3, 1e-15);
}

TEST(Disturbance, NoiseIsHeldAndReproducible) {
    DisturbanceSpec d;
    d.channels[1].push_back(NoiseSignal{0.5, 42});
    const double hold = 1e-3;
    const double a = disturbance_sample(d, 0.0101, hold)(1);
    EXPECT_EQ(a, disturbance_sample(d, 0.0109, hold)(1));
    EXPECT_NE(a, disturbance_sample(d, 0.0111, hold)(1));
    EXPECT_LE(std::abs(a), 0.5);
    DisturbanceSpec other = d;
    other.channels[1][0] = NoiseSignal{0.5, 43};
    EXPECT_NE(a, disturbance_sample(other, 0.0101, hold)(1));
    double mean = 0.0;
    for (int k = 0; k < 4000; ++k) {
        const double v = disturbance_sample(d, k * hold, hold)(1);
        EXPECT_LE(std::abs(v), 0.5);
        mean += v / 4000.0;
    }
    EXPECT_LT(std::abs(mean), 0.03);
}

TEST(Metrics, ZeroTrace) {
    SimulationTrace trace;
    trace.dt = 0.1;
    for (int k = 0; k < 10; ++k) {
        TraceSample s;
        s.t = k * 0.1;
        trace.samples.push_back(s);
    }
    const Metrics m = compute_metrics(trace, CommandProfile{});
    EXPECT_EQ(m.rms_e, 0.0);
    EXPECT_EQ(m.max_abs_e, 0.0);
    EXPECT_EQ(m.rms_theta_err, 0.0);
    EXPECT_EQ(m.max_abs_delta, 0.0);
    EXPECT_EQ(m.servo_saturation_fraction, 0.0);
    EXPECT_EQ(m.energy_ratio, 0.0);
}

TEST(Metrics, ConstantError) {
    SimulationTrace trace;
    trace.dt = 0.01;
    for (int k = 0; k <= 100; ++k) {
        TraceSample s;
        s.t = k * 0.01;
        s.x(1) = 0.01;
        s.rate_limited = k % 4 == 0;
        trace.samples.push_back(s);
    }
    const Metrics m = compute_metrics(trace, CommandProfile{});
    EXPECT_NEAR(m.rms_e, 0.01, 1e-15);
    EXPECT_EQ(m.max_abs_e, 0.01);
    EXPECT_NEAR(m.servo_saturation_fraction, 26.0 / 101.0, 1e-15);
}

TEST(Metrics, SineRmsAndEnergy) {
    SimulationTrace trace;
    const int n = 20000;
    const double tf = 2.0 * std::numbers::pi * 3.0;
    trace.dt = tf / n;
    for (int k = 0; k < n; ++k) { // integer number of periods, endpoint excluded
        TraceSample s;
        s.t = k * trace.dt;
        s.x(1) = 0.02 * std::sin(s.t);
        s.w(0) = 0.1;
        trace.samples.push_back(s);
    }
    const Metrics m = compute_metrics(trace, CommandProfile{});
    EXPECT_NEAR(m.rms_e, 0.02 / std::sqrt(2.0), 1e-9);
    const double t_end = trace.samples.back().t;
    const double energy_e = 0.0002 * (t_end - 0.5 * std::sin(2.0 * t_end));
    EXPECT_NEAR(m.energy_ratio, energy_e / (0.01 * t_end), 1e-7);
}

TEST(Simulate, ZeroScenarioIsIdenticallyZero) {
    const SimulationResult r = simulate(zero_scenario());
    ASSERT_FALSE(r.diverged_at.has_value());
    ASSERT_EQ(r.trace.samples.size(), 50001U);
    for (const auto& s : r.trace.samples) {
        ASSERT_EQ(s.x, Vector3::Zero());
        ASSERT_EQ(s.theta, 0.0);
        ASSERT_EQ(s.q, 0.0);
        ASSERT_EQ(s.delta, 0.0);
        ASSERT_EQ(s.u, 0.0);
        ASSERT_EQ(s.w, Vector2::Zero());
        ASSERT_EQ(s.q_measured, 0.0);
    }
    EXPECT_EQ(r.metrics.rms_e, 0.0);
    EXPECT_EQ(r.metrics.max_abs_e, 0.0);
    EXPECT_EQ(r.metrics.rms_theta_err, 0.0);
    EXPECT_EQ(r.metrics.max_abs_delta, 0.0);
    EXPECT_EQ(r.metrics.servo_saturation_fraction, 0.0);
    EXPECT_EQ(r.metrics.energy_ratio, 0.0);
}

TEST(Simulate, TraceIsUniformAndFinite) {
    const SimulationResult r = simulate(short_lti(5.0));
    const auto& s = r.trace.samples;
    ASSERT_EQ(s.size(), 25001U);
    for (std::size_t k = 0; k < s.size(); ++k) {
        EXPECT_NEAR(s[k].t, 60.0 + k * 2e-4, 1e-9);
        ASSERT_TRUE(s[k].x.allFinite());
    }
}

TEST(Simulate, Deterministic) {
    Scenario sc = short_lti(3.0);
    sc.disturbances.channels[0].push_back(NoiseSignal{0.05, 7});
    sc.feedback_source = FeedbackSource::GyroRate;
    const SimulationResult a = simulate(sc);
    const SimulationResult b = simulate(sc);
    ASSERT_EQ(a.trace.samples.size(), b.trace.samples.size());
    for (std::size_t k = 0; k < a.trace.samples.size(); ++k) {
        ASSERT_EQ(a.trace.samples[k].x, b.trace.samples[k].x);
        ASSERT_EQ(a.trace.samples[k].delta, b.trace.samples[k].delta);
        ASSERT_EQ(a.trace.samples[k].q_measured, b.trace.samples[k].q_measured);
    }
    EXPECT_EQ(a.metrics.rms_e, b.metrics.rms_e);
}

TEST(Simulate, ServoRateBoundOnShippedScenarios) {
    for (const Scenario& sc : {paper_ltv_scenario(), paper_lti_scenario(), zero_scenario()}) {
        const SimulationResult r = simulate(sc);
        EXPECT_LE(max_rate(r.trace), 25.0 * std::numbers::pi / 180.0 + 1e-12) << sc.name;
    }
}

TEST(Simulate, RateLimitEngagesUnderLargeDisturbance) {
    Scenario sc = short_lti(2.0);
    sc.disturbances = {};
    sc.disturbances.channels[0].push_back(StepSignal{60.5, 200.0});
    const SimulationResult r = simulate(sc);
    EXPECT_GT(r.metrics.servo_saturation_fraction, 0.0);
    EXPECT_LE(r.metrics.servo_saturation_fraction, 1.0);
    EXPECT_LE(max_rate(r.trace), kServoRateLimit + 1e-12);
}

TEST(Simulate, LtiMatchesSampledDataExponential) {
    Scenario sc = short_lti(2.0);
    sc.profile = CommandProfile::constant(0.0);
    sc.disturbances = {};
    sc.servo_enabled = false;
    sc.initial_state = Vector3(0.01, -0.02, 0.5);
    const SimulationResult r = simulate(sc);

    // Control is held over each step, so the exact discrete map is the
    // zero-order-hold transition of [A B; 0 0] closed with -K.
    const PlantModel plant = assemble_pitch_plant(sc.design.coeffs);
    Matrix aug = Matrix::Zero(4, 4);
    aug.topLeftCorner(3, 3) = plant.A;
    aug.topRightCorner(3, 1) = plant.B;
    const Matrix phi = testing::expm(aug * sc.dt);
    const Matrix step = phi.topLeftCorner(3, 3) - phi.topRightCorner(3, 1) * r.gain.K;
    Eigen::VectorXd x = sc.initial_state;
    const auto steps = r.trace.samples.size() - 1;
    for (std::size_t k = 0; k < steps; ++k) {
        x = step * x;
    }
    const Vector3 sim = r.trace.samples.back().x;
    EXPECT_LE((sim - x).norm(), 1e-6 * x.norm());

    // The sampled-data run stays close to the continuous closed loop.
    const Eigen::VectorXd cont =
        testing::expm((plant.A - plant.B * r.gain.K) * (sc.tf - sc.t0)) * Eigen::VectorXd(sc.initial_state);
    EXPECT_LE((sim - cont).norm(), 1e-2 * cont.norm());
}

TEST(Simulate, StepHalvingChangesRmsByLessThanOnePercent) {
    Scenario coarse = paper_ltv_scenario();
    Scenario fine = coarse;
    fine.dt = coarse.dt / 2.0;
    const double a = simulate(coarse).metrics.rms_e;
    const double b = simulate(fine).metrics.rms_e;
    EXPECT_GT(a, 0.0);
    EXPECT_LT(std::abs(a - b) / b, 0.01);
}

TEST(Simulate, GyroFeedbackChangesRmsByLessThanFivePercent) {
    Scenario truth = paper_ltv_scenario();
    Scenario gyro = truth;
    gyro.feedback_source = FeedbackSource::GyroRate;
    const double a = simulate(truth).metrics.rms_e;
    const double b = simulate(gyro).metrics.rms_e;
    EXPECT_LT(std::abs(a - b) / a, 0.05);
}

TEST(Simulate, EnergyRatioBelowGammaSquared) {
    Scenario sc = short_lti(20.0);
    sc.profile = CommandProfile::constant(0.0);
    sc.disturbances = {};
    sc.disturbances.channels[0].push_back(SineSignal{0.5, 1.3, 0.0});
    sc.disturbances.channels[1].push_back(StepSignal{65.0, 0.1});
    const SimulationResult r = simulate(sc);
    EXPECT_GT(r.metrics.energy_ratio, 0.0);
    EXPECT_LT(r.metrics.energy_ratio, sc.design.gamma * sc.design.gamma);
}

TEST(Simulate, DivergenceIsReportedWithPartialTrace) {
    DynamicCoefficients bad = reference::coefficients_t60();
    bad.M_q = 5e4;
    Scenario sc = short_lti(5.0);
    sc.schedule = CoefficientSchedule({{60.0, reference::coefficients_t60()}, {60.5, bad}});
    sc.plant_mode = PlantMode::Ltv;
    const SimulationResult r = simulate(sc);
    ASSERT_TRUE(r.diverged_at.has_value());
    EXPECT_GT(*r.diverged_at, 60.0);
    EXPECT_LT(*r.diverged_at, 65.0);
    ASSERT_FALSE(r.trace.samples.empty());
    for (const auto& s : r.trace.samples) {
        ASSERT_TRUE(s.x.allFinite());
    }
}

TEST(Simulate, InfeasibleDesignIsSynthesisFailure) {
    Scenario sc = short_lti(1.0);
    sc.design.gamma = 1e-6;
    try {
        (void)simulate(sc);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SynthesisFailed);
    }
}

TEST(Simulate, ScenarioValidation) {
    Scenario sc = short_lti(1.0);
    sc.dt = 2e-3;
    EXPECT_THROW((void)simulate(sc), Error);
    sc = short_lti(1.0);
    sc.tf = sc.t0;
    EXPECT_THROW((void)simulate(sc), Error);
}

} // namespace
} // namespace hinf_autopilot

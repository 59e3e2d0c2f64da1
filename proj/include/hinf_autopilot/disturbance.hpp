#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "vehicle_model.hpp"

namespace hinf_autopilot {

struct StepSignal {
    double t0 = 0.0;
    double amplitude = 0.0;
};

struct SineSignal {
    double amplitude = 0.0;
    double frequency = 0.0; // rad/s
    double phase = 0.0;     // rad
};

struct RampSignal {
    double t0 = 0.0;
    double slope = 0.0;
};

/// Uniform samples in [-amplitude, amplitude], held over each hold interval.
struct NoiseSignal {
    double amplitude = 0.0;
    std::uint64_t seed = 0;
};

using SignalPrimitive = std::variant<StepSignal, SineSignal, RampSignal, NoiseSignal>;

/// Exogenous inputs: channel 0 enters v_z', channel 1 enters e' (columns of B_w).
struct DisturbanceSpec {
    std::array<std::vector<SignalPrimitive>, 2> channels;

    [[nodiscard]] bool empty() const { return channels[0].empty() && channels[1].empty(); }
};

namespace disturbance_detail {

// The noise sample of interval `index` depends only on (seed, index), so the
// signal is a pure function of time.
[[nodiscard]] inline double noise_sample(const NoiseSignal& n, std::int64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(n.seed), static_cast<std::uint32_t>(n.seed >> 32),
                      static_cast<std::uint32_t>(static_cast<std::uint64_t>(index)),
                      static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
    std::mt19937_64 gen(seq);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    return n.amplitude * dist(gen);
}

struct Evaluator {
    double t;
    double hold;

    double operator()(const StepSignal& s) const { return t >= s.t0 ? s.amplitude : 0.0; }
    double operator()(const SineSignal& s) const { return s.amplitude * std::sin(s.frequency * t + s.phase); }
    double operator()(const RampSignal& s) const { return t >= s.t0 ? s.slope * (t - s.t0) : 0.0; }
    double operator()(const NoiseSignal& s) const {
        const auto index = static_cast<std::int64_t>(std::floor(t / hold + 1e-9));
        return noise_sample(s, index);
    }
};

} // namespace disturbance_detail

inline constexpr double kDefaultStep = 2e-4; // s

[[nodiscard]] inline Vector2 disturbance_sample(const DisturbanceSpec& spec, double t,
                                                double hold_interval = kDefaultStep) {
    const disturbance_detail::Evaluator eval{t, hold_interval};
    Vector2 w = Vector2::Zero();
    for (std::size_t ch = 0; ch < spec.channels.size(); ++ch) {
        for (const auto& primitive : spec.channels[ch]) {
            w(static_cast<Eigen::Index>(ch)) += std::visit(eval, primitive);
        }
    }
    return w;
}

} // namespace hinf_autopilot

#pragma once

#include <string>

#include <Eigen/Dense>

#include "errors.hpp"

namespace hinf_autopilot {

/// One classical fourth-order Runge-Kutta step of x' = f(x, t). Exogenous
/// inputs captured by `f` are held over the step (zero-order hold).
template <typename State, typename Derivative>
[[nodiscard]] State rk4_step(Derivative&& f, const State& x, double t, double dt) {
    if (!(dt > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "rk4_step: dt must be positive");
    }
    const auto check = [&](const State& k, const char* stage) {
        if (!k.allFinite()) {
            throw Error(ErrorCode::NonFiniteDerivative,
                        std::string("rk4_step: non-finite derivative at stage ") + stage + " (t = " +
                            std::to_string(t) + ")");
        }
        return k;
    };
    const State k1 = check(f(x, t), "1");
    const State k2 = check(f(State(x + 0.5 * dt * k1), t + 0.5 * dt), "2");
    const State k3 = check(f(State(x + 0.5 * dt * k2), t + 0.5 * dt), "3");
    const State k4 = check(f(State(x + dt * k3), t + dt), "4");
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace hinf_autopilot

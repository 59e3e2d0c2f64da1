#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "state_space.hpp"

namespace hinf_autopilot {

namespace norm_detail {

// Frequencies at which the level-gamma Hamiltonian has (numerically) imaginary
// eigenvalues; these are exactly the w with sigma_max(G(jw)) = gamma.
[[nodiscard]] inline std::vector<double> crossing_frequencies(const StateSpace& sys, double gamma) {
    const auto n = sys.states();
    const auto m = sys.inputs();
    const auto p = sys.outputs();
    const Matrix r = gamma * gamma * Matrix::Identity(m, m) - sys.D.transpose() * sys.D;
    const Eigen::LDLT<Matrix> r_inv(r);
    const Matrix a_hat = sys.A + sys.B * r_inv.solve(sys.D.transpose() * sys.C);
    const Matrix g = sys.B * r_inv.solve(sys.B.transpose());
    const Matrix q = sys.C.transpose() *
                     (Matrix::Identity(p, p) + sys.D * r_inv.solve(sys.D.transpose())) * sys.C;

    Matrix h(2 * n, 2 * n);
    h << a_hat, g, -q, -a_hat.transpose();
    const ComplexVector eigs = linalg::eigenvalues(h);
    const double threshold = 1e-8 * std::max(1.0, h.norm());
    std::vector<double> omegas;
    for (const auto& l : eigs) {
        if (std::abs(l.real()) < threshold && l.imag() >= 0.0) {
            omegas.push_back(l.imag());
        }
    }
    std::sort(omegas.begin(), omegas.end());
    return omegas;
}

} // namespace norm_detail

/// H-infinity norm of a stable system, to relative tolerance `tol`.
///
/// Bisection on gamma: the Hamiltonian of level gamma has an imaginary-axis
/// eigenvalue iff gamma <= |G|_inf. The lower end is always a sigma_max value
/// actually attained on the axis (grid points, crossing frequencies and their
/// midpoints), so numerical misclassification can never overshoot the norm.
[[nodiscard]] inline double hinf_norm(const StateSpace& sys, double tol = 1e-6) {
    sys.validate();
    if (!(tol > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "hinf_norm tolerance must be positive");
    }
    const auto n = sys.states();
    if (n > 0 && !linalg::is_hurwitz(sys.A)) {
        throw Error(ErrorCode::UnstableSystem, "hinf_norm requires a Hurwitz A matrix");
    }

    auto sigma_at = [&](double omega) { return linalg::sigma_max(sys.frequency_response(omega)); };

    double lo = linalg::sigma_max(sys.D);
    if (n > 0) {
        lo = std::max(lo, sigma_at(0.0));
        double w_min = std::numeric_limits<double>::infinity();
        double w_max = 0.0;
        for (const auto& l : linalg::eigenvalues(sys.A)) {
            const double mag = std::abs(l);
            if (mag > 0.0) {
                w_min = std::min(w_min, mag);
                w_max = std::max(w_max, mag);
            }
            lo = std::max(lo, sigma_at(std::abs(l.imag())));
        }
        if (w_max > 0.0) {
            const double start = std::log10(w_min) - 2.0;
            const double stop = std::log10(w_max) + 2.0;
            constexpr int coarse_points = 200;
            for (int k = 0; k < coarse_points; ++k) {
                const double w = std::pow(10.0, start + (stop - start) * k / (coarse_points - 1));
                lo = std::max(lo, sigma_at(w));
            }
        }
    }
    if (lo == 0.0) {
        return 0.0;
    }

    // Raise lo with attained values around the crossings; report whether any exist.
    auto probe = [&](double gamma) {
        const auto omegas = norm_detail::crossing_frequencies(sys, gamma);
        if (omegas.empty()) {
            return false;
        }
        double best = 0.0;
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            best = std::max(best, sigma_at(omegas[i]));
            if (i + 1 < omegas.size()) {
                best = std::max(best, sigma_at(0.5 * (omegas[i] + omegas[i + 1])));
            }
        }
        lo = std::max(lo, best);
        return best >= gamma * (1.0 - 1e-9);
    };

    double hi = lo * (1.0 + tol);
    while (probe(hi)) {
        hi = std::max(2.0 * hi, lo * (1.0 + tol));
    }
    // [a, b] is the bisection bracket; it never drops below the attained lo,
    // and every probe halves it, so the loop terminates for any tol.
    double a = lo;
    double b = hi;
    while (b - a > tol * a) {
        const double mid = 0.5 * (a + b);
        if (!(mid > a && mid < b)) {
            break; // bracket at floating-point resolution
        }
        if (probe(mid)) {
            a = mid;
        } else {
            b = mid;
        }
        a = std::max(a, lo);
        b = std::max(b, a);
    }
    return 0.5 * (a + b);
}

} // namespace hinf_autopilot

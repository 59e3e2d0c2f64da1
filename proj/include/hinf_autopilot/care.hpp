#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace hinf_autopilot {

// Full-information H-infinity Riccati problem
//   X A + A^T X - X (B B^T - gamma^-2 Bw Bw^T) X + C^T C = 0.
// gamma = +inf removes the disturbance term (LQR).
struct CareProblem {
    Matrix A;
    Matrix B;
    Matrix B_w;
    Matrix C;
    double gamma = std::numeric_limits<double>::infinity();

    [[nodiscard]] Eigen::Index states() const { return A.rows(); }

    void validate() const {
        const auto n = A.rows();
        if (n == 0 || A.cols() != n || B.rows() != n || B_w.rows() != n || C.cols() != n) {
            throw Error(ErrorCode::ShapeError, "Riccati problem dimensions inconsistent (A " + std::to_string(A.rows()) +
                                                   "x" + std::to_string(A.cols()) + ")");
        }
        if (!A.allFinite() || !B.allFinite() || !B_w.allFinite() || !C.allFinite()) {
            throw Error(ErrorCode::InvalidArgument, "Riccati problem data contain non-finite entries");
        }
        if (!(gamma > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
        }
    }

    /// B B^T - gamma^-2 Bw Bw^T
    [[nodiscard]] Matrix quadratic_term() const {
        Matrix s = B * B.transpose();
        if (std::isfinite(gamma) && B_w.cols() > 0) {
            s -= (B_w * B_w.transpose()) / (gamma * gamma);
        }
        return s;
    }

    [[nodiscard]] Matrix state_weight() const { return C.transpose() * C; }
};

struct HinfSolution {
    double gamma = std::numeric_limits<double>::infinity();
    Matrix X;
    Matrix K; // B^T X; the control law applies the minus sign
    ComplexVector closed_loop_eigs;    // A - B K + gamma^-2 Bw Bw^T X
    ComplexVector state_feedback_eigs; // A - B K
    double residual = 0.0;
    std::vector<std::string> warnings;
};

namespace care_detail {

[[nodiscard]] inline Matrix residual_matrix(const CareProblem& p, const Matrix& x) {
    return x * p.A + p.A.transpose() * x - x * p.quadratic_term() * x + p.state_weight();
}

} // namespace care_detail

/// Frobenius norm of the Riccati residual at X.
[[nodiscard]] inline double care_residual(const CareProblem& problem, const Matrix& x) {
    const auto n = problem.A.rows();
    if (problem.A.cols() != n || problem.B.rows() != n || problem.B_w.rows() != n || problem.C.cols() != n ||
        x.rows() != n || x.cols() != n) {
        throw Error(ErrorCode::ShapeError, "care_residual: dimension mismatch");
    }
    return care_detail::residual_matrix(problem, x).norm();
}

/// Scale against which residual tolerances are measured:
/// max(1, |C^T C|_F, |X|_F^2 |B B^T|_F).
[[nodiscard]] inline double care_residual_scale(const CareProblem& problem, const Matrix& x) {
    const double xn = x.norm();
    return std::max({1.0, problem.state_weight().norm(), xn * xn * (problem.B * problem.B.transpose()).norm()});
}

namespace care_detail {

struct Tolerances {
    double imaginary_axis = 1e-9;  // relative to |H|_F
    double x1_condition = 1e12;
    double psd = 1e-8;             // relative to max(1, |X|_F)
    double pbh_rank = 1e-9;
};

inline void attach_assumption_warnings(const CareProblem& p, HinfSolution& sol, double rank_tol) {
    if (!linalg::is_stabilizable(p.A, p.B, rank_tol)) {
        sol.warnings.emplace_back("(A, B) fails the PBH stabilizability test");
    }
    if (!linalg::is_detectable(p.A, p.C, rank_tol)) {
        sol.warnings.emplace_back("(C, A) fails the PBH detectability test");
    }
}

// Newton correction on the stabilizing solution: (A - S X)^T D + D (A - S X) = -R(X).
inline Matrix refine(const CareProblem& p, Matrix x) {
    const Matrix s = p.quadratic_term();
    double best = residual_matrix(p, x).norm();
    for (int iter = 0; iter < 3 && best > 0.0; ++iter) {
        const Matrix f = p.A - s * x;
        Matrix candidate = x + linalg::solve_lyapunov(f, residual_matrix(p, x));
        candidate = 0.5 * (candidate + candidate.transpose());
        const double r = residual_matrix(p, candidate).norm();
        if (!(r < best)) {
            break;
        }
        best = r;
        x = std::move(candidate);
    }
    return x;
}

[[nodiscard]] inline HinfSolution solve_hamiltonian(const CareProblem& p, const Tolerances& tol = {}) {
    p.validate();
    const Eigen::Index n = p.states();
    const Matrix s = p.quadratic_term();
    const Matrix q = p.state_weight();

    Matrix h(2 * n, 2 * n);
    h << p.A, -s, -q, -p.A.transpose();

    Eigen::EigenSolver<Matrix> eig(h);
    if (eig.info() != Eigen::Success) {
        throw Error(ErrorCode::NoStabilizingSolution, "Hamiltonian eigendecomposition failed to converge");
    }
    const ComplexVector lambda = eig.eigenvalues();
    const double h_norm = h.norm();
    for (const auto& l : lambda) {
        if (std::abs(l.real()) < tol.imaginary_axis * h_norm) {
            throw Error(ErrorCode::NoStabilizingSolution,
                        "Hamiltonian has an eigenvalue on the imaginary axis (gamma = " + std::to_string(p.gamma) +
                            " is below the achievable attenuation level)");
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(2 * n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (lambda(a).real() != lambda(b).real()) {
            return lambda(a).real() < lambda(b).real();
        }
        return lambda(a).imag() < lambda(b).imag();
    });
    Eigen::Index stable_count = 0;
    for (const auto& l : lambda) {
        stable_count += l.real() < 0.0 ? 1 : 0;
    }
    if (stable_count != n) {
        throw Error(ErrorCode::NoStabilizingSolution, "stable invariant subspace is not n-dimensional");
    }

    ComplexMatrix basis(2 * n, n);
    const ComplexMatrix vectors = eig.eigenvectors();
    for (Eigen::Index k = 0; k < n; ++k) {
        basis.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
    }
    const ComplexMatrix x1 = basis.topRows(n);
    const ComplexMatrix x2 = basis.bottomRows(n);

    Eigen::JacobiSVD<ComplexMatrix> svd(x1);
    const auto& sv = svd.singularValues();
    if (!(sv(n - 1) > 0.0) || sv(0) / sv(n - 1) > tol.x1_condition) {
        throw Error(ErrorCode::NoStabilizingSolution, "stable subspace basis is singular (X1 ill-conditioned)");
    }
    // X = X2 X1^-1, i.e. solve X1^T X^T = X2^T.
    const ComplexMatrix xt = x1.transpose().fullPivLu().solve(x2.transpose());
    Matrix x = xt.transpose().real();
    x = 0.5 * (x + x.transpose());
    x = refine(p, std::move(x));

    const double x_norm = x.norm();
    const double lambda_min = Eigen::SelfAdjointEigenSolver<Matrix>(x, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (lambda_min < -tol.psd * std::max(1.0, x_norm)) {
        throw Error(ErrorCode::IndefiniteSolution,
                    "Riccati solution is not positive semi-definite (min eigenvalue " + std::to_string(lambda_min) + ")");
    }

    HinfSolution sol;
    sol.gamma = p.gamma;
    sol.X = x;
    sol.K = p.B.transpose() * x;
    sol.closed_loop_eigs = linalg::eigenvalues(p.A - s * x);
    sol.state_feedback_eigs = linalg::eigenvalues(p.A - p.B * sol.K);
    for (const auto& l : sol.closed_loop_eigs) {
        if (!(l.real() < 0.0)) {
            throw Error(ErrorCode::NoStabilizingSolution, "Riccati solution is not stabilizing");
        }
    }
    sol.residual = care_residual(p, x);
    attach_assumption_warnings(p, sol, tol.pbh_rank);
    return sol;
}

} // namespace care_detail

/// Stabilizing solution of the gamma-parameterised Riccati equation via the
/// stable invariant subspace of the Hamiltonian [[A, -S], [-C^T C, -A^T]].
[[nodiscard]] inline HinfSolution solve_care(const CareProblem& problem) {
    if (!std::isfinite(problem.gamma)) {
        throw Error(ErrorCode::InvalidArgument, "solve_care needs a finite gamma; use solve_lqr for the limit");
    }
    return care_detail::solve_hamiltonian(problem);
}

/// The gamma -> infinity limit: X A + A^T X - X B B^T X + C^T C = 0.
[[nodiscard]] inline HinfSolution solve_lqr(const Matrix& a, const Matrix& b, const Matrix& c) {
    CareProblem p{a, b, Matrix::Zero(a.rows(), 0), c, std::numeric_limits<double>::infinity()};
    return care_detail::solve_hamiltonian(p);
}

struct GammaProbe {
    double gamma = 0.0;
    bool feasible = false;
};

struct GammaSearchResult {
    double gamma_min = 0.0;
    std::vector<GammaProbe> history;
};

/// Bisection for the smallest gamma at which solve_care succeeds. The upper
/// end of the bracket must be feasible; a feasible lower end is returned as-is.
[[nodiscard]] inline GammaSearchResult gamma_search(const Matrix& a, const Matrix& b, const Matrix& b_w,
                                                    const Matrix& c, std::pair<double, double> bracket,
                                                    double tol) {
    auto [lo, hi] = bracket;
    if (!(lo > 0.0) || !(hi > lo) || !(tol > 0.0)) {
        throw Error(ErrorCode::BracketInvalid, "bracket must satisfy 0 < lower < upper and tol > 0");
    }
    GammaSearchResult result;
    auto feasible = [&](double gamma) {
        bool ok = true;
        try {
            (void)solve_care(CareProblem{a, b, b_w, c, gamma});
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ShapeError || e.code() == ErrorCode::InvalidArgument) {
                throw;
            }
            ok = false;
        }
        result.history.push_back({gamma, ok});
        return ok;
    };

    if (!feasible(hi)) {
        throw Error(ErrorCode::BracketInvalid, "upper bracket gamma = " + std::to_string(hi) + " is infeasible");
    }
    if (feasible(lo)) {
        result.gamma_min = lo;
        return result;
    }
    // Stop once hi (1 - tol) lies at or below the infeasible lower end.
    while (hi - lo > 0.5 * tol * hi) {
        const double mid = std::sqrt(lo * hi);
        if (feasible(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    result.gamma_min = hi;
    return result;
}

} // namespace hinf_autopilot

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>

#include "errors.hpp"

namespace hinf_autopilot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

namespace linalg {

[[nodiscard]] inline double frobenius(const Matrix& m) { return m.size() == 0 ? 0.0 : m.norm(); }

[[nodiscard]] inline bool all_finite(const Matrix& m) { return m.allFinite(); }

[[nodiscard]] inline ComplexVector eigenvalues(const Matrix& m) {
    if (m.rows() == 0) {
        return ComplexVector{};
    }
    Eigen::EigenSolver<Matrix> solver(m, false);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::InvalidArgument, "eigenvalue iteration did not converge");
    }
    return solver.eigenvalues();
}

[[nodiscard]] inline double max_real_part(const Matrix& m) {
    const ComplexVector eigs = eigenvalues(m);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& lambda : eigs) {
        worst = std::max(worst, lambda.real());
    }
    return worst;
}

[[nodiscard]] inline bool is_hurwitz(const Matrix& m) { return max_real_part(m) < 0.0; }

[[nodiscard]] inline double sigma_max(const ComplexMatrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    return svd.singularValues()(0);
}

[[nodiscard]] inline double sigma_max(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

// Numerical rank with the relative tolerance tol * sigma_max.
[[nodiscard]] inline Eigen::Index numerical_rank(const ComplexMatrix& m, double rel_tol) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    const auto& s = svd.singularValues();
    const double cutoff = rel_tol * s(0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff) {
            ++rank;
        }
    }
    return rank;
}

// PBH test: rank [A - lambda I, B] == n for every eigenvalue with Re(lambda) >= 0.
[[nodiscard]] inline bool is_stabilizable(const Matrix& a, const Matrix& b, double rel_tol = 1e-9) {
    const Eigen::Index n = a.rows();
    const ComplexVector eigs = eigenvalues(a);
    for (const auto& lambda : eigs) {
        if (lambda.real() < 0.0) {
            continue;
        }
        ComplexMatrix pencil(n, n + b.cols());
        pencil.leftCols(n) = a.cast<std::complex<double>>() - lambda * ComplexMatrix::Identity(n, n);
        pencil.rightCols(b.cols()) = b.cast<std::complex<double>>();
        if (numerical_rank(pencil, rel_tol) < n) {
            return false;
        }
    }
    return true;
}

// Dual of is_stabilizable: (C, A) detectable iff (A^T, C^T) stabilizable.
[[nodiscard]] inline bool is_detectable(const Matrix& a, const Matrix& c, double rel_tol = 1e-9) {
    return is_stabilizable(a.transpose(), c.transpose(), rel_tol);
}

/// Solves F^T X + X F = -Q by vectorisation. Intended for n <= 8.
[[nodiscard]] inline Matrix solve_lyapunov(const Matrix& f, const Matrix& q) {
    const Eigen::Index n = f.rows();
    const Matrix eye = Matrix::Identity(n, n);
    Matrix kron(n * n, n * n);
    // vec(F^T X + X F) = (I (x) F^T + F^T (x) I) vec(X), column-major vec.
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            kron.block(i * n, j * n, n, n) = eye(i, j) * f.transpose() + f(j, i) * eye;
        }
    }
    const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
    const Vector sol = kron.fullPivLu().solve(rhs);
    return Eigen::Map<const Matrix>(sol.data(), n, n);
}

} // namespace linalg
} // namespace hinf_autopilot

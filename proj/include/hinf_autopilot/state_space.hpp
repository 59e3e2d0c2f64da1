#pragma once

#include <string>

#include "errors.hpp"
#include "linalg.hpp"

namespace hinf_autopilot {

/// Continuous-time LTI system x' = A x + B u, y = C x + D u.
struct StateSpace {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;

    [[nodiscard]] Eigen::Index states() const { return A.rows(); }
    [[nodiscard]] Eigen::Index inputs() const { return B.cols(); }
    [[nodiscard]] Eigen::Index outputs() const { return C.rows(); }

    void validate() const {
        const auto n = A.rows();
        if (A.cols() != n || B.rows() != n || C.cols() != n || D.rows() != C.rows() || D.cols() != B.cols()) {
            throw Error(ErrorCode::ShapeError,
                        "state-space dimensions inconsistent: A " + std::to_string(A.rows()) + "x" +
                            std::to_string(A.cols()) + ", B " + std::to_string(B.rows()) + "x" +
                            std::to_string(B.cols()) + ", C " + std::to_string(C.rows()) + "x" +
                            std::to_string(C.cols()) + ", D " + std::to_string(D.rows()) + "x" +
                            std::to_string(D.cols()));
        }
        if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite()) {
            throw Error(ErrorCode::InvalidArgument, "state-space matrices contain non-finite entries");
        }
    }

    /// Frequency response G(jw) = C (jwI - A)^-1 B + D.
    [[nodiscard]] ComplexMatrix frequency_response(double omega) const {
        using cd = std::complex<double>;
        const auto n = A.rows();
        ComplexMatrix resolvent = cd(0.0, omega) * ComplexMatrix::Identity(n, n) - A.cast<cd>();
        ComplexMatrix g = D.cast<cd>();
        if (n > 0) {
            g += C.cast<cd>() * resolvent.partialPivLu().solve(B.cast<cd>());
        }
        return g;
    }
};

} // namespace hinf_autopilot

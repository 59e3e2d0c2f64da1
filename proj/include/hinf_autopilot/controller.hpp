#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "care.hpp"
#include "errors.hpp"
#include "reference_data.hpp"
#include "vehicle_model.hpp"

namespace hinf_autopilot {

struct DesignPoint {
    double t_design = 0.0;
    double gamma = 1.0;
    DynamicCoefficients coeffs;
    Matrix C_perf = Matrix::Identity(3, 3); // performance weighting, q x 3
    std::string weighting_name = "custom";
};

struct ControllerGain {
    Eigen::RowVector3d K = Eigen::RowVector3d::Zero();
    DesignPoint origin;
};

/// K = B^T X. The sign of the control law lives in control_law().
[[nodiscard]] inline ControllerGain gain_from_solution(const Matrix& b, const Matrix& x, DesignPoint origin = {}) {
    if (b.rows() != 3 || b.cols() != 1 || x.rows() != 3 || x.cols() != 3) {
        throw Error(ErrorCode::ShapeError, "gain_from_solution expects B 3x1 and X 3x3");
    }
    ControllerGain g;
    g.K = (b.transpose() * x).row(0);
    if (!g.K.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "gain_from_solution produced non-finite gains");
    }
    g.origin = std::move(origin);
    return g;
}

/// u = -K x
[[nodiscard]] inline double control_law(const ControllerGain& gain, const Vector3& x) { return -gain.K.dot(x); }

[[nodiscard]] inline CareProblem design_problem(const DesignPoint& design) {
    const PlantModel plant = assemble_pitch_plant(design.coeffs);
    return CareProblem{plant.A, plant.B, plant.B_w, design.C_perf, design.gamma};
}

struct Synthesis {
    HinfSolution solution;
    ControllerGain gain;
};

[[nodiscard]] inline Synthesis synthesize(const DesignPoint& design) {
    if (!(design.gamma > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "design gamma must be positive");
    }
    if (design.C_perf.cols() != 3) {
        throw Error(ErrorCode::ShapeError, "performance weighting must have 3 columns");
    }
    const CareProblem problem = design_problem(design);
    Synthesis out;
    out.solution = solve_care(problem);
    out.gain = gain_from_solution(problem.B, out.solution.X, design);
    for (const auto& l : out.solution.state_feedback_eigs) {
        if (!(l.real() < 0.0)) {
            throw Error(ErrorCode::ClosedLoopUnstable,
                        "A - B K has an eigenvalue with non-negative real part (" + std::to_string(l.real()) + ")");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Performance-weighting calibration
// ---------------------------------------------------------------------------

struct CalibrationTarget {
    DynamicCoefficients coeffs;
    double gamma = 1.0;
    Matrix3 X;
    Eigen::RowVector3d K;
    double x_scale = 0.05;  // printed X is rounded to 4 decimals
    double k_scale = 5e-4;
};

struct CalibrationResult {
    Matrix3 C_perf = Matrix3::Zero(); // upper triangular
    double max_x_deviation = std::numeric_limits<double>::infinity();
    double max_k_deviation = std::numeric_limits<double>::infinity();
    double target_residual = std::numeric_limits<double>::infinity(); // Riccati residual of the target X
    double grid_best_residual = std::numeric_limits<double>::infinity(); // best diagonal-grid residual of target X
};

namespace calibration_detail {

inline constexpr double kInfeasiblePenalty = 1e6;

[[nodiscard]] inline Matrix3 upper_from_params(const Eigen::VectorXd& p) {
    Matrix3 c = Matrix3::Zero();
    c(0, 0) = p(0);
    c(0, 1) = p(1);
    c(0, 2) = p(2);
    c(1, 1) = p(3);
    c(1, 2) = p(4);
    c(2, 2) = p(5);
    return c;
}

/// Normalised deviation of the synthesised (X, K) from the target.
[[nodiscard]] inline Eigen::VectorXd deviation(const CalibrationTarget& target, const Matrix& c_perf) {
    Eigen::VectorXd out(12);
    try {
        const PlantModel plant = assemble_pitch_plant(target.coeffs);
        const HinfSolution sol = solve_care(CareProblem{plant.A, plant.B, plant.B_w, c_perf, target.gamma});
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                out(3 * i + j) = (sol.X(i, j) - target.X(i, j)) / target.x_scale;
            }
            out(9 + i) = (sol.K(0, i) - target.K(i)) / target.k_scale;
        }
    } catch (const Error&) {
        out.setConstant(kInfeasiblePenalty);
    }
    return out;
}

struct Functor {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;

    const CalibrationTarget* target = nullptr;

    [[nodiscard]] int inputs() const { return 6; }
    [[nodiscard]] int values() const { return 12; }

    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
        f = deviation(*target, upper_from_params(p));
        return 0;
    }
};

[[nodiscard]] inline std::vector<double> log_grid(double lo_exp, double hi_exp, int points) {
    std::vector<double> g;
    for (int k = 0; k < points; ++k) {
        g.push_back(std::pow(10.0, lo_exp + (hi_exp - lo_exp) * k / (points - 1)));
    }
    return g;
}

} // namespace calibration_detail

/// Fits an upper-triangular performance weighting so that the synthesised
/// Riccati solution and gain reproduce a printed (X, K) pair.
///
/// A coarse diagonal log grid seeds the search; the best seeds are refined
/// with Levenberg-Marquardt over all six upper-triangular entries. The fit is
/// done on the solution rather than on the Riccati residual of the printed
/// X: rounding of the small X entries is amplified by Z_q, so the residual of
/// the printed matrix cannot discriminate between weightings.
[[nodiscard]] inline CalibrationResult calibrate_weighting(const CalibrationTarget& target, int refine_seeds = 6) {
    using namespace calibration_detail;
    const PlantModel plant = assemble_pitch_plant(target.coeffs);
    const CareProblem base{plant.A, plant.B, plant.B_w, Matrix::Zero(1, 3), target.gamma};

    struct Seed {
        double score;
        Eigen::VectorXd params;
    };
    std::vector<Seed> seeds;
    double grid_best_residual = std::numeric_limits<double>::infinity();

    std::vector<double> third = log_grid(-5.0, -1.0, 9);
    third.insert(third.begin(), 0.0);
    for (double a : log_grid(-2.0, 2.0, 17)) {
        for (double b : log_grid(-2.0, 2.0, 17)) {
            for (double c : third) {
                Eigen::VectorXd p = Eigen::VectorXd::Zero(6);
                p(0) = a;
                p(3) = b;
                p(5) = c;
                const Matrix3 weighting = upper_from_params(p);
                CareProblem probe = base;
                probe.C = weighting;
                grid_best_residual = std::min(grid_best_residual, care_residual(probe, target.X));
                seeds.push_back({deviation(target, weighting).squaredNorm(), p});
            }
        }
    }
    std::stable_sort(seeds.begin(), seeds.end(), [](const Seed& l, const Seed& r) { return l.score < r.score; });

    Functor functor;
    functor.target = &target;
    Eigen::NumericalDiff<Functor> numeric(functor);

    Eigen::VectorXd best = seeds.front().params;
    double best_score = seeds.front().score;
    const int n_seeds = std::min<int>(refine_seeds, static_cast<int>(seeds.size()));
    for (int s = 0; s < n_seeds; ++s) {
        Eigen::VectorXd p = seeds[static_cast<std::size_t>(s)].params;
        Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor>> lm(numeric);
        lm.parameters.maxfev = 4000;
        lm.parameters.xtol = 1e-12;
        lm.parameters.ftol = 1e-14;
        (void)lm.minimize(p);
        const double score = deviation(target, upper_from_params(p)).squaredNorm();
        if (score < best_score) {
            best_score = score;
            best = p;
        }
    }

    // Sign of each row of C is irrelevant (only C^T C enters); normalise to a
    // non-negative diagonal.
    Matrix3 c_perf = upper_from_params(best);
    for (int i = 0; i < 3; ++i) {
        if (c_perf(i, i) < 0.0) {
            c_perf.row(i) *= -1.0;
        }
    }

    CalibrationResult result;
    result.C_perf = c_perf;
    result.grid_best_residual = grid_best_residual;
    const HinfSolution sol = solve_care(CareProblem{plant.A, plant.B, plant.B_w, c_perf, target.gamma});
    result.max_x_deviation = (sol.X - Matrix(target.X)).cwiseAbs().maxCoeff();
    result.max_k_deviation = (sol.K - Matrix(target.K)).cwiseAbs().maxCoeff();
    CareProblem at_target = base;
    at_target.C = c_perf;
    result.target_residual = care_residual(at_target, target.X);
    return result;
}

[[nodiscard]] inline CalibrationTarget published_target_t60() {
    return {reference::coefficients_t60(), reference::kLtiDesignGamma, reference::printed_x_t60(),
            reference::printed_k_t60()};
}

[[nodiscard]] inline CalibrationTarget published_target_t100() {
    return {reference::coefficients_t100(), reference::kLtvDesignGamma, reference::printed_x_t100(),
            reference::printed_k_t100()};
}

/// Weightings produced by calibrate_weighting() against the two published
/// design points (see README for the achieved deviations).
[[nodiscard]] inline Matrix3 calibrated_weighting_t60() {
    Matrix3 c;
    // clang-format off
    c << 1.2130518482055623, 1.330500614019595,  0.0019890439439286096,
         0.0,                1.0375459099086992, 9.8923921262292474e-05,
         0.0,                0.0,                2.3428220222954259e-08;
    // clang-format on
    return c;
}

[[nodiscard]] inline Matrix3 calibrated_weighting_t100() {
    Matrix3 c;
    // clang-format off
    c << 1.0297809844815176, 2.8983105106591864, -0.0003440923965760186,
         0.0,                2.1533228735390986,  4.9557701494910496e-06,
         0.0,                0.0,                 0.00020811382507168058;
    // clang-format on
    return c;
}

inline constexpr const char* kPaperCalibrated = "paper-calibrated";

/// The shipped `paper-calibrated` weighting: the calibration of whichever
/// published design time is closer to t_design.
[[nodiscard]] inline Matrix3 paper_calibrated_weighting(double t_design) {
    const double mid = 0.5 * (reference::kLtiDesignTime + reference::kLtvDesignTime);
    return t_design < mid ? calibrated_weighting_t60() : calibrated_weighting_t100();
}

/// Design point at time t on a schedule with the shipped calibrated weighting.
[[nodiscard]] inline DesignPoint calibrated_design_point(const CoefficientSchedule& schedule, double t_design,
                                                         double gamma) {
    DesignPoint d;
    d.t_design = t_design;
    d.gamma = gamma;
    d.coeffs = coefficients_at(schedule, t_design);
    d.C_perf = paper_calibrated_weighting(t_design);
    d.weighting_name = kPaperCalibrated;
    return d;
}

/// t = 60 s, gamma = 20 (frozen-plant experiment).
[[nodiscard]] inline DesignPoint published_lti_design() {
    return calibrated_design_point(reference::default_schedule(), reference::kLtiDesignTime,
                                   reference::kLtiDesignGamma);
}

/// t = 100 s, gamma = 7.8 (time-varying experiment).
[[nodiscard]] inline DesignPoint published_ltv_design() {
    return calibrated_design_point(reference::default_schedule(), reference::kLtvDesignTime,
                                   reference::kLtvDesignGamma);
}

} // namespace hinf_autopilot

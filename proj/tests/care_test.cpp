#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "hinf_autopilot/care.hpp"
#include "hinf_autopilot/controller.hpp"
#include "hinf_autopilot/hinf_norm.hpp"
#include "hinf_autopilot/reference_data.hpp"
#include "test_support.hpp"

namespace hinf_autopilot {
namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

CareProblem scalar_problem(double a, double b, double bw, double c, double gamma) {
    return CareProblem{scalar(a), scalar(b), scalar(bw), scalar(c), gamma};
}

// Feasibility boundary of the scalar family located by sweeping gamma with the
// quadratic-root oracle, then bisecting the bracketing grid cell.
double scalar_boundary_oracle(double a, double b, double bw, double c) {
    double x = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    for (double g = 0.01; g < 100.0; g *= 1.01) {
        if (testing::scalar_care_root(a, b, bw, c, g, &x)) {
            hi = g;
            break;
        }
        lo = g;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (testing::scalar_care_root(a, b, bw, c, mid, &x) ? hi : lo) = mid;
    }
    return hi;
}

TEST(SolveCare, ScalarWithoutDisturbanceMatchesQuadraticFormula) {
    const auto sol = solve_care(scalar_problem(-1.0, 1.0, 0.0, 1.0, 10.0));
    EXPECT_NEAR(sol.X(0, 0), -1.0 + std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(sol.K(0, 0), -1.0 + std::sqrt(2.0), 1e-12);
    EXPECT_LT(sol.closed_loop_eigs(0).real(), 0.0);
}

TEST(SolveCare, ScalarBelowAttenuationLevelHasNoStabilizingSolution) {
    double x = 0.0;
    ASSERT_FALSE(testing::scalar_care_root(1.0, 1.0, 1.0, 1.0, 0.5, &x));
    try {
        (void)solve_care(scalar_problem(1.0, 1.0, 1.0, 1.0, 0.5));
        FAIL() << "expected NoStabilizingSolution";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoStabilizingSolution);
    }
}

TEST(SolveCare, ScalarFamilyAgreesWithOracleAcrossGamma) {
    for (double gamma : {1.2, 1.5, 2.0, 5.0, 50.0}) {
        double expected = 0.0;
        ASSERT_TRUE(testing::scalar_care_root(1.0, 1.0, 1.0, 1.0, gamma, &expected));
        const auto sol = solve_care(scalar_problem(1.0, 1.0, 1.0, 1.0, gamma));
        EXPECT_NEAR(sol.X(0, 0), expected, 1e-10 * expected) << "gamma = " << gamma;
    }
}

TEST(SolveCare, NegativeStabilizingRootIsIndefinite) {
    // For 1/sqrt(2) < gamma < 1 the stabilizing root exists but is negative.
    double x = 0.0;
    EXPECT_FALSE(testing::scalar_care_root(1.0, 1.0, 1.0, 1.0, 0.9, &x));
    EXPECT_LT(x, 0.0);
    try {
        (void)solve_care(scalar_problem(1.0, 1.0, 1.0, 1.0, 0.9));
        FAIL() << "expected IndefiniteSolution";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IndefiniteSolution);
    }
}

TEST(SolveCare, RejectsInvalidProblems) {
    EXPECT_THROW((void)solve_care(scalar_problem(1.0, 1.0, 1.0, 1.0, 0.0)), Error);
    CareProblem bad{Matrix::Identity(2, 2), Matrix::Ones(3, 1), Matrix::Ones(2, 1), Matrix::Ones(1, 2), 2.0};
    try {
        (void)solve_care(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ShapeError);
    }
}

TEST(SolveCare, WarnsWhenDetectabilityFails) {
    // C sees nothing and A = 1: the stabilizing root X = 2 still exists, but the
    // assumption check must flag the undetectable mode.
    CareProblem p{scalar(1.0), scalar(1.0), scalar(0.0), scalar(0.0), 10.0};
    const auto sol = solve_care(p);
    EXPECT_NEAR(sol.X(0, 0), 2.0, 1e-12);
    ASSERT_EQ(sol.warnings.size(), 1u);
    EXPECT_NE(sol.warnings[0].find("detectab"), std::string::npos);

    CareProblem q{-Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Zero(2, 1), Matrix::Zero(1, 2), 10.0};
    q.C(0, 0) = 1.0;
    EXPECT_TRUE(solve_care(q).warnings.empty());
}

TEST(SolveCare, IsDeterministic) {
    testing::RandomSource rng(7);
    auto p = testing::random_care_problem(rng);
    p.gamma = 1e3;
    const auto a = solve_care(p);
    const auto b = solve_care(p);
    EXPECT_TRUE((a.X.array() == b.X.array()).all());
}

TEST(CareResidual, ZeroMatrixLeavesStateWeight) {
    testing::RandomSource rng(3);
    const auto p = [&] {
        auto q = testing::random_care_problem(rng);
        q.gamma = 4.0;
        return q;
    }();
    const Matrix zero = Matrix::Zero(p.states(), p.states());
    EXPECT_DOUBLE_EQ(care_residual(p, zero), (p.C.transpose() * p.C).norm());
}

TEST(CareResidual, ExactScalarSolution) {
    const auto p = scalar_problem(-1.0, 1.0, 0.0, 1.0, 10.0);
    EXPECT_LE(care_residual(p, scalar(-1.0 + std::sqrt(2.0))), 1e-12);
}

TEST(CareResidual, ShapeMismatch) {
    const auto p = scalar_problem(-1.0, 1.0, 0.0, 1.0, 10.0);
    try {
        (void)care_residual(p, Matrix::Zero(2, 2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ShapeError);
    }
}

TEST(CareResidual, PrintedSolutionAtSixtySecondsIsWithinItsRoundingFloor) {
    const auto design = published_lti_design();
    const auto p = design_problem(design);
    const Matrix printed = reference::printed_x_t60();
    const double residual = care_residual(p, printed);

    // Bound from the print precision: the solver's own X rounds to the printed
    // matrix, and perturbing each entry by the half-unit 5e-5 moves the residual by
    // at most sum_ij |dR/dX_ij| * 5e-5 to first order.
    const Matrix solved = synthesize(design).solution.X;
    Matrix rounded = (solved.array() * 1e4).round() / 1e4;
    ASSERT_LE((rounded - printed).cwiseAbs().maxCoeff(), 1e-12);
    double bound = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            Matrix e = Matrix::Zero(3, 3);
            e(i, j) = e(j, i) = 5e-5;
            bound += care_residual(p, solved + e);
        }
    }
    EXPECT_LE(residual, bound);
    // The degraded 5e-2 figure is not reachable from 4-decimal data; the measured
    // value is recorded in the README.
    EXPECT_GT(residual, 5e-2);
}

TEST(SolveLqr, ScalarCases) {
    EXPECT_NEAR(solve_lqr(scalar(-1.0), scalar(1.0), scalar(1.0)).X(0, 0), -1.0 + std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(solve_lqr(scalar(0.0), scalar(1.0), scalar(1.0)).X(0, 0), 1.0, 1e-12);
}

TEST(SolveLqr, LargeGammaAgrees) {
    testing::RandomSource rng(11);
    for (int k = 0; k < 20; ++k) {
        auto p = testing::random_care_problem(rng);
        p.gamma = 1e6;
        const auto hinf = solve_care(p);
        const auto lqr = solve_lqr(p.A, p.B, p.C);
        EXPECT_LE((hinf.X - lqr.X).norm(), 1e-6 * std::max(1.0, lqr.X.norm()));
    }
}

TEST(GammaSearch, ScalarMatchesDiscriminantOracle) {
    const double oracle = scalar_boundary_oracle(1.0, 1.0, 1.0, 1.0);
    EXPECT_NEAR(oracle, 1.0, 1e-9);
    const double tol = 1e-6;
    const auto res = gamma_search(scalar(1.0), scalar(1.0), scalar(1.0), scalar(1.0), {0.1, 10.0}, tol);
    EXPECT_NEAR(res.gamma_min, oracle, tol * oracle);
    EXPECT_NO_THROW((void)solve_care(scalar_problem(1.0, 1.0, 1.0, 1.0, res.gamma_min * (1.0 + tol))));
    EXPECT_THROW((void)solve_care(scalar_problem(1.0, 1.0, 1.0, 1.0, res.gamma_min * (1.0 - tol))), Error);
    EXPECT_GE(res.history.size(), 3u);
}

TEST(GammaSearch, SecondScalarFamily) {
    // a = 0.5, b = 2, bw = 3, c = 1.5 has a boundary away from 1.
    const double oracle = scalar_boundary_oracle(0.5, 2.0, 3.0, 1.5);
    const auto res = gamma_search(scalar(0.5), scalar(2.0), scalar(3.0), scalar(1.5), {0.05, 50.0}, 1e-7);
    EXPECT_NEAR(res.gamma_min, oracle, 1e-6 * oracle);
}

TEST(GammaSearch, NoDisturbanceReturnsLowerBound) {
    const auto res = gamma_search(scalar(1.0), scalar(1.0), scalar(0.0), scalar(1.0), {0.01, 10.0}, 1e-6);
    EXPECT_DOUBLE_EQ(res.gamma_min, 0.01);
}

TEST(GammaSearch, InfeasibleUpperBoundIsRejected) {
    try {
        (void)gamma_search(scalar(1.0), scalar(1.0), scalar(1.0), scalar(1.0), {0.1, 0.5}, 1e-6);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BracketInvalid);
    }
}

TEST(GammaSearch, TimeVaryingDesignPointAdmitsPublishedLevel) {
    const auto design = published_ltv_design();
    const auto p = design_problem(design);
    const auto res = gamma_search(p.A, p.B, p.B_w, p.C, {0.1, 1e3}, 1e-6);
    EXPECT_LE(res.gamma_min, reference::kLtvDesignGamma);
}

TEST(Properties, MonotoneInGammaOnScalarFamily) {
    double previous = std::numeric_limits<double>::infinity();
    for (double gamma = 1.05; gamma < 40.0; gamma *= 1.3) {
        const double x = solve_care(scalar_problem(1.0, 1.0, 1.0, 1.0, gamma)).X.norm();
        EXPECT_LE(x, previous);
        previous = x;
    }
}

TEST(Properties, RandomSystemsSatisfySolutionContract) {
    testing::RandomSource rng(2024);
    int solved = 0;
    for (int k = 0; k < 25; ++k) {
        auto p = testing::random_care_problem(rng);
        const double gmin = gamma_search(p.A, p.B, p.B_w, p.C, {1e-3, 1e4}, 1e-6).gamma_min;
        p.gamma = gmin * rng.uniform(1.05, 3.0);
        const auto sol = solve_care(p);
        ++solved;
        const double xn = sol.X.norm();
        EXPECT_LE(care_residual(p, sol.X), 1e-8 * care_residual_scale(p, sol.X));
        EXPECT_LE((sol.X - sol.X.transpose()).norm(), 1e-10 * std::max(1.0, xn));
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(sol.X).eigenvalues()(0), -1e-8 * std::max(1.0, xn));
        EXPECT_LT(linalg::max_real_part(p.A - p.quadratic_term() * sol.X), 0.0);

        const Eigen::Index n = p.states();
        Matrix c_cl(p.C.rows() + sol.K.rows(), n);
        c_cl << p.C, -sol.K;
        const StateSpace cl{p.A - p.B * sol.K, p.B_w, c_cl, Matrix::Zero(c_cl.rows(), p.B_w.cols())};
        EXPECT_LT(hinf_norm(cl, 1e-8), p.gamma);
    }
    EXPECT_EQ(solved, 25);
}

} // namespace
} // namespace hinf_autopilot

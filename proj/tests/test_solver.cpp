#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "frpoisson/solver.hpp"

using namespace frp;

namespace {

DenseStiffness interval_stiffness(int n, double alpha, double c_star = 0.5) {
    const double h = 2.0 / (n + 1);
    auto g = generate_centers(Domain::interval(-1.0, 1.0), h);
    return assemble_dense(g, {alpha, 1}, c_star / h);
}

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST(Solve, OneByOne) {
    auto g = generate_centers(Domain::interval(-1.0, 1.0), 1.0);
    ASSERT_EQ(g.size(), 1u);
    DenseStiffness s{g, {1.0, 1}, 1.0, Eigen::MatrixXd::Constant(1, 1, 4.0)};
    auto [sol, rep] = solve(s, Eigen::VectorXd::Constant(1, 3.0));
    EXPECT_DOUBLE_EQ(sol.lambda[0], 0.75);
    EXPECT_EQ(rep.method, SolveMethod::Direct);
    EXPECT_EQ(rep.iterations, 0);
}

TEST(Solve, ResidualCertificate) {
    for (double alpha : {0.4, 1.0, 1.5}) {
        auto s = interval_stiffness(127, alpha);
        Eigen::VectorXd f = random_vector(127, 3);
        auto [sol, rep] = solve(s, f);
        EXPECT_LE(rep.residual, 1e-13);
        EXPECT_LE((s.a * sol.lambda - f).norm() / f.norm(), 1e-13);
    }
}

TEST(Solve, CgMatchesDirectOnDisk) {
    auto g = generate_centers(Domain::disk({0.0, 0.0}, 1.0), 0.25);
    ASSERT_EQ(g.size(), 45u);
    auto top = assemble_toeplitz(g, {1.0, 2}, 2.0);
    Eigen::VectorXd f(45);
    for (std::size_t i = 0; i < 45; ++i) f[static_cast<Eigen::Index>(i)] = 1.0 - g.coord(i, 0) * g.coord(i, 0) + 0.3 * g.coord(i, 1);
    SolveOptions direct, cg, pcg;
    direct.method = SolveMethod::Direct;
    cg.method = SolveMethod::Cg;
    pcg.method = SolveMethod::Cg;
    pcg.circulant_preconditioner = true;
    auto d = solve(top, f, direct);
    auto c = solve(top, f, cg);
    auto p = solve(top, f, pcg);
    const double scale = d.solution.lambda.norm();
    EXPECT_LE((c.solution.lambda - d.solution.lambda).cwiseAbs().maxCoeff(), 1e-10 * scale);
    EXPECT_LE((p.solution.lambda - d.solution.lambda).cwiseAbs().maxCoeff(), 1e-10 * scale);
    EXPECT_GT(c.report.iterations, 0);
    EXPECT_EQ(c.report.method, SolveMethod::Cg);
    EXPECT_FALSE(c.report.minres_fallback);
}

TEST(Solve, PreconditionerCutsIterationsOnFullBlock) {
    const double h = 2.0 / 256.0;
    auto g = generate_centers(Domain::interval(-1.0, 1.0), h);
    auto top = assemble_toeplitz(g, {0.4, 1}, 0.5 / h);
    Eigen::VectorXd f = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.size()));
    SolveOptions cg, pcg;
    cg.method = pcg.method = SolveMethod::Cg;
    cg.tol = pcg.tol = 1e-12;
    pcg.circulant_preconditioner = true;
    auto a = solve(top, f, cg);
    auto b = solve(top, f, pcg);
    EXPECT_LT(b.report.iterations, a.report.iterations);
    EXPECT_LE((a.solution.lambda - b.solution.lambda).norm(), 1e-9 * a.solution.lambda.norm());
}

TEST(Solve, RejectsBadInput) {
    auto s = interval_stiffness(7, 1.0);
    EXPECT_THROW(solve(s, Eigen::VectorXd::Ones(6)), UsageError);
    Eigen::VectorXd f = Eigen::VectorXd::Ones(7);
    f[2] = std::nan("");
    EXPECT_THROW(solve(s, f), UsageError);
}

TEST(Solve, SingularMatrix) {
    auto g = generate_centers(Domain::interval(-1.0, 1.0), 2.0 / 3.0);
    ASSERT_EQ(g.size(), 2u);
    DenseStiffness s{g, {1.0, 1}, 1.0, Eigen::MatrixXd::Ones(2, 2)};
    EXPECT_THROW(solve(s, Eigen::VectorXd::Ones(2)), SingularMatrixError);
}

TEST(Krylov, MinresFallbackOnIndefinite) {
    Eigen::MatrixXd a(3, 3);
    a << 2.0, 1.0, 0.0, 1.0, -3.0, 0.5, 0.0, 0.5, 1.0;
    Eigen::VectorXd b(3);
    b << 1.0, -2.0, 0.5;
    LinearOp op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = a * x; };
    auto mr = minres(op, b, 1e-14, 50);
    EXPECT_TRUE(mr.converged);
    EXPECT_LE((a * mr.x - b).norm(), 1e-13);

    auto g = generate_centers(Domain::interval(-1.0, 1.0), 0.5);
    ASSERT_EQ(g.size(), 3u);
    DenseStiffness s{g, {1.0, 1}, 1.0, a};
    SolveOptions cg;
    cg.method = SolveMethod::Cg;
    auto [sol, rep] = solve(s, b, cg);
    EXPECT_TRUE(rep.minres_fallback);
    EXPECT_LE(rep.residual, 1e-13);
}

TEST(Krylov, StagnationReportsBestResidual) {
    auto s = interval_stiffness(63, 1.0);
    SolveOptions cg;
    cg.method = SolveMethod::Cg;
    cg.max_iter = 3;
    try {
        solve(s, Eigen::VectorXd::Ones(63), cg);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.best_residual(), 1e-13);
        EXPECT_LT(e.best_residual(), 1.0);
    }
}

TEST(Symmetry, CentrosymmetricRightHandSides) {
    auto s = interval_stiffness(31, 1.5);
    Eigen::VectorXd even(31), odd(31);
    for (int i = 0; i < 31; ++i) {
        const double x = -1.0 + (i + 1) * 2.0 / 32.0;
        even[i] = std::cos(2.0 * x) + x * x;
        odd[i] = x * x * x - std::sin(x);
    }
    auto e = solve(s, even).solution.lambda;
    auto o = solve(s, odd).solution.lambda;
    for (int i = 0; i < 31; ++i) {
        EXPECT_NEAR(e[i], e[30 - i], 1e-12 * e.cwiseAbs().maxCoeff());
        EXPECT_NEAR(o[i], -o[30 - i], 1e-12 * o.cwiseAbs().maxCoeff());
    }
}

TEST(Evaluate, UnitCoefficients) {
    auto g = generate_centers(Domain::interval(-1.0, 1.0), 0.25);
    RbfSolution sol{g, 2.0, Eigen::VectorXd::Zero(7)};
    sol.lambda[3] = 1.0;
    double x0 = g.coord(3, 0);
    EXPECT_DOUBLE_EQ(evaluate(sol, &x0), 1.0);
    double x1 = x0 + 0.5;
    EXPECT_NEAR(evaluate(sol, &x1), std::exp(-1.0), 1e-16);
    double far = x0 + 14.0;  // eps^2 r^2 = 784 > 745
    EXPECT_EQ(evaluate(sol, &far), 0.0);
}

TEST(Evaluate, SeparableMatchesPointwise) {
    for (auto dom : {Domain::interval(-1.0, 1.0), Domain::disk({0.0, 0.0}, 1.0), Domain::cube(-2.0, 2.0, 2)}) {
        const double h = dom.dim() == 1 ? 2.0 / 16.0 : 0.25;
        auto g = generate_centers(dom, h);
        RbfSolution sol{g, 0.5 / h, random_vector(static_cast<Eigen::Index>(g.size()), 5)};
        auto eg = evaluation_grid(dom, g, 4);
        Eigen::VectorXd a = evaluate(sol, eg);
        Eigen::VectorXd b = evaluate(sol, eg.points);
        EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-13 * b.cwiseAbs().maxCoeff()) << dom.describe();
    }
}

TEST(Rms, ExactSolutionGivesZero) {
    auto dom = Domain::disk({0.0, 0.0}, 1.0);
    auto g = generate_centers(dom, 0.25);
    RbfSolution sol{g, 2.0, random_vector(45, 9)};
    double e = rms_error(sol, [&](const double* x) { return evaluate(sol, x); }, dom, 4);
    EXPECT_LT(e, 1e-14);
    EXPECT_THROW(rms_error(sol, [](const double*) { return 0.0; }, dom, 1), UsageError);
}

TEST(Condition, IdentityIsOne) {
    EXPECT_DOUBLE_EQ(condition_number(Eigen::MatrixXd::Identity(5, 5)), 1.0);
    EXPECT_NEAR(condition_number(Eigen::MatrixXd::Identity(5, 5), ConditionMode::Estimate), 1.0, 1e-12);
}

TEST(Condition, TableRowSevenPoints) {
    // alpha = 1, N = 7, c* = 1/2: reference value 141.17
    double k = condition_number(interval_stiffness(7, 1.0));
    EXPECT_NEAR(k, 141.17, 0.005);
}

TEST(Condition, FrozenExactValues) {
    // exact 2-norm values computed once from the symmetric eigensolver
    EXPECT_NEAR(condition_number(interval_stiffness(7, 0.4)), 288.61, 0.005);
    EXPECT_NEAR(condition_number(interval_stiffness(127, 1.5)), 653.69, 0.005);
}

TEST(Condition, EstimateAgreesWithExact) {
    for (double alpha : {0.4, 1.0, 1.5}) {
        auto s = interval_stiffness(63, alpha);
        double ex = condition_number(s, ConditionMode::ExactSvd);
        double est = condition_number(s, ConditionMode::Estimate);
        EXPECT_LE(std::abs(est - ex) / ex, 1e-4) << alpha;
    }
    auto g = generate_centers(Domain::disk({0.0, 0.0}, 1.0), 0.125);
    auto top = assemble_toeplitz(g, {1.0, 2}, 4.0);
    double ex = condition_number(top, ConditionMode::ExactSvd);
    EXPECT_LE(std::abs(condition_number(top, ConditionMode::Estimate) - ex) / ex, 1e-4);
}

TEST(Condition, SingularDetected) {
    EXPECT_THROW(condition_number(Eigen::MatrixXd::Zero(3, 3)), SingularMatrixError);
}

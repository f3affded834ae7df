#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "frpoisson/boundary.hpp"
#include "frpoisson/problems.hpp"
#include "frpoisson/solver.hpp"
#include "oracles/hypersingular_oracle.hpp"

using namespace frp;

namespace {

oracle::HypersingularOptions oracle_options(ProblemId id) {
    oracle::HypersingularOptions o;
    switch (id) {
        case ProblemId::Ex1:
            o.dim = 1;
            o.kinks = {-1.0, 1.0};
            o.support_radius = 1.0;
            break;
        case ProblemId::Ex2:
            o.dim = 2;
            o.kinks = {1.0};
            o.support_radius = 1.0;
            break;
        case ProblemId::Ex4:
            o.dim = 1;
            break;
        default:
            o.dim = 2;
            break;
    }
    return o;
}

/// Random interior points: the disk by rejection, boxes uniformly, kept off the boundary.
std::vector<std::vector<double>> interior_points(const Domain& dom, int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> pts;
    const int d = dom.dim();
    while (static_cast<int>(pts.size()) < count) {
        std::vector<double> x(d);
        for (int a = 0; a < d; ++a) {
            std::uniform_real_distribution<double> u(dom.lower()[a] * 0.98, dom.upper()[a] * 0.98);
            x[a] = u(rng);
        }
        if (dom.kind() == DomainKind::Disk && x[0] * x[0] + x[1] * x[1] >= 0.98 * 0.98) continue;
        pts.push_back(x);
    }
    return pts;
}

double homogeneous_rms(const ProblemSpec& p, double h, double c_star) {
    auto g = generate_centers(p.domain, h);
    auto pts = g.points();
    Eigen::VectorXd f(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) f[static_cast<Eigen::Index>(i)] = p.f(pts[i]);
    auto res = solve(assemble_dense(g, {p.alpha, p.dim()}, c_star / h), f);
    return rms_error(res.solution, p.u_exact, p.domain, 8);
}

}  // namespace

class OracleConsistency : public ::testing::TestWithParam<ProblemId> {};

TEST_P(OracleConsistency, RightHandSideMatchesHypersingularIntegral) {
    const ProblemId id = GetParam();
    for (double alpha : {0.4, 1.0, 1.5}) {
        auto p = make_problem(id, alpha);
        auto o = oracle_options(id);
        const auto pts = interior_points(p.domain, 20, 17u + static_cast<unsigned>(id));
        for (const auto& x : pts) {
            const double ref = oracle::fractional_laplacian(p.u_exact, alpha, x.data(), o);
            EXPECT_NEAR(p.f(x.data()), ref, 1e-6) << to_string(id) << " alpha=" << alpha << " x0=" << x[0];
        }
    }
}

INSTANTIATE_TEST_SUITE_P(AllProblems, OracleConsistency,
                         ::testing::Values(ProblemId::Ex1, ProblemId::Ex2, ProblemId::Ex3, ProblemId::Ex4, ProblemId::Ex5),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Ex1, ValueAtOrigin) {
    const double expected = 48.0 / (std::sqrt(std::numbers::pi) * 11.631728396567448);
    EXPECT_NEAR(ex1_f(4.0, 1.0, 0.0), expected, 1e-14 * expected);
}

TEST(Ex1, EvenAndDefinedNearTheEdge) {
    for (double x : {0.1, 0.5, 0.72, 0.95, 0.999}) {
        EXPECT_DOUBLE_EQ(ex1_f(4.0, 0.4, x), ex1_f(4.0, 0.4, -x));
        EXPECT_TRUE(std::isfinite(ex1_f(4.0, 1.5, x)));
    }
    // the z -> 1 - z branch near x^2 = 0.5 joins the direct series continuously
    const double a = ex1_f(4.0, 1.0, std::sqrt(0.5) - 1e-9), b = ex1_f(4.0, 1.0, std::sqrt(0.5) + 1e-9);
    EXPECT_NEAR(a, b, 1e-7 * std::abs(a));
}

TEST(Ex1, RejectsBadInput) {
    EXPECT_THROW(ex1_f(4.0, 1.0, 1.0), DomainError);
    EXPECT_THROW(ex1_f(0.5, 1.5, 0.0), UsageError);
    EXPECT_THROW(make_problem(ProblemId::Ex1, 2.0), UsageError);
    EXPECT_THROW(make_problem("ex9", 1.0), UsageError);
}

TEST(Ex1, OtherExponentsMatchOracle) {
    auto o = oracle_options(ProblemId::Ex1);
    for (double s : {2.0, 3.5}) {
        auto p = make_problem(ProblemId::Ex1, 1.2, s);
        for (double x : {-0.6, 0.0, 0.35, 0.9}) {
            EXPECT_NEAR(p.f(&x), oracle::fractional_laplacian(p.u_exact, 1.2, &x, o), 1e-6) << s << " " << x;
        }
    }
}

TEST(Ex2, RotationInvariantWithPrefactorAtOrigin) {
    const double o[2] = {0.0, 0.0};
    for (double alpha : {0.4, 1.0, 1.5}) {
        const double pref = std::pow(2.0, alpha) * std::tgamma(1.0 + alpha / 2) * 24.0 / std::tgamma(5.0 - alpha / 2);
        EXPECT_NEAR(ex2_f(alpha, o), pref, 1e-13 * pref);
        const double r = 0.6;
        const double a[2] = {r, 0.0};
        for (double th : {0.3, 1.2, 2.5, 4.0}) {
            const double b[2] = {r * std::cos(th), r * std::sin(th)};
            EXPECT_NEAR(ex2_f(alpha, a), ex2_f(alpha, b), 1e-13 * std::abs(ex2_f(alpha, a)));
        }
    }
    const double out[2] = {1.0, 0.0};
    EXPECT_THROW(ex2_f(1.0, out), DomainError);
}

TEST(Ex2, SquaredArgumentVariantDisagreesWithOracle) {
    auto p = make_problem(ProblemId::Ex2, 1.0);
    auto o = oracle_options(ProblemId::Ex2);
    const double x[2] = {0.5, 0.2};
    const double ref = oracle::fractional_laplacian(p.u_exact, 1.0, x, o);
    EXPECT_NEAR(ex2_f(1.0, x), ref, 1e-9);
    EXPECT_GT(std::abs(ex2_f_squared_argument(1.0, x) - ref), 1e-2);
}

TEST(Ex3, OddInY) {
    for (double alpha : {0.4, 1.0, 1.5}) {
        const double zero[2] = {0.7, 0.0};
        EXPECT_EQ(ex3_f(alpha, zero), 0.0);
        const double a[2] = {0.3, -0.2}, b[2] = {0.3, 0.2};
        EXPECT_DOUBLE_EQ(ex3_f(alpha, a), -ex3_f(alpha, b));
    }
    auto p = make_problem(ProblemId::Ex3, 1.0);
    const double x[2] = {0.3, -0.2};
    EXPECT_NEAR(p.f(x), oracle::fractional_laplacian(p.u_exact, 1.0, x, oracle_options(ProblemId::Ex3)), 1e-9);
    // max over the boundary is at (2, 1/sqrt(18)): 3.3e-17
    double worst = 0.0;
    for (int k = 0; k <= 4000; ++k) {
        const double edge[2] = {2.0, -2.0 + k * 1e-3};
        worst = std::max(worst, std::abs(ex3_u(edge)));
    }
    EXPECT_LT(worst, 3.4e-17);
    EXPECT_GT(worst, 3.2e-17);
}

TEST(Ex4, EvenWithPrefactorAtOrigin) {
    for (double alpha : {0.4, 1.0, 1.5}) {
        const double pref = std::pow(2.0, alpha) * std::tgamma((1.0 + alpha) / 2) * std::tgamma(1.0 + alpha / 2) /
                            std::sqrt(std::numbers::pi);
        EXPECT_NEAR(ex4_data(alpha, 0.0).f, pref, 1e-13 * pref);
        EXPECT_DOUBLE_EQ(ex4_data(alpha, 0.4).f, ex4_data(alpha, -0.4).f);
    }
    EXPECT_NEAR(ex4_data(1.0, 0.0).f, 1.0, 1e-14);
    auto d = ex4_data(1.0, 2.0);
    EXPECT_DOUBLE_EQ(d.g, 0.2);
    EXPECT_DOUBLE_EQ(d.u, 0.2);
}

TEST(Ex5, OddInXWithDecayExponent) {
    const double a[2] = {0.4, 0.3}, b[2] = {-0.4, 0.3};
    EXPECT_DOUBLE_EQ(ex5_data(1.0, a).f, -ex5_data(1.0, b).f);
    EXPECT_DOUBLE_EQ(ex5_data(1.0, a).u, -ex5_data(1.0, b).u);
    auto p = make_problem(ProblemId::Ex5, 1.0);
    EXPECT_EQ(p.g_decay_p, 1.0);
    EXPECT_FALSE(p.homogeneous);
    // |g| |y| stays bounded along rays
    for (double r : {10.0, 100.0, 1000.0}) {
        const double y[2] = {r, 0.0};
        EXPECT_NEAR(p.g(y) * r, 1.0, 1.0 / r);
    }
}

TEST(Catalogue, DomainsAndFlags) {
    EXPECT_EQ(make_problem("ex1", 1.0).domain.kind(), DomainKind::Interval);
    EXPECT_EQ(make_problem("ex2", 1.0).domain.kind(), DomainKind::Disk);
    EXPECT_EQ(make_problem("ex3", 1.0).domain.upper()[0], 2.0);
    EXPECT_TRUE(make_problem("ex3", 1.0).homogeneous);
    EXPECT_EQ(make_problem("ex4", 1.0).g_decay_p, 2.0);
    EXPECT_EQ(make_problem("ex4", 1.0).collar.width, 0.25);
    EXPECT_EQ(make_problem("ex5", 1.0).collar.width, 1.0 / 16.0);
    for (const char* id : {"ex1", "ex2", "ex3"}) {
        auto p = make_problem(id, 0.7);
        std::vector<double> far(static_cast<std::size_t>(p.dim()), 5.0);
        EXPECT_EQ(p.g(far.data()), 0.0) << id;
    }
}

TEST(Runs, Example1Interval) {
    // reference value 1.066e-3
    const double e = homogeneous_rms(make_problem(ProblemId::Ex1, 1.0), 2.0 / 16.0, 0.5);
    EXPECT_GE(e, 1.066e-3 / 2.0);
    EXPECT_LE(e, 1.066e-3 * 2.0);
}

TEST(Runs, Example2Disk) {
    // reference value 1.299e-3
    const double e = homogeneous_rms(make_problem(ProblemId::Ex2, 1.0), 1.0 / 8.0, 0.5);
    EXPECT_GE(e, 1.299e-3 / 2.0);
    EXPECT_LE(e, 1.299e-3 * 2.0);
}

TEST(Runs, Example3Box) {
    // reference value 3.897e-9, listed for N = 15^2 (h = 1/4) but reproduced,
    // together with its condition number, on the h = 1/8 grid (N = 31^2)
    auto p = make_problem(ProblemId::Ex3, 0.4);
    EXPECT_GT(homogeneous_rms(p, 0.25, 0.5), 1e-3);
    const double e = homogeneous_rms(p, 0.125, 0.5);
    EXPECT_GE(e, 3.897e-9 / 2.0);
    EXPECT_LE(e, 3.897e-9 * 2.0);
}

TEST(Runs, Example4Interval) {
    // reference value 2.997e-9
    auto p = make_problem(ProblemId::Ex4, 1.0);
    BoundaryLayer L{p.domain, p.collar.width, p.collar.fit_h, p.collar.fit_eps};
    CorrectionQuad q;
    q.decay_p = p.g_decay_p;
    auto g = generate_centers(p.domain, 2.0 / 32.0);
    auto s = solve_nonhomogeneous(p.f, p.g, 1.0, L, q, g, 0.5);
    auto eg = evaluation_grid(p.domain, g, 8);
    double acc = 0.0;
    for (std::size_t i = 0; i < eg.points.size(); ++i) {
        const double d = s.value(eg.points[i]) - p.u_exact(eg.points[i]);
        acc += d * d;
    }
    const double e = std::sqrt(acc / static_cast<double>(eg.points.size()));
    EXPECT_GE(e, 2.997e-9 / 3.0);
    EXPECT_LE(e, 2.997e-9 * 3.0);
}

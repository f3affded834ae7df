#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "frpoisson/analysis.hpp"
#include "frpoisson/quadrature.hpp"

using namespace frp;

namespace {

constexpr double kPi = std::numbers::pi;

/// Relative agreement to four significant digits of a printed value.
void expect_4sig(double got, double printed) {
    EXPECT_NEAR(got, printed, 0.5e-4 * std::abs(printed) * 1.0001) << "printed " << printed;
}

struct TableColumn {
    double gamma, x;
    int beta;
    std::vector<double> values;  // alpha = 0..8, 0 where odd entries vanish
};

// reference values, one column per (gamma, x, beta)
const std::vector<TableColumn> kColumns = {
    {0.36, 0.25, 0, {2.4808e-12, 2.1649e-11, 9.4464e-11, 2.7478e-10, 5.9949e-10, 1.0463e-09, 1.5218e-09, 1.8971e-09, 2.0695e-09}},
    {0.36, 0.5, 0, {4.9617e-12, 0, 1.8893e-10, 0, 1.1990e-09, 0, 3.0436e-09, 0, 4.1389e-09}},
    {0.25, 0.25, 0, {1.4314e-17, 1.7988e-16, 1.1302e-15, 4.7342e-15, 1.4873e-14, 3.7380e-14, 7.8288e-14, 1.4054e-13, 2.2076e-13}},
    {0.25, 0.5, 0, {2.8629e-17, 0, 2.2604e-15, 0, 2.9746e-14, 0, 1.5658e-13, 0, 4.4153e-13}},
    {0.36, 0.25, 2, {6.0278e-34, 8.2351e-10, 2.4808e-12, 9.6826e-09, 9.4464e-11, 3.4048e-08, 5.9949e-10, 5.6819e-08, 1.5218e-09}},
    {0.36, 0.5, 2, {9.7940e-11, 0, 3.4622e-09, 0, 2.0403e-08, 0, 4.8128e-08, 0, 6.0903e-08}},
    {0.25, 0.25, 2, {0, 6.9215e-15, 1.4314e-17, 1.7288e-13, 1.1302e-15, 1.2935e-12, 1.4873e-14, 4.6020e-12, 7.8288e-14}},
    {0.25, 0.5, 2, {5.6511e-16, 0, 4.2387e-14, 0, 5.2993e-13, 0, 2.6507e-12, 0, 7.1059e-12}},
};

}  // namespace

TEST(Psi, CardinalityAtIntegers) {
    for (double g : {0.01, 0.25, 0.36, 2.0}) {
        EXPECT_EQ(psi_gamma(0.0, g), 1.0);
        for (int m = -50; m <= 50; ++m) {
            if (m != 0) {
                EXPECT_EQ(psi_gamma(static_cast<double>(m), g), 0.0) << "m = " << m;
            }
        }
    }
    EXPECT_EQ(psi_gamma(std::vector<double>{0.0, 3.0}, 0.36), 0.0);
    EXPECT_EQ(psi_gamma(std::vector<double>{0.0, 0.0}, 0.36), 1.0);
}

TEST(Psi, HalfIntegerValue) {
    EXPECT_NEAR(psi_gamma(0.5, 0.36), 0.36 / kPi / std::sinh(0.18), 1e-16);
    EXPECT_NEAR(psi_gamma(1e-9, 0.36), 1.0, 1e-15);
}

TEST(Psi, IsEvenAndProductOverAxes) {
    for (double x : {0.3, 1.7, 12.25})
        EXPECT_DOUBLE_EQ(psi_gamma(x, 0.36), psi_gamma(-x, 0.36));
    EXPECT_DOUBLE_EQ(psi_gamma(std::vector<double>{0.3, 1.7}, 0.25), psi_gamma(0.3, 0.25) * psi_gamma(1.7, 0.25));
}

TEST(PsiHat, ValueAtZero) {
    for (double g : {0.25, 0.36, 3.0}) {
        const double P = kPi * kPi / g;
        EXPECT_NEAR(psi_gamma_hat(0.0, g), std::sinh(P) / (1.0 + std::cosh(P)), 1e-15);
    }
}

TEST(PsiHat, LargeFrequencyAsymptoticsAndNoOverflow) {
    const double g = 0.36, P = kPi * kPi / g;
    for (double xi : {20.0, 40.0}) {
        const double asym = std::exp(-kPi * xi / g) * 2.0 * std::sinh(P);
        EXPECT_NEAR(psi_gamma_hat(xi, g) / asym, 1.0, 1e-10);
    }
    // pi^2/gamma = 9870 would overflow cosh directly
    EXPECT_NEAR(psi_gamma_hat(0.0, 1e-3), 1.0, 1e-15);
    EXPECT_NEAR(psi_gamma_hat(kPi, 1e-3), 0.5, 1e-15);
    EXPECT_EQ(psi_gamma_hat(10.0, 1e-3), 0.0);
    EXPECT_TRUE(std::isfinite(psi_gamma_hat(1e6, 0.36)));
}

TEST(PsiHat, MatchesNumericalFourierTransform) {
    // Psi is even: Psi_hat(xi) = 2 int_0^inf Psi(x) cos(x xi) dx, tail beyond 80 below 1e-12
    const double g = 0.36;
    std::vector<double> nodes, weights;
    for (int p = 0; p < 320; ++p) gauss_legendre_panel<20>(0.25 * p, 0.25 * (p + 1), nodes, weights);
    for (double xi : {0.0, 0.5, 1.5, kPi, 4.0, 6.0}) {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * psi_gamma(nodes[i], g) * std::cos(nodes[i] * xi);
        EXPECT_NEAR(2.0 * s, psi_gamma_hat(xi, g), 1e-8) << "xi = " << xi;
    }
}

TEST(QuasiInterpolant, ReproducesLatticeValues) {
    const double h = 0.05;
    auto u = [](const double* x) { return std::exp(-x[0] * x[0]) * std::cos(3.0 * x[0]); };
    auto s = sample_lattice(u, h, {-400}, {400});
    for (long m : {-7L, 0L, 3L, 20L}) {
        auto v = quasi_interpolant(s, 0.36, h, {h * m});
        EXPECT_TRUE(v.window_ok);
        double x = h * m;
        EXPECT_NEAR(v.value, u(&x), 1e-15);
    }
}

TEST(QuasiInterpolant, ConstantSitsInSaturationBand) {
    // sum_m Psi(t - m) = 1 - a_0^{(0)}(t); reference value 2.4808e-12 at t = 0.25
    const double h = 0.1;
    auto s = sample_lattice([](const double*) { return 1.0; }, h, {-300}, {300});
    auto v = quasi_interpolant(s, 0.36, h, {0.25 * h});
    EXPECT_TRUE(v.window_ok);
    EXPECT_NEAR(1.0 - v.value, 2.4808e-12, 1e-15);
    auto sat = saturation_coeffs({0.36, 0.25, 0, 0});
    EXPECT_NEAR(1.0 - v.value, sat.coeff[0], 2e-15);
}

TEST(QuasiInterpolant, SmallWindowIsFlagged) {
    const double h = 0.1;
    auto s = sample_lattice([](const double*) { return 1.0; }, h, {-10}, {10});
    auto v = quasi_interpolant(s, 0.36, h, {0.0});
    EXPECT_FALSE(v.window_ok);
    EXPECT_GT(v.tail_bound, std::abs(1.0 - v.value));
}

TEST(QuasiInterpolant, TwoDimensionalTensorProduct) {
    const double h = 0.1;
    auto u = [](const double* x) { return std::exp(-x[0] * x[0] - 2.0 * x[1] * x[1]); };
    auto s = sample_lattice(u, h, {-120, -120}, {120, 120});
    auto v = quasi_interpolant(s, 0.36, h, {0.3, -0.2});
    EXPECT_NEAR(v.value, u(std::vector<double>{0.3, -0.2}.data()), 1e-15);
    auto w = quasi_interpolant(s, 0.36, h, {0.33, -0.21});
    EXPECT_NEAR(w.value, u(std::vector<double>{0.33, -0.21}.data()), 1e-3);
}

TEST(QuasiInterpolant, CloseToExactGaussianInterpolation) {
    // exact interpolant sum a_k e^{-eps^2 (x - h k)^2} from the lattice Gram system;
    // the difference to the Psi form stays small as h shrinks
    const double g = 0.36;
    auto u = [](const double* x) { return std::exp(-x[0] * x[0]); };
    std::vector<double> diffs;
    for (double h : {0.2, 0.1, 0.05}) {
        const long M = static_cast<long>(std::ceil(8.0 / h));
        const int n = static_cast<int>(2 * M + 1);
        Eigen::MatrixXd A(n, n);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) {
            double x = h * (i - M);
            b(i) = u(&x);
            for (int k = 0; k < n; ++k) A(i, k) = std::exp(-g * double(i - k) * (i - k));
        }
        Eigen::VectorXd a = A.ldlt().solve(b);
        auto s = sample_lattice(u, h, {-M}, {M});
        double worst = 0.0;
        for (int j = 0; j <= 40; ++j) {
            const double x = -1.0 + 0.05 * j + 0.013;
            double exact = 0.0;
            for (int k = 0; k < n; ++k) exact += a(k) * std::exp(-g * std::pow(x / h - (k - M), 2));
            worst = std::max(worst, std::abs(exact - quasi_interpolant(s, g, h, {x}).value));
        }
        diffs.push_back(worst);
    }
    // observed at roundoff level (about 1e-15) for all three spacings
    for (double d : diffs) EXPECT_LT(d, 1e-12);
}

TEST(Saturation, ReferenceTables) {
    for (const auto& col : kColumns) {
        auto t = saturation_coeffs({col.gamma, col.x, col.beta, 8});
        ASSERT_EQ(t.coeff.size(), 9u);
        for (int a = 0; a <= 8; ++a) {
            SCOPED_TRACE(testing::Message() << "gamma " << col.gamma << " x " << col.x << " beta " << col.beta << " alpha " << a);
            if (col.values[a] == 0.0) EXPECT_LT(t.coeff[a], 1e-20);
            else expect_4sig(t.coeff[a], col.values[a]);
        }
    }
}

TEST(Saturation, SpotValues) {
    expect_4sig(saturation_coeffs({0.36, 0.25, 0, 0}).coeff[0], 2.4808e-12);
    expect_4sig(saturation_coeffs({0.25, 0.5, 2, 2}).coeff[2], 4.2387e-14);
}

TEST(Saturation, OddCoefficientsVanishAtHalf) {
    for (double g : {0.25, 0.36, 1.0})
        for (int beta : {0, 2}) {
            auto t = saturation_coeffs({g, 0.5, beta, 9});
            double scale = 0.0;
            for (double c : t.coeff) scale = std::max(scale, c);
            for (int a = 1; a <= 9; a += 2) EXPECT_LT(t.coeff[a], 1e-12 * scale) << "gamma " << g << " alpha " << a;
        }
}

TEST(Saturation, MirrorSymmetry) {
    for (int beta : {0, 2})
        for (double x : {0.25, 0.1}) {
            auto a = saturation_coeffs({0.36, x, beta, 8});
            auto b = saturation_coeffs({0.36, 1.0 - x, beta, 8});
            for (int k = 0; k <= 8; ++k) EXPECT_NEAR(a.coeff[k], b.coeff[k], 1e-10 * a.coeff[k] + 1e-40);
        }
}

TEST(Saturation, PeriodicInX) {
    for (double x : {0.25, 0.4, 0.5}) {
        auto a = saturation_coeffs({0.36, x, 2, 8});
        auto b = saturation_coeffs({0.36, x + 1.0, 2, 8});
        auto c = saturation_coeffs({0.36, x - 3.0, 2, 8});
        for (int k = 0; k <= 8; ++k) {
            EXPECT_NEAR(a.coeff[k], b.coeff[k], 1e-10 * a.coeff[k] + 1e-40);
            EXPECT_NEAR(a.coeff[k], c.coeff[k], 1e-10 * a.coeff[k] + 1e-40);
        }
    }
}

TEST(Saturation, DoublingContourNodesIsStable) {
    for (const auto& col : kColumns) {
        SaturationQuery q{col.gamma, col.x, col.beta, 8};
        auto a = saturation_coeffs(q);
        q.nodes = 512;
        auto b = saturation_coeffs(q);
        for (int k = 0; k <= 8; ++k) {
            if (col.values[k] == 0.0) continue;
            EXPECT_LT(std::abs(a.coeff[k] - b.coeff[k]), 1e-3 * a.coeff[k]);
        }
    }
}

TEST(Saturation, SmallerRadiusAgrees) {
    SaturationQuery q{0.36, 0.25, 0, 6};
    auto a = saturation_coeffs(q);
    q.radius = 0.5;
    auto b = saturation_coeffs(q);
    for (int k = 0; k <= 6; ++k) EXPECT_NEAR(a.coeff[k], b.coeff[k], 1e-6 * a.coeff[k]);
}

TEST(Saturation, RejectsBadQueries) {
    SaturationQuery q{0.36, 0.25, 0, 8};
    q.radius = std::sqrt(kPi * kPi + 0.36 * 0.36);
    EXPECT_THROW(saturation_coeffs(q), UsageError);
    EXPECT_THROW(saturation_coeffs({-1.0, 0.25, 0, 8}), UsageError);
    EXPECT_THROW(saturation_coeffs({0.36, 0.25, -2, 8}), UsageError);
    q = {0.36, 0.25, 0, 8};
    q.nodes = 10;
    EXPECT_THROW(saturation_coeffs(q), UsageError);
    // gamma this large decays too slowly for n_cut = 2
    q = {200.0, 0.25, 0, 4};
    q.n_cut = 2;
    EXPECT_THROW(saturation_coeffs(q), AccuracyLossError);
}

TEST(Symbols, GramSymbolClosedFormAndHIndependent) {
    for (double g : {0.25, 0.36})
        for (double xi : {-3.0, -1.0, 0.0, 0.7, 3.1}) {
            double closed = 0.0;
            for (int j = -20; j <= 20; ++j) closed += std::exp(-std::pow(xi - 2.0 * kPi * j, 2) / (2.0 * g));
            closed *= kPi / g;
            for (double h : {0.25, 0.05, 1.0 / 64.0})
                EXPECT_NEAR(symbol_gram({h, g, 0.0, 1, {xi}}), closed, 1e-12 * closed);
        }
}

TEST(Symbols, GramSymbolBoundsArePositive) {
    for (int d : {1, 2}) {
        double mn[2];
        int i = 0;
        for (double h : {0.1, 0.01}) {
            mn[i] = std::numeric_limits<double>::infinity();
            for (int k = 0; k <= 100; ++k) {
                const double xi = -kPi * (1.0 - 1e-9) + k * 2.0 * kPi * (1.0 - 1e-9) / 100.0;
                std::vector<double> v(d, xi);
                mn[i] = std::min(mn[i], symbol_gram({h, 0.25, 0.0, d, v}));
            }
            ++i;
        }
        EXPECT_GT(mn[0], 0.0);
        EXPECT_NEAR(mn[0], mn[1], 1e-12 * mn[0]);
    }
}

TEST(Symbols, GramAtPiHasTwoEqualDominantTerms) {
    const double g = 0.25, xi = kPi * (1.0 - 1e-12);
    const double two = 2.0 * (kPi / g) * std::exp(-kPi * kPi / (2.0 * g));
    EXPECT_NEAR(symbol_gram({0.1, g, 0.0, 1, {xi}}), two, 1e-8 * two);
}

TEST(Symbols, CollocationAtZeroFrequency) {
    // alpha = 0: sum_j phi_hat(2 pi j / h), j = 0 term (pi/gamma)^{1/2} h
    const double h = 0.1, g = 0.36;
    double direct = 0.0;
    for (int j = -20; j <= 20; ++j) direct += std::sqrt(kPi / g) * h * std::exp(-std::pow(2.0 * kPi * j, 2) / (4.0 * g));
    const double ec = symbol_collocation({h, g, 0.0, 1, {0.0}});
    EXPECT_NEAR(ec, direct, 1e-14 * direct);
    EXPECT_NEAR(ec, std::sqrt(kPi / g) * h, 1e-10 * ec);
}

TEST(Symbols, ComparisonInequalityOnGrid) {
    for (int d : {1, 2})
        for (double g : {0.25, 0.36})
            for (double a : {0.4, 1.0, 1.5}) {
                auto c = compare_symbols(0.1, g, a, d, 101);
                EXPECT_TRUE(c.holds) << "d " << d << " gamma " << g << " alpha " << a;
                EXPECT_GE(c.min_ratio, 1.0);
            }
}

TEST(Symbols, TruncationIsCertified) {
    EXPECT_THROW(symbol_collocation({0.1, 4.0, 1.0, 1, {0.5}, 1}), AccuracyLossError);
    EXPECT_NO_THROW(symbol_collocation({0.1, 4.0, 1.0, 1, {0.5}, 0}));
    EXPECT_THROW(symbol_galerkin({0.1, 0.36, 1.0, 1, {4.0}}), UsageError);
    EXPECT_THROW(symbol_galerkin({0.1, 0.36, 1.0, 2, {0.0}}), UsageError);
}

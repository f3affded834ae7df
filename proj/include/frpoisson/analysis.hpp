#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"

namespace frp {

namespace detail {

inline void check_gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw UsageError("analysis: gamma must be positive and finite");
}

/// sin(pi t), exactly zero at integers.
inline double sin_pi(double t) {
    const double r = t - 2.0 * std::round(0.5 * t);  // r in [-1, 1]
    if (r == std::round(r)) return 0.0;
    if (r > 0.5) return std::sin(std::numbers::pi * (1.0 - r));
    if (r < -0.5) return -std::sin(std::numbers::pi * (1.0 + r));
    return std::sin(std::numbers::pi * r);
}

/// e^{2 pi i t} with the quarter-turn reduction done exactly, so that
/// e^{i pi/2} = i and e^{i pi} = -1 carry no rounding residue.
inline std::complex<double> unit_phase(double t) {
    t -= std::floor(t);
    const double q = std::round(4.0 * t);
    const double r = t - 0.25 * q;
    const double c = std::cos(2.0 * std::numbers::pi * r), s = std::sin(2.0 * std::numbers::pi * r);
    switch (static_cast<int>(q) & 3) {
        case 0: return {c, s};
        case 1: return {-s, c};
        case 2: return {-c, -s};
        default: return {s, -c};
    }
}

/// One factor of psi_gamma_hat at complex w = pi z / gamma, P = pi^2/gamma,
/// written as (1 - e^{-2P}) / (e^{w-P} + e^{-w-P} + 1 + e^{-2P}).
inline std::complex<double> psi_hat_factor(std::complex<double> w, double P) {
    if (std::abs(w.real()) - P > 700.0) return 0.0;
    const double e2 = std::exp(-2.0 * P);
    return (1.0 - e2) / (std::exp(w - P) + std::exp(-w - P) + 1.0 + e2);
}

/// 1 - psi_hat_factor without the cancellation near w = 0.
inline std::complex<double> one_minus_psi_hat_factor(std::complex<double> w, double P) {
    if (std::abs(w.real()) - P > 700.0) return 1.0;
    const double e2 = std::exp(-2.0 * P);
    const auto a = std::exp(w - P), b = std::exp(-w - P);
    return (a + b + 2.0 * e2) / (a + b + 1.0 + e2);
}

}  // namespace detail

/// 1-D factor (gamma/pi) sin(pi x)/sinh(gamma x), equal to 1 at x = 0.
inline double psi_gamma(double x, double gamma) {
    detail::check_gamma(gamma);
    if (x == 0.0) return 1.0;
    const double s = detail::sin_pi(x);
    if (s == 0.0) return 0.0;
    const double gx = gamma * x;
    if (std::abs(gx) > 700.0) return 0.0;
    return gamma / std::numbers::pi * s / std::sinh(gx);
}

/// Product of the 1-D factors over the coordinates of x.
inline double psi_gamma(const std::vector<double>& x, double gamma) {
    double p = 1.0;
    for (double xj : x) p *= psi_gamma(xj, gamma);
    return p;
}

inline double psi_gamma_hat(double xi, double gamma) {
    detail::check_gamma(gamma);
    const double P = std::numbers::pi * std::numbers::pi / gamma;
    return detail::psi_hat_factor(std::numbers::pi * std::abs(xi) / gamma, P).real();
}

inline double psi_gamma_hat(const std::vector<double>& xi, double gamma) {
    double p = 1.0;
    for (double x : xi) p *= psi_gamma_hat(x, gamma);
    return p;
}

/// Values u(h m) on the box lo <= m <= hi (inclusive), first axis slowest.
struct LatticeSamples {
    std::vector<long> lo, hi;
    std::vector<double> values;

    int dim() const { return static_cast<int>(lo.size()); }
};

inline LatticeSamples sample_lattice(const ScalarField& u, double h, const std::vector<long>& lo,
                                     const std::vector<long>& hi) {
    if (lo.size() != hi.size() || lo.empty()) throw UsageError("sample_lattice: lo/hi size mismatch");
    LatticeSamples s{lo, hi, {}};
    const int d = s.dim();
    std::vector<long> m = lo;
    std::vector<double> x(d);
    while (true) {
        for (int a = 0; a < d; ++a) x[a] = h * m[a];
        s.values.push_back(u(x.data()));
        int a = d - 1;
        while (a >= 0 && ++m[a] > hi[a]) m[a] = lo[a], --a;
        if (a < 0) break;
    }
    return s;
}

struct InterpolantValue {
    double value = 0.0;
    /// Bound on the terms the window leaves out, scaled by max |u| over the window.
    double tail_bound = 0.0;
    bool window_ok = true;
};

/// sum_m u(h m) Psi_gamma(x/h - m) over the sample window.
inline InterpolantValue quasi_interpolant(const LatticeSamples& s, double gamma, double h, const std::vector<double>& x,
                                          double window_tol = 1e-14) {
    detail::check_gamma(gamma);
    const int d = s.dim();
    if (static_cast<int>(x.size()) != d) throw UsageError("quasi_interpolant: point dimension mismatch");
    if (!(h > 0.0)) throw UsageError("quasi_interpolant: h must be positive");

    std::vector<std::vector<double>> f(d);
    double tail_rel = 0.0;
    for (int a = 0; a < d; ++a) {
        const double t = x[a] / h;
        for (long m = s.lo[a]; m <= s.hi[a]; ++m) f[a].push_back(psi_gamma(t - m, gamma));
        // |Psi| <= (gamma/pi)/sinh(gamma k) at distance k; geometric sum of what lies outside
        const double q = std::exp(-gamma);
        double side = 0.0;
        for (double dist : {t - s.lo[a] + 1.0, s.hi[a] + 1.0 - t}) {
            if (dist <= 1.0) side += 1e300;  // x outside the window
            else side += gamma / std::numbers::pi * 2.0 * std::exp(-gamma * dist) / ((1.0 - q) * (1.0 - std::exp(-2.0 * gamma * dist)));
        }
        tail_rel += side;
    }
    InterpolantValue r;
    double umax = 0.0;
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        double w = s.values[i];
        umax = std::max(umax, std::abs(w));
        for (int a = 0; a < d; ++a) w *= f[a][idx[a]];
        r.value += w;
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < f[a].size()) break;
            idx[a] = 0;
        }
    }
    // crude: each axis tail multiplied by the full sum over the others, bounded by 2/... per axis
    r.tail_bound = std::min(1e300, tail_rel * std::pow(1.0 + 2.0 / (1.0 - std::exp(-gamma)), d - 1) * umax);
    r.window_ok = r.tail_bound <= window_tol * std::max(1.0, umax);
    return r;
}

/// Order-|alpha| Taylor data of z^beta - theta^{(beta)}_gamma(x, z) in 1-D.
struct SaturationQuery {
    double gamma = 0.36;
    double x = 0.0;  ///< evaluation point in lattice units
    int beta = 0;
    int alpha_max = 8;
    int nodes = 256;
    double radius = 0.0;  ///< 0: min(1, 0.8 sqrt(pi^2 + gamma^2))
    int n_cut = 30;
};

struct SaturationTable {
    std::vector<double> coeff;  ///< |a_alpha^{(beta)}(x)| / alpha!, alpha = 0..alpha_max
    double radius = 0.0;
    /// Bound on the dropped lattice-sum terms relative to max |g| on the contour.
    double lattice_tail = 0.0;
};

namespace detail {

/// g(z) = z^beta (1 - Psi_hat(z)) - sum_{n != 0} (z + 2 pi n)^beta Psi_hat(z + 2 pi n) e^{2 pi i x n},
/// and the modulus of the |n| = n_cut pair as a tail indicator.
inline std::complex<double> saturation_symbol(const SaturationQuery& q, std::complex<double> z, double* last_pair) {
    const double P = std::numbers::pi * std::numbers::pi / q.gamma;
    const double k = std::numbers::pi / q.gamma;
    auto zb = [&](std::complex<double> w) { return q.beta == 0 ? std::complex<double>(1.0) : std::pow(w, q.beta); };
    std::complex<double> g = zb(z) * one_minus_psi_hat_factor(k * z, P);
    for (int n = q.n_cut; n >= 1; --n) {
        const double s = 2.0 * std::numbers::pi * n;
        const auto ph = unit_phase(q.x * n);
        const auto tp = zb(z + s) * psi_hat_factor(k * (z + s), P) * ph;
        const auto tm = zb(z - s) * psi_hat_factor(k * (z - s), P) * std::conj(ph);
        if (n == q.n_cut && last_pair) *last_pair = std::abs(tp) + std::abs(tm);
        g -= tp + tm;
    }
    return g;
}

}  // namespace detail

/// Taylor coefficients of z^beta - theta^{(beta)}_gamma(x, z) at 0 by the
/// trapezoidal rule on |z| = radius. The alpha = 0 entry is g(0) itself, since
/// on the contour |g| is many orders above it for small gamma.
inline SaturationTable saturation_coeffs(const SaturationQuery& q) {
    detail::check_gamma(q.gamma);
    if (q.beta < 0) throw UsageError("saturation_coeffs: beta must be >= 0");
    if (q.alpha_max < 0) throw UsageError("saturation_coeffs: alpha_max must be >= 0");
    if (q.n_cut < 1) throw UsageError("saturation_coeffs: n_cut must be >= 1");
    if (q.nodes < 2 * (q.alpha_max + 1)) throw UsageError("saturation_coeffs: too few contour nodes for alpha_max");
    const double rmax = std::sqrt(std::numbers::pi * std::numbers::pi + q.gamma * q.gamma);
    const double rho = q.radius > 0.0 ? q.radius : std::min(1.0, 0.8 * rmax);
    if (!(rho < rmax))
        throw UsageError("saturation_coeffs: contour radius " + sci(rho) + " reaches the nearest pole at " + sci(rmax));

    SaturationTable t;
    t.radius = rho;
    const int N = q.nodes;
    std::vector<std::complex<double>> g(N);
    double gmax = 0.0, tail = 0.0;
    for (int k = 0; k < N; ++k) {
        const double th = 2.0 * std::numbers::pi * k / N;
        double last = 0.0;
        g[k] = detail::saturation_symbol(q, std::polar(rho, th), &last);
        gmax = std::max(gmax, std::abs(g[k]));
        tail = std::max(tail, last);
    }
    // successive n-pairs shrink by at least e^{-2 pi (2 pi - rho)/gamma}, times the z^beta growth
    const double ratio = std::exp(-2.0 * std::numbers::pi * (2.0 * std::numbers::pi - rho) / q.gamma) *
                         std::pow((2.0 * std::numbers::pi * (q.n_cut + 1) + rho) / (2.0 * std::numbers::pi * q.n_cut - rho), q.beta);
    t.lattice_tail = ratio < 1.0 && gmax > 0.0 ? tail * ratio / (1.0 - ratio) / gmax : (gmax > 0.0 ? 1e300 : 0.0);
    if (t.lattice_tail > 1e-14)
        throw AccuracyLossError("saturation_coeffs: lattice sum not converged at n_cut = " + std::to_string(q.n_cut) +
                                " (relative tail " + sci(t.lattice_tail) + ")");

    t.coeff.resize(q.alpha_max + 1);
    t.coeff[0] = std::abs(detail::saturation_symbol(q, 0.0, nullptr));
    for (int a = 1; a <= q.alpha_max; ++a) {
        std::complex<double> s = 0.0;
        for (int k = 0; k < N; ++k) s += g[k] * detail::unit_phase(-static_cast<double>(a) * k / N);
        t.coeff[a] = std::abs(s) / N / std::pow(rho, a);
    }
    return t;
}

/// Frequency-domain query for the symbols below; xi in (-pi, pi)^d.
struct SymbolQuery {
    double h = 0.1;
    double gamma = 0.36;
    double alpha = 1.0;
    int dim = 1;
    std::vector<double> xi;
    int j_cut = 0;  ///< 0: smallest cut-off whose dropped Gaussian tail is below 1e-16 of the sum
};

namespace detail {

inline void check_symbol_query(const SymbolQuery& q) {
    check_gamma(q.gamma);
    if (!(q.h > 0.0)) throw UsageError("symbol: h must be positive");
    if (q.dim < 1 || static_cast<int>(q.xi.size()) != q.dim) throw UsageError("symbol: xi must have dim entries");
    if (!(q.alpha >= 0.0 && q.alpha <= 2.0)) throw UsageError("symbol: alpha must lie in [0, 2]");
    for (double x : q.xi)
        if (!(std::abs(x) < std::numbers::pi)) throw UsageError("symbol: xi must lie in (-pi, pi)^d");
    if (q.j_cut < 0) throw UsageError("symbol: j_cut must be >= 0");
}

/// Sum over j in [-J, J]^d of term(|xi - 2 pi j|^2); the shell |j|_inf = J + 1
/// is evaluated to certify truncation.
inline double lattice_symbol_sum(const SymbolQuery& q, double gauss_div, const std::function<double(double)>& term) {
    check_symbol_query(q);
    int J = q.j_cut;
    if (J == 0) {
        // first omitted shell sits at |xi - 2 pi j| >= 2 pi J + pi - max|xi| > 2 pi J
        J = 1;
        while (std::exp(-std::pow(2.0 * std::numbers::pi * J, 2) / gauss_div) > 1e-18) ++J;
    }
    const int d = q.dim;
    double core = 0.0, shell = 0.0;
    std::vector<int> j(d, -(J + 1));
    while (true) {
        double r2 = 0.0;
        int jm = 0;
        for (int a = 0; a < d; ++a) {
            const double t = q.xi[a] - 2.0 * std::numbers::pi * j[a];
            r2 += t * t;
            jm = std::max(jm, std::abs(j[a]));
        }
        (jm <= J ? core : shell) += term(r2);
        int a = d - 1;
        while (a >= 0 && ++j[a] > J + 1) j[a] = -(J + 1), --a;
        if (a < 0) break;
    }
    // shells beyond J + 1 are smaller again by the Gaussian factor
    if (shell > 1e-16 * core)
        throw AccuracyLossError("symbol: truncation at j_cut = " + std::to_string(J) + " not certified (tail " +
                                sci(shell / core) + " of the sum)");
    return core;
}

}  // namespace detail

/// E_C(h, xi) = sum_j |(xi - 2 pi j)/h|^alpha phi_hat((xi - 2 pi j)/h),
/// phi_hat(eta) = pi^{d/2} eps^{-d} e^{-|eta|^2/(4 eps^2)}, eps = sqrt(gamma)/h.
inline double symbol_collocation(const SymbolQuery& q) {
    const double eps = std::sqrt(q.gamma) / q.h;
    const double pre = std::pow(std::numbers::pi, 0.5 * q.dim) / std::pow(eps, q.dim);
    return detail::lattice_symbol_sum(q, 4.0 * q.gamma, [&](double r2) {
        const double eta = std::sqrt(r2) / q.h;
        const double ra = q.alpha == 0.0 ? 1.0 : std::pow(eta, q.alpha);
        return ra * pre * std::exp(-eta * eta / (4.0 * eps * eps));
    });
}

/// E_G(h, xi) = h^{-d} sum_j |(xi - 2 pi j)/h|^alpha |phi_hat((xi - 2 pi j)/h)|^2.
inline double symbol_galerkin(const SymbolQuery& q) {
    const double eps = std::sqrt(q.gamma) / q.h;
    const double pre = std::pow(std::numbers::pi, q.dim) / std::pow(eps, 2 * q.dim) / std::pow(q.h, q.dim);
    return detail::lattice_symbol_sum(q, 2.0 * q.gamma, [&](double r2) {
        const double eta = std::sqrt(r2) / q.h;
        const double ra = q.alpha == 0.0 ? 1.0 : std::pow(eta, q.alpha);
        return ra * pre * std::exp(-eta * eta / (2.0 * eps * eps));
    });
}

/// E_phi(h, xi) = h^{-2d} sum_j |phi_hat((xi - 2 pi j)/h)|^2, the Gram symbol
/// (independent of h; alpha is ignored).
inline double symbol_gram(const SymbolQuery& q) {
    const double eps = std::sqrt(q.gamma) / q.h;
    const double pre = std::pow(std::numbers::pi, q.dim) / std::pow(eps, 2 * q.dim) / std::pow(q.h, 2 * q.dim);
    return detail::lattice_symbol_sum(q, 2.0 * q.gamma, [&](double r2) {
        const double eta2 = r2 / (q.h * q.h);
        return pre * std::exp(-eta2 / (2.0 * eps * eps));
    });
}

struct SymbolComparison {
    bool holds = true;
    double min_ratio = 0.0;  ///< min over the grid of E_C / ((gamma/pi)^{d/2} E_G)
    std::vector<double> worst_xi;
};

/// Checks E_C >= (gamma/pi)^{d/2} E_G on an n-point-per-axis grid strictly inside (-pi, pi)^d.
inline SymbolComparison compare_symbols(double h, double gamma, double alpha, int dim, int n = 101) {
    if (n < 2) throw UsageError("compare_symbols: need at least two grid points per axis");
    SymbolComparison c;
    c.min_ratio = std::numeric_limits<double>::infinity();
    const double c0 = std::pow(gamma / std::numbers::pi, 0.5 * dim);
    const double lo = -std::numbers::pi * (1.0 - 1e-9), step = -2.0 * lo / (n - 1);
    std::vector<int> k(dim, 0);
    SymbolQuery q{h, gamma, alpha, dim, std::vector<double>(dim), 0};
    while (true) {
        for (int a = 0; a < dim; ++a) q.xi[a] = lo + step * k[a];
        const double ec = symbol_collocation(q), eg = symbol_galerkin(q);
        if (eg > 0.0) {
            const double r = ec / (c0 * eg);
            if (r < c.min_ratio) c.min_ratio = r, c.worst_xi = q.xi;
        }
        if (ec < c0 * eg) c.holds = false;
        int a = dim - 1;
        while (a >= 0 && ++k[a] >= n) k[a] = 0, --a;
        if (a < 0) break;
    }
    return c;
}

}  // namespace frp

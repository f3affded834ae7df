#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

#include "errors.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace frp {

/// Operator exponent alpha of (-Delta)^{alpha/2} together with the dimension d.
struct FracOrder {
    double alpha = 1.0;
    int dim = 1;
};

/// e^{-eps^2 |x - center|^2}
struct GaussianRbf {
    std::vector<double> center;
    double eps = 1.0;
};

inline void validate(const FracOrder& o) {
    if (!(o.alpha >= 0.0 && o.alpha <= 2.0))
        throw UsageError("FracOrder: alpha must lie in [0, 2], got " + std::to_string(o.alpha));
    if (o.dim < 1) throw UsageError("FracOrder: dim must be >= 1");
}

/// 2^alpha Gamma((d+alpha)/2) / Gamma(d/2) eps^alpha, formed from log-Gamma differences.
inline double frlap_prefactor(const FracOrder& o, double eps) {
    const double d = o.dim;
    return std::exp(o.alpha * std::numbers::ln2 + ln_gamma(0.5 * (d + o.alpha)) - ln_gamma(0.5 * d) +
                    o.alpha * std::log(eps));
}

/// (-Delta)^{alpha/2} e^{-eps^2|x|^2} evaluated at |x| = r:
/// 2^alpha Gamma((d+alpha)/2)/Gamma(d/2) eps^alpha 1F1((d+alpha)/2; d/2; -eps^2 r^2).
inline double frlap_gaussian(const FracOrder& o, double eps, double r, const SeriesControl& ctrl = {}) {
    validate(o);
    if (!(eps > 0.0)) throw UsageError("frlap_gaussian: eps must be positive");
    if (!(r >= 0.0)) throw UsageError("frlap_gaussian: r must be non-negative");
    const double a = 0.5 * (o.dim + o.alpha), b = 0.5 * o.dim;
    const double er = eps * r;
    return frlap_prefactor(o, eps) * kummer_1f1(a, b, -er * er, ctrl);
}

/// Normalising constant C_{d,alpha} of the hypersingular-integral definition,
/// valid for 0 < alpha < 2.
inline double frac_laplacian_constant(int d, double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw UsageError("C_{d,alpha} needs 0 < alpha < 2");
    return std::exp((alpha - 1.0) * std::numbers::ln2 + std::log(alpha) + ln_gamma(0.5 * (alpha + d)) -
                    0.5 * d * std::log(std::numbers::pi) - ln_gamma(1.0 - 0.5 * alpha));
}

/// Surface measure of the unit sphere S^{d-1}.
inline double unit_sphere_area(int d) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::exp(ln_gamma(0.5 * d));
}

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

/// Spherical average of e^{i k.x} over |k| fixed: Gamma(nu+1)(2/t)^nu J_nu(t), nu = d/2 - 1.
inline double spherical_mean_plane_wave(int d, double t) {
    if (d == 1) return std::cos(t);
    if (d == 3) return t < 1e-8 ? 1.0 - t * t / 6.0 : std::sin(t) / t;
    if (t < 1e-8) return 1.0;
    const double nu = 0.5 * d - 1.0;
    return std::exp(ln_gamma(nu + 1.0) + nu * std::log(2.0 / t)) * boost::math::cyl_bessel_j(nu, t);
}

}  // namespace detail

/// Independent reference for frlap_gaussian: the inverse Fourier transform of
/// |xi|^alpha times the Gaussian transform pi^{d/2} eps^{-d} e^{-|xi|^2/(4 eps^2)},
/// reduced to a radial integral and integrated panel by panel.
inline QuadResult frlap_oracle_fourier_detailed(const FracOrder& o, double eps, double r, double quad_tol) {
    validate(o);
    if (!(eps > 0.0) || !(r >= 0.0) || !(quad_tol > 0.0))
        throw UsageError("frlap_oracle_fourier: needs eps > 0, r >= 0, quad_tol > 0");
    const int d = o.dim;
    const double m = o.alpha + d - 1.0;  // power of k in the radial integrand
    const double c4 = 4.0 * eps * eps;
    const double pref = unit_sphere_area(d) * std::pow(std::numbers::pi, 0.5 * d) / std::pow(eps, d) /
                        std::pow(2.0 * std::numbers::pi, d);

    auto integrand = [&](double k) {
        if (k == 0.0) return m == 0.0 ? 1.0 : 0.0;
        return std::exp(m * std::log(k) - k * k / c4) * detail::spherical_mean_plane_wave(d, k * r);
    };

    // Truncation point: past the peak and with the envelope below quad_tol/10.
    double xi = eps * std::sqrt(2.0 * std::max(m, 1.0));
    auto envelope = [&](double k) { return pref * std::exp(m * std::log(k) - k * k / c4); };
    while (envelope(xi) * xi >= 0.1 * quad_tol * 1e-3) xi += 0.5 * eps;
    // int_X^inf k^m e^{-k^2/c} dk <= X^m e^{-X^2/c} / (2X/c - m/X) when 2X^2 > m c
    double tail = envelope(xi) / (2.0 * xi / c4 - m / xi);

    double panel = r > 0.0 ? std::min(std::numbers::pi / r, eps) : eps;
    const int npanels = static_cast<int>(std::ceil(xi / panel));
    const double budget = 0.05 * quad_tol / pref / npanels;
    QuadResult res;
    for (int p = 0; p < npanels; ++p) {
        double lo = p * panel, hi = std::min((p + 1) * panel, xi);
        // k^m with fractional m is not smooth at the origin; bisection grades toward it.
        auto q = adaptive_gauss_legendre(integrand, lo, hi, budget, p == 0 ? 60 : 30);
        res.value += q.value;
        res.error += q.error;
    }
    res.value *= pref;
    res.error = res.error * pref + tail;
    if (res.error > quad_tol)
        throw QuadratureError("frlap_oracle_fourier: error estimate " + sci(res.error) +
                                  " exceeds quad_tol",
                              res.error);
    return res;
}

inline double frlap_oracle_fourier(const FracOrder& o, double eps, double r, double quad_tol = 1e-10) {
    return frlap_oracle_fourier_detailed(o, eps, r, quad_tol).value;
}

}  // namespace frp

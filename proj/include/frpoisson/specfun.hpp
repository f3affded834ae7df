#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"

namespace frp {

/// Stopping rule shared by every series in this header.
struct SeriesControl {
    double rel_tol = 1e-14;
    int max_terms = 500;
};

namespace detail {

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

inline void check_control(const SeriesControl& c) {
    if (!(c.rel_tol > 0.0) || c.max_terms < 1)
        throw UsageError("SeriesControl needs rel_tol > 0 and max_terms >= 1");
}

inline std::string fmt_args(double a, double b, double z) {
    return "(" + std::to_string(a) + ", " + std::to_string(b) + ", " + std::to_string(z) + ")";
}

}  // namespace detail

inline double gamma(double x) {
    if (std::isnan(x)) throw DomainError("gamma: NaN argument");
    if (detail::is_nonpositive_integer(x))
        throw PoleError("gamma: pole at " + std::to_string(x));
    double v = 0.0;
    try {
        v = boost::math::tgamma(x);
    } catch (const std::overflow_error&) {
        throw OverflowError("gamma: overflow at " + std::to_string(x) + ", use ln_gamma");
    }
    if (!std::isfinite(v)) throw OverflowError("gamma: overflow at " + std::to_string(x));
    return v;
}

inline double ln_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("ln_gamma: requires x > 0, got " + std::to_string(x));
    return boost::math::lgamma(x);
}

/// log|Gamma(x)| with the sign of Gamma(x) written to *sign. x must not be a pole.
inline double ln_abs_gamma(double x, int* sign) {
    if (detail::is_nonpositive_integer(x))
        throw PoleError("ln_abs_gamma: pole at " + std::to_string(x));
    return boost::math::lgamma(x, sign);
}

/// 1/Gamma(x); exactly zero at the poles of Gamma.
inline double recip_gamma(double x) {
    if (detail::is_nonpositive_integer(x)) return 0.0;
    int s = 1;
    double lg = boost::math::lgamma(x, &s);
    if (std::abs(x) < 150.0) return 1.0 / boost::math::tgamma(x);
    return s * std::exp(-lg);
}

inline double digamma(double x) {
    if (detail::is_nonpositive_integer(x))
        throw PoleError("digamma: pole at " + std::to_string(x));
    return boost::math::digamma(x);
}

/// Direct Maclaurin series sum_k (a)_k/(b)_k z^k/k!.
/// Terminates exactly when a is a non-positive integer.
inline double kummer_1f1_taylor(double a, double b, double z, const SeriesControl& ctrl = {}) {
    detail::check_control(ctrl);
    if (detail::is_nonpositive_integer(b))
        throw PoleError("kummer_1f1: b is a non-positive integer");
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < ctrl.max_terms; ++k) {
        double ratio = (a + k) / (b + k) * z / (k + 1);
        term *= ratio;
        sum += term;
        if (term == 0.0) return sum;
        if (!std::isfinite(sum)) throw OverflowError("kummer_1f1: series overflow at " + detail::fmt_args(a, b, z));
        if (std::abs(term) <= ctrl.rel_tol * std::abs(sum) && std::abs(ratio) < 1.0) return sum;
    }
    throw AccuracyLossError("kummer_1f1: Taylor series hit max_terms at " + detail::fmt_args(a, b, z));
}

/// Small-|z| branch. For z < 0 the Kummer-transformed series
/// e^z 1F1(b-a; b; -z) is summed instead of the raw Taylor series, whose
/// alternating terms cancel catastrophically already near z = -30.
inline double kummer_1f1_series(double a, double b, double z, const SeriesControl& ctrl = {}) {
    if (z >= 0.0) return kummer_1f1_taylor(a, b, z, ctrl);
    return std::exp(z) * kummer_1f1_taylor(b - a, b, -z, ctrl);
}

namespace detail {

struct AsymptoticResult {
    double value = 0.0;
    bool converged = false;
};

inline AsymptoticResult kummer_asymptotic_try(double a, double b, double z, const SeriesControl& ctrl) {
    // 1F1(a;b;z) ~ Gamma(b)/Gamma(b-a) (-z)^{-a} sum_k (a)_k (a-b+1)_k / (k! (-z)^k), z -> -inf
    const double x = -z;
    AsymptoticResult r;
    double term = 1.0, sum = 1.0, prev = 1.0;
    bool ok = false;
    for (int k = 0; k < ctrl.max_terms; ++k) {
        double next = term * (a + k) * (a - b + 1.0 + k) / ((k + 1) * x);
        if (next == 0.0) {
            ok = true;
            break;
        }
        if (std::abs(next) > std::abs(prev) && k > 0) break;  // past the smallest term
        term = next;
        prev = std::abs(next);
        sum += term;
        if (std::abs(term) <= ctrl.rel_tol * std::abs(sum)) {
            ok = true;
            break;
        }
    }
    int s_b = 1, s_ba = 1;
    double lg_b = boost::math::lgamma(b, &s_b);
    double lg_ba = boost::math::lgamma(b - a, &s_ba);
    r.value = s_b * s_ba * std::exp(lg_b - lg_ba - a * std::log(x)) * sum;
    r.converged = ok;
    return r;
}

/// Relative size of the exponentially small term that the large-negative-z
/// expansion drops: e^{-x} x^{2a-b} |Gamma(b-a)/Gamma(a)|.
inline double kummer_recessive_ratio(double a, double b, double x) {
    if (is_nonpositive_integer(a)) return 0.0;
    int s1 = 1, s2 = 1;
    double lg = boost::math::lgamma(b - a, &s1) - boost::math::lgamma(a, &s2);
    return std::exp(-x + (2.0 * a - b) * std::log(x) + lg);
}

}  // namespace detail

/// Large-negative-z asymptotic branch on its own; throws AccuracyLossError if
/// the smallest term of the divergent series is still above rel_tol.
inline double kummer_1f1_asymptotic(double a, double b, double z, const SeriesControl& ctrl = {}) {
    detail::check_control(ctrl);
    if (!(z < 0.0)) throw DomainError("kummer_1f1_asymptotic: requires z < 0");
    if (detail::is_nonpositive_integer(b - a))
        throw DomainError("kummer_1f1_asymptotic: leading term vanishes when b-a is a non-positive integer");
    auto r = detail::kummer_asymptotic_try(a, b, z, ctrl);
    if (!r.converged)
        throw AccuracyLossError("kummer_1f1: asymptotic series did not reach rel_tol at " + detail::fmt_args(a, b, z));
    return r.value;
}

/// Base switch point between the series and asymptotic branches.
inline constexpr double kKummerSwitch = 40.0;

/// Smallest x = -z (searched on 40, 45, 50, ...) from which the asymptotic
/// branch meets rel_tol, both in its own truncation and in the dropped
/// recessive term.
inline double kummer_switch_point(double a, double b, const SeriesControl& ctrl = {}) {
    for (double x = kKummerSwitch; x < 1e6; x += 5.0) {
        if (detail::kummer_recessive_ratio(a, b, x) > ctrl.rel_tol) continue;
        if (detail::kummer_asymptotic_try(a, b, -x, ctrl).converged) return x;
    }
    return std::numeric_limits<double>::infinity();
}

/// Confluent hypergeometric function 1F1(a; b; z) for real arguments.
inline double kummer_1f1(double a, double b, double z, const SeriesControl& ctrl = {}) {
    detail::check_control(ctrl);
    if (std::isnan(a) || std::isnan(b) || std::isnan(z)) throw DomainError("kummer_1f1: NaN argument");
    if (detail::is_nonpositive_integer(b))
        throw PoleError("kummer_1f1: b is a non-positive integer " + detail::fmt_args(a, b, z));
    if (z == 0.0) return 1.0;
    if (a == b) return std::exp(z);
    if (detail::is_nonpositive_integer(a)) return kummer_1f1_taylor(a, b, z, ctrl);
    if (z > 0.0) return kummer_1f1_taylor(a, b, z, ctrl);
    if (detail::is_nonpositive_integer(b - a)) return std::exp(z) * kummer_1f1_taylor(b - a, b, -z, ctrl);

    const double x = -z;
    if (x > kKummerSwitch && detail::kummer_recessive_ratio(a, b, x) <= ctrl.rel_tol) {
        auto r = detail::kummer_asymptotic_try(a, b, z, ctrl);
        if (r.converged) return r.value;
    }
    if (x < 700.0) return kummer_1f1_series(a, b, z, ctrl);
    throw AccuracyLossError("kummer_1f1: no regime meets rel_tol at " + detail::fmt_args(a, b, z));
}

namespace detail {

inline double hyp2f1_series(double a, double b, double c, double z, const SeriesControl& ctrl) {
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < ctrl.max_terms; ++k) {
        double ratio = (a + k) * (b + k) / ((c + k) * (k + 1)) * z;
        term *= ratio;
        sum += term;
        if (term == 0.0) return sum;
        if (std::abs(term) <= ctrl.rel_tol * std::abs(sum) && std::abs(ratio) < 1.0) return sum;
    }
    throw AccuracyLossError("gauss_2f1: series hit max_terms at z = " + std::to_string(z));
}

inline bool near_integer(double m, double a, double b, double c, long* mi) {
    double r = std::round(m);
    double scale = 1.0 + std::abs(a) + std::abs(b) + std::abs(c);
    if (std::abs(m - r) <= 64.0 * std::numeric_limits<double>::epsilon() * scale) {
        *mi = static_cast<long>(r);
        return true;
    }
    return false;
}

/// c = a + b + m with integer m >= 0, y = 1 - z in (0, 0.5].
inline double hyp2f1_degenerate(double a, double b, long m, double y, const SeriesControl& ctrl) {
    const double c = a + b + m;
    const double lny = std::log(y);
    double finite = 0.0;
    if (m > 0) {
        double coef = boost::math::tgamma(static_cast<double>(m)) * boost::math::tgamma(c) *
                      recip_gamma(a + m) * recip_gamma(b + m);
        double t = 1.0, s = 0.0;
        for (long n = 0; n < m; ++n) {
            s += t;
            t *= (a + n) * (b + n) / ((n + 1) * (1.0 - m + n)) * y;
        }
        finite = coef * s;
    }
    // log-series: (a+m)_n (b+m)_n / (n! (n+m)!) y^n [ln y - psi(n+1) - psi(n+m+1) + psi(a+n+m) + psi(b+n+m)]
    double pre = std::pow(-y, static_cast<double>(m)) * boost::math::tgamma(c) * recip_gamma(a) * recip_gamma(b);
    if (pre == 0.0) return finite;
    double t = 1.0 / boost::math::tgamma(static_cast<double>(m + 1));
    double s = 0.0;
    int small = 0;
    for (int n = 0; n < ctrl.max_terms; ++n) {
        double bracket = lny - boost::math::digamma(n + 1.0) - boost::math::digamma(n + m + 1.0) +
                         boost::math::digamma(a + n + m) + boost::math::digamma(b + n + m);
        double contrib = t * bracket;
        s += contrib;
        if (std::abs(contrib) <= ctrl.rel_tol * std::abs(s) || t == 0.0) {
            if (++small >= 2) return finite - pre * s;
        } else {
            small = 0;
        }
        t *= (a + m + n) * (b + m + n) / ((n + 1.0) * (n + m + 1.0)) * y;
    }
    throw AccuracyLossError("gauss_2f1: degenerate log-series hit max_terms");
}

inline double hyp2f1_real(double a, double b, double c, double z, const SeriesControl& ctrl);

/// z in [0.5, 1): expansion about z = 1.
inline double hyp2f1_near_one(double a, double b, double c, double z, const SeriesControl& ctrl) {
    const double y = 1.0 - z;
    long m = 0;
    const double cab = c - a - b;
    if (near_integer(cab, a, b, c, &m)) {
        if (m >= 0) return hyp2f1_degenerate(a, b, m, y, ctrl);
        // Euler: F(a,b;c;z) = y^{c-a-b} F(c-a, c-b; c; z), then c-(c-a)-(c-b) = -m > 0
        return std::pow(y, cab) * hyp2f1_degenerate(c - a, c - b, -m, y, ctrl);
    }
    const double gc = boost::math::tgamma(c);
    double t1 = gc * boost::math::tgamma(cab) * recip_gamma(c - a) * recip_gamma(c - b);
    double t2 = gc * boost::math::tgamma(-cab) * recip_gamma(a) * recip_gamma(b);
    double v = 0.0;
    if (t1 != 0.0) v += t1 * hyp2f1_series(a, b, 1.0 - cab, y, ctrl);
    if (t2 != 0.0) v += t2 * std::pow(y, cab) * hyp2f1_series(c - a, c - b, 1.0 + cab, y, ctrl);
    return v;
}

inline double hyp2f1_real(double a, double b, double c, double z, const SeriesControl& ctrl) {
    if (z == 0.0) return 1.0;
    if (is_nonpositive_integer(a) || is_nonpositive_integer(b)) return hyp2f1_series(a, b, c, z, ctrl);
    if (z < 0.0) {
        // Pfaff; pick the variant whose series terminates when one exists.
        const double w = z / (z - 1.0);
        if (is_nonpositive_integer(c - a) && !is_nonpositive_integer(c - b))
            return std::pow(1.0 - z, -b) * hyp2f1_real(b, c - a, c, w, ctrl);
        return std::pow(1.0 - z, -a) * hyp2f1_real(a, c - b, c, w, ctrl);
    }
    if (z < 0.5) return hyp2f1_series(a, b, c, z, ctrl);
    if (z < 1.0) return hyp2f1_near_one(a, b, c, z, ctrl);
    // z == 1, Gauss summation
    return boost::math::tgamma(c) * boost::math::tgamma(c - a - b) * recip_gamma(c - a) * recip_gamma(c - b);
}

}  // namespace detail

/// Gauss hypergeometric function 2F1(a, b; c; z) for real z <= 1.
inline double gauss_2f1(double a, double b, double c, double z, const SeriesControl& ctrl = {}) {
    detail::check_control(ctrl);
    if (std::isnan(a) || std::isnan(b) || std::isnan(c) || std::isnan(z))
        throw DomainError("gauss_2f1: NaN argument");
    if (detail::is_nonpositive_integer(c)) throw PoleError("gauss_2f1: c is a non-positive integer");
    if (z > 1.0) throw DomainError("gauss_2f1: z > 1 is outside the supported real line");
    if (z == 1.0 && !(detail::is_nonpositive_integer(a) || detail::is_nonpositive_integer(b)) &&
        !(c - a - b > 0.0))
        throw DivergenceError("gauss_2f1: divergent at z = 1 since c - a - b <= 0");
    double v = detail::hyp2f1_real(a, b, c, z, ctrl);
    if (!std::isfinite(v)) throw OverflowError("gauss_2f1: non-finite result");
    return v;
}

}  // namespace frp

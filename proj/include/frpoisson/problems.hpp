#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "lattice.hpp"
#include "specfun.hpp"

namespace frp {

/// Manufactured solutions of (-Delta)^{alpha/2} u = f with u = g outside the domain.
enum class ProblemId { Ex1, Ex2, Ex3, Ex4, Ex5 };

inline const char* to_string(ProblemId id) {
    switch (id) {
        case ProblemId::Ex1: return "ex1";
        case ProblemId::Ex2: return "ex2";
        case ProblemId::Ex3: return "ex3";
        case ProblemId::Ex4: return "ex4";
        default: return "ex5";
    }
}

inline ProblemId parse_problem_id(const std::string& s) {
    if (s == "ex1") return ProblemId::Ex1;
    if (s == "ex2") return ProblemId::Ex2;
    if (s == "ex3") return ProblemId::Ex3;
    if (s == "ex4") return ProblemId::Ex4;
    if (s == "ex5") return ProblemId::Ex5;
    throw UsageError("unknown problem id '" + s + "' (expected ex1..ex5)");
}

/// Collar around the domain on which the auxiliary function w_h is fitted.
struct CollarConfig {
    double width = 0.0;
    double fit_h = 1.0 / 32.0;
    double fit_eps = 1.4;
};

struct ProblemSpec {
    ProblemId id = ProblemId::Ex1;
    double alpha = 1.0;
    double s = 4.0;            ///< ex1 exponent
    Domain domain = Domain::interval(-1.0, 1.0);
    ScalarField f, g, u_exact;
    double g_decay_p = 0.0;    ///< |g(y)| <= C |y|^{-p} for large |y|; 0 when g vanishes
    bool homogeneous = true;
    CollarConfig collar;

    int dim() const { return domain.dim(); }
};

namespace detail {

inline void check_problem_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw UsageError("problems: alpha must lie in (0, 2)");
}

}  // namespace detail

/// f for u = [(1-x^2)_+]^s on (-1, 1).
inline double ex1_f(double s, double alpha, double x) {
    detail::check_problem_alpha(alpha);
    if (!(s > 0.5 * alpha)) throw UsageError("ex1_f: needs s > alpha/2");
    if (!(std::abs(x) < 1.0)) throw DomainError("ex1_f: |x| must be < 1");
    const double pref = std::exp(alpha * std::numbers::ln2 + ln_gamma(0.5 * (alpha + 1.0)) + ln_gamma(s + 1.0) -
                                 0.5 * std::log(std::numbers::pi) - ln_gamma(s + 1.0 - 0.5 * alpha));
    return pref * gauss_2f1(0.5 * (alpha + 1.0), 0.5 * alpha - s, 0.5, x * x);
}

inline double ex1_u(double s, double x) {
    const double t = 1.0 - x * x;
    return t > 0.0 ? std::pow(t, s) : 0.0;
}

/// f for u = [(1-|x|^2)_+]^4 on the unit disk.
inline double ex2_f(double alpha, const double* p) {
    detail::check_problem_alpha(alpha);
    const double r2 = p[0] * p[0] + p[1] * p[1];
    if (!(r2 < 1.0)) throw DomainError("ex2_f: point must lie inside the unit disk");
    // alpha 2^{alpha-1} Gamma(alpha/2) = 2^alpha Gamma(1 + alpha/2)
    const double pref = std::exp(alpha * std::numbers::ln2 + ln_gamma(1.0 + 0.5 * alpha) + std::log(24.0) -
                                 ln_gamma(5.0 - 0.5 * alpha));
    return pref * gauss_2f1(0.5 * alpha + 1.0, 0.5 * alpha - 4.0, 1.0, r2);
}

/// The same closed form with the argument written as (x^2 + y^2)^2; kept to
/// show that this variant does not match u (see test_problems).
inline double ex2_f_squared_argument(double alpha, const double* p) {
    detail::check_problem_alpha(alpha);
    const double r2 = p[0] * p[0] + p[1] * p[1];
    if (!(r2 < 1.0)) throw DomainError("ex2_f: point must lie inside the unit disk");
    const double pref = std::exp(alpha * std::numbers::ln2 + ln_gamma(1.0 + 0.5 * alpha) + std::log(24.0) -
                                 ln_gamma(5.0 - 0.5 * alpha));
    return pref * gauss_2f1(0.5 * alpha + 1.0, 0.5 * alpha - 4.0, 1.0, r2 * r2);
}

inline double ex2_u(const double* p) {
    const double t = 1.0 - p[0] * p[0] - p[1] * p[1];
    return t > 0.0 ? t * t * t * t : 0.0;
}

/// f for u = y exp(-9|x|^2) on (-2, 2)^2.
inline double ex3_f(double alpha, const double* p) {
    detail::check_problem_alpha(alpha);
    const double r2 = p[0] * p[0] + p[1] * p[1];
    const double pref = std::exp(alpha * std::log(6.0) + ln_gamma(2.0 + 0.5 * alpha));
    return pref * kummer_1f1(2.0 + 0.5 * alpha, 2.0, -9.0 * r2) * p[1];
}

inline double ex3_u(const double* p) { return p[1] * std::exp(-9.0 * (p[0] * p[0] + p[1] * p[1])); }

struct PointData {
    double f = 0.0;
    double g = 0.0;
    double u = 0.0;
};

/// u = g = 1/(1+x^2) on R, posed on (-1, 1).
inline PointData ex4_data(double alpha, double x) {
    detail::check_problem_alpha(alpha);
    const double pref = std::exp(alpha * std::numbers::ln2 + ln_gamma(0.5 * (1.0 + alpha)) + ln_gamma(1.0 + 0.5 * alpha) -
                                 0.5 * std::log(std::numbers::pi));
    PointData d;
    d.f = pref * gauss_2f1(0.5 * (1.0 + alpha), 1.0 + 0.5 * alpha, 0.5, -x * x);
    d.g = d.u = 1.0 / (1.0 + x * x);
    return d;
}

/// u = g = x/(1+|x|^2) on R^2, posed on (-1, 1)^2.
inline PointData ex5_data(double alpha, const double* p) {
    detail::check_problem_alpha(alpha);
    const double r2 = p[0] * p[0] + p[1] * p[1];
    const double pref = std::exp(alpha * std::numbers::ln2 + ln_gamma(1.0 + 0.5 * alpha) + ln_gamma(2.0 + 0.5 * alpha));
    PointData d;
    d.f = pref * gauss_2f1(2.0 + 0.5 * alpha, 1.0 + 0.5 * alpha, 2.0, -r2) * p[0];
    d.g = d.u = p[0] / (1.0 + r2);
    return d;
}

/// Problem catalogue entry with domain, data and (for ex4/ex5) the collar used
/// by the two-stage solver.
inline ProblemSpec make_problem(ProblemId id, double alpha, double s = 4.0) {
    detail::check_problem_alpha(alpha);
    ProblemSpec p;
    p.id = id;
    p.alpha = alpha;
    p.s = s;
    auto zero = [](const double*) { return 0.0; };
    switch (id) {
        case ProblemId::Ex1:
            if (!(s > 0.5 * alpha)) throw UsageError("ex1: needs s > alpha/2");
            p.domain = Domain::interval(-1.0, 1.0);
            p.f = [alpha, s](const double* x) { return ex1_f(s, alpha, x[0]); };
            p.u_exact = [s](const double* x) { return ex1_u(s, x[0]); };
            p.g = zero;
            break;
        case ProblemId::Ex2:
            p.domain = Domain::disk({0.0, 0.0}, 1.0);
            p.f = [alpha](const double* x) { return ex2_f(alpha, x); };
            p.u_exact = ex2_u;
            p.g = zero;
            break;
        case ProblemId::Ex3:
            // |u| <= 3.3e-17 on and outside the boundary; treated as homogeneous
            p.domain = Domain::cube(-2.0, 2.0, 2);
            p.f = [alpha](const double* x) { return ex3_f(alpha, x); };
            p.u_exact = ex3_u;
            p.g = zero;
            break;
        case ProblemId::Ex4:
            p.domain = Domain::interval(-1.0, 1.0);
            p.f = [alpha](const double* x) { return ex4_data(alpha, x[0]).f; };
            p.u_exact = p.g = [](const double* x) { return 1.0 / (1.0 + x[0] * x[0]); };
            p.g_decay_p = 2.0;
            p.homogeneous = false;
            p.collar = {0.25, 1.0 / 32.0, 1.4};
            break;
        case ProblemId::Ex5:
            p.domain = Domain::cube(-1.0, 1.0, 2);
            p.f = [alpha](const double* x) { return ex5_data(alpha, x).f; };
            p.u_exact = p.g = [](const double* x) { return x[0] / (1.0 + x[0] * x[0] + x[1] * x[1]); };
            p.g_decay_p = 1.0;
            p.homogeneous = false;
            p.collar = {1.0 / 16.0, 1.0 / 32.0, 1.4};
            break;
    }
    return p;
}

inline ProblemSpec make_problem(const std::string& id, double alpha, double s = 4.0) {
    return make_problem(parse_problem_id(id), alpha, s);
}

}  // namespace frp

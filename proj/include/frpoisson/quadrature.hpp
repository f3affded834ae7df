#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace frp {

/// Gauss-Legendre nodes and weights mapped to [a, b].
template <unsigned N>
inline void gauss_legendre_panel(double a, double b, std::vector<double>& nodes, std::vector<double>& weights) {
    using Rule = boost::math::quadrature::gauss<double, N>;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    // Boost stores the non-negative half of a symmetric rule.
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            nodes.push_back(c);
            weights.push_back(h * w[i]);
            continue;
        }
        nodes.push_back(c - h * x[i]);
        weights.push_back(h * w[i]);
        nodes.push_back(c + h * x[i]);
        weights.push_back(h * w[i]);
    }
}

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

namespace detail {

template <class F>
void adaptive_gl_rec(const F& f, double a, double b, double whole, double abs_tol, int depth, AdaptiveResult& out) {
    const double m = 0.5 * (a + b);
    double left = boost::math::quadrature::gauss<double, 20>::integrate(f, a, m);
    double right = boost::math::quadrature::gauss<double, 20>::integrate(f, m, b);
    double err = std::abs(left + right - whole);
    if (err <= abs_tol || depth <= 0) {
        if (err > abs_tol) out.converged = false;
        out.value += left + right;
        out.error += err;
        return;
    }
    adaptive_gl_rec(f, a, m, left, 0.5 * abs_tol, depth - 1, out);
    adaptive_gl_rec(f, m, b, right, 0.5 * abs_tol, depth - 1, out);
}

}  // namespace detail

/// Adaptive bisection with 20-point Gauss-Legendre; error is the change
/// between a panel and its two halves.
template <class F>
AdaptiveResult adaptive_gauss_legendre(const F& f, double a, double b, double abs_tol, int max_depth = 40) {
    AdaptiveResult out;
    if (a == b) return out;
    double whole = boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
    detail::adaptive_gl_rec(f, a, b, whole, abs_tol, max_depth, out);
    return out;
}

}  // namespace frp

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "assembly.hpp"
#include "errors.hpp"
#include "frlap_kernel.hpp"
#include "lattice.hpp"
#include "quadrature.hpp"
#include "solver.hpp"

namespace frp {

/// Closed collar [lo - w, hi + w]^d minus (lo, hi)^d around an interval or box.
struct BoundaryLayer {
    Domain inner = Domain::interval(-1.0, 1.0);
    double width = 0.25;
    double fit_h = 1.0 / 32.0;
    double fit_eps = 1.4;

    int dim() const { return inner.dim(); }
    double outer_lo(int a) const { return inner.lower()[a] - width; }
    double outer_hi(int a) const { return inner.upper()[a] + width; }

    /// Membership in the closed collar.
    bool contains(const double* y) const {
        const double tol = 1e-12 * (inner.diameter() + width);
        bool in_outer = true, in_open_inner = true;
        for (int a = 0; a < dim(); ++a) {
            if (y[a] < outer_lo(a) - tol || y[a] > outer_hi(a) + tol) in_outer = false;
            if (!(y[a] > inner.lower()[a] + tol && y[a] < inner.upper()[a] - tol)) in_open_inner = false;
        }
        return in_outer && !in_open_inner;
    }

    void validate() const {
        if (inner.kind() == DomainKind::Disk) throw UsageError("BoundaryLayer: only interval and box collars are supported");
        if (!(width > 0.0)) throw UsageError("BoundaryLayer: width must be positive");
        if (!(fit_h > 0.0 && fit_h <= width)) throw UsageError("BoundaryLayer: need 0 < fit_h <= width");
        if (!(fit_eps > 0.0)) throw UsageError("BoundaryLayer: fit_eps must be positive");
    }
};

namespace detail {

/// Lattice points lo_outer + s k that lie in the closed collar.
inline PointSet collar_points(const BoundaryLayer& L, double s) {
    const int d = L.dim();
    std::vector<long> lo(d, 0), hi(d);
    for (int a = 0; a < d; ++a) hi[a] = static_cast<long>(std::floor((L.outer_hi(a) - L.outer_lo(a)) / s + 1e-9));
    PointSet p(d);
    std::vector<double> y(d);
    for_each_index(lo, hi, [&](const std::vector<long>& k) {
        for (int a = 0; a < d; ++a) y[a] = L.outer_lo(a) + s * static_cast<double>(k[a]);
        if (L.contains(y.data())) p.push(y.data());
    });
    return p;
}

}  // namespace detail

/// w_h(x) = sum_l lambda_l exp(-eps^2 |x - x_l|^2) fitted to g on the collar.
struct AuxiliaryFit {
    BoundaryLayer layer;
    PointSet centers;
    double eps = 1.0;
    Eigen::VectorXd lambda;
    double fit_rms = 0.0;
    double rcond = 1.0;  ///< reciprocal 1-norm condition estimate of the fit matrix
    /// Terms with eps^2 r^2 above this are below 1e-35 in absolute value and skipped.
    double cutoff = 745.0;

    /// Large terms are evaluated in long double: the coefficients are large and
    /// alternate, so double rounding in the exponent alone leaves noise near 1e-8.
    double value(const double* x) const {
        const double e2 = eps * eps;
        long double s = 0.0L;
        for (std::size_t l = 0; l < centers.size(); ++l) {
            double r2 = 0.0;
            for (int a = 0; a < centers.dim; ++a) {
                const double d = x[a] - centers[l][a];
                r2 += d * d;
            }
            const double t = e2 * r2;
            if (t > cutoff) continue;
            const double lam = lambda[static_cast<Eigen::Index>(l)];
            const double term = lam * std::exp(-t);
            if (std::abs(term) < 1e-4) {
                s += term;
                continue;
            }
            long double r2l = 0.0L;
            for (int a = 0; a < centers.dim; ++a) {
                const long double d = static_cast<long double>(x[a]) - centers[l][a];
                r2l += d * d;
            }
            s += lam * std::exp(-static_cast<long double>(eps) * eps * r2l);
        }
        return static_cast<double>(s);
    }

    /// w_h on the tensor grid axes[0] x ... x axes[d-1] (last axis fastest).
    /// The Gaussians factor per axis, so the exponentials are tabulated once
    /// per axis in long double.
    std::vector<double> tensor_values(const std::vector<std::vector<double>>& axes) const {
        const int d = centers.dim;
        std::size_t total = 1;
        double near2 = 0.0;
        for (int a = 0; a < d; ++a) {
            total *= axes[a].size();
            double m = std::numeric_limits<double>::infinity();
            for (double y : axes[a]) m = std::min(m, std::max({layer.outer_lo(a) - y, y - layer.outer_hi(a), 0.0}));
            near2 += m * m;
        }
        std::vector<double> out(total, 0.0);
        if (eps * eps * near2 > cutoff) return out;
        const long double e2 = static_cast<long double>(eps) * eps;
        std::vector<std::vector<long double>> table(d);
        std::vector<std::vector<std::size_t>> slot(d, std::vector<std::size_t>(centers.size()));
        std::vector<std::size_t> width(d);
        for (int a = 0; a < d; ++a) {
            std::vector<double> coords;
            for (std::size_t l = 0; l < centers.size(); ++l) coords.push_back(centers[l][a]);
            std::sort(coords.begin(), coords.end());
            coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
            for (std::size_t l = 0; l < centers.size(); ++l)
                slot[a][l] = static_cast<std::size_t>(std::lower_bound(coords.begin(), coords.end(), centers[l][a]) - coords.begin());
            width[a] = coords.size();
            table[a].resize(axes[a].size() * coords.size());
            for (std::size_t i = 0; i < axes[a].size(); ++i)
                for (std::size_t k = 0; k < coords.size(); ++k) {
                    const long double t = static_cast<long double>(axes[a][i]) - coords[k];
                    table[a][i * coords.size() + k] = std::exp(-e2 * t * t);
                }
        }
        std::vector<std::size_t> idx(d, 0);
        for (std::size_t n = 0; n < total; ++n) {
            // multi-index of node n, last axis fastest
            std::size_t rem = n;
            double out2 = 0.0;
            for (int a = d - 1; a >= 0; --a) {
                idx[a] = rem % axes[a].size();
                rem /= axes[a].size();
                const double y = axes[a][idx[a]];
                const double e = std::max({layer.outer_lo(a) - y, y - layer.outer_hi(a), 0.0});
                out2 += e * e;
            }
            if (eps * eps * out2 > cutoff) continue;
            long double s = 0.0L;
            for (std::size_t l = 0; l < centers.size(); ++l) {
                long double term = lambda[static_cast<Eigen::Index>(l)];
                for (int a = 0; a < d; ++a) term *= table[a][idx[a] * width[a] + slot[a][l]];
                s += term;
            }
            out[n] = static_cast<double>(s);
        }
        return out;
    }
};

/// Interpolates g at the collar lattice points (test points = centers) with a
/// direct symmetric solve. fit_rms is measured on the collar grid of spacing
/// fit_h / 4; FitToleranceError is raised when it exceeds tau.
inline AuxiliaryFit fit_auxiliary(const ScalarField& g, const BoundaryLayer& layer, double tau = 1e-7) {
    layer.validate();
    AuxiliaryFit fit;
    fit.layer = layer;
    fit.eps = layer.fit_eps;
    fit.centers = detail::collar_points(layer, layer.fit_h);
    const auto m = static_cast<Eigen::Index>(fit.centers.size());
    if (m == 0) throw UsageError("fit_auxiliary: no fit centers in the collar");
    Eigen::VectorXd rhs(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        rhs[k] = g(fit.centers[static_cast<std::size_t>(k)]);
        if (!std::isfinite(rhs[k])) throw UsageError("fit_auxiliary: g is not finite on the collar");
    }
    fit.lambda = Eigen::VectorXd::Zero(m);
    if (rhs.cwiseAbs().maxCoeff() > 0.0) {
        Eigen::MatrixXd a(m, m);
        const double e2 = fit.eps * fit.eps;
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) {
                double r2 = 0.0;
                for (int d = 0; d < fit.centers.dim; ++d) {
                    const double t = fit.centers[static_cast<std::size_t>(i)][d] - fit.centers[static_cast<std::size_t>(j)][d];
                    r2 += t * t;
                }
                a(i, j) = a(j, i) = std::exp(-e2 * r2);
            }
        detail::SymmetricFactor fac(a);
        fit.rcond = fac.rcond();
        fit.lambda = fac.solve(rhs);
        if (!fit.lambda.allFinite())
            throw SingularMatrixError("fit_auxiliary: fit matrix is singular (rcond " + sci(fit.rcond) + ")");
        fit.cutoff = std::min(745.0, std::log(fit.lambda.cwiseAbs().maxCoeff()) + 80.0);
    }
    auto check = detail::collar_points(layer, 0.25 * layer.fit_h);
    double s2 = 0.0;
    for (std::size_t i = 0; i < check.size(); ++i) {
        const double e = fit.value(check[i]) - g(check[i]);
        s2 += e * e;
    }
    fit.fit_rms = std::sqrt(s2 / static_cast<double>(check.size()));
    if (!(fit.fit_rms <= tau))
        throw FitToleranceError("fit_auxiliary: fit rms " + sci(fit.fit_rms) + " exceeds tolerance " + sci(tau) +
                                    " (rcond " + sci(fit.rcond) + ")",
                                fit.fit_rms);
    return fit;
}

/// Settings of the correction integral over the complement of the domain
/// and collar.
struct CorrectionQuad {
    int refine = 2;            ///< panels per shell width (radially and tangentially)
    double decay_p = 2.0;      ///< |w_h - g|(y) <= C |y|^{-p}
    double tol = 1e-10;
    int max_shells = 200;
};

/// Precomputed quadrature of C_{d,alpha} int (w_h - g)(y) / |y - x|^{d+alpha} dy
/// over the exterior of the outer collar box. Nodes and weighted integrand
/// values do not depend on x, so one instance serves every test point.
class CorrectionIntegral {
public:
    CorrectionIntegral(const AuxiliaryFit& fit, const ScalarField& g, double alpha, const CorrectionQuad& q)
        : dim_(fit.layer.dim()), alpha_(alpha), quad_(q) {
        if (dim_ > 2) throw UsageError("CorrectionIntegral: only d = 1, 2");
        if (!(q.refine >= 1)) throw UsageError("CorrectionQuad: refine must be >= 1");
        if (!(q.decay_p >= 0.0)) throw UsageError("CorrectionQuad: decay_p must be >= 0");
        const auto& L = fit.layer;
        // shells are centred at the box centre; distances measured from there
        center_.resize(dim_);
        double half = std::numeric_limits<double>::infinity();
        r_omega_ = 0.0;
        for (int a = 0; a < dim_; ++a) {
            center_[a] = 0.5 * (L.outer_lo(a) + L.outer_hi(a));
            half = std::min(half, 0.5 * (L.outer_hi(a) - L.outer_lo(a)));
            const double e = 0.5 * (L.inner.upper()[a] - L.inner.lower()[a]);
            r_omega_ += e * e;
        }
        r_omega_ = std::sqrt(r_omega_);
        // the collar box need not be square; shells start from its bounding square
        std::vector<double> lo(dim_), hi(dim_);
        for (int a = 0; a < dim_; ++a) {
            lo[a] = L.outer_lo(a);
            hi[a] = L.outer_hi(a);
        }
        const double sphere = unit_sphere_area(dim_);
        const double da = dim_ + alpha_;
        double delta = L.width;
        std::vector<double> nodes1, weights1;
        for (int j = 0; j < q.max_shells; ++j) {
            std::vector<double> nlo(dim_), nhi(dim_);
            for (int a = 0; a < dim_; ++a) {
                nlo[a] = lo[a] - delta;
                nhi[a] = hi[a] + delta;
            }
            double inc = 0.0, cg = 0.0;
            add_shell(fit, g, lo, hi, nlo, nhi, delta / q.refine, inc, cg);
            lo = nlo;
            hi = nhi;
            shells_ = j + 1;
            double a_in = std::numeric_limits<double>::infinity();
            for (int a = 0; a < dim_; ++a) a_in = std::min({a_in, center_[a] - lo[a], hi[a] - center_[a]});
            radius_ = a_in;
            // increment bound for the nearest possible x and analytic tail beyond radius_
            const double near = std::max(a_in - delta - r_omega_, 1e-300);
            const double inc_bound = inc / std::pow(near, da);
            tail_ = 0.0;
            if (quad_.decay_p > 0.0 && a_in > 2.0 * r_omega_) {
                tail_ = 2.0 * cg * std::pow(1.0 - r_omega_ / a_in, -da) * sphere * std::pow(a_in, -quad_.decay_p - alpha_) /
                        (quad_.decay_p + alpha_);
            } else {
                tail_ = std::numeric_limits<double>::infinity();
            }
            if (inc_bound < 0.1 * quad_.tol && tail_ < quad_.tol) break;
            delta *= 2.0;
        }
        if (!(tail_ < quad_.tol))
            throw QuadratureError("CorrectionIntegral: tail bound " + sci(tail_) + " exceeds tol after " +
                                      std::to_string(shells_) + " shells; raise max_shells or decay_p",
                                  tail_);
        cdal_ = frac_laplacian_constant(dim_, alpha_);
    }

    /// C_{d,alpha} sum_q W_q F_q |y_q - x|^{-d-alpha}
    double operator()(const double* x) const {
        const double expo = -0.5 * (dim_ + alpha_);
        double s = 0.0;
        for (std::size_t i = 0; i < wf_.size(); ++i) {
            double r2 = 0.0;
            for (int a = 0; a < dim_; ++a) {
                const double d = ys_[i * dim_ + a] - x[a];
                r2 += d * d;
            }
            s += wf_[i] * std::pow(r2, expo);
        }
        return cdal_ * s;
    }

    std::size_t node_count() const { return wf_.size(); }
    int shells() const { return shells_; }
    double radius() const { return radius_; }
    double tail_bound() const { return tail_; }

private:
    /// Adds the ring [nlo, nhi] \ [lo, hi] as tensor GL panels of size ~ panel.
    void add_shell(const AuxiliaryFit& fit, const ScalarField& g, const std::vector<double>& lo,
                   const std::vector<double>& hi, const std::vector<double>& nlo, const std::vector<double>& nhi,
                   double panel, double& abs_sum, double& cg) {
        auto emit = [&](const std::vector<double>& a, const std::vector<double>& b) {
            // rectangle a..b split into panels, 16-point GL per axis
            std::vector<std::vector<double>> xn(dim_), xw(dim_);
            for (int ax = 0; ax < dim_; ++ax) {
                const int n = std::max(1, static_cast<int>(std::ceil((b[ax] - a[ax]) / panel - 1e-9)));
                for (int k = 0; k < n; ++k)
                    gauss_legendre_panel<16>(a[ax] + (b[ax] - a[ax]) * k / n, a[ax] + (b[ax] - a[ax]) * (k + 1) / n, xn[ax],
                                             xw[ax]);
            }
            const std::vector<double> wh = fit.tensor_values(xn);
            std::vector<double> y(dim_);
            auto push = [&](double w, std::size_t n) {
                const double F = wh[n] - g(y.data());
                const double wf = w * F;
                if (wf == 0.0) return;
                ys_.insert(ys_.end(), y.begin(), y.end());
                wf_.push_back(wf);
                abs_sum += std::abs(wf);
                double r = 0.0;
                for (int ax = 0; ax < dim_; ++ax) r += (y[ax] - center_[ax]) * (y[ax] - center_[ax]);
                cg = std::max(cg, std::abs(F) * std::pow(std::sqrt(r), quad_.decay_p));
            };
            if (dim_ == 1) {
                for (std::size_t i = 0; i < xn[0].size(); ++i) {
                    y[0] = xn[0][i];
                    push(xw[0][i], i);
                }
            } else {
                for (std::size_t i = 0; i < xn[0].size(); ++i)
                    for (std::size_t k = 0; k < xn[1].size(); ++k) {
                        y[0] = xn[0][i];
                        y[1] = xn[1][k];
                        push(xw[0][i] * xw[1][k], i * xn[1].size() + k);
                    }
            }
        };
        if (dim_ == 1) {
            emit({nlo[0]}, {lo[0]});
            emit({hi[0]}, {nhi[0]});
            return;
        }
        // bottom and top strips span the full width; left and right fill the middle
        emit({nlo[0], nlo[1]}, {nhi[0], lo[1]});
        emit({nlo[0], hi[1]}, {nhi[0], nhi[1]});
        emit({nlo[0], lo[1]}, {lo[0], hi[1]});
        emit({hi[0], lo[1]}, {nhi[0], hi[1]});
    }

    int dim_;
    double alpha_;
    CorrectionQuad quad_;
    std::vector<double> center_;
    double r_omega_ = 0.0, radius_ = 0.0, tail_ = 0.0, cdal_ = 0.0;
    int shells_ = 0;
    std::vector<double> ys_, wf_;
};

/// (-Delta)^{alpha/2} w at interior x: the closed form over the fit centers
/// plus the correction integral.
inline double frlap_w(const AuxiliaryFit& fit, const CorrectionIntegral& corr, double alpha, const double* x,
                      const SeriesControl& ctrl = {}) {
    const FracOrder o{alpha, fit.centers.dim};
    double s = 0.0;
    for (std::size_t l = 0; l < fit.centers.size(); ++l) {
        double r2 = 0.0;
        for (int a = 0; a < fit.centers.dim; ++a) {
            const double d = x[a] - fit.centers[l][a];
            r2 += d * d;
        }
        s += fit.lambda[static_cast<Eigen::Index>(l)] * frlap_gaussian(o, fit.eps, std::sqrt(r2), ctrl);
    }
    return s + corr(x);
}

inline double frlap_w(const AuxiliaryFit& fit, const ScalarField& g, double alpha, const CorrectionQuad& q,
                      const double* x) {
    CorrectionIntegral corr(fit, g, alpha, q);
    return frlap_w(fit, corr, alpha, x);
}

struct NonhomogeneousSolution {
    RbfSolution v;
    SolveReport report;
    AuxiliaryFit fit;
    /// u_h = v_h + w_h
    double value(const double* x) const { return evaluate(v, x) + fit.value(x); }
};

/// Discrete RMS error of v_h + w_h over evaluation_grid(domain, h, refine).
inline double rms_error(const NonhomogeneousSolution& s, const ScalarField& exact, const Domain& dom, int refine) {
    auto eg = evaluation_grid(dom, s.v.grid, refine);
    Eigen::VectorXd uh = evaluate(s.v, eg);
    const std::vector<double> wh = s.fit.tensor_values(eg.axes);
    for (std::size_t i = 0; i < eg.points.size(); ++i)
        uh[static_cast<Eigen::Index>(i)] += wh[eg.tensor_pos[i]] - exact(eg.points[i]);
    return rms(uh);
}

/// Two-stage solve: fit w_h on the collar, then solve the homogeneous problem
/// for v with right-hand side f - (-Delta)^{alpha/2} w at the grid points.
inline NonhomogeneousSolution solve_nonhomogeneous(const ScalarField& f, const ScalarField& g, double alpha,
                                                   const BoundaryLayer& layer, const CorrectionQuad& q,
                                                   const LatticeGrid& grid, double c_star, const SolveOptions& opts = {},
                                                   double tau = 1e-7) {
    if (grid.dim != layer.dim()) throw UsageError("solve_nonhomogeneous: grid and layer dimensions differ");
    NonhomogeneousSolution out;
    out.fit = fit_auxiliary(g, layer, tau);
    CorrectionIntegral corr(out.fit, g, alpha, q);
    const FracOrder o{alpha, grid.dim};
    const double eps = c_star / grid.h;
    auto pts = grid.points();
    // fit-center sums reuse values for repeated distances
    std::unordered_map<double, double> cache;
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double s = 0.0;
        for (std::size_t l = 0; l < out.fit.centers.size(); ++l) {
            double r2 = 0.0;
            for (int a = 0; a < grid.dim; ++a) {
                const double d = pts[i][a] - out.fit.centers[l][a];
                r2 += d * d;
            }
            auto it = cache.find(r2);
            if (it == cache.end()) it = cache.emplace(r2, frlap_gaussian(o, out.fit.eps, std::sqrt(r2))).first;
            s += out.fit.lambda[static_cast<Eigen::Index>(l)] * it->second;
        }
        rhs[static_cast<Eigen::Index>(i)] = f(pts[i]) - (s + corr(pts[i]));
    }
    if (grid.size() <= opts.direct_max_n) {
        auto res = solve(assemble_dense(grid, o, eps), rhs, opts);
        out.v = std::move(res.solution);
        out.report = res.report;
    } else {
        auto res = solve(assemble_toeplitz(grid, o, eps), rhs, opts);
        out.v = std::move(res.solution);
        out.report = res.report;
    }
    return out;
}

}  // namespace frp

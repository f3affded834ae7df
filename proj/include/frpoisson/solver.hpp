#pragma once

#include <lapacke.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assembly.hpp"
#include "errors.hpp"
#include "lattice.hpp"

namespace frp {

enum class SolveMethod { Auto, Direct, Cg };

inline const char* to_string(SolveMethod m) {
    switch (m) {
        case SolveMethod::Direct: return "direct";
        case SolveMethod::Cg: return "cg";
        default: return "auto";
    }
}

struct SolveOptions {
    SolveMethod method = SolveMethod::Auto;
    double tol = 1e-13;
    int max_iter = 0;                      ///< 0: 10 N
    bool circulant_preconditioner = false;
    bool compute_condition = false;        ///< fill SolveReport::condition (exact for N <= 4096)
    std::size_t direct_max_n = 4096;       ///< Auto picks Direct up to this size
    int refinement_steps = 4;
};

struct SolveReport {
    SolveMethod method = SolveMethod::Direct;
    int iterations = 0;
    double residual = 0.0;                 ///< ||A lambda - f|| / ||f||
    std::optional<double> condition;
    bool minres_fallback = false;
    double wall_time = 0.0;                ///< seconds spent in the linear solve only
};

/// u_h(x) = sum_k lambda_k exp(-eps^2 |x - x_k|^2)
struct RbfSolution {
    LatticeGrid grid;
    double eps = 1.0;
    Eigen::VectorXd lambda;
};

struct SolveResult {
    RbfSolution solution;
    SolveReport report;
};

/// Linear operator x -> A x used by the Krylov solvers.
using LinearOp = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct KrylovResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    bool negative_curvature = false;
};

/// Preconditioned conjugate gradients from x = 0. Stops at a non-positive
/// curvature direction and flags it.
inline KrylovResult conjugate_gradient(const LinearOp& A, const Eigen::VectorXd& b, double tol, int max_iter,
                                       const LinearOp* precond = nullptr) {
    KrylovResult res;
    const Eigen::Index n = b.size();
    res.x = Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    Eigen::VectorXd r = b, z(n), p(n), q(n);
    if (precond) (*precond)(r, z);
    else z = r;
    p = z;
    double rz = r.dot(z);
    Eigen::VectorXd best = res.x;
    double best_res = 1.0;
    for (int k = 1; k <= max_iter; ++k) {
        A(p, q);
        const double curv = p.dot(q);
        if (!(curv > 0.0)) {
            res.negative_curvature = true;
            res.iterations = k;
            break;
        }
        const double step = rz / curv;
        res.x += step * p;
        r -= step * q;
        res.iterations = k;
        const double rel = r.norm() / bnorm;
        if (rel < best_res) {
            best_res = rel;
            best = res.x;
        }
        if (rel <= tol) {
            res.converged = true;
            break;
        }
        if (precond) (*precond)(r, z);
        else z = r;
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    if (!res.converged) res.x = best;
    res.residual = best_res;
    return res;
}

/// MINRES (Paige-Saunders) for symmetric, possibly indefinite operators.
inline KrylovResult minres(const LinearOp& A, const Eigen::VectorXd& b, double tol, int max_iter) {
    KrylovResult res;
    const Eigen::Index n = b.size();
    res.x = Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    Eigen::VectorXd r1 = b, r2 = b, y = b, v(n);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n), w1(n), w2 = Eigen::VectorXd::Zero(n);
    double beta = bnorm, oldb = 0.0, dbar = 0.0, epsln = 0.0, phibar = bnorm, cs = -1.0, sn = 0.0;
    for (int k = 1; k <= max_iter; ++k) {
        v = y / beta;
        A(v, y);
        if (k >= 2) y -= (beta / oldb) * r1;
        const double alfa = v.dot(y);
        y -= (alfa / beta) * r2;
        r1 = r2;
        r2 = y;
        oldb = beta;
        beta = r2.norm();
        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        const double gam = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
        cs = gbar / gam;
        sn = beta / gam;
        const double phi = cs * phibar;
        phibar *= sn;
        w1 = w2;
        w2 = w;
        w = (v - oldeps * w1 - delta * w2) / gam;
        res.x += phi * w;
        res.iterations = k;
        res.residual = phibar / bnorm;
        if (res.residual <= tol || beta == 0.0) {
            res.converged = true;
            break;
        }
    }
    return res;
}

/// Multilevel Strang circulant approximation of a Toeplitz stiffness on its
/// full index block, inverted through FFTs and restricted to the active points.
class CirculantPreconditioner {
public:
    explicit CirculantPreconditioner(const ToeplitzStiffness& op, double floor_rel = 1e-12) {
        const int dim = op.dim();
        std::vector<int> shape(dim);
        for (int a = 0; a < dim; ++a) shape[a] = static_cast<int>(op.level_sizes()[a]);
        fft_ = RealFft(shape);
        auto c = fft_.make_real();
        std::vector<long> lo(dim, 0), hi(dim), diff(dim);
        for (int a = 0; a < dim; ++a) hi[a] = shape[a] - 1;
        std::size_t lin = 0;
        detail::for_each_index(lo, hi, [&](const std::vector<long>& j) {
            for (int a = 0; a < dim; ++a) diff[a] = j[a] <= shape[a] / 2 ? j[a] : j[a] - shape[a];
            c[lin++] = op.kernel_at(diff.data());
        });
        auto cf = fft_.make_complex();
        fft_.forward(c.get(), cf.get());
        inv_.resize(fft_.complex_size());
        double top = 0.0;
        for (std::size_t i = 0; i < inv_.size(); ++i) top = std::max(top, std::abs(cf[i][0]));
        const double scale = static_cast<double>(fft_.real_size());
        for (std::size_t i = 0; i < inv_.size(); ++i) inv_[i] = 1.0 / (std::max(cf[i][0], floor_rel * top) * scale);
        pos_.resize(op.size());
        for (std::size_t i = 0; i < op.size(); ++i) {
            const long* k = op.active_index(i);
            std::size_t p = 0;
            for (int a = 0; a < dim; ++a) p = p * static_cast<std::size_t>(shape[a]) + static_cast<std::size_t>(k[a] - op.block_lo()[a]);
            pos_[i] = p;
        }
    }

    void apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
        auto x = fft_.make_real();
        auto xf = fft_.make_complex();
        std::fill(x.get(), x.get() + fft_.real_size(), 0.0);
        for (std::size_t i = 0; i < pos_.size(); ++i) x[pos_[i]] = r[static_cast<Eigen::Index>(i)];
        fft_.forward(x.get(), xf.get());
        for (std::size_t i = 0; i < inv_.size(); ++i) {
            xf[i][0] *= inv_[i];
            xf[i][1] *= inv_[i];
        }
        fft_.backward(xf.get(), x.get());
        z.resize(r.size());
        for (std::size_t i = 0; i < pos_.size(); ++i) z[static_cast<Eigen::Index>(i)] = x[pos_[i]];
    }

private:
    RealFft fft_;
    std::vector<double> inv_;
    std::vector<std::size_t> pos_;
};

namespace detail {

inline void check_rhs(std::size_t n, const Eigen::VectorXd& f) {
    if (static_cast<std::size_t>(f.size()) != n)
        throw UsageError("solve: right-hand side has length " + std::to_string(f.size()) + ", expected " +
                         std::to_string(n));
    if (!f.allFinite()) throw UsageError("solve: right-hand side is not finite");
}

/// f - A x accumulated in long double. The residual of a double solution is
/// then correct to working precision rather than polluted by its own rounding.
inline Eigen::VectorXd exact_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
    const Eigen::Index n = a.rows();
    std::vector<long double> acc(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) acc[static_cast<std::size_t>(i)] = f[i];
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const long double xj = x[j];
        const double* col = a.data() + j * n;
        for (Eigen::Index i = 0; i < n; ++i) acc[static_cast<std::size_t>(i)] -= col[i] * xj;
    }
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = static_cast<double>(acc[static_cast<std::size_t>(i)]);
    return r;
}

inline double relative_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
    const double fn = f.norm();
    const double rn = exact_residual(a, x, f).norm();
    return fn > 0.0 ? rn / fn : rn;
}

/// Bunch-Kaufman factorisation of a symmetric matrix (lower triangle).
struct SymmetricFactor {
    Eigen::MatrixXd lu;
    std::vector<lapack_int> ipiv;
    double anorm = 0.0;

    explicit SymmetricFactor(const Eigen::MatrixXd& a) : lu(a), ipiv(static_cast<std::size_t>(a.rows())) {
        const lapack_int n = static_cast<lapack_int>(a.rows());
        anorm = LAPACKE_dlansy(LAPACK_COL_MAJOR, '1', 'L', n, lu.data(), n);
        lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, lu.data(), n, ipiv.data());
        if (info > 0) throw SingularMatrixError("solve: exactly singular pivot at " + std::to_string(info));
        if (info < 0) throw NumericalError("solve: dsytrf argument error " + std::to_string(info));
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        Eigen::VectorXd x = b;
        const lapack_int n = static_cast<lapack_int>(lu.rows());
        lapack_int info = LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n, 1, lu.data(), n, ipiv.data(), x.data(), n);
        if (info != 0) throw NumericalError("solve: dsytrs failed");
        return x;
    }

    /// Reciprocal 1-norm condition estimate.
    double rcond() const {
        const lapack_int n = static_cast<lapack_int>(lu.rows());
        double rc = 0.0;
        LAPACKE_dsycon(LAPACK_COL_MAJOR, 'L', n, lu.data(), n, ipiv.data(), anorm, &rc);
        return rc;
    }
};

inline Eigen::VectorXd direct_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& f, const SolveOptions& opts,
                                    SolveReport& rep) {
    SymmetricFactor fac(a);
    if (fac.rcond() < std::numeric_limits<double>::epsilon())
        throw SingularMatrixError("solve: matrix is numerically singular (rcond " + sci(fac.rcond()) + ")");
    Eigen::VectorXd x = fac.solve(f);
    double res = relative_residual(a, x, f);
    // iterative refinement while it keeps helping
    for (int k = 0; k < opts.refinement_steps && res > 0.0; ++k) {
        Eigen::VectorXd y = x + fac.solve(exact_residual(a, x, f));
        double ry = relative_residual(a, y, f);
        if (!(ry < res)) break;
        x = y;
        res = ry;
    }
    rep.method = SolveMethod::Direct;
    rep.iterations = 0;
    rep.residual = res;
    if (!x.allFinite()) throw SingularMatrixError("solve: non-finite coefficients");
    if (res > opts.tol)
        throw ConvergenceError("solve: direct residual " + sci(res) + " exceeds tol " + sci(opts.tol), res);
    return x;
}

/// Restarted Krylov solve. `residual_op` (defaults to A) computes the true
/// residuals that drive the restarts and the final certificate.
inline Eigen::VectorXd krylov_solve(const LinearOp& A, const Eigen::VectorXd& f, const SolveOptions& opts,
                                    const LinearOp* precond, SolveReport& rep, const LinearOp* residual_op = nullptr) {
    const LinearOp& R = residual_op ? *residual_op : A;
    const int max_iter = opts.max_iter > 0 ? opts.max_iter : 10 * static_cast<int>(f.size()) + 10;
    const double fn = f.norm();
    rep.method = SolveMethod::Cg;
    rep.iterations = 0;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(f.size()), ax(f.size());
    Eigen::VectorXd r = f;
    double res = 1.0;
    // The recursive CG residual drifts from the true one near 1e-13, so the
    // solve restarts on the true residual a few times.
    for (int restart = 0; restart < 4 && rep.iterations < max_iter; ++restart) {
        const double rn = r.norm();
        if (rn == 0.0) break;
        const double inner_tol = std::max(0.5 * opts.tol * fn / rn, 1e-15);
        auto kr = conjugate_gradient(A, r, inner_tol, max_iter - rep.iterations, precond);
        rep.iterations += kr.iterations;
        if (kr.negative_curvature) {
            kr = minres(A, r, inner_tol, max_iter - rep.iterations);
            rep.minres_fallback = true;
            rep.iterations += kr.iterations;
        }
        x += kr.x;
        R(x, ax);
        r = f - ax;
        res = fn > 0.0 ? r.norm() / fn : r.norm();
        if (res <= opts.tol) break;
    }
    rep.residual = res;
    if (!x.allFinite()) throw NumericalError("solve: Krylov iterate is not finite");
    if (res > opts.tol)
        throw ConvergenceError("solve: Krylov solver stagnated at relative residual " + sci(res), res);
    return x;
}

}  // namespace detail

/// 2-norm condition number of a symmetric matrix: all |eigenvalues| (equal to
/// the singular values) for exact mode; Lanczos on A and on A^{-1} for estimate.
enum class ConditionMode { ExactSvd, Estimate };

namespace detail {

/// Largest |Ritz value| of a symmetric operator by Lanczos with full
/// reorthogonalisation, stopped once it changes by less than rel_tol.
inline double lanczos_extreme(const LinearOp& A, Eigen::Index n, double rel_tol, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXd q(n);
    for (auto& v : q) v = nd(rng);
    q.normalize();
    const int kmax = static_cast<int>(std::min<Eigen::Index>(n, 300));
    Eigen::MatrixXd Q(n, kmax);
    std::vector<double> alpha, beta;
    Eigen::VectorXd w(n);
    double prev = 0.0, est = 0.0;
    for (int k = 0; k < kmax; ++k) {
        Q.col(k) = q;
        A(q, w);
        const double a = q.dot(w);
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
        const double b = w.norm();
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k + 1, k + 1);
        for (int i = 0; i <= k; ++i) {
            T(i, i) = alpha[i];
            if (i < k) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
        est = es.eigenvalues().cwiseAbs().maxCoeff();
        if (k > 2 && std::abs(est - prev) <= rel_tol * est) break;
        if (b <= 1e-14 * std::abs(est)) break;  // invariant subspace
        prev = est;
        beta.push_back(b);
        q = w / b;
    }
    return est;
}

}  // namespace detail

inline double condition_number(const Eigen::MatrixXd& a, ConditionMode mode = ConditionMode::ExactSvd) {
    const Eigen::Index n = a.rows();
    if (n == 0) throw UsageError("condition_number: empty matrix");
    if (mode == ConditionMode::ExactSvd) {
        if (n > 4096) throw UsageError("condition_number: exact mode limited to N <= 4096");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
        auto ev = es.eigenvalues().cwiseAbs();
        const double lo = ev.minCoeff(), hi = ev.maxCoeff();
        if (lo < 1e-300) throw SingularMatrixError("condition_number: smallest singular value below 1e-300");
        return hi / lo;
    }
    LinearOp op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = a * x; };
    detail::SymmetricFactor fac(a);
    LinearOp inv = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = fac.solve(x); };
    const double smax = detail::lanczos_extreme(op, n, 1e-9, 1234);
    const double sinv = detail::lanczos_extreme(inv, n, 1e-9, 4321);
    if (!(sinv < 1e300)) throw SingularMatrixError("condition_number: smallest singular value below 1e-300");
    return smax * sinv;
}

inline double condition_number(const DenseStiffness& s, ConditionMode mode = ConditionMode::ExactSvd) {
    return condition_number(s.a, mode);
}

inline double condition_number(const ToeplitzStiffness& s, ConditionMode mode = ConditionMode::ExactSvd) {
    if (mode == ConditionMode::ExactSvd || s.size() <= 4096) return condition_number(s.to_dense(), mode);
    // large case: Lanczos on A through FFT matvecs, A^{-1} through CG solves
    LinearOp op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        y.resize(x.size());
        s.matvec(x.data(), y.data());
    };
    LinearOp inv = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        auto r = conjugate_gradient(op, x, 1e-12, 20 * static_cast<int>(x.size()));
        if (!r.converged) throw ConvergenceError("condition_number: inner CG did not converge", r.residual);
        y = r.x;
    };
    const auto n = static_cast<Eigen::Index>(s.size());
    return detail::lanczos_extreme(op, n, 1e-9, 1234) * detail::lanczos_extreme(inv, n, 1e-9, 4321);
}

/// Dense path: symmetric-indefinite (Bunch-Kaufman) factorisation with
/// iterative refinement; Cg runs conjugate gradients on the dense matrix.
inline SolveResult solve(const DenseStiffness& s, const Eigen::VectorXd& f, const SolveOptions& opts = {}) {
    detail::check_rhs(s.n(), f);
    SolveResult out;
    out.solution.grid = s.grid;
    out.solution.eps = s.eps;
    const auto t0 = std::chrono::steady_clock::now();
    if (opts.method == SolveMethod::Cg) {
        LinearOp op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = s.a * x; };
        out.solution.lambda = detail::krylov_solve(op, f, opts, nullptr, out.report);
    } else {
        out.solution.lambda = detail::direct_solve(s.a, f, opts, out.report);
    }
    out.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opts.compute_condition) out.report.condition = condition_number(s.a, s.n() <= 4096 ? ConditionMode::ExactSvd : ConditionMode::Estimate);
    return out;
}

/// Toeplitz path: CG with FFT matvecs (optionally circulant-preconditioned);
/// Direct and small Auto problems go through the reconstructed dense matrix.
inline SolveResult solve(const ToeplitzStiffness& s, const Eigen::VectorXd& f, const SolveOptions& opts = {}) {
    detail::check_rhs(s.size(), f);
    SolveResult out;
    out.solution.grid = s.grid();
    out.solution.eps = s.eps();
    const bool direct = opts.method == SolveMethod::Direct ||
                        (opts.method == SolveMethod::Auto && s.size() <= opts.direct_max_n);
    std::optional<Eigen::MatrixXd> dense;
    if (direct) {
        dense = s.to_dense();
        const auto t0 = std::chrono::steady_clock::now();
        out.solution.lambda = detail::direct_solve(*dense, f, opts, out.report);
        out.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
        LinearOp op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
            y.resize(x.size());
            s.matvec(x.data(), y.data());
        };
        std::optional<CirculantPreconditioner> pc;
        LinearOp pop;
        if (opts.circulant_preconditioner) {
            pc.emplace(s);
            pop = [&](const Eigen::VectorXd& r, Eigen::VectorXd& z) { pc->apply(r, z); };
        }
        LinearOp dop;
        if (s.size() <= 4096) {
            // certificate with the dense operator when it is affordable
            dense = s.to_dense();
            dop = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = *dense * x; };
        }
        const auto t0 = std::chrono::steady_clock::now();
        out.solution.lambda = detail::krylov_solve(op, f, opts, pc ? &pop : nullptr, out.report, dense ? &dop : nullptr);
        out.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    if (opts.compute_condition)
        out.report.condition = dense ? condition_number(*dense) : condition_number(s, ConditionMode::Estimate);
    return out;
}

/// Point evaluation of the ansatz; Gaussian terms with eps^2 r^2 > 745 are skipped.
inline double evaluate(const RbfSolution& sol, const double* x) {
    const auto& g = sol.grid;
    const double e2 = sol.eps * sol.eps;
    double sum = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        double r2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            const double d = x[a] - g.coord(k, a);
            r2 += d * d;
        }
        const double t = e2 * r2;
        if (t > 745.0) continue;
        sum += sol.lambda[static_cast<Eigen::Index>(k)] * std::exp(-t);
    }
    return sum;
}

inline Eigen::VectorXd evaluate(const RbfSolution& sol, const PointSet& pts) {
    if (pts.dim != sol.grid.dim) throw UsageError("evaluate: point dimension differs from the grid");
    Eigen::VectorXd out(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) out[static_cast<Eigen::Index>(i)] = evaluate(sol, pts[i]);
    return out;
}

/// Separable evaluation on a tensor evaluation grid: the Gaussian factors per
/// axis, contracted one axis at a time (1-D and 2-D grids; others fall back
/// to point evaluation).
inline Eigen::VectorXd evaluate(const RbfSolution& sol, const EvalGrid& eg) {
    const auto& g = sol.grid;
    if (eg.points.dim != g.dim) throw UsageError("evaluate: grid dimension differs from the solution");
    if (g.dim > 2) return evaluate(sol, eg.points);
    const double e2 = sol.eps * sol.eps;
    auto factors = [&](int a) {
        const auto& ax = eg.axes[a];
        Eigen::MatrixXd E(static_cast<Eigen::Index>(ax.size()), g.extents[a]);
        for (Eigen::Index i = 0; i < E.rows(); ++i)
            for (Eigen::Index k = 0; k < E.cols(); ++k) {
                const double c = g.offset[a] + g.h * static_cast<double>(g.block_lo[a] + k);
                const double t = e2 * (ax[i] - c) * (ax[i] - c);
                E(i, k) = t > 745.0 ? 0.0 : std::exp(-t);
            }
        return E;
    };
    Eigen::VectorXd out(static_cast<Eigen::Index>(eg.points.size()));
    if (g.dim == 1) {
        Eigen::VectorXd block = Eigen::VectorXd::Zero(g.extents[0]);
        for (std::size_t k = 0; k < g.size(); ++k) block[static_cast<Eigen::Index>(g.block_pos[k])] = sol.lambda[static_cast<Eigen::Index>(k)];
        Eigen::VectorXd full = factors(0) * block;
        for (std::size_t i = 0; i < eg.tensor_pos.size(); ++i) out[static_cast<Eigen::Index>(i)] = full[static_cast<Eigen::Index>(eg.tensor_pos[i])];
        return out;
    }
    // block coefficients, row-major (axis 0 rows)
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(g.extents[0], g.extents[1]);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const std::size_t p = g.block_pos[k];
        L(static_cast<Eigen::Index>(p / static_cast<std::size_t>(g.extents[1])),
          static_cast<Eigen::Index>(p % static_cast<std::size_t>(g.extents[1]))) = sol.lambda[static_cast<Eigen::Index>(k)];
    }
    Eigen::MatrixXd U = factors(0) * L * factors(1).transpose();
    const std::size_t n1 = eg.axes[1].size();
    for (std::size_t i = 0; i < eg.tensor_pos.size(); ++i) {
        const std::size_t p = eg.tensor_pos[i];
        out[static_cast<Eigen::Index>(i)] = U(static_cast<Eigen::Index>(p / n1), static_cast<Eigen::Index>(p % n1));
    }
    return out;
}

inline double rms(const Eigen::VectorXd& e) { return e.size() ? std::sqrt(e.squaredNorm() / static_cast<double>(e.size())) : 0.0; }

/// Discrete RMS error over evaluation_grid(domain, h, refine).
inline double rms_error(const RbfSolution& sol, const ScalarField& exact, const Domain& dom, int refine) {
    auto eg = evaluation_grid(dom, sol.grid, refine);
    Eigen::VectorXd uh = evaluate(sol, eg);
    for (std::size_t i = 0; i < eg.points.size(); ++i) uh[static_cast<Eigen::Index>(i)] -= exact(eg.points[i]);
    return rms(uh);
}

}  // namespace frp

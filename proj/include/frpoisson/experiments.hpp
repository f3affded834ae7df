#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "analysis.hpp"
#include "assembly.hpp"
#include "boundary.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "problems.hpp"
#include "solver.hpp"

namespace frp {

/// Everything one batch run needs; filled by the command-line front end.
struct ExperimentSpec {
    std::string problem = "ex1";
    double s = 4.0;  ///< ex1 exponent
    std::vector<double> alphas{1.0};
    std::vector<double> c_stars{0.5};
    std::vector<int> ns;     ///< points per axis; h = (axis extent) / (n + 1)
    std::vector<double> hs;  ///< used when ns is empty
    std::string domain;      ///< empty: the problem's own domain
    int refine = 8;
    double tol = 1e-13;
    SolveMethod solver = SolveMethod::Auto;
    bool preconditioner = false;
    bool condition = true;
    bool deterministic = false;

    // saturation
    std::vector<double> gammas{0.36, 0.25};
    std::vector<double> xs{0.25, 0.5};
    std::vector<int> betas{0, 2};
    int alpha_max = 8;

    // symbols
    int dim = 1;
    int points = 101;

    // bench
    int repeats = 5;
};

/// Header plus rows of already formatted cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// 17 significant digits, so values survive a text round trip.
inline std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_number(long v) { return std::to_string(v); }
inline std::string csv_number(int v) { return std::to_string(v); }
inline std::string csv_number(std::size_t v) { return std::to_string(v); }

inline void write_csv(const CsvTable& t, std::ostream& os) {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
}

/// "interval:a,b", "box:a0,b0,a1,b1[,...]" or "disk:c0,c1,r".
inline Domain parse_domain(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError("domain '" + text + "': expected kind:numbers");
    const std::string kind = text.substr(0, colon);
    std::vector<double> v;
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("domain '" + text + "': bad number '" + item + "'");
        }
    }
    if (kind == "interval") {
        if (v.size() != 2) throw UsageError("domain interval needs two numbers");
        return Domain::interval(v[0], v[1]);
    }
    if (kind == "box") {
        if (v.size() < 2 || v.size() % 2) throw UsageError("domain box needs lo,hi pairs");
        std::vector<std::pair<double, double>> axes;
        for (std::size_t i = 0; i < v.size(); i += 2) axes.emplace_back(v[i], v[i + 1]);
        return Domain::box(axes);
    }
    if (kind == "disk") {
        if (v.size() < 2) throw UsageError("domain disk needs center coordinates and a radius");
        const double r = v.back();
        v.pop_back();
        return Domain::disk(v, r);
    }
    throw UsageError("domain kind '" + kind + "' (expected interval, box or disk)");
}

/// Problem with the domain override applied. ex1/ex2 have compactly supported
/// solutions tied to their own domain, so only ex3-ex5 accept another one.
inline ProblemSpec experiment_problem(const ExperimentSpec& spec, double alpha) {
    ProblemSpec p = make_problem(spec.problem, alpha, spec.s);
    if (spec.domain.empty()) return p;
    const Domain d = parse_domain(spec.domain);
    if (p.id == ProblemId::Ex1 || p.id == ProblemId::Ex2)
        throw UsageError(std::string(to_string(p.id)) + ": the domain is fixed by the exact solution");
    if (d.dim() != p.dim()) throw UsageError("domain dimension differs from the problem's");
    if (!p.homogeneous && d.kind() == DomainKind::Disk)
        throw UsageError("the boundary collar is only implemented for intervals and boxes");
    p.domain = d;
    return p;
}

/// Lattice spacing giving n points across the first axis of the domain.
inline double spacing_for_points(const Domain& d, int n) {
    if (n < 1) throw UsageError("--n values must be positive");
    return (d.upper()[0] - d.lower()[0]) / (n + 1);
}

inline std::vector<double> experiment_spacings(const ExperimentSpec& spec, const Domain& d) {
    std::vector<double> hs;
    if (!spec.ns.empty()) {
        for (int n : spec.ns) hs.push_back(spacing_for_points(d, n));
    } else {
        for (double h : spec.hs) {
            if (!(h > 0.0)) throw UsageError("--h values must be positive");
            hs.push_back(h);
        }
    }
    if (hs.empty()) throw UsageError("no grid given: pass --n or --h");
    return hs;
}

struct SolveRecord {
    std::size_t n = 0;
    double h = 0.0, c_star = 0.0, alpha = 0.0;
    double rms = 0.0;
    double condition = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    double wall_time = 0.0;
    double fit_rms = std::numeric_limits<double>::quiet_NaN();
};

/// One solve of a catalogue problem on the lattice of spacing h, with the RMS
/// error over evaluation_grid(domain, h, refine).
inline SolveRecord solve_problem(const ProblemSpec& p, double h, double c_star, const ExperimentSpec& spec) {
    if (!(c_star > 0.0)) throw UsageError("c* must be positive");
    const LatticeGrid g = generate_centers(p.domain, h);
    SolveOptions opts;
    opts.method = spec.solver;
    opts.tol = spec.tol;
    opts.compute_condition = spec.condition;
    opts.circulant_preconditioner = spec.preconditioner;
    SolveRecord r{g.size(), h, c_star, p.alpha};
    const FracOrder o{p.alpha, p.dim()};
    SolveReport rep;
    if (p.homogeneous) {
        auto pts = g.points();
        Eigen::VectorXd f(static_cast<Eigen::Index>(g.size()));
        for (std::size_t i = 0; i < g.size(); ++i) f[static_cast<Eigen::Index>(i)] = p.f(pts[i]);
        const bool dense = spec.solver == SolveMethod::Direct || g.size() <= opts.direct_max_n;
        SolveResult res = dense ? solve(assemble_dense(g, o, c_star / h), f, opts)
                                : solve(assemble_toeplitz(g, o, c_star / h), f, opts);
        rep = res.report;
        r.rms = rms_error(res.solution, p.u_exact, p.domain, spec.refine);
    } else {
        const BoundaryLayer layer{p.domain, p.collar.width, p.collar.fit_h, p.collar.fit_eps};
        CorrectionQuad q;
        q.decay_p = p.g_decay_p;
        auto res = solve_nonhomogeneous(p.f, p.g, p.alpha, layer, q, g, c_star, opts);
        rep = res.report;
        r.fit_rms = res.fit.fit_rms;
        r.rms = rms_error(res, p.u_exact, p.domain, spec.refine);
    }
    if (rep.condition) r.condition = *rep.condition;
    r.iterations = rep.iterations;
    r.wall_time = spec.deterministic ? 0.0 : rep.wall_time;
    return r;
}

inline CsvTable run_solve(const ExperimentSpec& spec) {
    if (spec.alphas.empty() || spec.c_stars.empty()) throw UsageError("solve: alpha and c* lists must be nonempty");
    CsvTable t{{"N", "h", "c_star", "alpha", "rms_error", "condition", "iterations", "wall_time"}, {}};
    for (double alpha : spec.alphas) {
        const ProblemSpec p = experiment_problem(spec, alpha);
        const auto hs = experiment_spacings(spec, p.domain);
        for (double c : spec.c_stars)
            for (double h : hs) {
                const SolveRecord r = solve_problem(p, h, c, spec);
                t.rows.push_back({csv_number(r.n), csv_number(r.h), csv_number(r.c_star), csv_number(r.alpha),
                                  csv_number(r.rms), csv_number(r.condition), csv_number(r.iterations),
                                  csv_number(r.wall_time)});
            }
    }
    return t;
}

/// RMS error against N for each c*, one alpha.
inline CsvTable run_sweep_cstar(const ExperimentSpec& spec) {
    if (spec.alphas.size() != 1) throw UsageError("sweep: give exactly one alpha");
    if (spec.c_stars.empty()) throw UsageError("sweep: c* list must be nonempty");
    ExperimentSpec s = spec;
    s.condition = false;
    const ProblemSpec p = experiment_problem(s, spec.alphas[0]);
    const auto hs = experiment_spacings(s, p.domain);
    CsvTable t{{"c_star", "N", "rms"}, {}};
    for (double c : s.c_stars)
        for (double h : hs) {
            const SolveRecord r = solve_problem(p, h, c, s);
            t.rows.push_back({csv_number(c), csv_number(r.n), csv_number(r.rms)});
        }
    return t;
}

/// |a_alpha^{(beta)}(x)| / alpha! for every (gamma, x, beta) combination, long format.
inline CsvTable run_saturation(const ExperimentSpec& spec) {
    if (spec.gammas.empty() || spec.xs.empty() || spec.betas.empty())
        throw UsageError("saturation: gamma, x and beta lists must be nonempty");
    CsvTable t{{"gamma", "x", "beta", "alpha_index", "value"}, {}};
    for (double g : spec.gammas)
        for (double x : spec.xs)
            for (int b : spec.betas) {
                auto tab = saturation_coeffs({g, x, b, spec.alpha_max});
                for (int a = 0; a <= spec.alpha_max; ++a)
                    t.rows.push_back({csv_number(g), csv_number(x), csv_number(b), csv_number(a), csv_number(tab.coeff[a])});
            }
    return t;
}

/// The same coefficients split into one (alpha_index, value) table per (gamma, x, beta).
inline std::vector<std::pair<std::string, CsvTable>> saturation_tables(const ExperimentSpec& spec) {
    std::vector<std::pair<std::string, CsvTable>> out;
    const CsvTable all = run_saturation(spec);
    for (std::size_t i = 0; i < all.rows.size(); ++i) {
        const auto& r = all.rows[i];
        const std::string name = "saturation_gamma" + r[0] + "_x" + r[1] + "_beta" + r[2] + ".csv";
        if (out.empty() || out.back().first != name) out.push_back({name, CsvTable{{"alpha_index", "value"}, {}}});
        out.back().second.rows.push_back({r[3], r[4]});
    }
    return out;
}

/// E_C, E_G and E_C - (gamma/pi)^{d/2} E_G on an n-point-per-axis grid in (-pi, pi)^d,
/// gamma = (c*)^2, h the first --h value (default 0.1).
inline CsvTable run_symbols(const ExperimentSpec& spec) {
    if (spec.dim < 1 || spec.dim > 3) throw UsageError("symbols: dim must be 1, 2 or 3");
    if (spec.points < 2) throw UsageError("symbols: need at least two grid points");
    if (spec.alphas.empty() || spec.c_stars.empty()) throw UsageError("symbols: alpha and c* lists must be nonempty");
    const double h = spec.hs.empty() ? 0.1 : spec.hs[0];
    CsvTable t;
    t.header = {"alpha", "gamma"};
    for (int a = 0; a < spec.dim; ++a) t.header.push_back("xi_" + std::to_string(a + 1));
    for (const char* c : {"E_C", "E_G", "gap"}) t.header.push_back(c);
    const double lo = -std::numbers::pi * (1.0 - 1e-9), step = -2.0 * lo / (spec.points - 1);
    for (double alpha : spec.alphas)
        for (double c : spec.c_stars) {
            const double gamma = c * c;
            const double c0 = std::pow(gamma / std::numbers::pi, 0.5 * spec.dim);
            std::vector<int> k(spec.dim, 0);
            SymbolQuery q{h, gamma, alpha, spec.dim, std::vector<double>(spec.dim), 0};
            while (true) {
                for (int a = 0; a < spec.dim; ++a) q.xi[a] = lo + step * k[a];
                const double ec = symbol_collocation(q), eg = symbol_galerkin(q);
                std::vector<std::string> row{csv_number(alpha), csv_number(gamma)};
                for (double x : q.xi) row.push_back(csv_number(x));
                row.push_back(csv_number(ec));
                row.push_back(csv_number(eg));
                row.push_back(csv_number(ec - c0 * eg));
                t.rows.push_back(std::move(row));
                int a = spec.dim - 1;
                while (a >= 0 && ++k[a] >= spec.points) k[a] = 0, --a;
                if (a < 0) break;
            }
        }
    return t;
}

/// Dense against FFT matvec time (best of `repeats`) for each grid.
inline CsvTable run_bench(const ExperimentSpec& spec) {
    if (spec.alphas.empty() || spec.c_stars.empty()) throw UsageError("bench: alpha and c* lists must be nonempty");
    if (spec.repeats < 1) throw UsageError("bench: repeats must be >= 1");
    CsvTable t{{"N", "h", "dense_matvec_time", "fft_matvec_time", "max_rel_diff"}, {}};
    const double alpha = spec.alphas[0], c = spec.c_stars[0];
    const ProblemSpec p = experiment_problem(spec, alpha);
    using clock = std::chrono::steady_clock;
    for (double h : experiment_spacings(spec, p.domain)) {
        const LatticeGrid g = generate_centers(p.domain, h);
        const FracOrder o{alpha, p.dim()};
        const auto dense = assemble_dense(g, o, c / h);
        const auto fft = assemble_toeplitz(g, o, c / h);
        // fixed pseudo-random probe so the diff column is reproducible
        Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::sin(1.0 + 0.7 * static_cast<double>(i));
        Eigen::VectorXd yd, yf;
        double td = std::numeric_limits<double>::infinity(), tf = td;
        for (int r = 0; r < spec.repeats; ++r) {
            auto t0 = clock::now();
            yd.noalias() = dense.a * v;
            td = std::min(td, std::chrono::duration<double>(clock::now() - t0).count());
            t0 = clock::now();
            yf = fft.matvec(v);
            tf = std::min(tf, std::chrono::duration<double>(clock::now() - t0).count());
        }
        const double diff = (yd - yf).cwiseAbs().maxCoeff() / yd.cwiseAbs().maxCoeff();
        if (spec.deterministic) td = tf = 0.0;
        t.rows.push_back({csv_number(g.size()), csv_number(h), csv_number(td), csv_number(tf), csv_number(diff)});
    }
    return t;
}

}  // namespace frp

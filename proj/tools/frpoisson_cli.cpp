// Batch runner: solve | sweep | saturation | symbols | bench, CSV on stdout or --out.
// Exit codes: 0 success, 2 usage error, 1 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "frpoisson/experiments.hpp"

namespace {

/// Default grid lists when neither --n nor --h is given.
void apply_grid_defaults(frp::ExperimentSpec& s, const std::string& cmd) {
    if (!s.ns.empty() || !s.hs.empty()) return;
    if (cmd == "symbols") return;
    if (cmd == "bench") {
        s.hs = {1.0 / 8, 1.0 / 16, 1.0 / 32};
        return;
    }
    const auto id = frp::parse_problem_id(s.problem);
    if (id == frp::ProblemId::Ex2) s.hs = {1.0 / 4, 1.0 / 8, 1.0 / 16};
    else if (id == frp::ProblemId::Ex1) s.ns = {7, 15, 31, 63, 127};
    else s.ns = {7, 15};
}

void open_output(const std::string& path, std::ofstream& file) {
    file.open(path);
    if (!file) throw frp::UsageError("cannot write output file '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian RBF collocation for the fractional Poisson equation"};
    app.require_subcommand(1, 1);
    // -h would read like the lattice spacing flag --h
    app.set_help_flag("--help", "print this help and exit");
    app.set_config("--config", "", "flat key = value file; command-line flags take precedence");

    frp::ExperimentSpec s;
    std::string solver = "auto", out;
    bool no_condition = false;

    app.add_option("--problem", s.problem, "ex1 .. ex5")->capture_default_str();
    app.add_option("--s", s.s, "exponent of the ex1 solution")->capture_default_str();
    app.add_option("--alpha", s.alphas, "fractional order(s), comma separated")->delimiter(',')->capture_default_str();
    app.add_option("--cstar", s.c_stars, "shape coupling c* = eps h, comma separated")->delimiter(',')->capture_default_str();
    auto* nopt = app.add_option("--n", s.ns, "points per axis, comma separated")->delimiter(',');
    auto* hopt = app.add_option("--h", s.hs, "lattice spacings, comma separated")->delimiter(',');
    nopt->excludes(hopt);
    app.add_option("--domain", s.domain, "interval:a,b | box:a0,b0,a1,b1 | disk:c0,c1,r");
    app.add_option("--refine", s.refine, "evaluation grid refinement for the RMS error")->capture_default_str();
    app.add_option("--tol", s.tol, "solver tolerance")->capture_default_str();
    app.add_option("--solver", solver, "direct | cg | auto")
        ->check(CLI::IsMember({"direct", "cg", "auto"}))
        ->capture_default_str();
    app.add_flag("--precond", s.preconditioner, "circulant preconditioner for cg");
    app.add_flag("--no-condition", no_condition, "skip the condition number");
    app.add_option("--out", out, "output CSV (directory for per-table saturation files); default stdout");
    app.add_flag("--deterministic", s.deterministic, "report zero wall times so repeated runs are byte-identical");
    app.add_option("--gamma", s.gammas, "saturation: gamma values")->delimiter(',');
    app.add_option("--x", s.xs, "saturation: points in lattice units")->delimiter(',');
    app.add_option("--beta", s.betas, "saturation: beta values")->delimiter(',');
    app.add_option("--alpha-max", s.alpha_max, "saturation: highest alpha index")->capture_default_str();
    app.add_option("--dim", s.dim, "symbols: dimension")->capture_default_str();
    app.add_option("--points", s.points, "symbols: grid points per axis")->capture_default_str();
    app.add_option("--repeats", s.repeats, "bench: timing repeats")->capture_default_str();

    std::map<std::string, CLI::App*> cmds;
    for (const char* name : {"solve", "sweep", "saturation", "symbols", "bench"}) {
        auto* c = app.add_subcommand(name);
        c->fallthrough();
        c->set_help_flag("--help", "print this help and exit");
        cmds[name] = c;
    }
    cmds["solve"]->description("RMS error, condition number, iterations and solve time per grid");
    cmds["sweep"]->description("RMS error against N for each c* (defaults to c* = 0.5, 0.65, 0.8)");
    cmds["saturation"]->description("saturation coefficients |a_alpha^(beta)(x)|/alpha!");
    cmds["symbols"]->description("Fourier symbols E_C, E_G and the comparison gap");
    cmds["bench"]->description("dense against FFT matvec time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        std::string cmd;
        for (auto& [name, c] : cmds)
            if (c->parsed()) cmd = name;
        s.solver = solver == "direct" ? frp::SolveMethod::Direct : solver == "cg" ? frp::SolveMethod::Cg : frp::SolveMethod::Auto;
        s.condition = !no_condition;
        // counts values from the command line and from the config file alike
        if (cmd == "sweep" && app.get_option("--cstar")->count() == 0) s.c_stars = {0.5, 0.65, 0.8};
        apply_grid_defaults(s, cmd);

        if (cmd == "saturation" && !out.empty() && std::filesystem::is_directory(out)) {
            for (const auto& [name, table] : frp::saturation_tables(s)) {
                std::ofstream f;
                open_output((std::filesystem::path(out) / name).string(), f);
                frp::write_csv(table, f);
            }
            return 0;
        }
        if (!out.empty()) {
            const auto parent = std::filesystem::absolute(out).parent_path();
            if (!std::filesystem::is_directory(parent))
                throw frp::UsageError("output directory '" + parent.string() + "' does not exist");
        }
        frp::CsvTable t;
        if (cmd == "solve") t = frp::run_solve(s);
        else if (cmd == "sweep") t = frp::run_sweep_cstar(s);
        else if (cmd == "saturation") t = frp::run_saturation(s);
        else if (cmd == "symbols") t = frp::run_symbols(s);
        else t = frp::run_bench(s);

        std::ofstream file;
        if (!out.empty()) open_output(out, file);
        std::ostream& os = out.empty() ? std::cout : file;
        frp::write_csv(t, os);
        os.flush();
        if (!os) throw frp::NumericalError("failed writing the CSV output");
        return 0;
    } catch (const frp::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const frp::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

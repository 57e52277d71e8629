#pragma once

#include <shiftdg/analysis.hpp>
#include <shiftdg/errors.hpp>
#include <shiftdg/mesh.hpp>
#include <shiftdg/stationary.hpp>
#include <shiftdg/timedg.hpp>
#include <shiftdg/weights.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace shiftdg::cli {

enum ExitCode : int { ok = 0, config_error = 1, numerical_error = 2 };

struct RunConfig {
    std::string command;
    std::string family = "shishkin";
    int cells = 64;
    double grading = 0.5;
    double sigma = 0.0; ///< 0 means k + 1
    double alpha = kExampleAlpha;
    double gamma = 1.0;
    double epsilon = 1e-4;
    int k = 0; ///< 0 means q + 1
    int q = 0;
    std::string weight = "energy";
    std::string problem = "homogeneous";
    double T = 1.0;
    int slabs = 0; ///< 0 means N / 4
    int quad_points = 0;
    bool resolve_layers = false;
    std::string out;
    std::string csv;
    int per_cell = 0;
    int times = 11;
    int samples = 1001;
    int table = 0;
    std::string study = "parabolic";
    std::string layer = "left";
    std::vector<int> cell_list;
    std::vector<double> grading_list;
    int threads = 1;

    // set by the parser: which options were given explicitly
    bool family_given = false;
    bool epsilon_given = false;
    bool k_given = false;
    bool q_given = false;
    bool weight_given = false;

    [[nodiscard]] int degree() const { return k > 0 ? k : q + 1; }

    [[nodiscard]] MeshConfig mesh_config() const
    {
        MeshConfig m;
        m.family = parse_mesh_family(family);
        m.cells = cells;
        m.grading = grading;
        m.sigma = sigma > 0.0 ? sigma : degree() + 1.0;
        m.alpha = alpha;
        m.epsilon = epsilon;
        return m;
    }
};

inline const std::vector<std::string>& commands()
{
    static const std::vector<std::string> names{"mesh", "validate-weight", "solve-stationary", "solve", "study", "example"};
    return names;
}

namespace detail {

struct Parser {
    CLI::App app{"Layer-adapted FEM and dG(q) time stepping for reaction-diffusion problems with a unit shift", "shiftdg"};
    RunConfig cfg;
    std::vector<CLI::App*> subs;
    CLI::Option* family = nullptr;
    CLI::Option* epsilon = nullptr;
    CLI::Option* k = nullptr;
    CLI::Option* q = nullptr;
    CLI::Option* weight = nullptr;

    Parser()
    {
        app.set_config("--config", "", "flat key = value file; command-line options override it");
        app.allow_config_extras(CLI::config_extras_mode::error);
        app.require_subcommand(1);
        app.fallthrough();

        family = app.add_option("--family", cfg.family, "shishkin | bakhvalov_s | duran");
        app.add_option("--N,--cells", cfg.cells, "cells of an S-type mesh");
        app.add_option("--H,--grading", cfg.grading, "Duran grading parameter");
        app.add_option("--sigma", cfg.sigma, "S-type transition parameter (default k + 1)");
        app.add_option("--alpha", cfg.alpha, "lower bound sqrt(a) >= alpha");
        app.add_option("--gamma", cfg.gamma, "alpha^2 - max|b| >= gamma");
        epsilon = app.add_option("--epsilon", cfg.epsilon, "perturbation parameter");
        k = app.add_option("--k", cfg.k, "spatial degree (default q + 1)");
        q = app.add_option("--q", cfg.q, "temporal degree");
        weight = app.add_option("--weight", cfg.weight, "energy | balanced");
        app.add_option("--problem", cfg.problem, "homogeneous | quadratic | ramp | manufactured_sin");
        app.add_option("--T", cfg.T, "final time");
        app.add_option("--slabs", cfg.slabs, "time slabs (default N / 4)");
        app.add_option("--quad-points", cfg.quad_points, "Gauss points per cell (default k + 2)");
        app.add_flag("--resolve-layers", cfg.resolve_layers, "split cells on the eps scale in assembly");
        app.add_option("--out", cfg.out, "output file (default stdout)");
        app.add_option("--csv", cfg.csv, "study: CSV report file");
        app.add_option("--per-cell", cfg.per_cell, "extra uniform sample points per cell");
        app.add_option("--times", cfg.times, "uniform sample times in [0, T]");
        app.add_option("--samples", cfg.samples, "validate-weight: uniform samples");
        app.add_option("--table", cfg.table, "study: preset 1, 2 or 3");
        app.add_option("--study", cfg.study, "interpolation | stationary | parabolic");
        app.add_option("--layer", cfg.layer, "interpolation study: left | interior | right | smooth");
        app.add_option("--cell-list", cfg.cell_list, "study: N per row")->delimiter(',');
        app.add_option("--grading-list", cfg.grading_list, "study: H per row (Duran)")->delimiter(',');
        app.add_option("--threads", cfg.threads, "study: worker threads");

        subs.push_back(app.add_subcommand("mesh", "node CSV i,x_i"));
        subs.push_back(app.add_subcommand("validate-weight", "check weight admissibility"));
        subs.push_back(app.add_subcommand("solve-stationary", "stationary problem at t = T: field CSV x,u(x)"));
        subs.push_back(app.add_subcommand("solve", "dG(q) solve: CSV t,x,u"));
        subs.push_back(app.add_subcommand("study", "convergence study table"));
        subs.push_back(app.add_subcommand("example", "built-in example: CSV t,x,u"));
        for (CLI::App* s : subs) {
            s->fallthrough();
        }
    }

    void finish()
    {
        for (CLI::App* s : subs) {
            if (s->parsed()) {
                cfg.command = s->get_name();
            }
        }
        cfg.family_given = family->count() > 0;
        cfg.epsilon_given = epsilon->count() > 0;
        cfg.k_given = k->count() > 0;
        cfg.q_given = q->count() > 0;
        cfg.weight_given = weight->count() > 0;
    }
};

} // namespace detail

/// Parse argv into a RunConfig; throws InvalidConfig on any parse error.
inline RunConfig parse_run_config(const std::vector<std::string>& args)
{
    detail::Parser p;
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        p.app.parse(rev);
    } catch (const CLI::ParseError& e) {
        throw InvalidConfig(e.what());
    }
    p.finish();
    return p.cfg;
}

namespace detail {

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : os_(&fallback)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) {
                throw InvalidConfig("cannot open '" + path + "' for writing");
            }
            os_ = &file_;
        }
    }
    std::ostream& operator*() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

inline std::vector<double> sample_times(double t_end, int count)
{
    if (count < 1) {
        throw InvalidConfig("--times must be at least 1");
    }
    if (count == 1) {
        return {t_end};
    }
    std::vector<double> ts(count);
    for (int i = 0; i < count; ++i) {
        ts[i] = t_end * i / (count - 1);
    }
    ts.back() = t_end;
    return ts;
}

inline void print_warnings(std::ostream& log, const std::vector<std::string>& warnings)
{
    for (const auto& w : warnings) {
        log << "# warning: " << w << '\n';
    }
}

inline int cmd_mesh(const RunConfig& cfg, std::ostream& out)
{
    Output o(cfg.out, out);
    write_mesh_csv(*o, build_mesh(cfg.mesh_config()));
    return ok;
}

inline int cmd_validate_weight(const RunConfig& cfg, std::ostream& out)
{
    const Weight w = make_weight(parse_weight_kind(cfg.weight), cfg.epsilon, cfg.alpha);
    const WeightValidation v = validate_weight(w, cfg.samples);
    Output o(cfg.out, out);
    char buf[128];
    std::snprintf(buf, sizeof buf, "min_beta,%.10e\nmax_ratio,%.10e\nintegral,%.10e\nadmissible,%s\n", v.min_value,
                  v.max_ratio, v.integral, v.passed ? "yes" : "no");
    *o << buf;
    return ok;
}

inline int cmd_solve_stationary(const RunConfig& cfg, std::ostream& out, std::ostream& log)
{
    const ProblemSpec spec = make_problem(parse_problem_id(cfg.problem), cfg.epsilon, cfg.T, cfg.alpha, cfg.gamma);
    const StationaryOptions opts{.quad_points = cfg.quad_points, .resolve_layers = cfg.resolve_layers};
    const StationaryResult r =
        solve_stationary(spec.frozen(cfg.T), cfg.mesh_config(), cfg.degree(), parse_weight_kind(cfg.weight), opts);
    Output o(cfg.out, out);
    write_field_csv(*o, r.field, cfg.per_cell);
    char buf[160];
    std::snprintf(buf, sizeof buf, "# coercivity_margin %.10e\n# galerkin_residual_max %.10e\n# load_norm %.10e\n",
                  r.coercivity_margin, r.galerkin_residual_max, r.load_norm);
    log << buf;
    print_warnings(log, r.warnings);
    return ok;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& log)
{
    const ProblemId id = parse_problem_id(cfg.problem);
    const ProblemSpec spec = make_problem(id, cfg.epsilon, cfg.T, cfg.alpha, cfg.gamma);
    print_warnings(log, check_problem(spec));
    const MeshConfig mcfg = cfg.mesh_config();
    const Mesh1D mesh = build_mesh(mcfg);
    const int slabs = cfg.slabs > 0 ? cfg.slabs : std::max(1, mesh.cells() / 4);
    const TimeMesh tmesh = TimeMesh::uniform(cfg.T, slabs);
    const DgOptions opts{.quad_points = cfg.quad_points, .resolve_layers = cfg.resolve_layers};
    const SpaceTimeSolution sol =
        dg_solve_on_space(spec, build_fespace(mesh, cfg.degree()), cfg.q, tmesh, parse_weight_kind(cfg.weight), opts);
    Output o(cfg.out, out);
    const std::vector<double> ts = sample_times(cfg.T, cfg.times);
    write_spacetime_csv(*o, sol, ts, cfg.per_cell);
    if (id == ProblemId::manufactured_sin) {
        const SpaceTimeErrors e = spacetime_errors(sol, exact_of(smooth_manufactured()));
        char buf[160];
        std::snprintf(buf, sizeof buf, "# l2 %.10e\n# triple %.10e\n# sup_l2 %.10e\n", e.l2, e.triple, e.sup_l2);
        log << buf;
    }
    return ok;
}

inline int cmd_example(RunConfig cfg, std::ostream& out, std::ostream& log)
{
    if (!cfg.family_given) {
        cfg.family = "bakhvalov_s";
    }
    if (parse_problem_id(cfg.problem) == ProblemId::manufactured_sin) {
        throw InvalidConfig("example: pick one of the built-in problems");
    }
    return cmd_solve(cfg, out, log);
}

inline StudyConfig study_config(const RunConfig& cfg)
{
    StudyConfig s;
    s.kind = parse_study_kind(cfg.study);
    s.family = parse_mesh_family(cfg.family);
    if (!cfg.cell_list.empty()) {
        s.cells = cfg.cell_list;
    }
    if (!cfg.grading_list.empty()) {
        s.gradings = cfg.grading_list;
    }
    s.q = cfg.q;
    s.k = cfg.degree();
    s.epsilon = cfg.epsilon;
    s.sigma = cfg.sigma;
    s.alpha = cfg.alpha;
    s.gamma = cfg.gamma;
    s.T = cfg.T;
    s.problem = parse_problem_id(cfg.problem);
    s.layer = parse_layer_kind(cfg.layer);
    s.threads = cfg.threads;
    if (cfg.weight_given) {
        s.weights = {parse_weight_kind(cfg.weight)};
    }
    return s;
}

inline void emit_report(const ConvergenceReport& report, const std::vector<std::string>& columns, std::ostream& table,
                        std::ostream* csv, std::ostream& log)
{
    write_report_table(table, report, columns);
    if (csv != nullptr) {
        write_report_csv(*csv, report);
    }
    print_warnings(log, report.warnings);
}

inline std::vector<std::string> table_columns(const ConvergenceReport& report)
{
    std::vector<std::string> cols;
    for (const auto& c : report.columns) {
        if (c.rfind("sup_", 0) != 0) {
            cols.push_back(c);
        }
    }
    return cols;
}

inline int cmd_study(RunConfig cfg, std::ostream& out, std::ostream& log)
{
    std::vector<double> epsilons{cfg.epsilon};
    if (cfg.table != 0) {
        if (cfg.table < 1 || cfg.table > 3) {
            throw InvalidConfig("--table must be 1, 2 or 3");
        }
        if (!cfg.family_given) {
            cfg.family = "bakhvalov_s";
        }
        cfg.study = "parabolic";
        cfg.problem = cfg.table == 2 ? "quadratic" : "homogeneous";
        if (cfg.table == 3) {
            if (!cfg.q_given && !cfg.k_given) {
                cfg.q = 1;
            }
            if (!cfg.weight_given) {
                cfg.weight = "energy";
                cfg.weight_given = true;
            }
            if (!cfg.epsilon_given) {
                epsilons = {1e-2, 1e-4, 1e-6, 1e-8, 1e-10};
            }
        }
    }
    Output table(cfg.out, out);
    std::unique_ptr<std::ofstream> csv;
    if (!cfg.csv.empty()) {
        csv = std::make_unique<std::ofstream>(cfg.csv);
        if (!*csv) {
            throw InvalidConfig("cannot open '" + cfg.csv + "' for writing");
        }
    }
    for (double eps : epsilons) {
        cfg.epsilon = eps;
        const ConvergenceReport report = convergence_study(study_config(cfg));
        if (epsilons.size() > 1) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "epsilon = %.0e\n", eps);
            *table << buf;
        }
        emit_report(report, table_columns(report), *table, csv.get(), log);
    }
    return ok;
}

} // namespace detail

inline int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& log)
{
    if (cfg.command == "mesh") return detail::cmd_mesh(cfg, out);
    if (cfg.command == "validate-weight") return detail::cmd_validate_weight(cfg, out);
    if (cfg.command == "solve-stationary") return detail::cmd_solve_stationary(cfg, out, log);
    if (cfg.command == "solve") return detail::cmd_solve(cfg, out, log);
    if (cfg.command == "study") return detail::cmd_study(cfg, out, log);
    if (cfg.command == "example") return detail::cmd_example(cfg, out, log);
    throw InvalidConfig("unknown command '" + cfg.command + "'");
}

/// Entry point: 0 on success, 1 on a configuration error, 2 on a numerical failure.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& log = std::cerr)
{
    detail::Parser p;
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        p.app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << p.app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << p.app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        log << "error: " << e.what() << "\n\n" << p.app.help();
        return config_error;
    }
    p.finish();
    try {
        return dispatch(p.cfg, out, log);
    } catch (const InvalidConfig& e) {
        log << "error: " << e.what() << '\n';
        return config_error;
    } catch (const DomainError& e) {
        log << "error: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        log << "numerical failure: " << e.what() << '\n';
        return numerical_error;
    }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& log = std::cerr)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run(args, out, log);
}

} // namespace shiftdg::cli

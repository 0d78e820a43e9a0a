#include "neardiag/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "neardiag/config.hpp"
#include "neardiag/errors.hpp"
#include "neardiag/reports.hpp"
#include "neardiag/rng.hpp"

namespace neardiag {

namespace {

struct CommonArgs {
    std::string config_path;
    std::string output_path;  // empty = stdout
    std::string format;       // empty = subcommand default
    SolverOptions overrides;  // values only meaningful where the flag was seen
    CLI::App* cmd = nullptr;
};

void add_common(CLI::App& app, CommonArgs& args, const char* name, const char* desc) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    args.cmd = cmd;
    cmd->add_option("--config", args.config_path, "scenario config file (JSON)")->required();
    cmd->add_option("--output", args.output_path, "output path (default: stdout)");
    cmd->add_option("--format", args.format, "output format: csv or json");
    SolverOptions& o = args.overrides;
    cmd->add_option("--dt", o.dt, "integrator step");
    cmd->add_option("--t-end", o.t_end, "integration horizon");
    cmd->add_option("--epsilon", o.epsilon, "perturbation budget");
    cmd->add_option("--gap-tol", o.gap_tol, "eigenvalue distinctness tolerance (0 = auto)");
    cmd->add_option("--seed", o.seed, "seed for all randomized paths");
    cmd->add_option("--decay-factor", o.decay_factor, "probe decay threshold");
    cmd->add_option("--blowup-cap", o.blowup_cap, "probe transient cap");
    cmd->add_flag("--realify", o.realify, "force the perturbed Laplacian to be entrywise real");
    cmd->add_option("--n-trials", o.n_trials, "probe trials per eigenvalue track");
    cmd->add_option("--n-samples", o.n_samples, "robustness probe sample count");
    cmd->add_option("--bound-scale", o.bound_scale, "robustness perturbation bound");
    cmd->add_option("--hurwitz-margin", o.hurwitz_margin, "Hurwitz realness margin");
    cmd->add_option("--cond-cap", o.cond_cap, "transform condition cap");
}

void apply_overrides(const CommonArgs& args, SolverOptions& s) {
    const CLI::App* c = args.cmd;
    const SolverOptions& o = args.overrides;
    if (c->count("--dt")) s.dt = o.dt;
    if (c->count("--t-end")) s.t_end = o.t_end;
    if (c->count("--epsilon")) s.epsilon = o.epsilon;
    if (c->count("--gap-tol")) s.gap_tol = o.gap_tol;
    if (c->count("--seed")) s.seed = o.seed;
    if (c->count("--decay-factor")) s.decay_factor = o.decay_factor;
    if (c->count("--blowup-cap")) s.blowup_cap = o.blowup_cap;
    if (c->count("--realify")) s.realify = o.realify;
    if (c->count("--n-trials")) s.n_trials = o.n_trials;
    if (c->count("--n-samples")) s.n_samples = o.n_samples;
    if (c->count("--bound-scale")) s.bound_scale = o.bound_scale;
    if (c->count("--hurwitz-margin")) s.hurwitz_margin = o.hurwitz_margin;
    if (c->count("--cond-cap")) s.cond_cap = o.cond_cap;
    validate_solver(s);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& body) {
    if (path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input("cannot open output file '" + path + "'");
    out << body;
}

void check_format(const std::string& requested, const char* supported) {
    if (!requested.empty() && requested != supported)
        throw invalid_input(std::string("this subcommand only writes ") + supported);
}

RealVector resolve_x0(const ScenarioConfig& cfg) {
    if (!cfg.x0_random) return cfg.x0;
    const std::size_t m = cfg.schedule.agent_count() * static_cast<std::size_t>(cfg.a.rows());
    Rng rng(cfg.solver.seed);
    RealVector x0(m);
    for (double& v : x0) v = rng.uniform(-1.0, 1.0);
    return x0;
}

double resolve_gap_tol(const SolverOptions& s, double source_norm) {
    return s.gap_tol > 0.0 ? s.gap_tol : default_gap_tol(source_norm);
}

ProbeOptions probe_options(const SolverOptions& s) {
    ProbeOptions p;
    p.gap_tol = s.gap_tol;
    p.dt = s.dt;
    p.t_end = s.t_end;
    p.n_trials = static_cast<std::size_t>(s.n_trials);
    p.seed = s.seed;
    p.decay_factor = s.decay_factor;
    p.blowup_cap = s.blowup_cap;
    return p;
}

int run_eigen(const CommonArgs& args) {
    check_format(args.format, "json");
    ScenarioConfig cfg = parse_scenario(read_file(args.config_path));
    apply_overrides(args, cfg.solver);

    const LaplacianMatrix l = laplacian(cfg.schedule.segments().front().graph);
    const double gap_tol = resolve_gap_tol(cfg.solver, l.frob_norm());
    const std::vector<cplx> ev = eigenvalues(l.to_complex());
    const DiagnosabilityReport rep =
        assess_diagonalizability(l.to_complex(), gap_tol, cfg.solver.cond_cap);
    write_output(args.output_path, eigen_report_json(l, ev, rep, gap_tol, cfg.solver));
    return 0;
}

int run_decouple(const CommonArgs& args) {
    check_format(args.format, "json");
    ScenarioConfig cfg = parse_scenario(read_file(args.config_path));
    apply_overrides(args, cfg.solver);

    const LaplacianMatrix l = laplacian(cfg.schedule.segments().front().graph);
    const double gap_tol = resolve_gap_tol(cfg.solver, l.frob_norm());
    const PerturbationResult pr = construct_perturbation(l, cfg.solver.epsilon, gap_tol,
                                                         cfg.solver.realify, cfg.solver.seed);
    const DecoupledSystem dec = decouple(pr.perturbed, cfg.a.to_complex(), cfg.f.to_complex(),
                                         gap_tol, cfg.solver.cond_cap);
    write_output(args.output_path, decouple_report_json(pr, dec, gap_tol, cfg.solver));
    return 0;
}

int run_check(const CommonArgs& args) {
    check_format(args.format, "json");
    ScenarioConfig cfg = parse_scenario(read_file(args.config_path));
    apply_overrides(args, cfg.solver);

    const AgentSystem sys(cfg.a, cfg.f, cfg.schedule);
    const ConsensusVerdict v =
        check_consensus(sys, probe_options(cfg.solver), cfg.solver.hurwitz_margin);
    write_output(args.output_path, verdict_report_json(v, cfg.solver));
    switch (v.overall) {
        case Overall::consensus: return 0;
        case Overall::no_consensus: return 3;
        case Overall::inconclusive: return 4;
    }
    return 2;
}

int run_simulate(const CommonArgs& args) {
    check_format(args.format, "csv");
    ScenarioConfig cfg = parse_scenario(read_file(args.config_path));
    apply_overrides(args, cfg.solver);

    const AgentSystem sys(cfg.a, cfg.f, cfg.schedule);
    const RealVector x0 = resolve_x0(cfg);
    const SimulationTrace trace = simulate(sys, x0, cfg.solver.dt, cfg.solver.t_end);
    write_output(args.output_path, trace_csv(trace, sys.n_agents, sys.d));
    if (trace.divergent) {
        std::cerr << "simulate: state overflow at t=" << trace.times.back()
                  << "; partial trace written\n";
        return 2;
    }
    return 0;
}

int run_probe(const CommonArgs& args) {
    check_format(args.format, "json");
    ScenarioConfig cfg = parse_scenario(read_file(args.config_path));
    apply_overrides(args, cfg.solver);

    const AgentSystem sys(cfg.a, cfg.f, cfg.schedule);
    const ConsensusVerdict nominal =
        check_consensus(sys, probe_options(cfg.solver), cfg.solver.hurwitz_margin);
    if (nominal.overall != Overall::consensus)
        throw numerical_error(std::string("probe: nominal system verdict is ") +
                                  to_string(nominal.overall) + ", not consensus",
                              0.0);

    const RealVector x0 = resolve_x0(cfg);
    const RobustnessReport rep = robustness_probe(
        sys, x0, cfg.solver.bound_scale, static_cast<std::size_t>(cfg.solver.n_samples),
        cfg.solver.seed, cfg.solver.dt, cfg.solver.t_end, cfg.solver.decay_factor);
    write_output(args.output_path, robustness_report_json(rep, cfg.solver));
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"near-diagonalizable topology toolkit: construct eps-close diagonalizable "
                 "Laplacians, decouple networked dynamics, and check/simulate consensus"};
    app.require_subcommand(1);

    CommonArgs eigen_args, decouple_args, check_args, simulate_args, probe_args;
    add_common(app, eigen_args, "eigen",
               "eigenvalues and diagonalizability report of the first-segment Laplacian");
    add_common(app, decouple_args, "decouple",
               "construct the eps-perturbation and the decoupled system (JSON)");
    add_common(app, check_args, "check", "consensus verdict for the scenario (JSON)");
    add_common(app, simulate_args, "simulate", "integrate the stacked dynamics (CSV trace)");
    add_common(app, probe_args, "probe", "robustness probe around a consensus scenario (JSON)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (eigen_args.cmd->parsed()) return run_eigen(eigen_args);
        if (decouple_args.cmd->parsed()) return run_decouple(decouple_args);
        if (check_args.cmd->parsed()) return run_check(check_args);
        if (simulate_args.cmd->parsed()) return run_simulate(simulate_args);
        if (probe_args.cmd->parsed()) return run_probe(probe_args);
    } catch (const invalid_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace neardiag

#include "neardiag/reports.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace neardiag {

namespace {

using nlohmann::json;

json num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json cnum(const cplx& v) { return json::array({v.real(), v.imag()}); }

json cvec(const std::vector<cplx>& v) {
    json out = json::array();
    for (const cplx& x : v) out.push_back(cnum(x));
    return out;
}

json cmat(const ComplexMatrix& m) {
    json out = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(cnum(m(i, j)));
        out.push_back(row);
    }
    return out;
}

json solver_echo(const SolverOptions& s) {
    return json{{"dt", s.dt},
                {"t_end", s.t_end},
                {"epsilon", s.epsilon},
                {"gap_tol", s.gap_tol},
                {"seed", s.seed},
                {"decay_factor", s.decay_factor},
                {"blowup_cap", s.blowup_cap},
                {"realify", s.realify},
                {"n_trials", s.n_trials},
                {"n_samples", s.n_samples},
                {"bound_scale", s.bound_scale},
                {"hurwitz_margin", s.hurwitz_margin},
                {"cond_cap", s.cond_cap}};
}

json diagnosability(const DiagnosabilityReport& rep) {
    return json{{"distinct_eigenvalues", rep.distinct_eigenvalues},
                {"min_gap", num(rep.min_gap)},
                {"eigvec_condition", num(rep.eigvec_condition)},
                {"verdict", to_string(rep.verdict)}};
}

json tracks_json(const std::vector<TrackProbeResult>& tracks) {
    json out = json::array();
    for (const TrackProbeResult& t : tracks) {
        out.push_back(json{{"track", t.track},
                           {"eigenvalue_per_segment", cvec(t.eigenvalue_per_segment)},
                           {"status", to_string(t.status)},
                           {"max_final_ratio", num(t.max_final_ratio)},
                           {"peak_ratio", num(t.peak_ratio)}});
    }
    return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

const char* to_string(Diagnosis d) {
    switch (d) {
        case Diagnosis::diagonalizable: return "diagonalizable";
        case Diagnosis::defective: return "defective";
        case Diagnosis::borderline: return "borderline";
    }
    return "?";
}

const char* to_string(ProbeStatus s) {
    switch (s) {
        case ProbeStatus::pass: return "pass";
        case ProbeStatus::fail: return "fail";
        case ProbeStatus::borderline: return "borderline";
    }
    return "?";
}

const char* to_string(Overall o) {
    switch (o) {
        case Overall::consensus: return "consensus";
        case Overall::no_consensus: return "no_consensus";
        case Overall::inconclusive: return "inconclusive";
    }
    return "?";
}

std::string eigen_report_json(const LaplacianMatrix& l, const std::vector<cplx>& eigenvalues,
                              const DiagnosabilityReport& rep, double gap_tol_used,
                              const SolverOptions& solver) {
    json lap = json::array();
    for (std::size_t i = 0; i < l.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < l.size(); ++j) row.push_back(l.entry(i, j));
        lap.push_back(row);
    }
    return dump(json{{"n", l.size()},
                     {"laplacian", lap},
                     {"eigenvalues", cvec(eigenvalues)},
                     {"report", diagnosability(rep)},
                     {"gap_tol_used", gap_tol_used},
                     {"effective_solver", solver_echo(solver)}});
}

std::string decouple_report_json(const PerturbationResult& pr, const DecoupledSystem& dec,
                                 double gap_tol_used, const SolverOptions& solver) {
    const json perturbation{{"epsilon_budget", pr.epsilon_budget},
                            {"achieved_sq_distance", pr.achieved_sq_distance},
                            {"min_gap_after", num(pr.min_gap_after)},
                            {"imag_residual", pr.imag_residual},
                            {"max_positive_offdiag", pr.max_positive_offdiag},
                            {"spectrum_after", cvec(pr.spectrum_after)},
                            {"e_matrix", cmat(pr.e_matrix)},
                            {"perturbed", cmat(pr.perturbed)}};
    const json decoupled{{"lambda", cvec(dec.lambda)},
                         {"transform", cmat(dec.transform)},
                         {"transform_condition", num(dec.transform_condition)},
                         {"subsystems", [&] {
                              json arr = json::array();
                              for (const ComplexMatrix& m : dec.subsystems) arr.push_back(cmat(m));
                              return arr;
                          }()}};
    return dump(json{{"perturbation", perturbation},
                     {"decoupled", decoupled},
                     {"gap_tol_used", gap_tol_used},
                     {"effective_solver", solver_echo(solver)}});
}

std::string verdict_report_json(const ConsensusVerdict& v, const SolverOptions& solver) {
    json gaps = json::array();
    for (const GapInterval& g : v.gap_intervals)
        gaps.push_back(json::array({g.t_start, g.t_end}));
    return dump(json{{"condition1", json{{"holds", v.condition1_holds}, {"gap_intervals", gaps}}},
                     {"condition2", json{{"status", to_string(v.condition2)},
                                         {"tracks", tracks_json(v.tracks)}}},
                     {"hurwitz_a", v.hurwitz_a},
                     {"overall", to_string(v.overall)},
                     {"rationale", v.rationale},
                     {"effective_solver", solver_echo(solver)}});
}

std::string robustness_report_json(const RobustnessReport& r, const SolverOptions& solver) {
    json samples = json::array();
    for (const RobustnessSample& s : r.samples)
        samples.push_back(json{{"magnitude", s.magnitude}, {"converged", s.converged}});
    return dump(json{{"bound_scale", r.bound_scale},
                     {"n_samples", r.n_samples},
                     {"fraction_converged", r.fraction_converged},
                     {"largest_scale_all_converged", r.largest_scale_all_converged},
                     {"samples", samples},
                     {"effective_solver", solver_echo(solver)}});
}

std::string trace_csv(const SimulationTrace& trace, std::size_t n_agents, std::size_t d) {
    std::string out = "t,dev,eta_norm";
    for (std::size_t i = 1; i <= n_agents; ++i)
        for (std::size_t c = 1; c <= d; ++c)
            out += ",x_" + std::to_string(i) + "_" + std::to_string(c);
    out += "\n";

    char buf[32];
    const auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
        out += sep;
    };
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        put(trace.times[k], ',');
        put(trace.deviations[k], ',');
        const bool no_states = trace.states[k].empty();
        put(trace.eta_norms[k], no_states ? '\n' : ',');
        const RealVector& x = trace.states[k];
        for (std::size_t i = 0; i < x.size(); ++i) put(x[i], i + 1 == x.size() ? '\n' : ',');
    }
    return out;
}

}  // namespace neardiag

#pragma once

#include <cstdint>
#include <string>

#include "neardiag/decoupler.hpp"
#include "neardiag/graph.hpp"
#include "neardiag/matrix.hpp"

namespace neardiag {

/// N agents of order d with dynamics dx_i = A x_i + F sum_j w_ij(t)(x_j - x_i)
/// over a piecewise-constant topology schedule.
struct AgentSystem {
    AgentSystem(RealMatrix a, RealMatrix f, TopologySchedule schedule);

    std::size_t d;
    std::size_t n_agents;
    RealMatrix a_matrix;
    RealMatrix f_matrix;
    TopologySchedule schedule;
};

struct SimulationTrace {
    std::vector<double> times;
    std::vector<RealVector> states;  // stacked x = [x_1; ...; x_N], length N*d
    std::vector<double> deviations;  // max pairwise ||x_i - x_j||
    std::vector<double> eta_norms;
    bool divergent = false;  // state overflow aborted the run; trace is partial
};

/// Fixed-step classical RK4 on the stacked dynamics
/// dx = (I_N (x) A - L(t) (x) F) x. Switch instants of the schedule are forced
/// to be sample points; each step integrates with the topology of its own
/// segment (W is constant between switches, so every interior stage reads the
/// same matrix). Beyond horizon_end the last topology persists. Any state
/// component exceeding 1e12 in magnitude aborts with a partial trace flagged
/// divergent.
SimulationTrace simulate(const AgentSystem& sys, const RealVector& x0, double dt, double t_end);

/// Integrate the per-eigenvalue blocks xi_i' = (A - lambda_i F) xi_i of each
/// segment's decoupled system on the same grid as simulate, mapping back to
/// original coordinates at every sample. `per_segment` must supply one
/// DecoupledSystem per schedule segment.
SimulationTrace simulate_decoupled(const AgentSystem& sys,
                                   const std::vector<DecoupledSystem>& per_segment,
                                   const RealVector& x0, double dt, double t_end);

/// Stacked coupling terms eta_i = sum_j w_ij(t) (x_j - x_i).
RealVector eta(const AgentSystem& sys, const RealVector& x, double t);

/// Max over pairs i < j of the Euclidean distance between agent states.
double swarm_deviation(const RealVector& stacked, std::size_t n_agents, std::size_t d);

/// All eigenvalues strictly left of -margin.
bool hurwitz_check(const RealMatrix& a, double margin = 1e-9);

struct ProbeOptions {
    double gap_tol = 0.0;  // 0 resolves to default_gap_tol per segment
    double dt = 1e-3;
    double t_end = 50.0;
    std::size_t n_trials = 5;
    std::uint64_t seed = 0;
    double decay_factor = 1e-3;
    double blowup_cap = 1e3;
};

enum class ProbeStatus { pass, fail, borderline };

struct TrackProbeResult {
    std::size_t track = 0;                    // eigenvalue track index (1-based, 0 is the zero mode)
    std::vector<cplx> eigenvalue_per_segment;
    ProbeStatus status = ProbeStatus::fail;
    double max_final_ratio = 0.0;  // worst ||xi(tau + t_end)|| / ||xi(tau)|| over trials
    double peak_ratio = 0.0;       // worst transient over all trials
};

/// Numerical uniform-asymptotic-stability probe of the time-varying subsystems
/// xi' = (A - lambda_i(t) F) xi along every nonzero eigenvalue track. Tracks
/// follow nearest-distance pairing of per-segment spectra. Each track is
/// integrated from n_trials random unit initial states at shifted start times;
/// a trial passes when its final norm falls below decay_factor and the
/// transient never exceeds blowup_cap. This is evidence, not proof.
std::vector<TrackProbeResult> subsystem_stability_probe(const AgentSystem& sys,
                                                        const ProbeOptions& opts);

enum class Overall { consensus, no_consensus, inconclusive };

struct ConsensusVerdict {
    bool condition1_holds = false;
    std::vector<GapInterval> gap_intervals;
    ProbeStatus condition2 = ProbeStatus::fail;
    std::vector<TrackProbeResult> tracks;
    bool hurwitz_a = false;
    Overall overall = Overall::inconclusive;
    std::string rationale;
};

/// Combine the spanning-tree condition, the subsystem probes, and the
/// stability class of A into an overall consensus verdict. When A is Hurwitz
/// the subsystem probes alone decide; otherwise connectivity gaps must be
/// confined to a bounded prefix and the probes must pass. A marginally stable
/// A (neither Hurwitz nor growing) is routed through the non-Hurwitz branch.
ConsensusVerdict check_consensus(const AgentSystem& sys, const ProbeOptions& opts,
                                double hurwitz_margin = 1e-9);

struct RobustnessSample {
    double magnitude = 0.0;  // Frobenius norm of the sampled topology offset
    bool converged = false;
};

struct RobustnessReport {
    double bound_scale = 0.0;
    std::size_t n_samples = 0;
    double fraction_converged = 0.0;
    double largest_scale_all_converged = 0.0;
    std::vector<RobustnessSample> samples;
};

/// Empirical robustness probe: re-simulate under random zero-row-sum topology
/// offsets (Delta L(t) (x) F) x with ||Delta L||_F <= bound_scale and report
/// the fraction of samples whose deviation still decays below
/// decay_factor * max(1, deviation(0)). Callers are expected to have judged
/// the nominal system consensus first.
RobustnessReport robustness_probe(const AgentSystem& sys, const RealVector& x0,
                                  double bound_scale, std::size_t n_samples, std::uint64_t seed,
                                  double dt, double t_end, double decay_factor);

}  // namespace neardiag

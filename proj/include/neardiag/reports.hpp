#pragma once

#include <string>

#include "neardiag/config.hpp"
#include "neardiag/decoupler.hpp"
#include "neardiag/sim.hpp"

namespace neardiag {

/// JSON report bodies. Complex numbers serialize as [re, im]; infinities as
/// the string "inf" (JSON has no infinity literal). Every report embeds the
/// effective solver block so applied defaults are visible.

std::string eigen_report_json(const LaplacianMatrix& l, const std::vector<cplx>& eigenvalues,
                              const DiagnosabilityReport& rep, double gap_tol_used,
                              const SolverOptions& solver);

std::string decouple_report_json(const PerturbationResult& pr, const DecoupledSystem& dec,
                                 double gap_tol_used, const SolverOptions& solver);

std::string verdict_report_json(const ConsensusVerdict& v, const SolverOptions& solver);

std::string robustness_report_json(const RobustnessReport& r, const SolverOptions& solver);

/// CSV trace: header t,dev,eta_norm,x_1_1,...,x_N_d then one row per sample,
/// 17 significant digits.
std::string trace_csv(const SimulationTrace& trace, std::size_t n_agents, std::size_t d);

const char* to_string(Diagnosis d);
const char* to_string(ProbeStatus s);
const char* to_string(Overall o);

}  // namespace neardiag

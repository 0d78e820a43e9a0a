#pragma once

#include <cstdint>
#include <string>

#include "neardiag/graph.hpp"
#include "neardiag/matrix.hpp"

namespace neardiag {

/// Solver knobs with their reproducible defaults. gap_tol = 0 means the
/// scale-aware default 1e-8 * (1 + ||L||_F) resolved per matrix.
struct SolverOptions {
    double dt = 1e-3;
    double t_end = 50.0;
    double epsilon = 1e-4;
    double gap_tol = 0.0;
    std::uint64_t seed = 0;
    double decay_factor = 1e-3;
    double blowup_cap = 1e3;
    bool realify = false;
    std::uint64_t n_trials = 5;
    std::uint64_t n_samples = 20;
    double bound_scale = 0.1;
    double hurwitz_margin = 1e-9;
    double cond_cap = 1e8;
};

struct ScenarioConfig {
    RealMatrix a;
    RealMatrix f;
    TopologySchedule schedule;
    bool x0_random;  // "x0": "random" draws uniform [-1,1]^{N*d} from the seed
    RealVector x0;
    SolverOptions solver;
};

/// Strict parse of the JSON scenario text: unknown keys are rejected by name,
/// dimensions are validated before any computation.
ScenarioConfig parse_scenario(const std::string& text);

/// Range checks shared by config parsing and CLI flag overrides.
void validate_solver(const SolverOptions& s);

}  // namespace neardiag

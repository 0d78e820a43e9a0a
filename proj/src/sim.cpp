#include "neardiag/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "neardiag/errors.hpp"
#include "neardiag/rng.hpp"
#include "neardiag/schur.hpp"

namespace neardiag {

namespace {

constexpr double kOverflow = 1e12;

RealMatrix laplacian_dense(const WeightedDigraph& g) {
    const LaplacianMatrix l = laplacian(g);
    return RealMatrix(l.size(), l.size(), l.entries());
}

std::vector<RealMatrix> segment_laplacians(const TopologySchedule& s) {
    std::vector<RealMatrix> ls;
    ls.reserve(s.segments().size());
    for (const ScheduleSegment& seg : s.segments()) ls.push_back(laplacian_dense(seg.graph));
    return ls;
}

std::size_t segment_for_time(const TopologySchedule& s, double t) {
    // The last topology persists beyond the schedule horizon.
    return s.segment_index_at(std::min(t, s.horizon_end()));
}

std::vector<double> boundaries_between(const TopologySchedule& s, double t0, double t1) {
    std::vector<double> b;
    for (std::size_t k = 1; k < s.segments().size(); ++k) {
        const double ts = s.segments()[k].t_start;
        if (ts > t0 && ts < t1) b.push_back(ts);
    }
    return b;
}

// Accumulated float drift must neither skip a boundary nor create a sliver
// step next to one; endpoints within this fraction of dt snap to the limit.
constexpr double kStepSnap = 1e-6;

double next_sample_time(double t, double dt, const std::vector<double>& boundaries,
                        double t_end) {
    const double snap = kStepSnap * dt;
    double limit = t_end;
    const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), t + snap);
    if (it != boundaries.end() && *it < limit) limit = *it;
    const double tn = t + dt;
    if (limit - tn <= snap) return limit;
    return tn;
}

/// dx_i = A x_i - F (sum_j L_ij x_j), evaluated without forming the N*d square
/// Kronecker operator.
void stacked_rhs(const RealMatrix& a, const RealMatrix& f, const RealMatrix& l,
                 const RealVector& x, RealVector& z, RealVector& dx) {
    const std::size_t n = l.rows();
    const std::size_t d = a.rows();
    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double lij = l(i, j);
            if (lij == 0.0) continue;
            for (std::size_t c = 0; c < d; ++c) z[i * d + c] += lij * x[j * d + c];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < d; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c)
                acc += a(r, c) * x[i * d + c] - f(r, c) * z[i * d + c];
            dx[i * d + r] = acc;
        }
    }
}

struct Rk4Scratch {
    RealVector k1, k2, k3, k4, tmp, z;
    explicit Rk4Scratch(std::size_t m)
        : k1(m), k2(m), k3(m), k4(m), tmp(m), z(m) {}
};

void rk4_step(const RealMatrix& a, const RealMatrix& f, const RealMatrix& l, RealVector& x,
              double h, Rk4Scratch& s) {
    const std::size_t m = x.size();
    stacked_rhs(a, f, l, x, s.z, s.k1);
    for (std::size_t i = 0; i < m; ++i) s.tmp[i] = x[i] + 0.5 * h * s.k1[i];
    stacked_rhs(a, f, l, s.tmp, s.z, s.k2);
    for (std::size_t i = 0; i < m; ++i) s.tmp[i] = x[i] + 0.5 * h * s.k2[i];
    stacked_rhs(a, f, l, s.tmp, s.z, s.k3);
    for (std::size_t i = 0; i < m; ++i) s.tmp[i] = x[i] + h * s.k3[i];
    stacked_rhs(a, f, l, s.tmp, s.z, s.k4);
    for (std::size_t i = 0; i < m; ++i)
        x[i] += h / 6.0 * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
}

bool overflowed(const RealVector& x) {
    for (double v : x)
        if (!(std::abs(v) <= kOverflow)) return true;  // catches NaN too
    return false;
}

/// Shared fixed-grid driver; `on_sample` sees every accepted sample including
/// the initial state. Returns false when the state overflowed (partial run).
bool integrate_stacked(const AgentSystem& sys, const std::vector<RealMatrix>& ls,
                       const RealVector& x0, double dt, double t_end,
                       const std::function<void(double, const RealVector&)>& on_sample) {
    RealVector x = x0;
    Rk4Scratch scratch(x.size());
    const std::vector<double> bounds = boundaries_between(sys.schedule, 0.0, t_end);
    double t = 0.0;
    on_sample(t, x);
    while (t_end - t > kStepSnap * dt) {
        const double tn = next_sample_time(t, dt, bounds, t_end);
        const std::size_t seg = segment_for_time(sys.schedule, t);
        rk4_step(sys.a_matrix, sys.f_matrix, ls[seg], x, tn - t, scratch);
        if (overflowed(x)) return false;
        t = tn;
        on_sample(t, x);
    }
    return true;
}

void validate_sim_args(const AgentSystem& sys, const RealVector& x0, double dt, double t_end) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw invalid_input("simulate: dt must be positive");
    if (!(t_end >= dt) || !std::isfinite(t_end))
        throw invalid_input("simulate: t_end must be at least dt");
    if (x0.size() != sys.n_agents * sys.d)
        throw invalid_input("simulate: x0 length must be N*d");
    for (double v : x0)
        if (!std::isfinite(v)) throw invalid_input("simulate: x0 must be finite");
}

// Complex fixed-step RK4 for one d-dimensional block with constant matrix.
void block_rk4_step(const ComplexMatrix& m, ComplexVector& xi, double h, ComplexVector& k1,
                    ComplexVector& k2, ComplexVector& k3, ComplexVector& k4, ComplexVector& tmp) {
    const std::size_t d = xi.size();
    auto apply = [&](const ComplexVector& v, ComplexVector& out) {
        for (std::size_t r = 0; r < d; ++r) {
            cplx acc(0.0, 0.0);
            for (std::size_t c = 0; c < d; ++c) acc += m(r, c) * v[c];
            out[r] = acc;
        }
    };
    apply(xi, k1);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = xi[i] + 0.5 * h * k1[i];
    apply(tmp, k2);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = xi[i] + 0.5 * h * k2[i];
    apply(tmp, k3);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = xi[i] + h * k3[i];
    apply(tmp, k4);
    for (std::size_t i = 0; i < d; ++i)
        xi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

AgentSystem::AgentSystem(RealMatrix a, RealMatrix f, TopologySchedule sched)
    : d(a.rows()),
      n_agents(sched.agent_count()),
      a_matrix(std::move(a)),
      f_matrix(std::move(f)),
      schedule(std::move(sched)) {
    if (!a_matrix.square() || !f_matrix.square() || f_matrix.rows() != d || d == 0)
        throw invalid_input("AgentSystem: A and F must be square with equal order >= 1");
    if (!a_matrix.all_finite() || !f_matrix.all_finite())
        throw invalid_input("AgentSystem: A and F must be finite");
    if (n_agents < 2) throw invalid_input("AgentSystem: needs at least two agents");
}

SimulationTrace simulate(const AgentSystem& sys, const RealVector& x0, double dt, double t_end) {
    validate_sim_args(sys, x0, dt, t_end);
    const std::vector<RealMatrix> ls = segment_laplacians(sys.schedule);

    SimulationTrace trace;
    const auto record = [&](double t, const RealVector& x) {
        trace.times.push_back(t);
        trace.states.push_back(x);
        trace.deviations.push_back(swarm_deviation(x, sys.n_agents, sys.d));
        trace.eta_norms.push_back(vector_norm(eta(sys, x, t)));
    };
    trace.divergent = !integrate_stacked(sys, ls, x0, dt, t_end, record);
    return trace;
}

SimulationTrace simulate_decoupled(const AgentSystem& sys,
                                   const std::vector<DecoupledSystem>& per_segment,
                                   const RealVector& x0, double dt, double t_end) {
    validate_sim_args(sys, x0, dt, t_end);
    const auto& segs = sys.schedule.segments();
    if (per_segment.size() != segs.size())
        throw invalid_input("simulate_decoupled: one DecoupledSystem per segment required");

    const std::size_t n = sys.n_agents;
    const std::size_t d = sys.d;

    SimulationTrace trace;
    RealVector x = x0;
    const auto record = [&](double t, const RealVector& xs) {
        trace.times.push_back(t);
        trace.states.push_back(xs);
        trace.deviations.push_back(swarm_deviation(xs, n, d));
        trace.eta_norms.push_back(vector_norm(eta(sys, xs, t)));
    };
    record(0.0, x);

    ComplexVector xt(n * d), k1(d), k2(d), k3(d), k4(d), tmp(d);
    RealVector xr(n * d);
    double t = 0.0;

    for (std::size_t k = 0; k < segs.size() && t_end - t > kStepSnap * dt; ++k) {
        const double seg_end = k + 1 < segs.size() ? std::min(segs[k + 1].t_start, t_end) : t_end;
        if (seg_end - t <= kStepSnap * dt) continue;
        const DecoupledSystem& dec = per_segment[k];

        // Into decoupled coordinates: xt = (T (x) I_d) x.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < d; ++c) {
                cplx acc(0.0, 0.0);
                for (std::size_t j = 0; j < n; ++j) acc += dec.transform(i, j) * x[j * d + c];
                xt[i * d + c] = acc;
            }

        while (seg_end - t > kStepSnap * dt) {
            const double tn = next_sample_time(t, dt, {}, seg_end);
            const double h = tn - t;
            for (std::size_t i = 0; i < n; ++i) {
                ComplexVector xi(xt.begin() + i * d, xt.begin() + (i + 1) * d);
                block_rk4_step(dec.subsystems[i], xi, h, k1, k2, k3, k4, tmp);
                std::copy(xi.begin(), xi.end(), xt.begin() + i * d);
            }
            t = tn;

            // Back to original coordinates for the trace and the hand-off.
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t c = 0; c < d; ++c) {
                    cplx acc(0.0, 0.0);
                    for (std::size_t i = 0; i < n; ++i)
                        acc += dec.transform_inv(j, i) * xt[i * d + c];
                    xr[j * d + c] = acc.real();
                }
            if (overflowed(xr)) {
                trace.divergent = true;
                return trace;
            }
            record(t, xr);
        }
        x = xr;
    }
    return trace;
}

RealVector eta(const AgentSystem& sys, const RealVector& x, double t) {
    const std::size_t n = sys.n_agents;
    const std::size_t d = sys.d;
    if (x.size() != n * d) throw invalid_input("eta: state length must be N*d");
    const WeightedDigraph& g = sys.schedule.graph_at(std::min(t, sys.schedule.horizon_end()));

    RealVector out(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double w = g.weight(i, j);
            if (w == 0.0) continue;
            for (std::size_t c = 0; c < d; ++c)
                out[i * d + c] += w * (x[j * d + c] - x[i * d + c]);
        }
    return out;
}

double swarm_deviation(const RealVector& stacked, std::size_t n_agents, std::size_t d) {
    if (n_agents < 2) throw invalid_input("swarm_deviation: needs at least two agents");
    if (stacked.size() != n_agents * d)
        throw invalid_input("swarm_deviation: state length must be N*d");
    double worst = 0.0;
    for (std::size_t i = 0; i < n_agents; ++i)
        for (std::size_t j = i + 1; j < n_agents; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = stacked[i * d + c] - stacked[j * d + c];
                s += diff * diff;
            }
            worst = std::max(worst, std::sqrt(s));
        }
    return worst;
}

bool hurwitz_check(const RealMatrix& a, double margin) {
    if (!a.square()) throw invalid_input("hurwitz_check: matrix must be square");
    for (const cplx& ev : eigenvalues(a.to_complex()))
        if (!(ev.real() < -margin)) return false;
    return true;
}

namespace {

/// Per-segment spectra with each segment's (structurally present) zero
/// eigenvalue first and the remainder sorted; columns then re-paired across
/// boundaries by nearest distance, ties broken by index order.
std::vector<std::vector<cplx>> eigenvalue_tracks(const TopologySchedule& sched) {
    const std::size_t n = sched.agent_count();
    const std::size_t n_segs = sched.segments().size();

    std::vector<std::vector<cplx>> per_seg(n_segs);
    for (std::size_t s = 0; s < n_segs; ++s) {
        std::vector<cplx> ev = eigenvalues(laplacian_dense(sched.segments()[s].graph).to_complex());
        std::size_t zmin = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(ev[i]) < std::abs(ev[zmin])) zmin = i;
        std::swap(ev[0], ev[zmin]);
        std::sort(ev.begin() + 1, ev.end(), [](const cplx& a, const cplx& b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        });
        per_seg[s] = std::move(ev);
    }

    std::vector<std::vector<cplx>> tracks(n, std::vector<cplx>(n_segs));
    for (std::size_t i = 0; i < n; ++i) tracks[i][0] = per_seg[0][i];
    for (std::size_t s = 1; s < n_segs; ++s) {
        tracks[0][s] = per_seg[s][0];
        std::vector<bool> used(n, false);
        used[0] = true;
        for (std::size_t i = 1; i < n; ++i) {
            std::size_t pick = 0;
            double best = -1.0;
            for (std::size_t j = 1; j < n; ++j) {
                if (used[j]) continue;
                const double dist = std::abs(per_seg[s][j] - tracks[i][s - 1]);
                if (best < 0.0 || dist < best) {
                    best = dist;
                    pick = j;
                }
            }
            used[pick] = true;
            tracks[i][s] = per_seg[s][pick];
        }
    }
    return tracks;
}

}  // namespace

std::vector<TrackProbeResult> subsystem_stability_probe(const AgentSystem& sys,
                                                        const ProbeOptions& opts) {
    if (!(opts.dt > 0.0) || !(opts.t_end >= opts.dt))
        throw invalid_input("subsystem_stability_probe: bad integrator parameters");
    if (opts.n_trials == 0) throw invalid_input("subsystem_stability_probe: n_trials must be >= 1");

    const std::size_t n = sys.n_agents;
    const std::size_t d = sys.d;
    const double horizon = sys.schedule.horizon_end();
    const std::vector<std::vector<cplx>> tracks = eigenvalue_tracks(sys.schedule);
    const ComplexMatrix ac = sys.a_matrix.to_complex();
    const ComplexMatrix fc = sys.f_matrix.to_complex();

    std::vector<TrackProbeResult> results;
    results.reserve(n - 1);
    ComplexVector k1(d), k2(d), k3(d), k4(d), tmp(d);

    for (std::size_t track = 1; track < n; ++track) {
        TrackProbeResult res;
        res.track = track;
        res.eigenvalue_per_segment = tracks[track];

        std::vector<ComplexMatrix> mats;
        mats.reserve(tracks[track].size());
        for (const cplx& lam : tracks[track]) mats.push_back(ac - lam * fc);

        Rng rng(opts.seed + 0x9E3779B97F4A7C15ull * track);
        bool any_fail = false, any_borderline = false;

        for (std::size_t trial = 0; trial < opts.n_trials; ++trial) {
            const double tau = trial == 0 ? 0.0 : rng.uniform(0.0, horizon);
            ComplexVector xi(d);
            double nrm = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                xi[c] = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
                nrm += std::norm(xi[c]);
            }
            nrm = std::sqrt(nrm);
            if (nrm == 0.0) {
                xi[0] = 1.0;
            } else {
                for (cplx& v : xi) v /= nrm;
            }

            const double stop = tau + opts.t_end;
            const std::vector<double> bounds = boundaries_between(sys.schedule, tau, stop);
            double t = tau;
            double peak = 1.0;
            bool blewup = false;
            while (stop - t > kStepSnap * opts.dt) {
                const double tn = next_sample_time(t, opts.dt, bounds, stop);
                const std::size_t seg = segment_for_time(sys.schedule, t);
                block_rk4_step(mats[seg], xi, tn - t, k1, k2, k3, k4, tmp);
                t = tn;
                const double vn = vector_norm(xi);
                peak = std::max(peak, vn);
                if (!(vn <= opts.blowup_cap)) {
                    blewup = true;
                    break;
                }
            }
            const double final_ratio = blewup ? peak : vector_norm(xi);
            res.max_final_ratio = std::max(res.max_final_ratio, final_ratio);
            res.peak_ratio = std::max(res.peak_ratio, peak);
            if (blewup || final_ratio >= 1.0)
                any_fail = true;
            else if (final_ratio > opts.decay_factor)
                any_borderline = true;
        }

        res.status = any_fail          ? ProbeStatus::fail
                     : any_borderline ? ProbeStatus::borderline
                                      : ProbeStatus::pass;
        results.push_back(std::move(res));
    }
    return results;
}

ConsensusVerdict check_consensus(const AgentSystem& sys, const ProbeOptions& opts,
                                double hurwitz_margin) {
    ConsensusVerdict v;
    v.gap_intervals = spanning_tree_gap_intervals(sys.schedule);
    // Gaps confined to a bounded prefix are fine; a gap reaching the horizon
    // means the topology stays disconnected from then on.
    v.condition1_holds =
        v.gap_intervals.empty() || v.gap_intervals.back().t_end < sys.schedule.horizon_end();
    v.hurwitz_a = hurwitz_check(sys.a_matrix, hurwitz_margin);
    v.tracks = subsystem_stability_probe(sys, opts);

    bool any_fail = false, any_borderline = false;
    for (const TrackProbeResult& t : v.tracks) {
        if (t.status == ProbeStatus::fail) any_fail = true;
        if (t.status == ProbeStatus::borderline) any_borderline = true;
    }
    v.condition2 = any_fail          ? ProbeStatus::fail
                   : any_borderline ? ProbeStatus::borderline
                                    : ProbeStatus::pass;

    if (v.hurwitz_a) {
        if (v.condition2 == ProbeStatus::pass) {
            v.overall = Overall::consensus;
            v.rationale = "A is Hurwitz; all subsystem probes decayed (condition 2), which alone "
                          "decides the Hurwitz branch.";
        } else if (v.condition2 == ProbeStatus::fail) {
            v.overall = Overall::no_consensus;
            v.rationale = "A is Hurwitz but a subsystem probe diverged or failed to decay "
                          "(condition 2 fails), so the Hurwitz branch rules out consensus.";
        } else {
            v.overall = Overall::inconclusive;
            v.rationale = "A is Hurwitz and the subsystem probes were borderline: decay was "
                          "observed but did not reach the decay factor.";
        }
        return v;
    }

    if (!v.condition1_holds) {
        v.overall = Overall::no_consensus;
        v.rationale = "A is not Hurwitz and the topology loses its spanning tree on an interval "
                      "reaching the horizon (condition 1 fails): isolated groups drift apart.";
        return v;
    }
    if (v.condition2 == ProbeStatus::pass) {
        v.overall = Overall::consensus;
        v.rationale = "A is not Hurwitz; connectivity gaps stay in a bounded prefix (condition 1) "
                      "and all subsystem probes decayed (condition 2).";
    } else if (v.condition2 == ProbeStatus::fail) {
        v.overall = Overall::no_consensus;
        v.rationale = "A is not Hurwitz; a nonzero-eigenvalue subsystem probe diverged or failed "
                      "to decay (condition 2 fails).";
    } else {
        v.overall = Overall::inconclusive;
        v.rationale = "A is not Hurwitz and the subsystem probes were borderline: decay was "
                      "observed but did not reach the decay factor.";
    }
    return v;
}

RobustnessReport robustness_probe(const AgentSystem& sys, const RealVector& x0,
                                  double bound_scale, std::size_t n_samples, std::uint64_t seed,
                                  double dt, double t_end, double decay_factor) {
    validate_sim_args(sys, x0, dt, t_end);
    if (n_samples == 0) throw invalid_input("robustness_probe: n_samples must be >= 1");
    if (!(bound_scale >= 0.0)) throw invalid_input("robustness_probe: bound_scale must be >= 0");

    const std::size_t n = sys.n_agents;
    const std::vector<RealMatrix> base = segment_laplacians(sys.schedule);
    const double threshold = decay_factor * std::max(1.0, swarm_deviation(x0, n, sys.d));

    Rng rng(seed);
    RobustnessReport rep;
    rep.bound_scale = bound_scale;
    rep.n_samples = n_samples;

    for (std::size_t sample = 0; sample < n_samples; ++sample) {
        const double mag = bound_scale * rng.unit();

        // Zero-row-sum topology offsets keep the perturbed system in the
        // Laplacian family, the structured class the theory perturbs within.
        std::vector<RealMatrix> ls = base;
        for (RealMatrix& l : ls) {
            RealMatrix offset(n, n);
            double fr = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double mean = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    offset(i, j) = rng.uniform(-1.0, 1.0);
                    mean += offset(i, j);
                }
                mean /= static_cast<double>(n);
                for (std::size_t j = 0; j < n; ++j) {
                    offset(i, j) -= mean;
                    fr += offset(i, j) * offset(i, j);
                }
            }
            fr = std::sqrt(fr);
            const double scale = fr > 0.0 ? mag / fr : 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) l(i, j) -= scale * offset(i, j);
        }

        double final_dev = 0.0;
        const auto record = [&](double, const RealVector& x) {
            final_dev = swarm_deviation(x, n, sys.d);
        };
        const bool ok = integrate_stacked(sys, ls, x0, dt, t_end, record);
        rep.samples.push_back({mag, ok && final_dev <= threshold});
    }

    std::size_t converged = 0;
    for (const RobustnessSample& s : rep.samples)
        if (s.converged) ++converged;
    rep.fraction_converged =
        static_cast<double>(converged) / static_cast<double>(n_samples);

    std::vector<RobustnessSample> sorted = rep.samples;
    std::sort(sorted.begin(), sorted.end(),
              [](const RobustnessSample& a, const RobustnessSample& b) {
                  return a.magnitude < b.magnitude;
              });
    double largest = 0.0;
    for (const RobustnessSample& s : sorted) {
        if (!s.converged) break;
        largest = s.magnitude;
    }
    rep.largest_scale_all_converged = largest;
    return rep;
}

}  // namespace neardiag

// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances and its runtime budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "neardiag/cli.hpp"
#include "neardiag/decoupler.hpp"
#include "neardiag/errors.hpp"
#include "neardiag/rng.hpp"
#include "neardiag/sim.hpp"
#include "support/oracles.hpp"

using namespace neardiag;
namespace oracle = neardiag::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Failure {
    std::string what;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure{what};
}

double rowsum_norm(const ComplexMatrix& m) {
    const ComplexVector ones(m.cols(), cplx(1.0, 0.0));
    return vector_norm(m * ones);
}

double min_gap(const std::vector<cplx>& ev) {
    double g = 1e300;
    for (std::size_t i = 0; i < ev.size(); ++i)
        for (std::size_t j = i + 1; j < ev.size(); ++j) g = std::min(g, std::abs(ev[i] - ev[j]));
    return g;
}

/// Two disconnected clusters: repeated zero eigenvalue, never a spanning tree.
LaplacianMatrix split_cluster_laplacian(Rng& rng, std::size_t n) {
    const std::size_t half = n / 2;
    RealVector w(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const bool same = (i < half) == (j < half);
            if (same && rng.unit() < 0.8) w[i * n + j] = rng.uniform(0.2, 1.5);
        }
    return laplacian(WeightedDigraph(n, std::move(w)));
}

// ---------------------------------------------------------------------------

Outcome criterion_perturbation_invariants() {
    std::size_t defective_count = 0;
    std::size_t cases = 0;
    for (std::size_t i = 0; i < 100; ++i) {
        Rng rng(1000 + i);
        const std::size_t n = 3 + i % 8;  // N in {3..10}
        const LaplacianMatrix l = [&] {
            if (i % 5 == 0) {
                ++defective_count;
                return oracle::directed_path_laplacian(n);
            }
            if (i % 5 == 1) {
                ++defective_count;
                return split_cluster_laplacian(rng, n);
            }
            return laplacian(oracle::random_digraph(rng, n, 0.4, 0.1, 2.0));
        }();
        const double gap_tol = default_gap_tol(l.frob_norm());
        const double scale = 1.0 + l.frob_norm();

        for (double eps : {1e-2, 1e-4}) {
            const PerturbationResult res = construct_perturbation(l, eps, gap_tol, false, i);
            ++cases;
            require(res.achieved_sq_distance < eps, "squared distance exceeded the budget");
            require(rowsum_norm(res.perturbed) <= 1e-9 * scale, "row sums not preserved");
            require(res.min_gap_after > gap_tol, "eigenvalue gap below tolerance");
            require(min_gap(res.spectrum_after) > gap_tol, "reported spectrum not separated");
            const double bound = std::sqrt(2.0 * eps / (static_cast<double>(n) * (n + 1)));
            for (const cplx& e : res.e_matrix.data())
                require(std::abs(e) < bound, "entrywise perturbation bound violated");
            const double recomputed = frobenius_distance(res.perturbed, l.to_complex());
            require(recomputed * recomputed < eps, "recomputed distance exceeded the budget");
        }
    }
    require(defective_count >= 20, "test matrix pool lacks defective constructions");
    return {true, std::to_string(cases) + " perturbations, " +
                      std::to_string(defective_count) + " repeated-spectrum inputs"};
}

Outcome criterion_schur_suite() {
    Rng rng(2);
    for (int rep = 0; rep < 100; ++rep) {
        ComplexMatrix a(5, 5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
        const SchurForm s = schur_decompose(a);
        const double na = frobenius_norm(a);
        require(frobenius_distance(s.u * s.t * s.u.adjoint(), a) <= 1e-8 * na,
                "Schur reconstruction residual too large");
        require(frobenius_distance(s.u.adjoint() * s.u, ComplexMatrix::identity(5)) <= 1e-10 * 5,
                "unitarity residual too large");
        const ComplexMatrix u = schur_decompose(oracle::random_complex_matrix(rng, 5, -1, 1)).u;
        require(std::abs(frobenius_norm(u * a * u.adjoint()) - na) <= 1e-10 * na,
                "Frobenius norm not preserved under unitary similarity");
    }
    return {true, "100 matrices"};
}

Outcome criterion_charpoly_discriminant() {
    Rng rng(3);
    for (int rep = 0; rep < 1000; ++rep) {
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        const double c = rng.uniform(-2, 2), d = rng.uniform(-2, 2);
        const Polynomial p = char_poly(ComplexMatrix::from_rows({{a, b}, {c, d}}));
        require(std::abs(p.coeffs()[1] + (a + d)) <= 1e-12 * (1.0 + std::abs(a + d)),
                "trace coefficient mismatch");
        require(std::abs(p.coeffs()[2] - (a * d - b * c)) <=
                    1e-12 * (1.0 + std::abs(a * d - b * c)),
                "determinant coefficient mismatch");
    }
    for (int rep = 0; rep < 200; ++rep) {
        const double a = rng.uniform(-2, 2), d = rng.uniform(-2, 2);
        double b = rng.uniform(-2, 2);
        if (std::abs(b) < 0.1) b = 0.7;
        const double c = (a * d - 0.25 * (a + d) * (a + d)) / b;
        const auto on = ComplexMatrix::from_rows({{a, b}, {c, d}});
        require(std::abs(discriminant(char_poly(on))) <= 1e-8 * (1.0 + frobenius_norm(on)),
                "constructed repeated root not detected");
        const auto off = ComplexMatrix::from_rows({{a, b}, {c + rng.uniform(0.5, 1.5), d}});
        require(std::abs(discriminant(char_poly(off))) > 1e-8,
                "separated spectrum flagged as repeated");
    }

    std::size_t close_gaps = 0;
    const std::size_t samples = 10000;
    for (std::size_t rep = 0; rep < samples; ++rep) {
        ComplexMatrix a(4, 4);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
        if (min_gap(eigenvalues(a)) < 1e-6) ++close_gaps;
    }
    require(close_gaps < samples / 100, "more than 1% of samples had a near-repeated spectrum");
    return {true, std::to_string(close_gaps) + "/10000 near-repeated spectra"};
}

Outcome criterion_spanning_tree() {
    Rng rng(4);
    std::size_t with_tree = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rep % 7;  // N <= 8
        const WeightedDigraph g = oracle::random_digraph(rng, n, 0.3, 0.2, 2.0);
        const LaplacianMatrix l = laplacian(g);
        const double tol = 1e-7 * (1.0 + l.frob_norm());
        std::size_t zeros = 0;
        for (const cplx& ev : eigenvalues(l.to_complex()))
            if (std::abs(ev) <= tol) ++zeros;
        const bool tree = has_spanning_tree(g);
        if (tree) ++with_tree;
        require(tree == (zeros == 1), "graph-search and spectral tests disagree");
    }
    require(with_tree > 10 && with_tree < 190, "sample did not cover both outcomes");
    return {true, "200 digraphs, " + std::to_string(with_tree) + " with a spanning tree"};
}

Outcome criterion_closed_form_consensus() {
    const TopologySchedule sched({{0.0, WeightedDigraph(2, {0, 1, 1, 0})}}, 10.0);
    const AgentSystem sys(RealMatrix(1, 1, {0.0}), RealMatrix(1, 1, {1.0}), sched);
    const SimulationTrace tr = simulate(sys, {1.0, -1.0}, 1e-3, 5.0);
    require(!tr.divergent, "unexpected divergence");
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        worst =
            std::max(worst, std::abs(tr.deviations[k] - 2.0 * std::exp(-2.0 * tr.times[k])));
    require(worst <= 1e-6, "deviation strayed from 2 e^{-2t}");
    char buf[64];
    std::snprintf(buf, sizeof buf, "max offset %.2e", worst);
    return {true, buf};
}

Outcome criterion_decoupled_equivalence() {
    Rng rng(6);
    const RealMatrix a = RealMatrix::from_rows({{0.0, 1.0}, {-1.0, -0.5}});
    const RealMatrix f = RealMatrix::from_rows({{0.5, 0.0}, {0.0, 0.5}});
    int done = 0;
    while (done < 20) {
        const WeightedDigraph g = oracle::random_connected_digraph(rng, 4, 0.6, 0.3, 1.5);
        const LaplacianMatrix l = laplacian(g);
        const double gap_tol = default_gap_tol(l.frob_norm());
        if (assess_diagonalizability(l.to_complex(), gap_tol).verdict !=
            Diagnosis::diagonalizable)
            continue;
        ++done;

        const TopologySchedule sched({{0.0, g}}, 10.0);
        const AgentSystem sys(a, f, sched);
        RealVector x0(8);
        for (double& v : x0) v = rng.uniform(-1.0, 1.0);

        const DecoupledSystem dec =
            decouple(l.to_complex(), a.to_complex(), f.to_complex(), gap_tol);
        const SimulationTrace direct = simulate(sys, x0, 1e-3, 5.0);
        const SimulationTrace via = simulate_decoupled(sys, {dec}, x0, 1e-3, 5.0);
        require(direct.times.size() == via.times.size(), "sample grids differ");

        double sup = 0.0;
        for (const RealVector& x : direct.states) sup = std::max(sup, vector_norm(x));
        const double tol = 1e-6 * (1.0 + sup);
        for (std::size_t k = 0; k < direct.times.size(); ++k)
            for (std::size_t i = 0; i < 8; ++i)
                require(std::abs(direct.states[k][i] - via.states[k][i]) <= tol,
                        "trace mismatch between direct and decoupled integration");
    }
    return {true, "20 topologies, pointwise agreement"};
}

Outcome criterion_verdict_scenarios() {
    ProbeOptions opts;
    opts.seed = 7;

    const auto deviation_non_decreasing = [&](const SimulationTrace& tr) {
        require(!tr.divergent, "scenario trajectory overflowed");
        const std::size_t q = tr.deviations.size() * 3 / 4;
        for (std::size_t k = q; k + 1 < tr.deviations.size(); ++k)
            require(tr.deviations[k + 1] >= tr.deviations[k] - 1e-12,
                    "deviation decreased in the final quarter");
    };

    {  // consensus: marginal A, connected topology
        const WeightedDigraph g(3, {0, 1, 0.5, 1, 0, 1, 0.5, 1, 0});
        const AgentSystem sys(RealMatrix(1, 1, {0.0}), RealMatrix(1, 1, {1.0}),
                              TopologySchedule({{0.0, g}}, 50.0));
        const ConsensusVerdict v = check_consensus(sys, opts);
        require(v.overall == Overall::consensus, "consensus scenario misjudged");
        const SimulationTrace tr = simulate(sys, {1.0, -1.0, 0.5}, 1e-3, 50.0);
        require(tr.deviations.back() < 1e-3, "consensus scenario did not converge");
    }
    {  // no consensus: unstable A, spanning tree lost forever
        const WeightedDigraph conn(3, {0, 1, 1, 1, 0, 1, 1, 1, 0});
        const WeightedDigraph split(3, {0, 1, 0, 1, 0, 0, 0, 0, 0});
        const AgentSystem sys(RealMatrix(1, 1, {0.2}), RealMatrix(1, 1, {1.0}),
                              TopologySchedule({{0.0, conn}, {10.0, split}}, 50.0));
        const ConsensusVerdict v = check_consensus(sys, opts);
        require(v.overall == Overall::no_consensus, "disconnected scenario misjudged");
        require(!v.condition1_holds, "condition 1 should fail");
        deviation_non_decreasing(simulate(sys, {1.0, -1.0, 0.5}, 1e-3, 50.0));
    }
    {  // no consensus: Hurwitz A, F destabilizes the lambda = 3 subsystems
        const WeightedDigraph complete(3, {0, 1, 1, 1, 0, 1, 1, 1, 0});
        const AgentSystem sys(RealMatrix(1, 1, {-1.0}), RealMatrix(1, 1, {-0.4}),
                              TopologySchedule({{0.0, complete}}, 50.0));
        ProbeOptions capped = opts;
        capped.t_end = 30.0;  // growth stays below the blowup cap, still decisive
        const ConsensusVerdict v = check_consensus(sys, capped);
        require(v.hurwitz_a, "A should be Hurwitz");
        require(v.condition2 == ProbeStatus::fail, "condition 2 should fail");
        require(v.overall == Overall::no_consensus, "Hurwitz scenario misjudged");
        deviation_non_decreasing(simulate(sys, {1.0, -1.0, 0.5}, 1e-3, 50.0));
    }
    return {true, "3 scenarios, verdicts corroborated by simulation"};
}

Outcome criterion_integrator_order() {
    Rng rng(8);
    const WeightedDigraph g = oracle::random_connected_digraph(rng, 3, 0.8, 0.5, 1.5);
    const RealMatrix a = RealMatrix::from_rows({{0.0, 1.0}, {-1.0, -0.4}});
    const RealMatrix f = RealMatrix::from_rows({{0.4, 0.0}, {0.0, 0.4}});
    const AgentSystem sys(a, f, TopologySchedule({{0.0, g}}, 10.0));
    RealVector x0(6);
    for (double& v : x0) v = rng.uniform(-1.0, 1.0);

    const LaplacianMatrix l = laplacian(g);
    RealMatrix big(6, 6);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t r = 0; r < 2; ++r)
                for (std::size_t c = 0; c < 2; ++c)
                    big(i * 2 + r, j * 2 + c) =
                        (i == j ? a(r, c) : 0.0) - l.entry(i, j) * f(r, c);

    const auto max_err = [&](double dt) {
        const SimulationTrace tr = simulate(sys, x0, dt, 2.0);
        double worst = 0.0;
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            const ComplexMatrix flow = oracle::expm(cplx(tr.times[k], 0.0) * big.to_complex());
            for (std::size_t i = 0; i < 6; ++i) {
                cplx acc(0.0, 0.0);
                for (std::size_t j = 0; j < 6; ++j) acc += flow(i, j) * x0[j];
                worst = std::max(worst, std::abs(acc.real() - tr.states[k][i]));
            }
        }
        return worst;
    };
    const double coarse = max_err(0.08);
    const double fine = max_err(0.04);
    require(coarse / fine >= 12.0, "error did not shrink 12x under dt halving");
    char buf[64];
    std::snprintf(buf, sizeof buf, "error ratio %.1f", coarse / fine);
    return {true, buf};
}

Outcome criterion_cli_determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = "acceptance_tmp";
    fs::create_directories(dir);
    const fs::path cfg = dir / "scenario.json";
    {
        std::ofstream out(cfg);
        out << R"({
          "a": [[0.0]],
          "f": [[1.0]],
          "schedule": [{"t_start": 0.0, "weights": [[0, 0, 0], [1, 0, 0], [0, 1, 0]]}],
          "horizon_end": 50.0,
          "x0": [1.0, 0.0, -1.0],
          "solver": {"epsilon": 1e-4, "seed": 13}
        })";
    }
    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    for (const std::string sub : {"check", "decouple"}) {
        const fs::path o1 = dir / (sub + "_1.json");
        const fs::path o2 = dir / (sub + "_2.json");
        const int r1 = run_cli({sub, "--config", cfg.string(), "--output", o1.string()});
        const int r2 = run_cli({sub, "--config", cfg.string(), "--output", o2.string()});
        require(r1 == r2, sub + " exit codes differ between runs");
        const std::string b1 = slurp(o1);
        require(!b1.empty(), sub + " produced no output");
        require(b1 == slurp(o2), sub + " output is not byte-identical");
    }
    return {true, "check and decouple reruns byte-identical"};
}

// ---------------------------------------------------------------------------

struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"eps-perturbation invariants on 100 Laplacians", 30.0, criterion_perturbation_invariants},
        {"Schur reconstruction / unitary invariance", 5.0, criterion_schur_suite},
        {"characteristic polynomial and discriminant", 10.0, criterion_charpoly_discriminant},
        {"spanning tree vs simple zero eigenvalue", 5.0, criterion_spanning_tree},
        {"closed-form two-agent consensus", 2.0, criterion_closed_form_consensus},
        {"decoupled-vs-direct trace equivalence", 20.0, criterion_decoupled_equivalence},
        {"consensus verdict scenario matrix", 30.0, criterion_verdict_scenarios},
        {"integrator order under dt halving", 5.0, criterion_integrator_order},
        {"CLI determinism (check, decouple)", 60.0, criterion_cli_determinism},
    };

    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const Criterion& c = criteria[k];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const Failure& f) {
            out = {false, f.what};
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (out.pass && secs > c.budget_seconds) {
            out.pass = false;
            out.detail += " [runtime budget exceeded]";
        }
        if (!out.pass) ++failures;
        std::printf("criterion %zu/%zu: %-48s %s  (%.2fs)  %s\n", k + 1, criteria.size(), c.name,
                    out.pass ? "PASS" : "FAIL", secs, out.detail.c_str());
        std::fflush(stdout);
    }
    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    return failures;
}

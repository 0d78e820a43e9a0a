#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "neardiag/decoupler.hpp"
#include "neardiag/errors.hpp"
#include "neardiag/rng.hpp"
#include "neardiag/schur.hpp"
#include "support/oracles.hpp"

using namespace neardiag;
namespace oracle = neardiag::testing;

namespace {

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

/// Every PerturbationResult type invariant, checked from the fields plus a
/// recomputation of the perturbed spectrum.
void check_perturbation_invariants(const LaplacianMatrix& l, double epsilon, double gap_tol,
                                   const PerturbationResult& res) {
    const std::size_t n = l.size();
    CHECK(res.achieved_sq_distance < epsilon);
    CHECK(rowsum_norm(res.perturbed) <= 1e-9 * (1.0 + l.frob_norm()));
    CHECK(res.min_gap_after > gap_tol);

    const double bound = std::sqrt(2.0 * epsilon / (static_cast<double>(n) * (n + 1)));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j < i)
                CHECK(res.e_matrix(i, j) == cplx(0.0, 0.0));
            else
                CHECK(std::abs(res.e_matrix(i, j)) < bound);
        }
    }

    // Independent recomputation: the spectrum of the perturbed matrix matches
    // the reported targets. Near a length-k Jordan chain an eigenvalue moves
    // by ~eps^(1/k) under the refactorization's backward error, so the match
    // tolerance must widen with n.
    std::vector<cplx> recomputed = eigenvalues(res.perturbed);
    const double match_tol =
        (1.0 + l.frob_norm()) * std::max(1e-6, 3.0 * std::pow(1e-16, 1.0 / static_cast<double>(n)));
    for (const cplx& target : res.spectrum_after) {
        const auto it = std::min_element(
            recomputed.begin(), recomputed.end(), [&](const cplx& a, const cplx& b) {
                return std::abs(a - target) < std::abs(b - target);
            });
        REQUIRE(it != recomputed.end());
        CHECK(std::abs(*it - target) <= match_tol);
        recomputed.erase(it);
    }
}

}  // namespace

TEST_CASE("assess: identity is diagonalizable despite the repeated eigenvalue") {
    const ComplexMatrix i2 = ComplexMatrix::identity(2);
    const DiagnosabilityReport rep = assess_diagonalizability(i2, default_gap_tol(std::sqrt(2.0)));
    CHECK(rep.verdict == Diagnosis::diagonalizable);
    CHECK_FALSE(rep.distinct_eigenvalues);
}

TEST_CASE("assess: Jordan block is defective") {
    const auto j = ComplexMatrix::from_rows({{0.0, 1.0}, {0.0, 0.0}});
    const DiagnosabilityReport rep = assess_diagonalizability(j, default_gap_tol(1.0));
    CHECK(rep.verdict == Diagnosis::defective);
    CHECK(std::isinf(rep.eigvec_condition));
}

TEST_CASE("assess: directed path Laplacian is defective") {
    const LaplacianMatrix l = oracle::directed_path_laplacian(3);
    const DiagnosabilityReport rep =
        assess_diagonalizability(l.to_complex(), default_gap_tol(l.frob_norm()));
    CHECK(rep.verdict == Diagnosis::defective);
    CHECK_FALSE(rep.distinct_eigenvalues);
    CHECK(rep.min_gap <= default_gap_tol(l.frob_norm()));
}

TEST_CASE("assess: distinct spectrum reports diagonalizable with finite condition") {
    Rng rng(3);
    const LaplacianMatrix l = laplacian(oracle::random_connected_digraph(rng, 5, 0.6, 0.2, 2.0));
    const DiagnosabilityReport rep =
        assess_diagonalizability(l.to_complex(), default_gap_tol(l.frob_norm()));
    CHECK(rep.distinct_eigenvalues);
    CHECK(rep.verdict == Diagnosis::diagonalizable);
    CHECK(std::isfinite(rep.eigvec_condition));
}

TEST_CASE("construct_perturbation: distinct spectrum accepts the zero perturbation") {
    Rng rng(13);
    const LaplacianMatrix l = laplacian(oracle::random_connected_digraph(rng, 4, 0.7, 0.5, 2.0));
    const double gap_tol = default_gap_tol(l.frob_norm());
    const PerturbationResult res = construct_perturbation(l, 1e-2, gap_tol, false, 1);
    CHECK(res.achieved_sq_distance == 0.0);
    CHECK(frobenius_distance(res.e_matrix, ComplexMatrix(4, 4)) == 0.0);
    CHECK(frobenius_distance(res.perturbed, l.to_complex()) == 0.0);
    check_perturbation_invariants(l, 1e-2, gap_tol, res);
}

TEST_CASE("construct_perturbation: two isolated vertices split the double zero") {
    const LaplacianMatrix l(2, {0.0, 0.0, 0.0, 0.0});
    const double eps = 1e-2;
    const double gap_tol = default_gap_tol(0.0);
    const PerturbationResult res = construct_perturbation(l, eps, gap_tol, false, 7);
    check_perturbation_invariants(l, eps, gap_tol, res);

    // Zero row sums force the shape [[a, -a], [b, -b]]: eigenvalues {0, a - b}.
    const cplx a = res.perturbed(0, 0);
    const cplx b = res.perturbed(1, 0);
    CHECK(std::abs(res.perturbed(0, 1) + a) < 1e-12);
    CHECK(std::abs(res.perturbed(1, 1) + b) < 1e-12);
    CHECK(std::abs(a - b) > gap_tol);
}

TEST_CASE("construct_perturbation: defective path Laplacian, both budgets") {
    for (double eps : {1e-2, 1e-4}) {
        const LaplacianMatrix l = oracle::directed_path_laplacian(3);
        const double gap_tol = default_gap_tol(l.frob_norm());
        const PerturbationResult res = construct_perturbation(l, eps, gap_tol, false, 42);
        check_perturbation_invariants(l, eps, gap_tol, res);
        CHECK(min_gap(res.spectrum_after) > gap_tol);
        // The structural zero eigenvalue stays pinned.
        CHECK(std::abs(res.spectrum_after[0]) <= 1e-9 * (1.0 + l.frob_norm()));
    }
}

TEST_CASE("construct_perturbation: monotone feasibility in the budget") {
    const LaplacianMatrix l = oracle::directed_path_laplacian(5);
    const double gap_tol = default_gap_tol(l.frob_norm());
    for (double eps : {1e-6, 1e-4, 1e-2, 1.0}) {
        const PerturbationResult res = construct_perturbation(l, eps, gap_tol, false, 5);
        check_perturbation_invariants(l, eps, gap_tol, res);
    }
}

TEST_CASE("construct_perturbation: realify produces a real perturbed Laplacian") {
    Rng rng(29);
    for (int rep = 0; rep < 8; ++rep) {
        // Asymmetric connected digraphs usually carry complex spectra; realify
        // must still deliver an entrywise-real perturbed matrix.
        const std::size_t n = 4 + rep % 3;
        const WeightedDigraph g = oracle::random_connected_digraph(rng, n, 0.5, 0.2, 2.0);
        const LaplacianMatrix l = laplacian(g);
        const double gap_tol = default_gap_tol(l.frob_norm());
        const PerturbationResult res = construct_perturbation(l, 1e-2, gap_tol, true, rep + 1);
        check_perturbation_invariants(l, 1e-2, gap_tol, res);
        CHECK(res.imag_residual <= 1e-9 * (1.0 + l.frob_norm()));
    }
}

TEST_CASE("construct_perturbation: realify on the defective path stays real") {
    const LaplacianMatrix l = oracle::directed_path_laplacian(4);
    const double gap_tol = default_gap_tol(l.frob_norm());
    const PerturbationResult res = construct_perturbation(l, 1e-4, gap_tol, true, 11);
    check_perturbation_invariants(l, 1e-4, gap_tol, res);
    CHECK(res.imag_residual <= 1e-9 * (1.0 + l.frob_norm()));
}

TEST_CASE("construct_perturbation: realify splits a doubled complex pair") {
    // Two identical directed 3-cycles: double zero plus two copies of a
    // conjugate pair. Equal-shift-per-pair targets stay conjugate-closed and
    // a real solution exists.
    RealVector w(36, 0.0);
    const auto arc = [&](int i, int j) { w[i * 6 + j] = 1.0; };
    arc(0, 1);
    arc(1, 2);
    arc(2, 0);
    arc(3, 4);
    arc(4, 5);
    arc(5, 3);
    const LaplacianMatrix l = laplacian(WeightedDigraph(6, w));
    const double gap_tol = default_gap_tol(l.frob_norm());
    const PerturbationResult res = construct_perturbation(l, 1e-2, gap_tol, true, 5);
    check_perturbation_invariants(l, 1e-2, gap_tol, res);
    CHECK(res.imag_residual <= 1e-9 * (1.0 + l.frob_norm()));
}

TEST_CASE("construct_perturbation: realify fails honestly on a near-real pair") {
    // A complex pair with |Im| ~ 9e-9 sits below the distinctness floor but
    // cannot be separated by the equal real shifts realness demands.
    RealVector w(25, 0.0);
    w[0 * 5 + 1] = 1.0;
    w[1 * 5 + 0] = 1.0;
    const double feeble = 1e-8;
    w[2 * 5 + 3] = feeble;
    w[3 * 5 + 4] = feeble;
    w[4 * 5 + 2] = feeble;
    const LaplacianMatrix l = laplacian(WeightedDigraph(5, w));
    CHECK_THROWS_AS(
        construct_perturbation(l, 1e-4, default_gap_tol(l.frob_norm()), true, 6),
        numerical_error);
}

TEST_CASE("construct_perturbation: budgets down to the noise floor") {
    const LaplacianMatrix l = oracle::directed_path_laplacian(3);
    const double gap_tol = default_gap_tol(l.frob_norm());
    const PerturbationResult ok = construct_perturbation(l, 1e-10, gap_tol, false, 1);
    check_perturbation_invariants(l, 1e-10, gap_tol, ok);
    // Separations affordable under eps = 1e-12 sink below the floor where
    // floating eigenvalues can certify distinctness.
    CHECK_THROWS_AS(construct_perturbation(l, 1e-12, gap_tol, false, 2), numerical_error);
}

TEST_CASE("construct_perturbation: input validation") {
    const LaplacianMatrix l = oracle::directed_path_laplacian(3);
    CHECK_THROWS_AS(construct_perturbation(l, 0.0, 1e-8, false, 1), invalid_input);
    CHECK_THROWS_AS(construct_perturbation(l, -1.0, 1e-8, false, 1), invalid_input);
}

TEST_CASE("construct_perturbation: infeasible when gap_tol eats the whole budget") {
    const LaplacianMatrix l = oracle::directed_path_laplacian(3);
    // Separating the double eigenvalue by more than 1.0 needs |e| > 0.5, but
    // the budget keeps every entry below sqrt(2e-4/12) ~ 4e-3.
    CHECK_THROWS_AS(construct_perturbation(l, 1e-4, 1.0, false, 1), numerical_error);
}

TEST_CASE("decouple: diagonal input") {
    ComplexMatrix l(3, 3);
    l(1, 1) = 2.0;
    l(2, 2) = 5.0;
    const DecoupledSystem dec =
        decouple(l, ComplexMatrix::identity(1), ComplexMatrix::identity(1), 1e-8);
    CHECK(std::abs(dec.lambda[0]) < 1e-12);
    CHECK(std::abs(dec.lambda[1] - 2.0) < 1e-12);
    CHECK(std::abs(dec.lambda[2] - 5.0) < 1e-12);
    CHECK(dec.transform_condition < 1.0 + 1e-9);
}

TEST_CASE("decouple: two-agent example gives subsystems {0, -2}") {
    const auto l = ComplexMatrix::from_rows({{1.0, -1.0}, {-1.0, 1.0}});
    ComplexMatrix a(1, 1), f(1, 1);
    f(0, 0) = 1.0;
    const DecoupledSystem dec = decouple(l, a, f, 1e-8);
    REQUIRE(dec.lambda.size() == 2);
    CHECK(std::abs(dec.lambda[0]) < 1e-12);
    CHECK(std::abs(dec.lambda[1] - 2.0) < 1e-10);
    CHECK(std::abs(dec.subsystems[0](0, 0)) < 1e-12);
    CHECK(std::abs(dec.subsystems[1](0, 0) + 2.0) < 1e-10);
}

TEST_CASE("decouple: similarity residual on random diagonalizable matrices") {
    Rng rng(37);
    int done = 0;
    while (done < 12) {
        const ComplexMatrix l = oracle::random_complex_matrix(rng, 4, -1.0, 1.0);
        const double gap_tol = default_gap_tol(frobenius_norm(l));
        if (assess_diagonalizability(l, gap_tol).verdict != Diagnosis::diagonalizable) continue;
        ++done;
        const DecoupledSystem dec =
            decouple(l, ComplexMatrix::identity(2), ComplexMatrix::identity(2), gap_tol);
        ComplexMatrix lam(4, 4);
        for (std::size_t i = 0; i < 4; ++i) lam(i, i) = dec.lambda[i];
        const double resid = frobenius_distance(dec.transform * l * dec.transform_inv, lam);
        CHECK(resid <= 1e-7 * std::max(1.0, frobenius_norm(l)));
        REQUIRE(dec.subsystems.size() == 4);
        CHECK(std::abs(dec.subsystems[2](0, 0) - (1.0 - dec.lambda[2])) < 1e-12);
    }
}

TEST_CASE("decouple: defective input throws") {
    const LaplacianMatrix l = oracle::directed_path_laplacian(3);
    CHECK_THROWS_AS(decouple(l.to_complex(), ComplexMatrix::identity(1),
                             ComplexMatrix::identity(1), default_gap_tol(l.frob_norm())),
                    invalid_input);
}

TEST_CASE("decouple after perturbation keeps exactly one zero eigenvalue") {
    Rng rng(43);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 3 + rep % 5;
        const WeightedDigraph g = oracle::random_connected_digraph(rng, n, 0.4, 0.2, 2.0);
        const LaplacianMatrix l = laplacian(g);
        const double gap_tol = default_gap_tol(l.frob_norm());
        const PerturbationResult pr = construct_perturbation(l, 1e-4, gap_tol, false, rep);
        const DecoupledSystem dec = decouple(pr.perturbed, ComplexMatrix::identity(1),
                                             ComplexMatrix::identity(1), gap_tol);
        std::size_t zeros = 0;
        for (const cplx& lam : dec.lambda)
            if (std::abs(lam) <= 1e-9 * (1.0 + l.frob_norm())) ++zeros;
        CHECK(zeros == 1);
        CHECK(std::abs(dec.lambda[0]) <= 1e-9 * (1.0 + l.frob_norm()));
    }
}

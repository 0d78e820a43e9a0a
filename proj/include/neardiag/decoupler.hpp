#pragma once

#include <cstdint>

#include "neardiag/graph.hpp"
#include "neardiag/matrix.hpp"
#include "neardiag/schur.hpp"

namespace neardiag {

/// Scale-aware default for treating two eigenvalues as identical.
inline double default_gap_tol(double source_norm) { return 1e-8 * (1.0 + source_norm); }

constexpr double kDefaultCondCap = 1e8;

enum class Diagnosis { diagonalizable, defective, borderline };

struct DiagnosabilityReport {
    bool distinct_eigenvalues = false;
    double min_gap = 0.0;
    double eigvec_condition = 0.0;  // +inf when defective
    Diagnosis verdict = Diagnosis::defective;
};

/// Distinct eigenvalues force a diagonalizable verdict. Repeated eigenvalues
/// fall back to a rank test: geometric multiplicity of each cluster from the
/// singular values of (L - lambda I) at threshold 1e-8 * (1 + ||L||_F). A
/// full-multiplicity spectrum whose eigenvector basis conditions worse than
/// cond_cap is reported borderline rather than trusted.
DiagnosabilityReport assess_diagonalizability(const ComplexMatrix& l, double gap_tol,
                                              double cond_cap = kDefaultCondCap);

struct PerturbationResult {
    ComplexMatrix e_matrix;   // upper triangular, in the Schur basis of L
    ComplexMatrix perturbed;  // L + U E U*
    double epsilon_budget = 0.0;
    double achieved_sq_distance = 0.0;  // sum |l_ij - l_ij(eps)|^2
    double min_gap_after = 0.0;
    double imag_residual = 0.0;          // largest |Im| entry of the perturbed matrix
    double max_positive_offdiag = 0.0;   // flags arc weights the perturbation turned negative
    std::vector<cplx> spectrum_after;    // zero eigenvalue first
    SchurForm schur;                     // zero-first Schur form of the input
};

/// Build an upper-triangular E in the Schur basis of L such that
/// L + U E U* has pairwise distinct eigenvalues {0, l2+e22, ...}, keeps zero
/// row sums, and satisfies sum |e_ij|^2 < epsilon entrywise-bounded by
/// sqrt(2 eps / (N (N+1))). Diagonal targets spread the spectrum; the
/// remaining entries are the minimum-norm solution of the row-sum constraints.
/// With `realify` the perturbation is additionally constrained to be entrywise
/// real, which may be infeasible; failures report the best attempt.
PerturbationResult construct_perturbation(const LaplacianMatrix& l, double epsilon,
                                          double gap_tol, bool realify, std::uint64_t seed);

struct DecoupledSystem {
    ComplexMatrix transform;      // T with T L T^{-1} = diag(lambda)
    ComplexMatrix transform_inv;  // cached T^{-1} (the eigenvector matrix)
    std::vector<cplx> lambda;     // zero eigenvalue first
    std::vector<ComplexMatrix> subsystems;  // A - lambda_i F
    double transform_condition = 0.0;
};

/// Eigendecomposition-based decoupling with the zero eigenvalue ordered first
/// and per-eigenvalue subsystem blocks A - lambda_i F. Requires a
/// diagonalizable verdict; throws on defective input or a transform whose
/// condition exceeds cond_cap.
DecoupledSystem decouple(const ComplexMatrix& l, const ComplexMatrix& a, const ComplexMatrix& f,
                         double gap_tol, double cond_cap = kDefaultCondCap);

}  // namespace neardiag

#pragma once

#include "neardiag/matrix.hpp"

namespace neardiag {

/// Unitary triangularization A = U T U*. The diagonal of T lists the
/// eigenvalues of A in the order the iteration produced them.
struct SchurForm {
    ComplexMatrix u;
    ComplexMatrix t;
    double source_norm = 0.0;
};

/// Householder reduction to upper Hessenberg followed by shifted QR iteration
/// (Wilkinson shift) with deflation. The iteration is capped at 100*N*N steps;
/// hitting the cap throws numerical_error carrying the worst remaining
/// subdiagonal residual relative to the source norm.
SchurForm schur_decompose(const ComplexMatrix& a);

/// Diagonal of schur_decompose(a).t.
std::vector<cplx> eigenvalues(const ComplexMatrix& a);

/// Reorder the Schur form in place so the eigenvalue currently at `index`
/// appears first on the diagonal (adjacent Givens swaps; U stays unitary).
void move_eigenvalue_to_front(SchurForm& s, std::size_t index);

/// Eigenvector matrix recovered from a Schur form by back substitution on T,
/// columns normalized to unit length. Near-defective input yields wildly
/// ill-conditioned columns; callers gate on a condition estimate.
ComplexMatrix eigenvector_matrix(const SchurForm& s);

}  // namespace neardiag

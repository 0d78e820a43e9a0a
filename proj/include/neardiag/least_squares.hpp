#pragma once

#include "neardiag/matrix.hpp"

namespace neardiag {

/// Minimum-Euclidean-norm solution of coeffs * x = rhs for an underdetermined
/// or square system (cols >= rows), via column-pivoted Householder QR of the
/// adjoint. Redundant-but-consistent rows are tolerated; the solve throws
/// numerical_error when the final residual exceeds 1e-9 * max(1, ||rhs||)
/// (rank-deficient rows with inconsistent right-hand side).
ComplexVector solve_min_norm(const ComplexMatrix& coeffs, const ComplexVector& rhs);

}  // namespace neardiag

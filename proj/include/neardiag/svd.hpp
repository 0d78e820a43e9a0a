#pragma once

#include "neardiag/matrix.hpp"

namespace neardiag {

/// Singular values in descending order, computed by one-sided Jacobi
/// orthogonalization (accurate for the small values a rank test needs).
std::vector<double> singular_values(const ComplexMatrix& a);

/// sigma_max / sigma_min; +inf when sigma_min underflows to zero.
double condition_estimate(const ComplexMatrix& a);

}  // namespace neardiag

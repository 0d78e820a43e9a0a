#pragma once

#include "neardiag/matrix.hpp"

namespace neardiag {

/// Packed LU factorization with partial pivoting, P*A = L*U.
class LuDecomposition {
public:
    explicit LuDecomposition(const ComplexMatrix& a);

    bool singular() const noexcept { return singular_; }
    cplx determinant() const;

    /// Solve A x = b. Throws numerical_error when the factorization is singular.
    ComplexVector solve(const ComplexVector& b) const;
    ComplexMatrix solve(const ComplexMatrix& b) const;

private:
    ComplexMatrix lu_;
    std::vector<std::size_t> perm_;
    int perm_sign_ = 1;
    bool singular_ = false;
};

cplx determinant(const ComplexMatrix& a);
ComplexMatrix inverse(const ComplexMatrix& a);

}  // namespace neardiag

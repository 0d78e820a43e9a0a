#pragma once

#include "neardiag/matrix.hpp"

namespace neardiag {

/// Dense polynomial with complex coefficients, leading coefficient first.
/// The leading coefficient must be nonzero.
class Polynomial {
public:
    explicit Polynomial(ComplexVector coeffs);

    std::size_t degree() const noexcept { return coeffs_.size() - 1; }
    const ComplexVector& coeffs() const noexcept { return coeffs_; }
    cplx leading() const noexcept { return coeffs_.front(); }

    cplx operator()(cplx x) const;  // Horner evaluation
    Polynomial derivative() const;  // requires degree >= 1

private:
    ComplexVector coeffs_;
};

/// Monic characteristic polynomial det(xI - A) via the Faddeev-LeVerrier
/// recurrence. Capped at N <= 20; coefficient growth swamps doubles beyond.
Polynomial char_poly(const ComplexMatrix& a);

/// Determinant of the (m+n)x(m+n) Sylvester matrix of f and g. Equals
/// a0^n * b0^m * prod_{i,j}(alpha_i - beta_j) over the root grids.
cplx resultant(const Polynomial& f, const Polynomial& g);

/// resultant(p, p'), kept as the raw Sylvester determinant with no
/// sign/leading-coefficient normalization: only the zero set matters, and it
/// vanishes exactly when p has a repeated root. For a monic quadratic
/// x^2 + bx + c this evaluates to -(b^2 - 4c).
cplx discriminant(const Polynomial& p);

}  // namespace neardiag

#include "neardiag/poly.hpp"

#include <cmath>

#include "neardiag/errors.hpp"
#include "neardiag/lu.hpp"

namespace neardiag {

Polynomial::Polynomial(ComplexVector coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw invalid_input("Polynomial: no coefficients");
    if (coeffs_.front() == cplx(0.0, 0.0))
        throw invalid_input("Polynomial: leading coefficient must be nonzero");
    for (const cplx& c : coeffs_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw invalid_input("Polynomial: non-finite coefficient");
}

cplx Polynomial::operator()(cplx x) const {
    cplx acc(0.0, 0.0);
    for (const cplx& c : coeffs_) acc = acc * x + c;
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (degree() < 1) throw invalid_input("Polynomial::derivative: constant polynomial");
    const std::size_t m = degree();
    ComplexVector d(m);
    for (std::size_t i = 0; i < m; ++i) d[i] = coeffs_[i] * static_cast<double>(m - i);
    return Polynomial(std::move(d));
}

Polynomial char_poly(const ComplexMatrix& a) {
    if (!a.square()) throw invalid_input("char_poly: matrix must be square");
    const std::size_t n = a.rows();
    if (n == 0) throw invalid_input("char_poly: empty matrix");
    if (n > 20) throw invalid_input("char_poly: dimension cap (N <= 20) exceeded");

    // Faddeev-LeVerrier: M_1 = A, c_k = -tr(M_k)/k, M_{k+1} = A (M_k + c_k I).
    ComplexVector coeffs(n + 1);
    coeffs[0] = 1.0;
    ComplexMatrix m = a;
    for (std::size_t k = 1; k <= n; ++k) {
        cplx tr(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) tr += m(i, i);
        const cplx ck = -tr / static_cast<double>(k);
        coeffs[k] = ck;
        if (k == n) break;
        for (std::size_t i = 0; i < n; ++i) m(i, i) += ck;
        m = a * m;
    }
    return Polynomial(std::move(coeffs));
}

cplx resultant(const Polynomial& f, const Polynomial& g) {
    const std::size_t m = f.degree();
    const std::size_t n = g.degree();
    if (m < 1 || n < 1) throw invalid_input("resultant: both degrees must be >= 1");

    ComplexMatrix syl(m + n, m + n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= m; ++j) syl(i, i + j) = f.coeffs()[j];
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j <= n; ++j) syl(n + i, i + j) = g.coeffs()[j];
    return determinant(syl);
}

cplx discriminant(const Polynomial& p) {
    if (p.degree() < 2) throw invalid_input("discriminant: degree must be >= 2");
    return resultant(p, p.derivative());
}

}  // namespace neardiag

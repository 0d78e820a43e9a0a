#include "neardiag/lu.hpp"

#include <cmath>

#include "neardiag/errors.hpp"

namespace neardiag {

LuDecomposition::LuDecomposition(const ComplexMatrix& a) : lu_(a) {
    if (!a.square()) throw invalid_input("LU: matrix must be square");
    const std::size_t n = a.rows();
    perm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(lu_(i, k));
            if (v > best) {
                best = v;
                pivot = i;
            }
        }
        if (best == 0.0) {
            singular_ = true;
            continue;
        }
        if (pivot != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(pivot, j));
            std::swap(perm_[k], perm_[pivot]);
            perm_sign_ = -perm_sign_;
        }
        const cplx d = lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx m = lu_(i, k) / d;
            lu_(i, k) = m;
            if (m == cplx(0.0, 0.0)) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
        }
    }
}

cplx LuDecomposition::determinant() const {
    cplx det(static_cast<double>(perm_sign_), 0.0);
    for (std::size_t i = 0; i < lu_.rows(); ++i) det *= lu_(i, i);
    return det;
}

ComplexVector LuDecomposition::solve(const ComplexVector& b) const {
    const std::size_t n = lu_.rows();
    if (b.size() != n) throw invalid_input("LU solve: dimension mismatch");
    if (singular_) throw numerical_error("LU solve: singular matrix", 0.0);

    ComplexVector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= lu_(ii, j) * x[j];
        x[ii] /= lu_(ii, ii);
    }
    return x;
}

ComplexMatrix LuDecomposition::solve(const ComplexMatrix& b) const {
    const std::size_t n = lu_.rows();
    if (b.rows() != n) throw invalid_input("LU solve: dimension mismatch");
    ComplexMatrix x(n, b.cols());
    ComplexVector col(n);
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = b(i, j);
        ComplexVector sol = solve(col);
        for (std::size_t i = 0; i < n; ++i) x(i, j) = sol[i];
    }
    return x;
}

cplx determinant(const ComplexMatrix& a) { return LuDecomposition(a).determinant(); }

ComplexMatrix inverse(const ComplexMatrix& a) {
    return LuDecomposition(a).solve(ComplexMatrix::identity(a.rows()));
}

}  // namespace neardiag

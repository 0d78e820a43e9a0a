#include "neardiag/least_squares.hpp"

#include <cmath>

#include "neardiag/errors.hpp"

namespace neardiag {

namespace {

/// Thin Householder QR with column pivoting, B ~ k x m. On return `b` holds R
/// in its upper triangle, `q` the orthonormal factor (k x min(k,m)), and
/// `perm` the column permutation applied to B.
struct PivotedQr {
    ComplexMatrix q;
    ComplexMatrix r;
    std::vector<std::size_t> perm;
};

PivotedQr pivoted_qr(ComplexMatrix b) {
    const std::size_t k = b.rows();
    const std::size_t m = b.cols();
    const std::size_t steps = std::min(k, m);

    std::vector<std::size_t> perm(m);
    std::vector<double> colsq(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        perm[j] = j;
        for (std::size_t i = 0; i < k; ++i) colsq[j] += std::norm(b(i, j));
    }

    std::vector<ComplexVector> reflectors;
    std::vector<double> betas;
    reflectors.reserve(steps);

    for (std::size_t j = 0; j < steps; ++j) {
        std::size_t pivot = j;
        for (std::size_t p = j + 1; p < m; ++p)
            if (colsq[p] > colsq[pivot]) pivot = p;
        if (pivot != j) {
            for (std::size_t i = 0; i < k; ++i) std::swap(b(i, j), b(i, pivot));
            std::swap(colsq[j], colsq[pivot]);
            std::swap(perm[j], perm[pivot]);
        }

        double nrm = 0.0;
        for (std::size_t i = j; i < k; ++i) nrm += std::norm(b(i, j));
        nrm = std::sqrt(nrm);

        ComplexVector v(k, cplx(0.0, 0.0));
        double beta = 0.0;
        if (nrm > 0.0) {
            const cplx x0 = b(j, j);
            const cplx phase = x0 == cplx(0.0, 0.0) ? cplx(1.0, 0.0) : x0 / std::abs(x0);
            const cplx alpha = phase * nrm;
            double vsq = 0.0;
            for (std::size_t i = j; i < k; ++i) {
                v[i] = b(i, j);
                if (i == j) v[i] += alpha;
                vsq += std::norm(v[i]);
            }
            if (vsq > 0.0) {
                beta = 2.0 / vsq;
                for (std::size_t c = j; c < m; ++c) {
                    cplx dot(0.0, 0.0);
                    for (std::size_t i = j; i < k; ++i) dot += std::conj(v[i]) * b(i, c);
                    dot *= beta;
                    for (std::size_t i = j; i < k; ++i) b(i, c) -= dot * v[i];
                }
            }
        }
        reflectors.push_back(std::move(v));
        betas.push_back(beta);

        for (std::size_t c = j + 1; c < m; ++c) {
            colsq[c] -= std::norm(b(j, c));
            if (colsq[c] < 0.0) colsq[c] = 0.0;
        }
    }

    PivotedQr out;
    out.perm = std::move(perm);
    out.r = ComplexMatrix(steps, m);
    for (std::size_t i = 0; i < steps; ++i)
        for (std::size_t j = i; j < m; ++j) out.r(i, j) = b(i, j);

    // Q = P_0 P_1 ... applied to the leading identity columns.
    out.q = ComplexMatrix(k, steps);
    for (std::size_t c = 0; c < steps; ++c) out.q(c, c) = 1.0;
    for (std::size_t j = steps; j-- > 0;) {
        if (betas[j] == 0.0) continue;
        const ComplexVector& v = reflectors[j];
        for (std::size_t c = 0; c < steps; ++c) {
            cplx dot(0.0, 0.0);
            for (std::size_t i = j; i < k; ++i) dot += std::conj(v[i]) * out.q(i, c);
            dot *= betas[j];
            for (std::size_t i = j; i < k; ++i) out.q(i, c) -= dot * v[i];
        }
    }
    return out;
}

}  // namespace

ComplexVector solve_min_norm(const ComplexMatrix& coeffs, const ComplexVector& rhs) {
    const std::size_t m = coeffs.rows();
    const std::size_t k = coeffs.cols();
    if (rhs.size() != m) throw invalid_input("solve_min_norm: rhs length mismatch");
    if (m == 0 || k == 0) throw invalid_input("solve_min_norm: empty system");
    if (!coeffs.all_finite()) throw invalid_input("solve_min_norm: non-finite coefficients");

    // A = Pi R* Q*, so R* y = Pi^T rhs with y = Q* x; the minimum-norm solution
    // is x = Q y, which lies in the row space of A.
    const PivotedQr f = pivoted_qr(coeffs.adjoint());
    const std::size_t steps = f.r.rows();  // min(k, m)

    ComplexVector c(m);
    for (std::size_t i = 0; i < m; ++i) c[i] = rhs[f.perm[i]];

    const double diag_tol =
        1e-12 * std::max(1.0, steps == 0 ? 0.0 : std::abs(f.r(0, 0)));

    // Forward substitution on the lower-trapezoidal R*. Rows past the numerical
    // rank contribute no new unknown; their residual is caught below.
    ComplexVector y(steps, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        cplx acc = c[i];
        const std::size_t jmax = std::min(i, steps);
        for (std::size_t j = 0; j < jmax; ++j) acc -= std::conj(f.r(j, i)) * y[j];
        if (i < steps) {
            const cplx d = std::conj(f.r(i, i));
            y[i] = std::abs(d) > diag_tol ? acc / d : cplx(0.0, 0.0);
        }
    }

    ComplexVector x = f.q * y;

    const ComplexVector ax = coeffs * x;
    double resid_sq = 0.0;
    for (std::size_t i = 0; i < m; ++i) resid_sq += std::norm(ax[i] - rhs[i]);
    const double resid = std::sqrt(resid_sq);
    if (resid > 1e-9 * std::max(1.0, vector_norm(rhs)))
        throw numerical_error("solve_min_norm: inconsistent or rank-deficient system", resid);
    return x;
}

}  // namespace neardiag

#include "neardiag/schur.hpp"

#include <cmath>
#include <limits>

#include "neardiag/errors.hpp"

namespace neardiag {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Givens {
    double c;  // real cosine
    cplx s;    // complex sine, c*c + |s|^2 = 1
};

/// Rotation with G*[f;g] = [r;0] for G = [[c,s],[-conj(s),c]] acting as
/// [f';g'] = [c*f + s*g; -conj(s)*f + c*g].
Givens make_givens(cplx f, cplx g) {
    if (g == cplx(0.0, 0.0)) return {1.0, cplx(0.0, 0.0)};
    if (f == cplx(0.0, 0.0)) {
        const double ag = std::abs(g);
        return {0.0, std::conj(g) / ag};
    }
    const double af = std::abs(f);
    const double d = std::hypot(af, std::abs(g));
    const cplx fs = f / af;
    return {af / d, fs * std::conj(g) / d};
}

/// Eigenvalue of [[a,b],[c,d]] closest to d (Wilkinson shift).
cplx wilkinson_shift(cplx a, cplx b, cplx c, cplx d) {
    const cplx m = 0.5 * (a + d);
    const cplx disc = std::sqrt(m * m - (a * d - b * c));
    const cplx l1 = m + disc;
    const cplx l2 = m - disc;
    return std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;
}

void hessenberg_reduce(ComplexMatrix& h, ComplexMatrix& u) {
    const std::size_t n = h.rows();
    if (n < 3) return;
    ComplexVector v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double colnorm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) colnorm += std::norm(h(i, k));
        colnorm = std::sqrt(colnorm);
        if (colnorm == 0.0) continue;

        const cplx x0 = h(k + 1, k);
        const cplx phase = x0 == cplx(0.0, 0.0) ? cplx(1.0, 0.0) : x0 / std::abs(x0);
        const cplx alpha = phase * colnorm;

        double vnorm_sq = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i] = h(i, k);
            if (i == k + 1) v[i] += alpha;
            vnorm_sq += std::norm(v[i]);
        }
        if (vnorm_sq == 0.0) continue;
        const double beta = 2.0 / vnorm_sq;

        // H <- P H P with P = I - beta v v* (Hermitian unitary).
        for (std::size_t j = k; j < n; ++j) {
            cplx dot(0.0, 0.0);
            for (std::size_t i = k + 1; i < n; ++i) dot += std::conj(v[i]) * h(i, j);
            dot *= beta;
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= dot * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            cplx dot(0.0, 0.0);
            for (std::size_t j = k + 1; j < n; ++j) dot += h(i, j) * v[j];
            dot *= beta;
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= dot * std::conj(v[j]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            cplx dot(0.0, 0.0);
            for (std::size_t j = k + 1; j < n; ++j) dot += u(i, j) * v[j];
            dot *= beta;
            for (std::size_t j = k + 1; j < n; ++j) u(i, j) -= dot * std::conj(v[j]);
        }

        h(k + 1, k) = -alpha;
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
}

}  // namespace

SchurForm schur_decompose(const ComplexMatrix& a) {
    if (!a.square()) throw invalid_input("schur_decompose: matrix must be square");
    if (!a.all_finite()) throw invalid_input("schur_decompose: non-finite entries");

    const std::size_t n = a.rows();
    SchurForm out;
    out.source_norm = frobenius_norm(a);
    out.u = ComplexMatrix::identity(n);
    out.t = a;
    if (n <= 1) return out;

    ComplexMatrix& h = out.t;
    ComplexMatrix& u = out.u;
    hessenberg_reduce(h, u);

    const std::size_t max_iters = 100 * n * n;
    std::size_t iters = 0;
    std::size_t stalled = 0;

    std::size_t hi = n - 1;
    while (hi > 0) {
        // Deflate converged subdiagonals at the bottom of the active block.
        bool deflated = false;
        for (std::size_t m = hi; m > 0; --m) {
            double thresh = kEps * (std::abs(h(m - 1, m - 1)) + std::abs(h(m, m)));
            if (thresh == 0.0) thresh = kEps * out.source_norm;
            if (std::abs(h(m, m - 1)) <= thresh) {
                h(m, m - 1) = 0.0;
                if (m == hi) {
                    --hi;
                    stalled = 0;
                    deflated = true;
                }
                break;
            }
        }
        if (deflated || hi == 0) continue;

        // Active block [lo, hi]: scan up to the first zero subdiagonal.
        std::size_t lo = hi;
        while (lo > 0 && h(lo, lo - 1) != cplx(0.0, 0.0)) --lo;

        if (++iters > max_iters) {
            double worst = 0.0;
            for (std::size_t m = 1; m < n; ++m) worst = std::max(worst, std::abs(h(m, m - 1)));
            throw numerical_error("schur_decompose: QR iteration did not converge",
                                  worst / std::max(out.source_norm, 1.0));
        }

        cplx shift;
        if (++stalled % 30 == 0) {
            // Stall breaker: deterministic exceptional shift.
            shift = h(hi, hi) + 0.75 * std::abs(h(hi, hi - 1));
        } else {
            shift = wilkinson_shift(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi));
        }

        // Explicit single-shift QR step on [lo, hi]: Q*(H - shift I) = R,
        // then H <- R Q + shift I, accumulating U <- U Q.
        for (std::size_t i = lo; i <= hi; ++i) h(i, i) -= shift;

        std::vector<Givens> rot(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) {
            const Givens g = make_givens(h(i, i), h(i + 1, i));
            rot[i - lo] = g;
            for (std::size_t j = i; j < n; ++j) {
                const cplx t0 = h(i, j), t1 = h(i + 1, j);
                h(i, j) = g.c * t0 + g.s * t1;
                h(i + 1, j) = -std::conj(g.s) * t0 + g.c * t1;
            }
        }
        for (std::size_t i = lo; i < hi; ++i) {
            const Givens& g = rot[i - lo];
            const std::size_t top = std::min(i + 2, hi + 1);
            for (std::size_t r = 0; r < top; ++r) {
                const cplx t0 = h(r, i), t1 = h(r, i + 1);
                h(r, i) = g.c * t0 + std::conj(g.s) * t1;
                h(r, i + 1) = -g.s * t0 + g.c * t1;
            }
            for (std::size_t r = 0; r < n; ++r) {
                const cplx t0 = u(r, i), t1 = u(r, i + 1);
                u(r, i) = g.c * t0 + std::conj(g.s) * t1;
                u(r, i + 1) = -g.s * t0 + g.c * t1;
            }
        }
        for (std::size_t i = lo; i <= hi; ++i) h(i, i) += shift;
    }

    // Clean the strict lower triangle; all of it is converged noise by now.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) h(i, j) = 0.0;
    return out;
}

std::vector<cplx> eigenvalues(const ComplexMatrix& a) {
    const SchurForm s = schur_decompose(a);
    std::vector<cplx> ev(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) ev[i] = s.t(i, i);
    return ev;
}

void move_eigenvalue_to_front(SchurForm& s, std::size_t index) {
    const std::size_t n = s.t.rows();
    if (index >= n) throw invalid_input("move_eigenvalue_to_front: index out of range");

    for (std::size_t k = index; k > 0; --k) {
        // Swap the adjacent diagonal pair (k-1, k) of T by a unitary similarity
        // built from the eigenvector of the 2x2 block for its lower eigenvalue.
        const cplx a = s.t(k - 1, k - 1);
        const cplx b = s.t(k - 1, k);
        const cplx c = s.t(k, k);
        const cplx v0 = b;
        const cplx v1 = c - a;
        const double vn = std::hypot(std::abs(v0), std::abs(v1));
        if (vn <= kEps * (std::abs(a) + std::abs(b) + std::abs(c))) {
            // Equal eigenvalues with negligible coupling: order is immaterial.
            continue;
        }
        const cplx g00 = v0 / vn, g10 = v1 / vn;
        // G = [[g00, -conj(g10)], [g10, conj(g00)]], first column the eigenvector.
        for (std::size_t j = 0; j < n; ++j) {  // T <- G* T (rows k-1, k)
            const cplx t0 = s.t(k - 1, j), t1 = s.t(k, j);
            s.t(k - 1, j) = std::conj(g00) * t0 + std::conj(g10) * t1;
            s.t(k, j) = -g10 * t0 + g00 * t1;
        }
        for (std::size_t i = 0; i < n; ++i) {  // T <- T G (cols k-1, k)
            const cplx t0 = s.t(i, k - 1), t1 = s.t(i, k);
            s.t(i, k - 1) = t0 * g00 + t1 * g10;
            s.t(i, k) = -t0 * std::conj(g10) + t1 * std::conj(g00);
        }
        for (std::size_t i = 0; i < n; ++i) {  // U <- U G
            const cplx u0 = s.u(i, k - 1), u1 = s.u(i, k);
            s.u(i, k - 1) = u0 * g00 + u1 * g10;
            s.u(i, k) = -u0 * std::conj(g10) + u1 * std::conj(g00);
        }
        s.t(k, k - 1) = 0.0;
    }
}

ComplexMatrix eigenvector_matrix(const SchurForm& s) {
    const std::size_t n = s.t.rows();
    const double den_floor = kEps * std::max(s.source_norm, 1.0);
    constexpr double kRescaleAt = 1e100;  // near-defective chains grow like (1/eps)^k
    ComplexMatrix vt(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        vt(k, k) = 1.0;
        for (std::size_t ii = k; ii-- > 0;) {
            cplx acc(0.0, 0.0);
            for (std::size_t j = ii + 1; j <= k; ++j) acc += s.t(ii, j) * vt(j, k);
            cplx den = s.t(ii, ii) - s.t(k, k);
            if (std::abs(den) < den_floor)
                den = den == cplx(0.0, 0.0) ? cplx(den_floor, 0.0)
                                            : den * (den_floor / std::abs(den));
            vt(ii, k) = -acc / den;
            const double mag = std::abs(vt(ii, k));
            if (mag > kRescaleAt) {
                // The recurrence is linear in the column; rescaling preserves
                // the direction and keeps everything finite.
                for (std::size_t j = ii; j <= k; ++j) vt(j, k) = vt(j, k) / mag;
            }
        }
        double colnorm = 0.0;
        for (std::size_t i = 0; i <= k; ++i) colnorm += std::norm(vt(i, k));
        colnorm = std::sqrt(colnorm);
        for (std::size_t i = 0; i <= k; ++i) vt(i, k) /= colnorm;
    }
    return s.u * vt;
}

}  // namespace neardiag

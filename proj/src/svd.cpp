#include "neardiag/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "neardiag/errors.hpp"

namespace neardiag {

namespace {

constexpr int kMaxSweeps = 60;
constexpr double kOrthTol = 1e-15;

}  // namespace

std::vector<double> singular_values(const ComplexMatrix& a) {
    if (a.empty()) return {};
    if (!a.all_finite()) throw invalid_input("singular_values: non-finite entries");

    // Work on the version with at least as many rows as columns; the nonzero
    // singular values of A and A* coincide and here min(m,n) values suffice.
    ComplexMatrix w = a.rows() >= a.cols() ? a : a.adjoint();
    const std::size_t m = w.rows(), n = w.cols();

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0;
                cplx apq(0.0, 0.0);
                for (std::size_t i = 0; i < m; ++i) {
                    app += std::norm(w(i, p));
                    aqq += std::norm(w(i, q));
                    apq += std::conj(w(i, p)) * w(i, q);
                }
                const double off = std::abs(apq);
                if (off <= kOrthTol * std::sqrt(app * aqq) || off == 0.0) continue;
                rotated = true;

                // Real Jacobi pair for [[app,|apq|],[|apq|,aqq]], phase folded
                // into the complex sine.
                const double zeta = (aqq - app) / (2.0 * off);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                const cplx phase = apq / off;
                const cplx s = sn * phase;

                for (std::size_t i = 0; i < m; ++i) {
                    const cplx wp = w(i, p), wq = w(i, q);
                    w(i, p) = cs * wp - std::conj(s) * wq;
                    w(i, q) = s * wp + cs * wq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += std::norm(w(i, j));
        sigma[j] = std::sqrt(s);
    }
    std::sort(sigma.begin(), sigma.end(), std::greater<>());
    return sigma;
}

double condition_estimate(const ComplexMatrix& a) {
    const std::vector<double> sigma = singular_values(a);
    if (sigma.empty()) return 1.0;
    const double smin = sigma.back();
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return sigma.front() / smin;
}

}  // namespace neardiag

#include "neardiag/decoupler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "neardiag/errors.hpp"
#include "neardiag/least_squares.hpp"
#include "neardiag/lu.hpp"
#include "neardiag/rng.hpp"
#include "neardiag/svd.hpp"

namespace neardiag {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// A defective eigenvalue splits by O(machine eps ^ (1/k) * scale) under
/// floating arithmetic for a length-k Jordan chain, which can exceed any
/// fixed gap_tol. Gaps below this floor are not trustworthy evidence of
/// distinctness.
double distinctness_floor(double gap_tol, double source_norm) {
    return std::max(gap_tol, 1e-7 * (1.0 + source_norm));
}

/// Widens the floor with the eigenvector-basis condition: a spectrum whose
/// eigenbasis conditions like 1/eps cannot certify gaps near the rounding
/// noise it amplifies. Capped at 5% of scale so widely separated eigenvalues
/// always count.
double trusted_distinctness_floor(double gap_tol, double source_norm, double eigvec_cond) {
    const double scale = 1.0 + source_norm;
    const double cap = 0.05 * scale;
    const double amplified =
        std::isfinite(eigvec_cond) ? std::min(1e-13 * eigvec_cond * scale, cap) : cap;
    return std::max(distinctness_floor(gap_tol, source_norm), amplified);
}

double min_pairwise_gap(const std::vector<cplx>& ev) {
    double g = kInf;
    for (std::size_t i = 0; i < ev.size(); ++i)
        for (std::size_t j = i + 1; j < ev.size(); ++j) g = std::min(g, std::abs(ev[i] - ev[j]));
    return g;
}

std::vector<cplx> diagonal_of(const ComplexMatrix& t) {
    std::vector<cplx> d(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i) d[i] = t(i, i);
    return d;
}

/// Schur form of a row-sum-zero matrix with the first Schur vector pinned to
/// ones/sqrt(N), so the structural zero eigenvalue leads the diagonal and the
/// perturbation U E U* annihilates the ones vector for any upper-triangular E
/// with a zero (1,1) entry.
SchurForm pinned_schur(const ComplexMatrix& lc) {
    const std::size_t n = lc.rows();
    SchurForm out;
    out.source_norm = frobenius_norm(lc);
    if (n == 1) {
        out.u = ComplexMatrix::identity(1);
        out.t = lc;
        return out;
    }

    // Householder reflection swapping e_0 and ones/sqrt(N).
    const double invsq = 1.0 / std::sqrt(static_cast<double>(n));
    RealVector w(n, -invsq);
    w[0] += 1.0;
    double wsq = 0.0;
    for (double v : w) wsq += v * v;

    ComplexMatrix q0 = ComplexMatrix::identity(n);
    if (wsq > 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) q0(i, j) -= 2.0 * w[i] * w[j] / wsq;
    }

    ComplexMatrix m = q0 * lc * q0;
    for (std::size_t i = 1; i < n; ++i) m(i, 0) = 0.0;  // L*ones ~ 0 makes this roundoff

    ComplexMatrix trailing(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 1; j < n; ++j) trailing(i - 1, j - 1) = m(i, j);
    const SchurForm inner = schur_decompose(trailing);

    out.t = ComplexMatrix(n, n);
    out.t(0, 0) = m(0, 0);
    for (std::size_t j = 1; j < n; ++j) {
        cplx acc(0.0, 0.0);
        for (std::size_t k = 1; k < n; ++k) acc += m(0, k) * inner.u(k - 1, j - 1);
        out.t(0, j) = acc;
    }
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 1; j < n; ++j) out.t(i, j) = inner.t(i - 1, j - 1);

    ComplexMatrix wide(n, n);
    wide(0, 0) = 1.0;
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 1; j < n; ++j) wide(i, j) = inner.u(i - 1, j - 1);
    out.u = q0 * wide;
    return out;
}

/// Partition eigenvalue indices 1..N-1 into target groups sharing one real
/// diagonal shift. Without realify every index is its own group; with realify
/// conjugate pairs are grouped so the shifted spectrum stays conjugate-closed.
std::vector<std::vector<std::size_t>> shift_groups(const std::vector<cplx>& ev, bool realify,
                                                   double im_tol) {
    const std::size_t n = ev.size();
    std::vector<std::vector<std::size_t>> groups;
    if (!realify) {
        for (std::size_t i = 1; i < n; ++i) groups.push_back({i});
        return groups;
    }
    std::vector<bool> used(n, false);
    for (std::size_t i = 1; i < n; ++i) {
        if (used[i]) continue;
        used[i] = true;
        if (std::abs(ev[i].imag()) <= im_tol) {
            groups.push_back({i});
            continue;
        }
        std::size_t mate = 0;
        double best = kInf;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (used[j]) continue;
            const double dist = std::abs(ev[j] - std::conj(ev[i]));
            if (dist < best) {
                best = dist;
                mate = j;
            }
        }
        if (mate != 0) {
            used[mate] = true;
            groups.push_back({i, mate});
        } else {
            groups.push_back({i});  // unmatched complex eigenvalue; realness may be infeasible
        }
    }
    return groups;
}

struct UpperIndex {
    std::size_t i, j;
};

std::vector<UpperIndex> strict_upper_indices(std::size_t n) {
    std::vector<UpperIndex> idx;
    idx.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) idx.push_back({i, j});
    return idx;
}

/// Minimum-norm strict-upper entries satisfying U E U* ones = 0 given the
/// diagonal shifts. All-complex variant.
ComplexVector solve_strict_upper(const SchurForm& sf, const RealVector& d,
                                 const std::vector<UpperIndex>& idx) {
    const std::size_t n = sf.t.rows();
    const ComplexVector ones(n, cplx(1.0, 0.0));
    const ComplexVector y = sf.u.adjoint() * ones;

    ComplexMatrix a(n, idx.size());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < idx.size(); ++c) a(r, c) = sf.u(r, idx[c].i) * y[idx[c].j];
    ComplexVector rhs(n, cplx(0.0, 0.0));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < n; ++i) rhs[r] -= d[i] * sf.u(r, i) * y[i];
    return solve_min_norm(a, rhs);
}

/// Realified variant: stacks the entrywise realness of U E U* and the row-sum
/// constraints as real equations over (Re, Im) of each strict-upper entry.
ComplexVector solve_strict_upper_real(const SchurForm& sf, const RealVector& d,
                                      const std::vector<UpperIndex>& idx) {
    const std::size_t n = sf.t.rows();
    const std::size_t m = idx.size();
    const ComplexVector ones(n, cplx(1.0, 0.0));
    const ComplexVector y = sf.u.adjoint() * ones;

    const std::size_t rows = n * n + 2 * n;
    ComplexMatrix a(rows, 2 * m);
    ComplexVector rhs(rows, cplx(0.0, 0.0));

    // Im(U E U*)_{pq} = 0. Coefficient of e_ij in (U E U*)_{pq} is
    // kappa = U(p,i) conj(U(q,j)); with e = x + iy the imaginary part is
    // x Im(kappa) + y Re(kappa).
    std::size_t r = 0;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q, ++r) {
            for (std::size_t c = 0; c < m; ++c) {
                const cplx kappa = sf.u(p, idx[c].i) * std::conj(sf.u(q, idx[c].j));
                a(r, 2 * c) = kappa.imag();
                a(r, 2 * c + 1) = kappa.real();
            }
            cplx diag_part(0.0, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                diag_part += d[i] * sf.u(p, i) * std::conj(sf.u(q, i));
            rhs[r] = -diag_part.imag();
        }
    }

    // (U E U* ones)_r = 0, split into real and imaginary rows.
    for (std::size_t rr = 0; rr < n; ++rr) {
        cplx acc(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) acc += d[i] * sf.u(rr, i) * y[i];
        for (std::size_t c = 0; c < m; ++c) {
            const cplx coef = sf.u(rr, idx[c].i) * y[idx[c].j];
            a(r, 2 * c) = coef.real();
            a(r, 2 * c + 1) = -coef.imag();
            a(r + 1, 2 * c) = coef.imag();
            a(r + 1, 2 * c + 1) = coef.real();
        }
        rhs[r] = -acc.real();
        rhs[r + 1] = -acc.imag();
        r += 2;
    }

    const ComplexVector z = solve_min_norm(a, rhs);
    ComplexVector s(m);
    for (std::size_t c = 0; c < m; ++c) s[c] = cplx(z[2 * c].real(), z[2 * c + 1].real());
    return s;
}

}  // namespace

DiagnosabilityReport assess_diagonalizability(const ComplexMatrix& l, double gap_tol,
                                              double cond_cap) {
    if (!l.square()) throw invalid_input("assess_diagonalizability: matrix must be square");
    if (!l.all_finite()) throw invalid_input("assess_diagonalizability: non-finite entries");

    const SchurForm sf = schur_decompose(l);
    const std::vector<cplx> ev = diagonal_of(sf.t);
    const std::size_t n = ev.size();

    DiagnosabilityReport rep;
    rep.min_gap = min_pairwise_gap(ev);
    rep.eigvec_condition = condition_estimate(eigenvector_matrix(sf));
    const double eff_tol =
        trusted_distinctness_floor(gap_tol, frobenius_norm(l), rep.eigvec_condition);
    rep.distinct_eigenvalues = rep.min_gap > eff_tol;

    if (rep.distinct_eigenvalues) {
        rep.verdict = Diagnosis::diagonalizable;
        return rep;
    }

    // Cluster coincident eigenvalues and compare geometric multiplicity
    // (rank of L - lambda I via singular values) against the cluster size.
    std::vector<std::size_t> cluster(n);
    for (std::size_t i = 0; i < n; ++i) cluster[i] = i;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(ev[i] - ev[j]) <= eff_tol) {
                const std::size_t a = cluster[i], b = cluster[j];
                if (a == b) continue;
                for (std::size_t k = 0; k < n; ++k)
                    if (cluster[k] == b) cluster[k] = a;
            }

    const double sigma_tol = 1e-8 * (1.0 + frobenius_norm(l));
    bool defective = false;
    for (std::size_t c = 0; c < n && !defective; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (cluster[i] == c) members.push_back(i);
        if (members.size() < 2) continue;
        cplx center(0.0, 0.0);
        for (std::size_t i : members) center += ev[i];
        center /= static_cast<double>(members.size());

        ComplexMatrix shifted = l;
        for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= center;
        const std::vector<double> sigma = singular_values(shifted);
        std::size_t rank = 0;
        for (double s : sigma)
            if (s > sigma_tol) ++rank;
        if (n - rank < members.size()) defective = true;
    }

    if (defective) {
        rep.eigvec_condition = kInf;
        rep.verdict = Diagnosis::defective;
    } else {
        rep.verdict =
            rep.eigvec_condition <= cond_cap ? Diagnosis::diagonalizable : Diagnosis::borderline;
    }
    return rep;
}

PerturbationResult construct_perturbation(const LaplacianMatrix& l, double epsilon,
                                          double gap_tol, bool realify, std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw invalid_input("construct_perturbation: epsilon must be positive");
    const std::size_t n = l.size();
    const double l_norm = l.frob_norm();
    const ComplexMatrix lc = l.to_complex();

    PerturbationResult res;
    res.epsilon_budget = epsilon;
    res.schur = pinned_schur(lc);
    const std::vector<cplx> ev = diagonal_of(res.schur.t);

    const double fast_path_floor = trusted_distinctness_floor(
        gap_tol, l_norm, condition_estimate(eigenvector_matrix(res.schur)));
    const double already = min_pairwise_gap(ev);
    if (already > fast_path_floor) {
        res.e_matrix = ComplexMatrix(n, n);
        res.perturbed = lc;
        res.achieved_sq_distance = 0.0;
        res.min_gap_after = already;
        res.imag_residual = 0.0;
        res.spectrum_after = ev;
        return res;
    }

    const double bound = std::sqrt(2.0 * epsilon / (static_cast<double>(n) * (n + 1)));
    const double im_tol = 1e-6 * (1.0 + l_norm);
    const auto groups = shift_groups(ev, realify, im_tol);
    const auto idx = strict_upper_indices(n);
    const double rowsum_tol = 1e-9 * (1.0 + l_norm);

    // Shift magnitudes: group g gets g*delta, jittered on retries; the spread
    // never exceeds 1.5*(N-1)*delta0 < bound.
    const double delta0 = 0.45 * bound / static_cast<double>(std::max<std::size_t>(n - 1, 1));

    Rng rng(seed);
    double best_gap = -1.0;
    std::string fail_note = "no attempt";

    for (int attempt = 0; attempt < 50; ++attempt) {
        const double delta = delta0 * std::pow(0.5, attempt);

        RealVector d(n, 0.0);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const double jitter = attempt == 0 ? 0.0 : rng.uniform(-0.5, 0.5);
            const double shift = static_cast<double>(g + 1) * delta * (1.0 + jitter);
            for (std::size_t i : groups[g]) d[i] = shift;
        }

        std::vector<cplx> mu(n);
        for (std::size_t i = 0; i < n; ++i) mu[i] = ev[i] + d[i];
        const double target_gap = min_pairwise_gap(mu);
        if (!(target_gap > distinctness_floor(gap_tol, l_norm))) {
            best_gap = std::max(best_gap, target_gap);
            fail_note = "diagonal targets failed the gap requirement";
            continue;
        }

        ComplexVector s;
        try {
            s = realify ? solve_strict_upper_real(res.schur, d, idx)
                        : solve_strict_upper(res.schur, d, idx);
        } catch (const numerical_error&) {
            fail_note = "row-sum/realness constraints were inconsistent";
            continue;
        }

        ComplexMatrix e(n, n);
        for (std::size_t i = 0; i < n; ++i) e(i, i) = d[i];
        for (std::size_t c = 0; c < idx.size(); ++c) e(idx[c].i, idx[c].j) = s[c];

        double max_e = 0.0;
        for (const cplx& v : e.data()) max_e = std::max(max_e, std::abs(v));
        if (!(max_e < bound)) {
            fail_note = "entrywise perturbation bound exceeded";
            continue;
        }

        const ComplexMatrix p = res.schur.u * e * res.schur.u.adjoint();
        const ComplexMatrix perturbed = lc + p;

        const double achieved = frobenius_distance(perturbed, lc);
        if (!(achieved * achieved < epsilon)) {
            fail_note = "squared Frobenius budget exceeded";
            continue;
        }

        const ComplexVector ones(n, cplx(1.0, 0.0));
        const double rowsum_res = vector_norm(perturbed * ones);
        if (rowsum_res > rowsum_tol) {
            fail_note = "row sums not preserved";
            continue;
        }

        double imag_res = 0.0;
        for (const cplx& v : perturbed.data())
            imag_res = std::max(imag_res, std::abs(v.imag()));
        if (realify && imag_res > rowsum_tol) {
            fail_note = "perturbed matrix not real";
            continue;
        }

        res.e_matrix = e;
        res.perturbed = perturbed;
        res.achieved_sq_distance = achieved * achieved;
        res.min_gap_after = target_gap;
        res.imag_residual = imag_res;
        res.spectrum_after = mu;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j)
                    res.max_positive_offdiag =
                        std::max(res.max_positive_offdiag, perturbed(i, j).real());
        return res;
    }

    throw numerical_error("construct_perturbation: infeasible after 50 attempts (" + fail_note +
                              "); best eigenvalue gap reached",
                          best_gap);
}

DecoupledSystem decouple(const ComplexMatrix& l, const ComplexMatrix& a, const ComplexMatrix& f,
                         double gap_tol, double cond_cap) {
    if (!l.square() || !a.square() || !f.square())
        throw invalid_input("decouple: all matrices must be square");
    if (a.rows() != f.rows()) throw invalid_input("decouple: A and F must share dimensions");

    const DiagnosabilityReport rep = assess_diagonalizability(l, gap_tol, cond_cap);
    if (rep.verdict == Diagnosis::defective)
        throw invalid_input("decouple: defective input; construct a perturbation first");
    if (rep.verdict == Diagnosis::borderline)
        throw numerical_error("decouple: eigenvector basis condition exceeds cond_cap",
                              rep.eigvec_condition);

    SchurForm sf = schur_decompose(l);
    std::size_t zmin = 0;
    for (std::size_t i = 1; i < l.rows(); ++i)
        if (std::abs(sf.t(i, i)) < std::abs(sf.t(zmin, zmin))) zmin = i;
    move_eigenvalue_to_front(sf, zmin);

    DecoupledSystem dec;
    dec.transform_inv = eigenvector_matrix(sf);
    dec.transform_condition = condition_estimate(dec.transform_inv);
    if (dec.transform_condition > cond_cap)
        throw numerical_error("decouple: transform condition exceeds cond_cap",
                              dec.transform_condition);
    dec.transform = inverse(dec.transform_inv);
    dec.lambda = diagonal_of(sf.t);

    ComplexMatrix residual = dec.transform * l * dec.transform_inv;
    for (std::size_t i = 0; i < l.rows(); ++i) residual(i, i) -= dec.lambda[i];
    const double resid = frobenius_norm(residual);
    const double resid_tol = 1e-7 * std::max(1.0, frobenius_norm(l));
    if (resid > resid_tol)
        throw numerical_error("decouple: similarity residual above tolerance", resid);

    dec.subsystems.reserve(l.rows());
    for (std::size_t i = 0; i < l.rows(); ++i) dec.subsystems.push_back(a - dec.lambda[i] * f);
    return dec;
}

}  // namespace neardiag

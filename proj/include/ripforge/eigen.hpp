#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ripforge/matrix.hpp"
#include "ripforge/rng.hpp"

namespace ripforge {

struct EigenRange {
    double lambda_min;
    double lambda_max;
};

namespace detail {

/// Cyclic Jacobi on a dense symmetric buffer (row-major, dim x dim).
/// The buffer is destroyed; eigenvalues end up on the diagonal.
/// Stops when the off-diagonal Frobenius norm falls below `tol`.
inline void jacobi_diagonalize(std::vector<double>& a, std::size_t dim, double tol, int max_sweeps) {
    auto off_frobenius = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i + 1; j < dim; ++j) s += 2.0 * a[i * dim + j] * a[i * dim + j];
        return std::sqrt(s);
    };
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_frobenius() <= tol) return;
        for (std::size_t p = 0; p < dim; ++p) {
            for (std::size_t q = p + 1; q < dim; ++q) {
                const double apq = a[p * dim + q];
                if (apq == 0.0) continue;
                const double app = a[p * dim + p];
                const double aqq = a[q * dim + q];
                const double tau = (aqq - app) / (2.0 * apq);
                // smaller-magnitude root of t^2 + 2 tau t - 1 = 0
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t r = 0; r < dim; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a[r * dim + p];
                    const double arq = a[r * dim + q];
                    const double nrp = c * arp - s * arq;
                    const double nrq = s * arp + c * arq;
                    a[r * dim + p] = nrp;
                    a[p * dim + r] = nrp;
                    a[r * dim + q] = nrq;
                    a[q * dim + r] = nrq;
                }
                a[p * dim + p] = app - t * apq;
                a[q * dim + q] = aqq + t * apq;
                a[p * dim + q] = 0.0;
                a[q * dim + p] = 0.0;
            }
        }
    }
    if (off_frobenius() > tol)
        throw std::runtime_error("jacobi_diagonalize: no convergence within sweep cap");
}

}  // namespace detail

/// Extreme eigenvalues of a dense symmetric buffer by cyclic Jacobi.
/// Absolute tolerance 1e-10, cap 100 sweeps (plenty for dim <= 512).
inline EigenRange symmetric_eigen_range_buffer(std::vector<double> a, std::size_t dim) {
    if (dim == 0 || a.size() != dim * dim)
        throw std::invalid_argument("symmetric_eigen_range: bad buffer");
    detail::jacobi_diagonalize(a, dim, 1e-10, 100);
    double lo = a[0], hi = a[0];
    for (std::size_t i = 1; i < dim; ++i) {
        lo = std::min(lo, a[i * dim + i]);
        hi = std::max(hi, a[i * dim + i]);
    }
    return {lo, hi};
}

inline EigenRange symmetric_eigen_range(const SymmetricMatrix& M) {
    return symmetric_eigen_range_buffer(M.data(), M.dim());
}

/// Operator norm (largest absolute eigenvalue) of a symmetric buffer.
inline double symmetric_op_norm_buffer(std::vector<double> a, std::size_t dim) {
    const EigenRange r = symmetric_eigen_range_buffer(std::move(a), dim);
    return std::max(std::fabs(r.lambda_min), std::fabs(r.lambda_max));
}

namespace detail {

/// Largest eigenvalue of a symmetric tridiagonal matrix (diag, offdiag) via
/// Sturm-sequence bisection.
inline double tridiagonal_max_eigenvalue(const std::vector<double>& diag,
                                         const std::vector<double>& off) {
    const std::size_t k = diag.size();
    if (k == 0) throw std::invalid_argument("tridiagonal_max_eigenvalue: empty");
    if (k == 1) return diag[0];
    // Gershgorin bracket.
    double lo = diag[0], hi = diag[0];
    for (std::size_t i = 0; i < k; ++i) {
        const double left = (i > 0) ? std::fabs(off[i - 1]) : 0.0;
        const double right = (i + 1 < k) ? std::fabs(off[i]) : 0.0;
        lo = std::min(lo, diag[i] - left - right);
        hi = std::max(hi, diag[i] + left + right);
    }
    // Count of eigenvalues strictly below x.
    auto count_below = [&](double x) {
        int count = 0;
        double d = diag[0] - x;
        if (d < 0.0) ++count;
        for (std::size_t i = 1; i < k; ++i) {
            double denom = d;
            if (std::fabs(denom) < 1e-300) denom = (denom < 0.0 ? -1e-300 : 1e-300);
            d = (diag[i] - x) - off[i - 1] * off[i - 1] / denom;
            if (d < 0.0) ++count;
        }
        return count;
    };
    const int want = static_cast<int>(k) - 1;  // index of the top eigenvalue
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * (1.0 + std::fabs(hi)); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(mid) <= want)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Largest eigenvalue of a symmetric operator given only as a mat-vec,
/// by Lanczos with full reorthogonalization. Suitable for dimensions where a
/// dense Jacobi sweep would be too slow. Deterministic: the start vector is
/// derived from a fixed seed.
inline double lanczos_max_eigenvalue(std::size_t dim,
                                     const std::function<void(const double*, double*)>& matvec,
                                     double tol = 1e-10, std::size_t max_iter = 0) {
    if (dim == 0) throw std::invalid_argument("lanczos_max_eigenvalue: dim must be >= 1");
    if (dim == 1) {
        double x = 1.0, y = 0.0;
        matvec(&x, &y);
        return y;
    }
    if (max_iter == 0) max_iter = std::min<std::size_t>(dim, 400);

    RngStream rng(0x9d2c5680fULL ^ (static_cast<std::uint64_t>(dim) * 0x9e3779b97f4a7c15ULL));
    std::vector<std::vector<double>> basis;
    std::vector<double> v(dim), w(dim);
    double norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        v[i] = rng.gaussian();
        norm += v[i] * v[i];
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;

    std::vector<double> alpha, beta;
    double prev_lambda = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < max_iter; ++j) {
        basis.push_back(v);
        matvec(v.data(), w.data());
        double a = 0.0;
        for (std::size_t i = 0; i < dim; ++i) a += v[i] * w[i];
        alpha.push_back(a);
        for (std::size_t i = 0; i < dim; ++i) w[i] -= a * v[i];
        if (j > 0) {
            const auto& prev = basis[j - 1];
            const double bprev = beta.back();
            for (std::size_t i = 0; i < dim; ++i) w[i] -= bprev * prev[i];
        }
        // Full reorthogonalization, twice for stability.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                double dot = 0.0;
                for (std::size_t i = 0; i < dim; ++i) dot += q[i] * w[i];
                for (std::size_t i = 0; i < dim; ++i) w[i] -= dot * q[i];
            }
        }
        double b = 0.0;
        for (std::size_t i = 0; i < dim; ++i) b += w[i] * w[i];
        b = std::sqrt(b);
        const bool breakdown = (b <= 1e-14 * (1.0 + std::fabs(a)));
        const bool check_now = breakdown || ((j + 1) % 20 == 0) || (j + 1 == max_iter);
        if (check_now) {
            const double lambda = detail::tridiagonal_max_eigenvalue(alpha, beta);
            if (breakdown || std::fabs(lambda - prev_lambda) <= tol * (1.0 + std::fabs(lambda)))
                return lambda;
            prev_lambda = lambda;
        }
        if (breakdown) break;
        beta.push_back(b);
        for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / b;
    }
    return detail::tridiagonal_max_eigenvalue(alpha, beta);
}

}  // namespace ripforge

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "ripforge/eigen.hpp"
#include "ripforge/matrix.hpp"
#include "ripforge/rng.hpp"
#include "ripforge/stats.hpp"

namespace ripforge {

/// Sparsity level and distortion for a restricted isometry check.
struct RipParams {
    std::size_t k;
    double theta;

    void validate(std::size_t p) const {
        if (k < 1 || k > p) throw std::invalid_argument("RipParams: k must be in [1, p]");
        if (!(theta > 0.0 && theta < 1.0))
            throw std::invalid_argument("RipParams: theta must be in (0, 1)");
    }
};

/// Thrown when a k-subset enumeration would exceed the configured cap.
class EnumerationInfeasible : public std::runtime_error {
public:
    EnumerationInfeasible(double subsets, double cap)
        : std::runtime_error("k-subset enumeration infeasible: " + std::to_string(subsets) +
                             " subsets exceed cap " + std::to_string(cap)),
          subsets_(subsets), cap_(cap) {}
    double subsets() const { return subsets_; }
    double cap() const { return cap_; }

private:
    double subsets_, cap_;
};

inline constexpr double kDefaultEnumerationCap = 1e7;

/// Exact restricted-isometry margin: the max over all k-column subsets S of
/// the operator norm of X_S^T X_S - I. X satisfies the property at (k, theta)
/// iff the result is <= theta.
///
/// Enumeration is lexicographic over subsets with the Gram matrix computed
/// once up front. Throws EnumerationInfeasible if C(p, k) exceeds `cap`.
inline double rip_margin_exact(const DesignMatrix& X, std::size_t k,
                               double cap = kDefaultEnumerationCap) {
    const std::size_t p = X.cols();
    if (k < 1 || k > p) throw std::invalid_argument("rip_margin_exact: k must be in [1, p]");
    const double subsets = binomial_coefficient(p, k);
    if (subsets > cap) throw EnumerationInfeasible(subsets, cap);

    const SymmetricMatrix G = gram_deviation(X);
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    std::vector<double> sub;
    double margin = 0.0;
    for (;;) {
        G.extract(idx, sub);
        margin = std::max(margin, symmetric_op_norm_buffer(sub, k));
        // next combination in lexicographic order
        std::size_t i = k;
        while (i > 0) {
            --i;
            if (idx[i] != i + p - k) break;
            if (i == 0) return margin;
        }
        ++idx[i];
        for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

/// Monte Carlo lower bound on the margin: max over sampled k-sparse unit
/// vectors u of |  ||Xu||^2 - 1 |. Never exceeds rip_margin_exact(X, k).
inline double rip_margin_sampled(const DesignMatrix& X, std::size_t k, std::size_t trials,
                                 RngStream& rng) {
    const std::size_t n = X.rows(), p = X.cols();
    if (k < 1 || k > p) throw std::invalid_argument("rip_margin_sampled: k must be in [1, p]");
    if (trials < 1) throw std::invalid_argument("rip_margin_sampled: trials must be >= 1");

    std::vector<std::size_t> support(k);
    std::vector<double> coeff(k), y(n);
    double best = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        // k distinct column indices by partial rejection
        for (std::size_t i = 0; i < k; ++i) {
            for (;;) {
                const std::size_t c = static_cast<std::size_t>(rng.uniform_below(p));
                bool dup = false;
                for (std::size_t j = 0; j < i; ++j)
                    if (support[j] == c) { dup = true; break; }
                if (!dup) { support[i] = c; break; }
            }
        }
        double norm2 = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            coeff[i] = rng.gaussian();
            norm2 += coeff[i] * coeff[i];
        }
        if (norm2 == 0.0) continue;
        const double inv = 1.0 / std::sqrt(norm2);
        double q = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double s = 0.0;
            for (std::size_t i = 0; i < k; ++i) s += X(r, support[i]) * coeff[i];
            s *= inv;
            q += s * s;
        }
        best = std::max(best, std::fabs(q - 1.0));
    }
    return best;
}

/// Membership test for the restricted isometry property: true iff the exact
/// margin is at most theta. Subsets whose Gershgorin row-sum bound already
/// sits below theta are skipped without an eigensolve, which keeps the test
/// cheap on well-conditioned matrices.
inline bool is_rip(const DesignMatrix& X, const RipParams& params,
                   double cap = kDefaultEnumerationCap) {
    params.validate(X.cols());
    const std::size_t p = X.cols();
    const std::size_t k = params.k;
    const double subsets = binomial_coefficient(p, k);
    if (subsets > cap) throw EnumerationInfeasible(subsets, cap);

    const SymmetricMatrix G = gram_deviation(X);
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    std::vector<double> sub;
    for (;;) {
        G.extract(idx, sub);
        double gershgorin = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            double row = 0.0;
            for (std::size_t b = 0; b < k; ++b) row += std::fabs(sub[a * k + b]);
            gershgorin = std::max(gershgorin, row);
        }
        if (gershgorin > params.theta && symmetric_op_norm_buffer(sub, k) > params.theta)
            return false;
        std::size_t i = k;
        while (i > 0) {
            --i;
            if (idx[i] != i + p - k) break;
            if (i == 0) return true;
        }
        ++idx[i];
        for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace ripforge

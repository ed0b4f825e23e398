#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ripforge/matrix.hpp"
#include "ripforge/rng.hpp"
#include "ripforge/stats.hpp"

namespace ripforge {

inline constexpr double kSqrt3 = 1.7320508075688772;

enum class DistKind { Gaussian, Rademacher, UniformSym };

/// A zero-mean unit-variance sub-Gaussian distribution, together with its
/// declared sub-Gaussian parameter and median.
///
/// Three members are implemented:
///   - Gaussian: N(0, 1), sigma 1
///   - Rademacher: +-1 fair signs, sigma 1
///   - UniformSym: uniform on [-sqrt(3), sqrt(3)], sigma sqrt(3) (support bound)
/// The API is deliberately value-like so further kinds can be added by
/// extending the switch statements with a (sampler, sigma, median) triple.
struct SubGaussianDist {
    DistKind kind;

    double sigma() const {
        switch (kind) {
            case DistKind::Gaussian: return 1.0;
            case DistKind::Rademacher: return 1.0;
            case DistKind::UniformSym: return kSqrt3;
        }
        throw std::logic_error("unreachable");
    }

    /// Median of the underlying law; zero for all implemented kinds.
    double median() const { return 0.0; }

    const char* name() const {
        switch (kind) {
            case DistKind::Gaussian: return "gaussian";
            case DistKind::Rademacher: return "rademacher";
            case DistKind::UniformSym: return "uniform";
        }
        throw std::logic_error("unreachable");
    }
};

inline SubGaussianDist dist_from_name(std::string_view name) {
    if (name == "gaussian") return {DistKind::Gaussian};
    if (name == "rademacher") return {DistKind::Rademacher};
    if (name == "uniform") return {DistKind::UniformSym};
    throw std::invalid_argument("unknown distribution '" + std::string(name) +
                                "' (expected gaussian, rademacher or uniform)");
}

/// One draw from Q.
inline double sample(const SubGaussianDist& Q, RngStream& rng) {
    switch (Q.kind) {
        case DistKind::Gaussian: return rng.gaussian();
        case DistKind::Rademacher: return rng.rademacher();
        case DistKind::UniformSym: return kSqrt3 * (2.0 * rng.uniform01() - 1.0);
    }
    throw std::logic_error("unreachable");
}

/// One draw from the normalized law of Z / sqrt(n) for Z ~ Q.
inline double sample_normalized(const SubGaussianDist& Q, std::size_t n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("sample_normalized: n must be >= 1");
    return sample(Q, rng) / std::sqrt(static_cast<double>(n));
}

enum class HalfSide { Upper, Lower };

/// Conditional half of the normalized law, split at the median.
///
/// Upper is supported on [median/sqrt(n), inf), lower on (-inf, median/sqrt(n)].
/// Mixing a fair coin with the two halves reproduces the normalized law.
struct HalfDist {
    SubGaussianDist parent;
    HalfSide side;
    std::size_t n;
};

/// Draw from a conditional half. For the symmetric continuous kinds the upper
/// half is |Z|/sqrt(n); for Rademacher it is the point mass at +1/sqrt(n).
inline double sample_half(const HalfDist& H, RngStream& rng) {
    if (H.n < 1) throw std::invalid_argument("sample_half: n must be >= 1");
    const double root_n = std::sqrt(static_cast<double>(H.n));
    const double sign = (H.side == HalfSide::Upper) ? 1.0 : -1.0;
    switch (H.parent.kind) {
        case DistKind::Gaussian: return sign * std::fabs(rng.gaussian()) / root_n;
        case DistKind::Rademacher: return sign / root_n;
        case DistKind::UniformSym: return sign * kSqrt3 * rng.uniform01() / root_n;
    }
    throw std::logic_error("unreachable");
}

/// The constant c1 = sqrt(n) * E[upper-half draw]; independent of n.
/// Strictly positive for every implemented kind.
inline double halves_mean_constant(const SubGaussianDist& Q) {
    switch (Q.kind) {
        case DistKind::Gaussian: return std::sqrt(2.0 / M_PI);
        case DistKind::Rademacher: return 1.0;
        case DistKind::UniformSym: return kSqrt3 / 2.0;
    }
    throw std::logic_error("unreachable");
}

/// n-by-p matrix with independent entries from the normalized law.
/// Entries are filled in row-major order, so the result is a pure function of
/// (Q, n, p, stream state).
inline DesignMatrix matrix_sample(const SubGaussianDist& Q, std::size_t n, std::size_t p,
                                  RngStream& rng) {
    DesignMatrix X(n, p);
    const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(n));
    auto& data = X.data();
    for (std::size_t i = 0; i < n * p; ++i) data[i] = sample(Q, rng) * inv_root_n;
    return X;
}

/// A probability bound with a vacuity marker (value <= 0 carries no
/// information but is still reported unclamped).
struct ProbabilityBound {
    double value;
    bool vacuous;
};

/// Closed-form lower bound on the probability that a random design matrix
/// with normalized sub-Gaussian entries satisfies the restricted isometry
/// property at (k, theta):
///     1 - 2 exp{ k log(9ep/k) - n theta^2 / (256 sigma^4) }.
inline ProbabilityBound rip_probability_lower_bound(std::size_t n, std::size_t p, std::size_t k,
                                                    double theta, double sigma) {
    if (k < 1 || k > p) throw std::invalid_argument("rip_probability_lower_bound: k in [1, p]");
    if (!(theta > 0.0)) throw std::invalid_argument("rip_probability_lower_bound: theta > 0");
    if (!(sigma >= 1.0)) throw std::invalid_argument("rip_probability_lower_bound: sigma >= 1");
    const double kd = static_cast<double>(k);
    const double exponent = kd * std::log(9.0 * M_E * static_cast<double>(p) / kd) -
                            static_cast<double>(n) * theta * theta /
                                (256.0 * sigma * sigma * sigma * sigma);
    const double value = 1.0 - 2.0 * std::exp(exponent);
    return {value, value <= 0.0};
}

/// CDF of the average of `blocks` independent normalized draws scaled by
/// 1/sqrt(blocks): the entry law of a block-averaged matrix built from
/// `blocks` = ell^2 independent normalized entries with weight 1/ell.
/// For blocks == 1 this is just the CDF of the normalized law.
inline double averaged_entry_cdf(const SubGaussianDist& Q, std::size_t n, unsigned blocks,
                                 double x) {
    if (n < 1 || blocks < 1) throw std::invalid_argument("averaged_entry_cdf: bad parameters");
    const double root_n = std::sqrt(static_cast<double>(n));
    const double ell = std::sqrt(static_cast<double>(blocks));
    switch (Q.kind) {
        case DistKind::Gaussian:
            // stable under averaging: still N(0, 1/n)
            return normal_cdf(x * root_n);
        case DistKind::UniformSym: {
            if (blocks == 1) {
                const double z = x * root_n / kSqrt3;  // uniform on [-1, 1]
                if (z <= -1.0) return 0.0;
                if (z >= 1.0) return 1.0;
                return 0.5 * (z + 1.0);
            }
            // x = sqrt(3) (2 S - L) / (ell sqrt(n)) with S the Irwin-Hall sum
            const double L = static_cast<double>(blocks);
            const double s = 0.5 * (x * ell * root_n / kSqrt3 + L);
            return irwin_hall_cdf(blocks, s);
        }
        case DistKind::Rademacher: {
            // x = (2 B - L) / (ell sqrt(n)), B ~ Binomial(L, 1/2)
            const double L = static_cast<double>(blocks);
            const double bmax_d = std::floor((x * ell * root_n + L) / 2.0 + 1e-9);
            if (bmax_d < 0.0) return 0.0;
            double cdf = 0.0;
            const auto bmax = static_cast<unsigned>(std::min(bmax_d, L));
            for (unsigned b = 0; b <= bmax; ++b)
                cdf += std::exp(log_binomial(blocks, b) - L * std::log(2.0));
            return std::min(1.0, cdf);
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace ripforge

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace ripforge {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double mean_of(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean_of: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

/// Second moment about zero; the natural variance estimate for samples whose
/// population mean is exactly zero.
inline double second_moment(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("second_moment: empty sample");
    double s = 0.0;
    for (double x : xs) s += x * x;
    return s / static_cast<double>(xs.size());
}

inline double binomial_se(double rate, std::size_t trials) {
    if (trials == 0) throw std::invalid_argument("binomial_se: zero trials");
    return std::sqrt(std::max(rate * (1.0 - rate), 0.0) / static_cast<double>(trials));
}

namespace detail {

// Regularized lower incomplete gamma P(a, x) by series expansion; x < a + 1.
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by continued fraction; x >= a + 1.
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
inline double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: a > 0 and x >= 0 required");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_cf(a, x);
}

/// Survival function of the chi-square distribution with `dof` degrees of freedom.
inline double chi_square_pvalue(double statistic, double dof) {
    if (dof <= 0.0) throw std::invalid_argument("chi_square_pvalue: dof must be positive");
    if (statistic < 0.0) return 1.0;
    return gamma_q(dof / 2.0, statistic / 2.0);
}

/// Asymptotic Kolmogorov distribution tail: P(K > lambda).
inline double kolmogorov_pvalue(double lambda) {
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-18) break;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

struct KsResult {
    double statistic;  // sup-norm distance D
    double pvalue;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
/// The sample is sorted in place.
inline KsResult ks_test(std::vector<double>& sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_test: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, f - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
    }
    const double sn = std::sqrt(n);
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    return {d, kolmogorov_pvalue(lambda)};
}

/// Two-sample Kolmogorov-Smirnov test. Both samples are sorted in place.
inline KsResult ks_test_two_sample(std::vector<double>& a, std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_test_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double sn = std::sqrt(ne);
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    return {d, kolmogorov_pvalue(lambda)};
}

struct ChiSquareResult {
    double statistic;
    double dof;
    double pvalue;
};

/// Pearson chi-square goodness of fit for observed counts against expected
/// probabilities (which must sum to 1 over the support).
inline ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                                      std::span<const double> expected_prob) {
    if (observed.size() != expected_prob.size() || observed.empty())
        throw std::invalid_argument("chi_square_gof: size mismatch");
    std::uint64_t total = 0;
    for (auto c : observed) total += c;
    if (total == 0) throw std::invalid_argument("chi_square_gof: empty counts");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = expected_prob[i] * static_cast<double>(total);
        if (e <= 0.0) throw std::invalid_argument("chi_square_gof: zero expected cell");
        const double diff = static_cast<double>(observed[i]) - e;
        stat += diff * diff / e;
    }
    const double dof = static_cast<double>(observed.size() - 1);
    return {stat, dof, chi_square_pvalue(stat, dof)};
}

/// log of the binomial coefficient C(n, k).
inline double log_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

/// C(n, k) as a double; +inf if it overflows.
inline double binomial_coefficient(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r *= static_cast<double>(n - k + i) / static_cast<double>(i);
        if (!std::isfinite(r)) return std::numeric_limits<double>::infinity();
    }
    return r;
}

/// CDF of the sum of `count` independent Uniform(0,1) variables (Irwin-Hall).
inline double irwin_hall_cdf(unsigned count, double s) {
    if (count == 0) throw std::invalid_argument("irwin_hall_cdf: count must be positive");
    if (s <= 0.0) return 0.0;
    if (s >= static_cast<double>(count)) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    const auto jmax = static_cast<unsigned>(std::floor(s));
    for (unsigned j = 0; j <= jmax; ++j) {
        sum += sign * std::exp(log_binomial(count, j) + count * std::log(s - j) -
                               std::lgamma(static_cast<double>(count) + 1.0));
        sign = -sign;
    }
    return std::min(1.0, std::max(0.0, sum));
}

}  // namespace ripforge

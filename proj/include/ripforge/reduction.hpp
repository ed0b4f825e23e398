#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ripforge/certify.hpp"
#include "ripforge/distributions.hpp"
#include "ripforge/graph.hpp"
#include "ripforge/matrix.hpp"
#include "ripforge/rng.hpp"

namespace ripforge {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class PRule { EqualN, Explicit };

/// Parameters of the graph-to-matrix reduction.
///
/// m is the graph size and kappa the planted-set size; L is the block factor,
/// beta the folding exponent. The sparsity is k = floor(kappa / L), the fold
/// count ell = floor(k^beta), and the matrix dimensions follow from them.
/// epsilon is carried for diagnostics only; the reduction itself never
/// reads the planted set.
struct ReductionConfig {
    std::size_t m = 0;
    std::size_t kappa = 0;
    std::size_t L = 10;
    double beta = 0.0;
    PRule p_rule = PRule::EqualN;
    std::size_t explicit_p = 0;
    SubGaussianDist Q{DistKind::Gaussian};
    double epsilon = 0.5;

    void validate() const {
        if (m < 1) throw ConfigError("ReductionConfig: m must be >= 1");
        if (L < 2) throw ConfigError("ReductionConfig: L must be >= 2");
        if (kappa > m) throw ConfigError("ReductionConfig: kappa exceeds m");
        if (beta < 0.0) throw ConfigError("ReductionConfig: beta must be >= 0");
        if (p_rule == PRule::Explicit && explicit_p == 0)
            throw ConfigError("ReductionConfig: explicit p rule needs p >= 1");
    }
};

struct DerivedDims {
    std::size_t N;    // bipartite draw size, floor(m / L)
    std::size_t ell;  // fold count, floor(k^beta)
    std::size_t n;    // matrix rows, floor(N / ell)
    std::size_t k;    // sparsity, floor(kappa / L)
    std::size_t p;    // matrix columns
};

/// Derives (N, ell, n, k, p) from the configuration. The sparsity k is
/// computed first since the fold count depends on it.
inline DerivedDims derive_dims(const ReductionConfig& cfg) {
    cfg.validate();
    DerivedDims d{};
    d.k = cfg.kappa / cfg.L;
    if (d.k == 0) throw ConfigError("derive_dims: k = floor(kappa/L) is zero");
    d.ell = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(d.k), cfg.beta)));
    if (d.ell == 0) throw ConfigError("derive_dims: ell is zero");
    d.N = cfg.m / cfg.L;
    d.n = d.N / d.ell;
    if (d.n == 0) throw ConfigError("derive_dims: n = floor(N/ell) is zero");
    d.p = (cfg.p_rule == PRule::EqualN) ? d.n : cfg.explicit_p;
    if (d.p < d.n) throw ConfigError("derive_dims: p must be at least n");
    return d;
}

/// Full intermediate state of one reduction run, kept for diagnostics.
struct ReductionTrace {
    DerivedDims dims;
    std::vector<std::uint32_t> U, W;  // ordered vertex draws, length N each
    std::vector<std::int8_t> A;      // +-1, N x N row-major
    std::vector<double> Z;           // N x N row-major
    std::vector<double> Xtilde;      // n x n row-major

    double a(std::size_t i, std::size_t j) const {
        return static_cast<double>(A[i * dims.N + j]);
    }
};

struct ReductionResult {
    DesignMatrix X;
    ReductionTrace trace;
};

/// The graph-to-matrix reduction.
///
/// Draws 2N distinct vertices (one partial shuffle: first N form U, next N
/// form W), forms the +-1 bipartite adjacency sign matrix A, draws Z from the
/// upper conditional half where A is +1 and the lower half where A is -1,
/// block-averages Z into the n-by-n core, and pads with fresh normalized
/// entries up to p columns.
inline ReductionResult reduce(const Graph& G, const ReductionConfig& cfg, RngStream& rng) {
    const DerivedDims d = derive_dims(cfg);
    if (G.vertex_count() != cfg.m) throw ConfigError("reduce: graph size differs from config m");
    const std::size_t N = d.N, n = d.n, ell = d.ell, p = d.p;

    ReductionTrace trace;
    trace.dims = d;

    std::vector<std::uint32_t> verts(cfg.m);
    std::iota(verts.begin(), verts.end(), 0);
    for (std::size_t i = 0; i < 2 * N; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(cfg.m - i));
        std::swap(verts[i], verts[j]);
    }
    trace.U.assign(verts.begin(), verts.begin() + N);
    trace.W.assign(verts.begin() + N, verts.begin() + 2 * N);

    trace.A.resize(N * N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            trace.A[i * N + j] = G.has_edge(trace.U[i], trace.W[j]) ? 1 : -1;

    const HalfDist upper{cfg.Q, HalfSide::Upper, n};
    const HalfDist lower{cfg.Q, HalfSide::Lower, n};
    trace.Z.resize(N * N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            trace.Z[i * N + j] =
                (trace.A[i * N + j] == 1) ? sample_half(upper, rng) : sample_half(lower, rng);

    trace.Xtilde.assign(n * n, 0.0);
    const double inv_ell = 1.0 / static_cast<double>(ell);
    for (std::size_t a = 0; a < ell; ++a)
        for (std::size_t b = 0; b < ell; ++b)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    trace.Xtilde[i * n + j] += trace.Z[(a * n + i) * N + (b * n + j)];
    for (auto& x : trace.Xtilde) x *= inv_ell;

    DesignMatrix X(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) X(i, j) = trace.Xtilde[i * n + j];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = n; j < p; ++j) X(i, j) = sample_normalized(cfg.Q, n, rng);

    return {std::move(X), std::move(trace)};
}

/// Distinguisher bit: 1 means "planted" (the reduced matrix failed
/// certification).
inline int run_distinguisher(const Graph& G, const ReductionConfig& cfg,
                             const std::function<CertifierOutcome(const DesignMatrix&)>& certifier,
                             RngStream& rng) {
    const ReductionResult r = reduce(G, cfg, rng);
    return certifier(r.X).certified ? 0 : 1;
}

/// Witness diagnostic for planted instances.
struct WitnessReport {
    double value;                  // || Xtilde * v_folded ||^2
    std::vector<std::size_t> T;    // selected column indices (in 1..ell*n range, 0-based)
    std::size_t S_size;            // #(U against K) rows
    std::size_t WK_size;           // #(W against K) columns
    std::uint64_t edges_UK_WK;     // ordered adjacent pairs between the two intersections
    std::int64_t score_sum_WK;     // sum of s_j over columns with w_j in K
    bool s_empty_warning;          // no planted vertex was sampled into U
    std::vector<double> v_folded;  // the unit vector actually applied
};

/// Builds the witness vector from the planted set and evaluates the quadratic
/// form through the block-averaged core. Scores s_j sum the sign matrix over
/// rows whose u-vertex lies in K; the k1 = ceil((1 - eps/8) k) columns with
/// the largest scores (ties to the lowest index) support the witness. For
/// ell > 1 the vector is folded chunk-wise and renormalized. Values above
/// 1 + theta witness a restricted-isometry violation.
inline WitnessReport witness_quadratic_form(const ReductionTrace& trace,
                                            const std::vector<std::uint32_t>& K, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 0.5))
        throw std::invalid_argument("witness_quadratic_form: epsilon in (0, 1/2]");
    if (K.empty()) throw std::invalid_argument("witness_quadratic_form: empty planted set");
    const std::size_t N = trace.dims.N, n = trace.dims.n, ell = trace.dims.ell, k = trace.dims.k;
    if (trace.A.size() != N * N || trace.Xtilde.size() != n * n)
        throw std::invalid_argument("witness_quadratic_form: incomplete trace");

    std::vector<bool> in_k(*std::max_element(K.begin(), K.end()) + 1, false);
    for (auto v : K) in_k[v] = true;
    auto member = [&](std::uint32_t v) { return v < in_k.size() && in_k[v]; };

    WitnessReport rep{};
    std::vector<std::size_t> S;
    for (std::size_t i = 0; i < N; ++i)
        if (member(trace.U[i])) S.push_back(i);
    rep.S_size = S.size();
    rep.s_empty_warning = S.empty();

    // Column scores over the full sign matrix; the score identity below is
    // checked against these exact integers.
    std::vector<std::int64_t> score(N, 0);
    for (std::size_t i : S)
        for (std::size_t j = 0; j < N; ++j) score[j] += trace.A[i * N + j];

    rep.score_sum_WK = 0;
    rep.WK_size = 0;
    rep.edges_UK_WK = 0;
    for (std::size_t j = 0; j < N; ++j) {
        if (!member(trace.W[j])) continue;
        ++rep.WK_size;
        rep.score_sum_WK += score[j];
        for (std::size_t i : S)
            if (trace.A[i * N + j] == 1) ++rep.edges_UK_WK;
    }

    // Top-k1 columns among those that enter the averaged core.
    const std::size_t k1 = static_cast<std::size_t>(
        std::ceil((1.0 - epsilon / 8.0) * static_cast<double>(k)));
    const std::size_t cols = ell * n;
    std::vector<std::size_t> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    rep.T.assign(order.begin(), order.begin() + std::min(k1, cols));
    std::sort(rep.T.begin(), rep.T.end());

    // v is k1-sparse on T; fold the ell chunks of length n and renormalize.
    const double amp = 1.0 / std::sqrt(static_cast<double>(rep.T.size()));
    std::vector<double> folded(n, 0.0);
    for (std::size_t j : rep.T) folded[j % n] += amp;
    double norm2 = 0.0;
    for (double x : folded) norm2 += x * x;
    const double inv_norm = 1.0 / std::sqrt(norm2);
    for (auto& x : folded) x *= inv_norm;
    rep.v_folded = folded;

    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        const double* row = trace.Xtilde.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * folded[j];
        value += s * s;
    }
    rep.value = value;
    return rep;
}

/// A hard parameter triple (p, k, theta) at sample size n.
struct HardSequencePoint {
    std::size_t p;
    std::size_t k;
    double theta;
    double theta_floor;    // regime floor sqrt(k^{1+alpha} log(p) / n)
    double theta_ceiling;  // violation ceiling k^2 / (n ell^2)
};

/// Picks the hard-instance parameters at sample size n: k is the rounded
/// geometric mean of the window (n^{1/(3-alpha-4beta)}, n^{1/(2-beta)-delta}),
/// p = n, and theta the geometric mean of the regime floor and the violation
/// ceiling. Errors if the window contains no admissible integer, reporting
/// the smallest n that works.
inline HardSequencePoint hard_sequence(std::size_t n, double alpha, double beta, double delta) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("hard_sequence: alpha in [0, 1)");
    if (!(beta >= 0.0 && beta < (1.0 - alpha) / 3.0))
        throw std::invalid_argument("hard_sequence: beta in [0, (1-alpha)/3)");
    if (!(delta > 0.0)) throw std::invalid_argument("hard_sequence: delta > 0");
    if (n < 2) throw std::invalid_argument("hard_sequence: n too small");

    const double exp_lo = 1.0 / (3.0 - alpha - 4.0 * beta);
    const double exp_hi = 1.0 / (2.0 - beta) - delta;
    if (exp_lo >= exp_hi)
        throw std::invalid_argument("hard_sequence: exponent window is empty for every n");

    auto window_k = [&](std::size_t nn) -> std::optional<std::size_t> {
        const double lo = std::pow(static_cast<double>(nn), exp_lo);
        const double hi = std::pow(static_cast<double>(nn), exp_hi);
        const double gm = std::sqrt(lo * hi);
        const auto k = static_cast<std::size_t>(std::llround(gm));
        if (k >= 1 && static_cast<double>(k) > lo && static_cast<double>(k) < hi) return k;
        return std::nullopt;
    };

    const auto k_opt = window_k(n);
    if (!k_opt) {
        std::size_t feasible = n;
        while (feasible < (std::size_t{1} << 62) && !window_k(feasible)) feasible *= 2;
        std::size_t lo = feasible / 2, hi = feasible;
        while (lo + 1 < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            (window_k(mid) ? hi : lo) = mid;
        }
        throw std::invalid_argument("hard_sequence: window empty at n = " + std::to_string(n) +
                                    "; smallest feasible n is " + std::to_string(hi));
    }

    HardSequencePoint out{};
    out.p = n;
    out.k = *k_opt;
    const double kd = static_cast<double>(out.k);
    const double ell = std::floor(std::pow(kd, beta));
    out.theta_floor = std::sqrt(std::pow(kd, 1.0 + alpha) * std::log(static_cast<double>(out.p)) /
                                static_cast<double>(n));
    out.theta_ceiling = kd * kd / (static_cast<double>(n) * ell * ell);
    out.theta = std::sqrt(out.theta_floor * out.theta_ceiling);
    return out;
}

}  // namespace ripforge

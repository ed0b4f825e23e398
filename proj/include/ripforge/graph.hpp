#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ripforge/eigen.hpp"
#include "ripforge/rng.hpp"

namespace ripforge {

/// Simple undirected graph on m vertices with a dense bit-packed adjacency
/// matrix (no self-loops). Intended scale is m up to a few thousand.
class Graph {
public:
    explicit Graph(std::size_t m) : m_(m), words_per_row_((m + 63) / 64), bits_(m * words_per_row_, 0) {
        if (m == 0) throw std::invalid_argument("Graph: m must be >= 1");
    }

    std::size_t vertex_count() const { return m_; }

    bool has_edge(std::size_t u, std::size_t v) const {
        return (bits_[u * words_per_row_ + v / 64] >> (v % 64)) & 1ULL;
    }

    void add_edge(std::size_t u, std::size_t v) {
        if (u == v) throw std::invalid_argument("Graph: self-loop");
        if (u >= m_ || v >= m_) throw std::invalid_argument("Graph: vertex out of range");
        bits_[u * words_per_row_ + v / 64] |= 1ULL << (v % 64);
        bits_[v * words_per_row_ + u / 64] |= 1ULL << (u % 64);
    }

    std::size_t edge_count() const {
        std::size_t total = 0;
        for (auto w : bits_) total += static_cast<std::size_t>(__builtin_popcountll(w));
        return total / 2;
    }

    /// Edges as sorted (u, v) pairs with u < v.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        out.reserve(edge_count());
        for (std::size_t u = 0; u < m_; ++u)
            for (std::size_t v = u + 1; v < m_; ++v)
                if (has_edge(u, v)) out.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
        return out;
    }

    const std::uint64_t* row_words(std::size_t u) const { return bits_.data() + u * words_per_row_; }
    std::size_t words_per_row() const { return words_per_row_; }

private:
    std::size_t m_;
    std::size_t words_per_row_;
    std::vector<std::uint64_t> bits_;
};

enum class SeedKind { Clique, RandomDense, Explicit };

inline const char* seed_kind_name(SeedKind k) {
    switch (k) {
        case SeedKind::Clique: return "clique";
        case SeedKind::RandomDense: return "random-dense";
        case SeedKind::Explicit: return "explicit";
    }
    throw std::logic_error("unreachable");
}

/// A dense seed graph H on kappa vertices with edge count at least
/// (1/2 + epsilon) * kappa (kappa - 1) / 2. The bound is validated when the
/// concrete edge set is materialized.
struct DenseSeed {
    SeedKind kind;
    std::size_t kappa;
    double epsilon;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // Explicit only

    static DenseSeed clique(std::size_t kappa) { return {SeedKind::Clique, kappa, 0.5, {}}; }

    static DenseSeed random_dense(std::size_t kappa, double epsilon) {
        if (!(epsilon > 0.0 && epsilon <= 0.5))
            throw std::invalid_argument("DenseSeed: epsilon must be in (0, 1/2]");
        return {SeedKind::RandomDense, kappa, epsilon, {}};
    }

    static DenseSeed explicit_edges(std::size_t kappa, double epsilon,
                                    std::vector<std::pair<std::uint32_t, std::uint32_t>> e) {
        if (!(epsilon > 0.0 && epsilon <= 0.5))
            throw std::invalid_argument("DenseSeed: epsilon must be in (0, 1/2]");
        DenseSeed s{SeedKind::Explicit, kappa, epsilon, std::move(e)};
        if (static_cast<double>(s.edges.size()) < s.min_edges())
            throw std::invalid_argument("DenseSeed: edge count below the density bound");
        for (auto [u, v] : s.edges)
            if (u >= v || v >= kappa) throw std::invalid_argument("DenseSeed: bad edge");
        return s;
    }

    double min_edges() const {
        return (0.5 + epsilon) * static_cast<double>(kappa) * static_cast<double>(kappa - 1) / 2.0;
    }

    /// Materializes the seed's edge set on vertices {0, ..., kappa-1}.
    /// RandomDense draws each edge with probability min(1, 1/2 + 2 epsilon)
    /// and redraws until the density bound holds.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> materialize(RngStream& rng) const {
        switch (kind) {
            case SeedKind::Explicit: return edges;
            case SeedKind::Clique: {
                std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
                out.reserve(kappa * (kappa - 1) / 2);
                for (std::uint32_t u = 0; u + 1 < kappa; ++u)
                    for (std::uint32_t v = u + 1; v < kappa; ++v) out.emplace_back(u, v);
                return out;
            }
            case SeedKind::RandomDense: {
                const double pe = std::min(1.0, 0.5 + 2.0 * epsilon);
                for (int attempt = 0; attempt < 1000; ++attempt) {
                    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
                    for (std::uint32_t u = 0; u + 1 < kappa; ++u)
                        for (std::uint32_t v = u + 1; v < kappa; ++v)
                            if (rng.uniform01() < pe) out.emplace_back(u, v);
                    if (static_cast<double>(out.size()) >= min_edges()) return out;
                }
                throw std::runtime_error("DenseSeed: could not reach density bound");
            }
        }
        throw std::logic_error("unreachable");
    }
};

/// A graph together with (for planted instances) the hidden vertex set K and
/// the seed that was embedded on it.
struct PlantedInstance {
    Graph graph;
    std::optional<std::vector<std::uint32_t>> planted_set;  // sorted
    std::optional<DenseSeed> seed_graph;
};

/// Erdos-Renyi graph: every pair connected independently with probability 1/2.
inline PlantedInstance er_generate(std::size_t m, RngStream& rng) {
    Graph g(m);
    for (std::size_t u = 0; u + 1 < m; ++u)
        for (std::size_t v = u + 1; v < m; ++v)
            if (rng.next_u64() >> 63) g.add_edge(u, v);
    return {std::move(g), std::nullopt, std::nullopt};
}

/// Plants an isomorphic copy of the seed H on a uniformly random kappa-subset
/// K (under a uniformly random labeling); all pairs outside K x K are
/// independent fair coins.
inline PlantedInstance plant(std::size_t m, const DenseSeed& H, RngStream& rng) {
    if (H.kappa > m) throw std::invalid_argument("plant: kappa exceeds m");
    if (H.kappa < 1) throw std::invalid_argument("plant: kappa must be >= 1");

    // K and the labeling come from a single partial shuffle.
    std::vector<std::uint32_t> verts(m);
    std::iota(verts.begin(), verts.end(), 0);
    for (std::size_t i = 0; i < H.kappa; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(m - i));
        std::swap(verts[i], verts[j]);
    }
    std::vector<std::uint32_t> label(verts.begin(), verts.begin() + H.kappa);

    Graph g(m);
    std::vector<bool> in_k(m, false);
    for (auto v : label) in_k[v] = true;
    for (std::size_t u = 0; u + 1 < m; ++u)
        for (std::size_t v = u + 1; v < m; ++v)
            if (!(in_k[u] && in_k[v]) && (rng.next_u64() >> 63)) g.add_edge(u, v);
    for (auto [a, b] : H.materialize(rng)) g.add_edge(label[a], label[b]);

    std::vector<std::uint32_t> planted = label;
    std::sort(planted.begin(), planted.end());
    return {std::move(g), std::move(planted), H};
}

/// Fraction of present edges among pairs inside K.
inline double edge_density(const Graph& g, const std::vector<std::uint32_t>& K) {
    if (K.size() < 2) throw std::invalid_argument("edge_density: need at least 2 vertices");
    std::size_t present = 0;
    for (std::size_t i = 0; i + 1 < K.size(); ++i)
        for (std::size_t j = i + 1; j < K.size(); ++j)
            if (g.has_edge(K[i], K[j])) ++present;
    const double pairs = static_cast<double>(K.size()) * static_cast<double>(K.size() - 1) / 2.0;
    return static_cast<double>(present) / pairs;
}

/// Largest eigenvalue of A_G - (1/2) * ones. Elevated local edge density
/// pushes this statistic above the ~sqrt(m) bulk of a fair random graph.
inline double spectral_statistic(const Graph& g) {
    const std::size_t m = g.vertex_count();
    if (m <= 256) {
        std::vector<double> a(m * m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                a[i * m + j] = (i != j && g.has_edge(i, j) ? 1.0 : 0.0) - 0.5;
        return symmetric_eigen_range_buffer(std::move(a), m).lambda_max;
    }
    // y = A x - (sum x) / 2, with A applied through the packed bit rows.
    auto matvec = [&](const double* x, double* y) {
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) total += x[i];
        const std::size_t words = g.words_per_row();
        for (std::size_t i = 0; i < m; ++i) {
            const std::uint64_t* row = g.row_words(i);
            double acc = 0.0;
            for (std::size_t w = 0; w < words; ++w) {
                std::uint64_t bits = row[w];
                while (bits) {
                    const int b = __builtin_ctzll(bits);
                    acc += x[w * 64 + b];
                    bits &= bits - 1;
                }
            }
            y[i] = acc - 0.5 * total;
        }
    };
    return lanczos_max_eigenvalue(m, matvec, 1e-10);
}

/// 1 iff the spectral statistic exceeds tau.
inline int spectral_detect(const Graph& g, double tau) {
    if (!std::isfinite(tau)) throw std::invalid_argument("spectral_detect: tau must be finite");
    return spectral_statistic(g) > tau ? 1 : 0;
}

}  // namespace ripforge

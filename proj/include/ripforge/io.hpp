#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ripforge/graph.hpp"
#include "ripforge/matrix.hpp"
#include "ripforge/reduction.hpp"

namespace ripforge {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_u64_le(std::ostream& os, std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b.data()), 8);
}

inline std::uint64_t get_u64_le(std::istream& is) {
    std::array<unsigned char, 8> b{};
    is.read(reinterpret_cast<char*>(b.data()), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline void put_f64_le(std::ostream& os, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64_le(os, bits);
}

inline double get_f64_le(std::istream& is) {
    const std::uint64_t bits = get_u64_le(is);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

}  // namespace detail

// Binary matrix format: magic "RIPM", two 64-bit little-endian unsigned
// integers n and p, then n*p IEEE-754 doubles row-major, little-endian.

inline void write_matrix_binary(const DesignMatrix& X, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write("RIPM", 4);
    detail::put_u64_le(os, X.rows());
    detail::put_u64_le(os, X.cols());
    for (double v : X.data()) detail::put_f64_le(os, v);
    if (!os) throw IoError("write failed: " + path);
}

inline DesignMatrix read_matrix_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "RIPM", 4) != 0) throw IoError("bad magic in " + path);
    const std::uint64_t n = detail::get_u64_le(is);
    const std::uint64_t p = detail::get_u64_le(is);
    if (n == 0 || p == 0 || n > (1ULL << 32) || p > (1ULL << 32) || n * p > (1ULL << 34))
        throw IoError("implausible dimensions in " + path);
    std::vector<double> data(static_cast<std::size_t>(n * p));
    for (auto& v : data) v = detail::get_f64_le(is);
    if (!is) throw IoError("truncated matrix file: " + path);
    return DesignMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(p), std::move(data));
}

// CSV path: a header row "n,p" followed by n rows of p comma-separated
// decimals.

inline void write_matrix_csv(const DesignMatrix& X, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << X.rows() << "," << X.cols() << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) {
            if (j) os << ",";
            os << X(i, j);
        }
        os << "\n";
    }
    if (!os) throw IoError("write failed: " + path);
}

inline DesignMatrix read_matrix_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty csv: " + path);
    std::size_t n = 0, p = 0;
    {
        std::istringstream header(line);
        char comma = 0;
        if (!(header >> n >> comma >> p) || comma != ',' || n == 0 || p == 0)
            throw IoError("bad csv header (expected \"n,p\"): " + path);
    }
    std::vector<double> data;
    data.reserve(n * p);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(is, line)) throw IoError("csv truncated at row " + std::to_string(i));
        std::istringstream row(line);
        std::string cell;
        std::size_t j = 0;
        while (std::getline(row, cell, ',')) {
            data.push_back(std::stod(cell));
            ++j;
        }
        if (j != p) throw IoError("csv row " + std::to_string(i) + " has " + std::to_string(j) +
                                  " cells, expected " + std::to_string(p));
    }
    return DesignMatrix(n, p, std::move(data));
}

// Graph text format: first line "m E", then E lines "u v" with 0-based
// vertex indices, u < v.

inline void write_graph_text(const Graph& g, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    const auto edges = g.edges();
    os << g.vertex_count() << " " << edges.size() << "\n";
    for (auto [u, v] : edges) os << u << " " << v << "\n";
    if (!os) throw IoError("write failed: " + path);
}

inline Graph read_graph_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open for reading: " + path);
    std::size_t m = 0, e = 0;
    if (!(is >> m >> e) || m == 0) throw IoError("bad graph header: " + path);
    Graph g(m);
    for (std::size_t i = 0; i < e; ++i) {
        std::size_t u, v;
        if (!(is >> u >> v)) throw IoError("graph truncated at edge " + std::to_string(i));
        if (u >= v) throw IoError("graph edge not in u < v form: " + path);
        g.add_edge(u, v);
    }
    return g;
}

// Planted metadata travels in a JSON sidecar next to the graph file,
// at <graph path> + ".meta.json".

inline std::string sidecar_path(const std::string& graph_path) {
    return graph_path + ".meta.json";
}

inline void write_planted_sidecar(const PlantedInstance& inst, const std::string& graph_path) {
    if (!inst.planted_set) return;
    nlohmann::json j;
    j["kind"] = seed_kind_name(inst.seed_graph->kind);
    j["kappa"] = inst.seed_graph->kappa;
    j["epsilon"] = inst.seed_graph->epsilon;
    j["planted"] = *inst.planted_set;
    std::ofstream os(sidecar_path(graph_path));
    if (!os) throw IoError("cannot open for writing: " + sidecar_path(graph_path));
    os << j.dump(2) << "\n";
}

struct PlantedMetadata {
    std::string kind;
    std::size_t kappa;
    double epsilon;
    std::vector<std::uint32_t> planted;
};

inline std::optional<PlantedMetadata> read_planted_sidecar(const std::string& graph_path) {
    std::ifstream is(sidecar_path(graph_path));
    if (!is) return std::nullopt;
    nlohmann::json j;
    is >> j;
    PlantedMetadata meta;
    meta.kind = j.at("kind").get<std::string>();
    meta.kappa = j.at("kappa").get<std::size_t>();
    meta.epsilon = j.at("epsilon").get<double>();
    meta.planted = j.at("planted").get<std::vector<std::uint32_t>>();
    return meta;
}

// Reduction configuration: {m, kappa, L, beta, p_rule, distribution,
// epsilon?} with p_rule either the string "equal-n" or an explicit integer p.
// Unknown fields are rejected.

inline nlohmann::json reduction_config_to_json(const ReductionConfig& cfg) {
    nlohmann::json j;
    j["m"] = cfg.m;
    j["kappa"] = cfg.kappa;
    j["L"] = cfg.L;
    j["beta"] = cfg.beta;
    if (cfg.p_rule == PRule::EqualN)
        j["p_rule"] = "equal-n";
    else
        j["p_rule"] = cfg.explicit_p;
    j["distribution"] = cfg.Q.name();
    j["epsilon"] = cfg.epsilon;
    return j;
}

inline ReductionConfig reduction_config_from_json(const nlohmann::json& j) {
    static const char* known[] = {"m", "kappa", "L", "beta", "p_rule", "distribution", "epsilon"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* name : known)
            if (it.key() == name) { ok = true; break; }
        if (!ok) throw ConfigError("reduction config: unknown field '" + it.key() + "'");
    }
    ReductionConfig cfg;
    cfg.m = j.at("m").get<std::size_t>();
    cfg.kappa = j.at("kappa").get<std::size_t>();
    if (j.contains("L")) cfg.L = j.at("L").get<std::size_t>();
    if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
    if (j.contains("p_rule")) {
        const auto& pr = j.at("p_rule");
        if (pr.is_string()) {
            if (pr.get<std::string>() != "equal-n")
                throw ConfigError("reduction config: p_rule must be \"equal-n\" or an integer");
            cfg.p_rule = PRule::EqualN;
        } else if (pr.is_number_unsigned() || pr.is_number_integer()) {
            cfg.p_rule = PRule::Explicit;
            cfg.explicit_p = pr.get<std::size_t>();
        } else {
            throw ConfigError("reduction config: p_rule must be \"equal-n\" or an integer");
        }
    }
    if (j.contains("distribution")) cfg.Q = dist_from_name(j.at("distribution").get<std::string>());
    if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
    cfg.validate();
    return cfg;
}

/// Dumps a reduction trace as a directory: the sign matrix and half-sample
/// matrix in the binary matrix format, vertex draws as JSON integer arrays.
inline void write_trace(const ReductionTrace& trace, const std::string& dir,
                        const std::optional<std::vector<std::uint32_t>>& K = std::nullopt) {
    const std::size_t N = trace.dims.N;
    std::vector<double> a(N * N);
    for (std::size_t i = 0; i < N * N; ++i) a[i] = static_cast<double>(trace.A[i]);
    write_matrix_binary(DesignMatrix(N, N, std::move(a)), dir + "/A.ripm");
    write_matrix_binary(DesignMatrix(N, N, trace.Z), dir + "/Z.ripm");
    auto dump_list = [&](const char* name, const std::vector<std::uint32_t>& v) {
        std::ofstream os(dir + "/" + name + ".json");
        if (!os) throw IoError(std::string("cannot open for writing: ") + dir + "/" + name);
        os << nlohmann::json(v).dump() << "\n";
    };
    dump_list("U", trace.U);
    dump_list("W", trace.W);
    if (K) dump_list("K", *K);
}

}  // namespace ripforge

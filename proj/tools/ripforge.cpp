// ripforge command line: generation, certification, reduction and seeded
// Monte Carlo experiments. All randomness flows from --seed; exit codes are
// 0 for success (a declined certification is data, not an error), 1 for
// runtime failures and 2 for usage or configuration errors.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ripforge/certify.hpp"
#include "ripforge/distributions.hpp"
#include "ripforge/graph.hpp"
#include "ripforge/harness.hpp"
#include "ripforge/io.hpp"
#include "ripforge/reduction.hpp"
#include "ripforge/rip.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ripforge;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string output_root(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("RIPFORGE_OUT"); env && *env) return env;
    return "runs";
}

fs::path make_run_dir(const std::string& root, const std::string& name, std::uint64_t seed,
                      bool force) {
    fs::path dir = fs::path(root) / (name + "-seed" + std::to_string(seed));
    if (fs::exists(dir)) {
        if (!force)
            throw std::runtime_error("run directory exists: " + dir.string() +
                                     " (pass --force to overwrite)");
    } else {
        fs::create_directories(dir);
    }
    return dir;
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << j.dump(2) << "\n";
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream is(path);
    if (!is) throw UsageError("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw UsageError(std::string("bad config JSON: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("config root must be a JSON object");
    return j;
}

// Applies `key=value` overrides on top of a config object; values are parsed
// as JSON literals and fall back to strings.
void apply_overrides(json& cfg, const std::vector<std::string>& sets) {
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value: " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        json parsed = json::parse(value, nullptr, false);
        cfg[key] = parsed.is_discarded() ? json(value) : parsed;
    }
}

void require_keys(const json& cfg, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional) {
    for (const char* k : required)
        if (!cfg.contains(k)) throw UsageError(std::string("missing config field '") + k + "'");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        bool known = false;
        for (const char* k : required)
            if (it.key() == k) known = true;
        for (const char* k : optional)
            if (it.key() == k) known = true;
        if (!known) throw UsageError("unknown config field '" + it.key() + "'");
    }
}

void write_records(const fs::path& dir, const ExperimentRun& run, std::uint64_t seed, bool csv) {
    {
        std::ofstream os(dir / "records.jsonl");
        if (!os) throw IoError("cannot open for writing: " + (dir / "records.jsonl").string());
        for (std::size_t t = 0; t < run.trial_stats.size(); ++t)
            os << run.record_json(seed, t).dump() << "\n";
    }
    write_json_file(dir / "summary.json", run.summary.to_json());
    if (csv) {
        std::ofstream os(dir / "records.csv");
        if (!os) throw IoError("cannot open for writing: " + (dir / "records.csv").string());
        os << "trial";
        for (const auto& name : run.stat_names) os << "," << name;
        os << "\n";
        os.precision(17);
        for (std::size_t t = 0; t < run.trial_stats.size(); ++t) {
            os << t;
            for (double v : run.trial_stats[t]) os << "," << v;
            os << "\n";
        }
    }
}

ExperimentRun dispatch_experiment(const std::string& name, const json& cfg, std::uint64_t seed,
                                  unsigned jobs) {
    auto dist = [&](const char* key = "distribution") {
        return dist_from_name(cfg.at(key).get<std::string>());
    };
    auto u = [&](const char* key) { return cfg.at(key).get<std::size_t>(); };
    auto d = [&](const char* key) { return cfg.at(key).get<double>(); };
    const std::size_t trials = cfg.contains("trials") ? u("trials") : 0;

    if (name == "rip-probability") {
        require_keys(cfg, {"distribution", "n", "p", "k", "theta", "trials"}, {});
        return exp_rip_probability(dist(), u("n"), u("p"), u("k"), d("theta"), trials, seed, jobs);
    }
    if (name == "certifier") {
        require_keys(cfg, {"certifier", "distribution", "n", "p", "k", "theta", "trials"},
                     {"sigma"});
        const SubGaussianDist Q = dist();
        const double sigma = cfg.contains("sigma") ? d("sigma") : Q.sigma();
        return exp_certifier(certifier_from_name(cfg.at("certifier").get<std::string>()), Q,
                             u("n"), u("p"), u("k"), d("theta"), sigma, trials, seed, jobs);
    }
    if (name == "reduction-null") {
        require_keys(cfg, {"m", "kappa", "distribution", "trials"},
                     {"L", "beta", "p_rule", "epsilon"});
        json rc = cfg;
        rc.erase("trials");
        return exp_reduction_null(reduction_config_from_json(rc), trials, seed, jobs);
    }
    if (name == "reduction-planted") {
        require_keys(cfg, {"m", "kappa", "distribution", "seed_kind", "epsilon", "trials"},
                     {"L", "beta", "p_rule", "alpha", "delta"});
        const std::string kind_name = cfg.at("seed_kind").get<std::string>();
        SeedKind kind;
        if (kind_name == "clique")
            kind = SeedKind::Clique;
        else if (kind_name == "random-dense")
            kind = SeedKind::RandomDense;
        else
            throw UsageError("seed_kind must be clique or random-dense");
        json rc = cfg;
        for (const char* k : {"trials", "seed_kind", "alpha", "delta"}) rc.erase(k);
        const double alpha = cfg.contains("alpha") ? d("alpha") : 0.0;
        const double delta = cfg.contains("delta") ? d("delta") : 0.05;
        return exp_reduction_planted(reduction_config_from_json(rc), kind, d("epsilon"), trials,
                                     seed, jobs, alpha, delta);
    }
    if (name == "spectral") {
        require_keys(cfg, {"m", "kappa", "epsilon", "tau", "trials"}, {});
        return exp_spectral(u("m"), u("kappa"), d("epsilon"), d("tau"), trials, seed, jobs);
    }
    if (name == "lemma-events") {
        require_keys(cfg, {"m", "kappa", "n", "p", "epsilon", "trials"}, {"seed_kind"});
        SeedKind kind = SeedKind::Clique;
        if (cfg.contains("seed_kind")) {
            const std::string kn = cfg.at("seed_kind").get<std::string>();
            if (kn == "random-dense")
                kind = SeedKind::RandomDense;
            else if (kn != "clique")
                throw UsageError("seed_kind must be clique or random-dense");
        }
        return exp_lemma_events(u("m"), u("kappa"), u("n"), u("p"), d("epsilon"), kind, trials,
                                seed, jobs);
    }
    if (name == "lemma-occupancy") {
        require_keys(cfg, {"n", "ell", "k", "a", "gamma", "trials"}, {});
        return exp_lemma_occupancy(u("n"), u("ell"), u("k"), d("a"), d("gamma"), trials, seed,
                                   jobs);
    }
    if (name == "tail-bound") {
        require_keys(cfg, {"distribution", "n", "theta", "trials"}, {});
        return exp_tail_bound(dist(), u("n"), d("theta"), trials, seed, jobs);
    }
    throw UsageError("unknown experiment '" + name +
                     "' (expected rip-probability, certifier, reduction-null, reduction-planted, "
                     "spectral, lemma-events, lemma-occupancy or tail-bound)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIP certification toolkit: generators, certifiers, the graph reduction and a "
                 "Monte Carlo harness"};
    app.require_subcommand(1);

    // --- gen ---------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate matrices and graphs");
    gen->require_subcommand(1);

    auto* gen_matrix = gen->add_subcommand("matrix", "sample a random design matrix");
    std::string gm_dist = "gaussian", gm_out;
    std::size_t gm_n = 0, gm_p = 0;
    std::uint64_t gm_seed = 0;
    bool gm_force = false, gm_csv = false;
    gen_matrix->add_option("--dist", gm_dist, "distribution: gaussian, rademacher, uniform");
    gen_matrix->add_option("--n", gm_n, "rows")->required();
    gen_matrix->add_option("--p", gm_p, "columns")->required();
    gen_matrix->add_option("--seed", gm_seed, "master seed")->required();
    gen_matrix->add_option("--out", gm_out, "output root (default $RIPFORGE_OUT or ./runs)");
    gen_matrix->add_flag("--force", gm_force, "overwrite an existing run directory");
    gen_matrix->add_flag("--csv", gm_csv, "also write the matrix as CSV");

    auto* gen_graph = gen->add_subcommand("graph", "sample a fair or planted random graph");
    std::string gg_plant, gg_out;
    std::size_t gg_m = 0, gg_kappa = 0;
    double gg_epsilon = 0.5;
    std::uint64_t gg_seed = 0;
    bool gg_force = false;
    gen_graph->add_option("--m", gg_m, "vertex count")->required();
    gen_graph->add_option("--plant", gg_plant, "seed kind to plant: clique or random-dense");
    gen_graph->add_option("--kappa", gg_kappa, "planted set size");
    gen_graph->add_option("--epsilon", gg_epsilon, "density excess of the planted seed");
    gen_graph->add_option("--seed", gg_seed, "master seed")->required();
    gen_graph->add_option("--out", gg_out, "output root");
    gen_graph->add_flag("--force", gg_force, "overwrite an existing run directory");

    // --- certify -----------------------------------------------------------
    auto* certify = app.add_subcommand("certify", "run a certifier on a matrix file");
    std::string ce_matrix, ce_name = "opnorm-exact";
    std::size_t ce_k = 0;
    double ce_theta = 0.0, ce_sigma = 1.0, ce_cap = kDefaultEnumerationCap;
    certify->add_option("--matrix", ce_matrix, "matrix file (binary or .csv)")->required();
    certify->add_option("--certifier", ce_name,
                        "opnorm-exact, incoherence-paper or incoherence-sound");
    certify->add_option("--k", ce_k, "sparsity")->required();
    certify->add_option("--theta", ce_theta, "distortion")->required();
    certify->add_option("--sigma", ce_sigma, "sub-Gaussian parameter (incoherence-paper)");
    certify->add_option("--cap", ce_cap, "subset enumeration cap");

    // --- reduce ------------------------------------------------------------
    auto* reduce_cmd = app.add_subcommand("reduce", "run the graph-to-matrix reduction");
    std::string rd_graph, rd_config, rd_out, rd_certifier;
    std::uint64_t rd_seed = 0;
    double rd_theta = 0.0, rd_sigma = 1.0;
    bool rd_force = false, rd_trace = false, rd_witness = false;
    std::vector<std::string> rd_sets;
    reduce_cmd->add_option("--graph", rd_graph, "graph file (text format)")->required();
    reduce_cmd->add_option("--config", rd_config, "reduction config JSON")->required();
    reduce_cmd->add_option("--set", rd_sets, "override config field, key=value");
    reduce_cmd->add_option("--seed", rd_seed, "master seed")->required();
    reduce_cmd->add_option("--out", rd_out, "output root");
    reduce_cmd->add_flag("--force", rd_force, "overwrite an existing run directory");
    reduce_cmd->add_flag("--trace", rd_trace, "dump the full reduction trace");
    reduce_cmd->add_option("--certifier", rd_certifier, "also run the distinguisher");
    reduce_cmd->add_option("--theta", rd_theta, "distortion for the distinguisher");
    reduce_cmd->add_option("--sigma", rd_sigma, "sub-Gaussian parameter for incoherence-paper");
    reduce_cmd->add_flag("--witness", rd_witness,
                         "evaluate the planted witness (needs the graph's metadata sidecar)");

    // --- experiment ----------------------------------------------------------
    auto* experiment = app.add_subcommand("experiment", "run a Monte Carlo experiment");
    std::string ex_name, ex_config, ex_out;
    std::uint64_t ex_seed = 0;
    unsigned ex_jobs = 1;
    bool ex_force = false, ex_csv = false, ex_report_only = false;
    std::vector<std::string> ex_sets;
    std::optional<std::size_t> ex_trials;
    experiment->add_option("name", ex_name, "experiment name")->required();
    experiment->add_option("--config", ex_config, "experiment config JSON");
    experiment->add_option("--set", ex_sets, "override config field, key=value");
    experiment->add_option("--trials", ex_trials, "trial count override");
    experiment->add_option("--seed", ex_seed, "master seed")->required();
    experiment->add_option("--jobs", ex_jobs, "worker threads (output is identical for any value)");
    experiment->add_option("--out", ex_out, "output root");
    experiment->add_flag("--force", ex_force, "overwrite an existing run directory");
    experiment->add_flag("--csv", ex_csv, "also write per-trial statistics as CSV");
    experiment->add_flag("--report-only", ex_report_only, "exit 0 even on a failing verdict");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen_matrix->parsed()) {
            const SubGaussianDist Q = dist_from_name(gm_dist);
            const fs::path dir = make_run_dir(output_root(gm_out), "gen-matrix", gm_seed, gm_force);
            RngStream rng = derive_stream(gm_seed, "gen-matrix", 0);
            const DesignMatrix X = matrix_sample(Q, gm_n, gm_p, rng);
            write_matrix_binary(X, (dir / "matrix.ripm").string());
            if (gm_csv) write_matrix_csv(X, (dir / "matrix.csv").string());
            const json meta = {{"distribution", Q.name()}, {"n", gm_n}, {"p", gm_p},
                               {"seed", gm_seed}};
            write_json_file(dir / "matrix.meta.json", meta);
            write_json_file(dir / "resolved_config.json",
                            {{"subcommand", "gen matrix"}, {"distribution", Q.name()},
                             {"n", gm_n}, {"p", gm_p}, {"seed", gm_seed}});
            std::cout << dir.string() << "\n";
            return 0;
        }
        if (gen_graph->parsed()) {
            const fs::path dir = make_run_dir(output_root(gg_out), "gen-graph", gg_seed, gg_force);
            RngStream rng = derive_stream(gg_seed, "gen-graph", 0);
            PlantedInstance inst = [&] {
                if (gg_plant.empty()) return er_generate(gg_m, rng);
                if (gg_kappa == 0) throw UsageError("--plant requires --kappa");
                const DenseSeed H = (gg_plant == "clique") ? DenseSeed::clique(gg_kappa)
                                  : (gg_plant == "random-dense")
                                      ? DenseSeed::random_dense(gg_kappa, gg_epsilon)
                                      : throw UsageError("--plant must be clique or random-dense");
                return plant(gg_m, H, rng);
            }();
            const std::string graph_path = (dir / "graph.txt").string();
            write_graph_text(inst.graph, graph_path);
            write_planted_sidecar(inst, graph_path);
            write_json_file(dir / "resolved_config.json",
                            {{"subcommand", "gen graph"}, {"m", gg_m}, {"plant", gg_plant},
                             {"kappa", gg_kappa}, {"epsilon", gg_epsilon}, {"seed", gg_seed}});
            std::cout << dir.string() << "\n";
            return 0;
        }
        if (certify->parsed()) {
            const DesignMatrix X = ce_matrix.size() > 4 &&
                                           ce_matrix.compare(ce_matrix.size() - 4, 4, ".csv") == 0
                                       ? read_matrix_csv(ce_matrix)
                                       : read_matrix_binary(ce_matrix);
            const RipParams params{ce_k, ce_theta};
            const CertifierOutcome out =
                run_certifier(certifier_from_name(ce_name), X, params, ce_sigma, ce_cap);
            json j = {{"certified", out.certified}, {"statistic", out.statistic},
                      {"threshold", out.threshold}};
            std::cout << j.dump() << "\n";
            return 0;
        }
        if (reduce_cmd->parsed()) {
            json cfg_json = load_config_file(rd_config);
            apply_overrides(cfg_json, rd_sets);
            const ReductionConfig cfg = reduction_config_from_json(cfg_json);
            const Graph G = read_graph_text(rd_graph);
            const fs::path dir = make_run_dir(output_root(rd_out), "reduce", rd_seed, rd_force);
            RngStream rng = derive_stream(rd_seed, "reduce", 0);
            const ReductionResult result = reduce(G, cfg, rng);
            write_matrix_binary(result.X, (dir / "X.ripm").string());

            json report = {{"n", result.trace.dims.n}, {"p", result.trace.dims.p},
                           {"k", result.trace.dims.k}, {"ell", result.trace.dims.ell},
                           {"N", result.trace.dims.N}};
            const auto meta = read_planted_sidecar(rd_graph);
            if (rd_trace) {
                fs::create_directories(dir / "trace");
                write_trace(result.trace, (dir / "trace").string(),
                            meta ? std::optional(meta->planted) : std::nullopt);
            }
            if (!rd_certifier.empty()) {
                const RipParams params{result.trace.dims.k, rd_theta};
                const CertifierOutcome out =
                    run_certifier(certifier_from_name(rd_certifier), result.X, params, rd_sigma);
                report["certifier"] = {{"certified", out.certified},
                                       {"statistic", out.statistic},
                                       {"threshold", out.threshold}};
                report["distinguisher"] = out.certified ? 0 : 1;
            }
            if (rd_witness) {
                if (!meta)
                    throw std::runtime_error(
                        "--witness needs the planted metadata sidecar (" + sidecar_path(rd_graph) +
                        "); it is a diagnostic mode for planted graphs only");
                const WitnessReport w =
                    witness_quadratic_form(result.trace, meta->planted, meta->epsilon);
                report["witness"] = {{"value", w.value},
                                     {"S_size", w.S_size},
                                     {"score_sum_WK", w.score_sum_WK},
                                     {"edges_UK_WK", w.edges_UK_WK},
                                     {"empty_S_warning", w.s_empty_warning}};
            }
            write_json_file(dir / "report.json", report);
            json resolved = reduction_config_to_json(cfg);
            resolved["seed"] = rd_seed;
            resolved["graph"] = rd_graph;
            write_json_file(dir / "resolved_config.json", resolved);
            std::cout << report.dump() << "\n";
            return 0;
        }
        if (experiment->parsed()) {
            json cfg = load_config_file(ex_config);
            apply_overrides(cfg, ex_sets);
            if (ex_trials) cfg["trials"] = *ex_trials;
            if (cfg.contains("trials") && cfg.at("trials").get<std::size_t>() < 1)
                throw UsageError("trials must be >= 1");
            const fs::path dir =
                make_run_dir(output_root(ex_out), "experiment-" + ex_name, ex_seed, ex_force);
            json resolved = cfg;
            resolved["experiment"] = ex_name;
            resolved["seed"] = ex_seed;
            resolved["jobs"] = ex_jobs;
            write_json_file(dir / "resolved_config.json", resolved);
            const ExperimentRun run = dispatch_experiment(ex_name, cfg, ex_seed, ex_jobs);
            write_records(dir, run, ex_seed, ex_csv);
            std::cout << run.summary.to_json().dump(2) << "\n";
            if (ex_report_only) return 0;
            return run.summary.pass ? 0 : 1;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

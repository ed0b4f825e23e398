#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ripforge/certify.hpp"
#include "ripforge/distributions.hpp"
#include "ripforge/graph.hpp"
#include "ripforge/reduction.hpp"
#include "ripforge/rip.hpp"
#include "ripforge/rng.hpp"
#include "ripforge/stats.hpp"

namespace ripforge {

struct RateWithSe {
    double value;
    double se;
};

/// Result of a seeded Monte Carlo experiment: empirical rates with standard
/// errors, the theoretical bounds they are compared against, and a verdict.
/// Summaries are built by aggregating per-trial results in trial order, so
/// they are byte-identical regardless of worker count.
struct ExperimentSummary {
    std::string experiment;
    nlohmann::json params;
    std::size_t trials = 0;
    std::map<std::string, RateWithSe> rates;
    std::map<std::string, double> bounds;
    std::map<std::string, double> statistics;
    std::vector<std::string> notes;
    bool pass = false;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["experiment"] = experiment;
        j["params"] = params;
        j["trials"] = trials;
        nlohmann::json r(nlohmann::json::value_t::object);
        for (const auto& [name, rate] : rates) r[name] = {{"value", rate.value}, {"se", rate.se}};
        j["rates"] = r;
        j["bounds"] = bounds;
        j["statistics"] = statistics;
        j["notes"] = notes;
        j["verdict"] = pass ? "pass" : "fail";
        return j;
    }
};

/// One experiment run: the summary plus flat per-trial statistics
/// (trial_stats[t][i] is statistic stat_names[i] of trial t).
struct ExperimentRun {
    ExperimentSummary summary;
    std::vector<std::string> stat_names;
    std::vector<std::vector<double>> trial_stats;

    nlohmann::json record_json(std::uint64_t master_seed, std::size_t t) const {
        nlohmann::json rec;
        rec["experiment"] = summary.experiment;
        rec["seed"] = master_seed;
        rec["trial"] = t;
        rec["params"] = summary.params;
        nlohmann::json stats(nlohmann::json::value_t::object);
        for (std::size_t i = 0; i < stat_names.size(); ++i) stats[stat_names[i]] = trial_stats[t][i];
        rec["statistics"] = stats;
        return rec;
    }
};

namespace detail {

/// Runs body(0..count-1), either inline or on `jobs` workers pulling from a
/// shared counter. Results must be written to per-index slots; any exception
/// is rethrown on the calling thread.
inline void run_indexed(std::size_t count, unsigned jobs,
                        const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t t = 0; t < count; ++t) body(t);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> workers;
    const unsigned worker_count = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    for (unsigned w = 0; w < worker_count; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t t = next.fetch_add(1);
                if (t >= count) return;
                try {
                    body(t);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : workers) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline void require_trials(std::size_t trials) {
    if (trials < 1) throw ConfigError("experiment: trials must be >= 1");
}

inline std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// rip-probability: empirical restricted-isometry rate of random matrices
// against the closed-form lower bound.
// ---------------------------------------------------------------------------

inline ExperimentRun exp_rip_probability(const SubGaussianDist& Q, std::size_t n, std::size_t p,
                                         std::size_t k, double theta, std::size_t trials,
                                         std::uint64_t seed, unsigned jobs = 1,
                                         double cap = kDefaultEnumerationCap) {
    detail::require_trials(trials);
    RipParams params{k, theta};
    params.validate(p);
    const double subsets = binomial_coefficient(p, k);
    if (subsets > cap) throw EnumerationInfeasible(subsets, cap);

    ExperimentRun run;
    run.summary.experiment = "rip-probability";
    run.summary.params = {{"distribution", Q.name()}, {"n", n}, {"p", p},
                          {"k", k},                   {"theta", theta}, {"trials", trials}};
    run.stat_names = {"margin", "in_rip"};
    run.trial_stats.assign(trials, {});

    detail::run_indexed(trials, jobs, [&](std::size_t t) {
        RngStream rng = derive_stream(seed, "rip-probability", t);
        const DesignMatrix X = matrix_sample(Q, n, p, rng);
        const double margin = rip_margin_exact(X, k, cap);
        run.trial_stats[t] = {margin, margin <= theta ? 1.0 : 0.0};
    });

    std::size_t hits = 0;
    for (const auto& s : run.trial_stats) hits += (s[1] != 0.0);
    const double rate = static_cast<double>(hits) / static_cast<double>(trials);
    const double se = binomial_se(rate, trials);
    const ProbabilityBound bound = rip_probability_lower_bound(n, p, k, theta, Q.sigma());

    run.summary.trials = trials;
    run.summary.rates["rip_rate"] = {rate, se};
    run.summary.bounds["rip_probability_lower_bound"] = bound.value;
    if (bound.vacuous) {
        run.summary.notes.push_back("bound is vacuous (" + detail::fmt(bound.value) +
                                    "); auto-pass");
        run.summary.pass = true;
    } else {
        run.summary.pass = rate >= bound.value - 4.0 * se;
    }
    return run;
}

// ---------------------------------------------------------------------------
// certifier: decline rate of a certifier on random matrices, with a
// soundness cross-check whenever the exact membership test is feasible.
// ---------------------------------------------------------------------------

inline ExperimentRun exp_certifier(CertifierId certifier, const SubGaussianDist& Q, std::size_t n,
                                   std::size_t p, std::size_t k, double theta, double sigma,
                                   std::size_t trials, std::uint64_t seed, unsigned jobs = 1,
                                   double cap = kDefaultEnumerationCap) {
    detail::require_trials(trials);
    RipParams params{k, theta};

    ExperimentRun run;
    run.summary.experiment = "certifier";
    run.summary.params = {{"certifier", certifier_name(certifier)},
                          {"distribution", Q.name()},
                          {"n", n},
                          {"p", p},
                          {"k", k},
                          {"theta", theta},
                          {"sigma", sigma},
                          {"trials", trials}};

    // The regime precondition does not depend on the sample, so surface it in
    // the summary instead of failing trial by trial.
    if (certifier == CertifierId::IncoherencePaper) {
        const double required = incoherence_regime_required_n(k, p, theta, sigma);
        if (static_cast<double>(n) < required * (1.0 - kRegimeSlack)) {
            run.summary.notes.push_back("regime error: n = " + std::to_string(n) +
                                        " below required n >= " + detail::fmt(required));
            run.summary.pass = false;
            return run;
        }
    }

    const bool exact_feasible = binomial_coefficient(p, k) <= cap;
    run.stat_names = {"statistic", "certified", "sound_ok"};
    run.trial_stats.assign(trials, {});

    detail::run_indexed(trials, jobs, [&](std::size_t t) {
        RngStream rng = derive_stream(seed, "certifier", t);
        const DesignMatrix X = matrix_sample(Q, n, p, rng);
        const CertifierOutcome out = run_certifier(certifier, X, params, sigma, cap);
        double sound_ok = 1.0;
        if (out.certified && exact_feasible) sound_ok = is_rip(X, params, cap) ? 1.0 : 0.0;
        run.trial_stats[t] = {out.statistic, out.certified ? 1.0 : 0.0, sound_ok};
    });

    std::size_t declines = 0, violations = 0;
    for (const auto& s : run.trial_stats) {
        declines += (s[1] == 0.0);
        violations += (s[2] == 0.0);
    }
    const double decline = static_cast<double>(declines) / static_cast<double>(trials);
    const double se = binomial_se(decline, trials);

    run.summary.trials = trials;
    run.summary.rates["decline_rate"] = {decline, se};
    run.summary.bounds["decline_budget"] = 1.0 / 3.0;
    run.summary.statistics["soundness_violations"] = static_cast<double>(violations);
    run.summary.statistics["exact_check_feasible"] = exact_feasible ? 1.0 : 0.0;
    if (!exact_feasible)
        run.summary.notes.push_back("exact membership check infeasible; soundness not cross-checked");
    run.summary.pass = (decline <= 1.0 / 3.0 + 4.0 * se) && violations == 0;
    return run;
}

// ---------------------------------------------------------------------------
// reduction-null: distributional diagnostics of the reduction on fair random
// graphs. The averaged core must have independent entries with the exact
// block-averaged law, unit-variance scaling 1/n, and no adjacent correlation.
// ---------------------------------------------------------------------------

inline ExperimentRun exp_reduction_null(const ReductionConfig& cfg, std::size_t trials,
                                        std::uint64_t seed, unsigned jobs = 1) {
    detail::require_trials(trials);
    const DerivedDims dims = derive_dims(cfg);
    const auto blocks = static_cast<unsigned>(dims.ell * dims.ell);
    const bool discrete = cfg.Q.kind == DistKind::Rademacher;

    ExperimentRun run;
    run.summary.experiment = "reduction-null";
    run.summary.params = {{"m", cfg.m},       {"kappa", cfg.kappa}, {"L", cfg.L},
                          {"beta", cfg.beta}, {"distribution", cfg.Q.name()}, {"trials", trials}};
    run.stat_names = {"mean", "m2"};
    run.trial_stats.assign(trials, {});

    struct TrialPool {
        std::vector<double> entries;          // continuous kinds only
        std::vector<std::uint64_t> atom_counts;  // Rademacher only
        double sx = 0, sx2 = 0, sx4 = 0, sxy_h = 0, sxy_v = 0;
    };
    std::vector<TrialPool> pools(trials);

    const std::size_t n = dims.n;
    detail::run_indexed(trials, jobs, [&](std::size_t t) {
        RngStream rng = derive_stream(seed, "reduction-null", t);
        const PlantedInstance inst = er_generate(cfg.m, rng);
        const ReductionResult red = reduce(inst.graph, cfg, rng);
        const std::vector<double>& e = red.trace.Xtilde;
        TrialPool& pool = pools[t];
        for (double x : e) {
            pool.sx += x;
            pool.sx2 += x * x;
            pool.sx4 += x * x * x * x;
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j + 1 < n; ++j) pool.sxy_h += e[i * n + j] * e[i * n + j + 1];
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = 0; j < n; ++j) pool.sxy_v += e[i * n + j] * e[(i + 1) * n + j];
        if (discrete) {
            pool.atom_counts.assign(blocks + 1, 0);
            const double root_n = std::sqrt(static_cast<double>(n));
            const double ell = static_cast<double>(dims.ell);
            for (double x : e) {
                const auto b = static_cast<long>(
                    std::llround((x * ell * root_n + static_cast<double>(blocks)) / 2.0));
                ++pool.atom_counts[static_cast<std::size_t>(b)];
            }
        } else {
            pool.entries = e;
        }
        const double count = static_cast<double>(e.size());
        run.trial_stats[t] = {pool.sx / count, pool.sx2 / count};
    });

    // Aggregate in trial order.
    double sx2 = 0, sx4 = 0, sxy_h = 0, sxy_v = 0;
    std::vector<double> pooled;
    std::vector<std::uint64_t> atoms(discrete ? blocks + 1 : 0, 0);
    const std::size_t per_trial = n * n;
    if (!discrete) pooled.reserve(trials * per_trial);
    for (auto& pool : pools) {
        sx2 += pool.sx2;
        sx4 += pool.sx4;
        sxy_h += pool.sxy_h;
        sxy_v += pool.sxy_v;
        if (discrete)
            for (std::size_t i = 0; i <= blocks; ++i) atoms[i] += pool.atom_counts[i];
        else {
            pooled.insert(pooled.end(), pool.entries.begin(), pool.entries.end());
            pool.entries.clear();
            pool.entries.shrink_to_fit();
        }
    }
    const double total = static_cast<double>(trials * per_trial);
    const double m2 = sx2 / total;
    const double m4 = sx4 / total;
    const double m2_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / total);
    const double target = 1.0 / static_cast<double>(n);
    const double pairs = static_cast<double>(trials) * static_cast<double>(n) *
                         static_cast<double>(n - 1);
    const double corr_h = (sxy_h / pairs) / m2;
    const double corr_v = (sxy_v / pairs) / m2;
    const double corr_se = 1.0 / std::sqrt(pairs);

    bool law_ok;
    if (discrete) {
        std::vector<double> probs(blocks + 1);
        for (unsigned b = 0; b <= blocks; ++b)
            probs[b] = std::exp(log_binomial(blocks, b) - blocks * std::log(2.0));
        const ChiSquareResult chi = chi_square_gof(atoms, probs);
        run.summary.statistics["chi_square"] = chi.statistic;
        run.summary.statistics["chi_square_pvalue"] = chi.pvalue;
        law_ok = chi.pvalue >= 0.01;
    } else {
        const SubGaussianDist Q = cfg.Q;
        const KsResult ks =
            ks_test(pooled, [&](double x) { return averaged_entry_cdf(Q, n, blocks, x); });
        run.summary.statistics["ks_statistic"] = ks.statistic;
        run.summary.statistics["ks_pvalue"] = ks.pvalue;
        law_ok = ks.pvalue >= 0.01;
    }

    const bool m2_ok = std::fabs(m2 - target) <= 4.0 * m2_se + 1e-12;
    const bool corr_ok = std::fabs(corr_h) <= 4.0 * corr_se && std::fabs(corr_v) <= 4.0 * corr_se;

    run.summary.trials = trials;
    run.summary.statistics["pooled_m2"] = m2;
    run.summary.statistics["pooled_m2_se"] = m2_se;
    run.summary.statistics["m2_target"] = target;
    run.summary.statistics["corr_horizontal"] = corr_h;
    run.summary.statistics["corr_vertical"] = corr_v;
    run.summary.statistics["corr_se"] = corr_se;
    if (!law_ok) run.summary.notes.push_back("entry-law test rejected at the 1% level");
    if (!m2_ok) run.summary.notes.push_back("pooled second moment outside 4 s.e. of 1/n");
    if (!corr_ok) run.summary.notes.push_back("adjacent-entry correlation outside 4 s.e. of 0");
    run.summary.pass = law_ok && m2_ok && corr_ok;
    return run;
}

// ---------------------------------------------------------------------------
// reduction-planted: witness quadratic form on planted instances, the exact
// score identity, and the violation rate against the hard-sequence theta.
// ---------------------------------------------------------------------------

inline ExperimentRun exp_reduction_planted(const ReductionConfig& cfg, SeedKind seed_kind,
                                           double epsilon, std::size_t trials, std::uint64_t seed,
                                           unsigned jobs = 1, double alpha = 0.0,
                                           double delta = 0.05,
                                           double cap = kDefaultEnumerationCap) {
    detail::require_trials(trials);
    if (seed_kind == SeedKind::Explicit)
        throw ConfigError("exp_reduction_planted: seed kind must be clique or random-dense");
    const DerivedDims dims = derive_dims(cfg);
    const DenseSeed H = (seed_kind == SeedKind::Clique)
                            ? DenseSeed::clique(cfg.kappa)
                            : DenseSeed::random_dense(cfg.kappa, epsilon);
    const HardSequencePoint hard = hard_sequence(dims.n, alpha, cfg.beta, delta);
    const bool exact_feasible = binomial_coefficient(dims.n, dims.k) <= cap;

    ExperimentRun run;
    run.summary.experiment = "reduction-planted";
    run.summary.params = {{"m", cfg.m},           {"kappa", cfg.kappa},
                          {"L", cfg.L},           {"beta", cfg.beta},
                          {"distribution", cfg.Q.name()}, {"seed_kind", seed_kind_name(seed_kind)},
                          {"epsilon", epsilon},   {"alpha", alpha},
                          {"delta", delta},       {"trials", trials}};
    run.stat_names = {"witness_value", "identity_ok", "violation", "S_size", "core_margin"};
    run.trial_stats.assign(trials, {});

    detail::run_indexed(trials, jobs, [&](std::size_t t) {
        RngStream rng = derive_stream(seed, "reduction-planted", t);
        const PlantedInstance inst = plant(cfg.m, H, rng);
        const ReductionResult red = reduce(inst.graph, cfg, rng);
        const WitnessReport w = witness_quadratic_form(red.trace, *inst.planted_set, epsilon);
        const bool identity =
            w.score_sum_WK == 2 * static_cast<std::int64_t>(w.edges_UK_WK) -
                                  static_cast<std::int64_t>(w.S_size * w.WK_size);
        double core_margin = -1.0;
        if (exact_feasible) {
            DesignMatrix core(dims.n, dims.n, red.trace.Xtilde);
            core_margin = rip_margin_exact(core, dims.k, cap);
        }
        run.trial_stats[t] = {w.value, identity ? 1.0 : 0.0,
                              w.value > 1.0 + hard.theta ? 1.0 : 0.0,
                              static_cast<double>(w.S_size), core_margin};
    });

    std::size_t identity_fail = 0, violations = 0;
    double min_value = std::numeric_limits<double>::infinity();
    for (const auto& s : run.trial_stats) {
        identity_fail += (s[1] == 0.0);
        violations += (s[2] != 0.0);
        min_value = std::min(min_value, s[0]);
    }
    const double rate = static_cast<double>(violations) / static_cast<double>(trials);

    run.summary.trials = trials;
    run.summary.rates["violation_rate"] = {rate, binomial_se(rate, trials)};
    run.summary.bounds["hard_theta"] = hard.theta;
    run.summary.statistics["hard_k"] = static_cast<double>(hard.k);
    run.summary.statistics["witness_min"] = min_value;
    run.summary.statistics["identity_failures"] = static_cast<double>(identity_fail);
    run.summary.statistics["exact_check_feasible"] = exact_feasible ? 1.0 : 0.0;
    if (!exact_feasible)
        run.summary.notes.push_back("exact membership check infeasible at the derived (n, k)");
    run.summary.pass = identity_fail == 0;
    return run;
}

// ---------------------------------------------------------------------------
// spectral: detection accuracy of the spectral statistic over balanced
// null/planted trials (all-null when kappa = 0), with the per-instance
// Rayleigh lower bound checked on every planted trial.
// ---------------------------------------------------------------------------

inline ExperimentRun exp_spectral(std::size_t m, std::size_t kappa, double epsilon, double tau,
                                  std::size_t trials, std::uint64_t seed, unsigned jobs = 1) {
    detail::require_trials(trials);
    if (kappa > m) throw ConfigError("exp_spectral: kappa exceeds m");

    ExperimentRun run;
    run.summary.experiment = "spectral";
    run.summary.params = {{"m", m},     {"kappa", kappa},   {"epsilon", epsilon},
                          {"tau", tau}, {"trials", trials}};
    run.stat_names = {"planted", "statistic", "detected", "correct", "rayleigh_bound"};
    run.trial_stats.assign(trials, {});

    detail::run_indexed(trials, jobs, [&](std::size_t t) {
        RngStream rng = derive_stream(seed, "spectral", t);
        const bool planted = (kappa > 0) && (t % 2 == 1);
        const DenseSeed H = (epsilon >= 0.5) ? DenseSeed::clique(kappa)
                                             : DenseSeed::random_dense(kappa, epsilon);
        PlantedInstance inst = planted ? plant(m, H, rng) : er_generate(m, rng);
        const double stat = spectral_statistic(inst.graph);
        const int detected = stat > tau ? 1 : 0;
        const bool correct = (detected == (planted ? 1 : 0));
        double rayleigh = 0.0;
        if (planted) {
            const auto& K = *inst.planted_set;
            std::size_t edges = 0;
            for (std::size_t i = 0; i + 1 < K.size(); ++i)
                for (std::size_t j = i + 1; j < K.size(); ++j)
                    if (inst.graph.has_edge(K[i], K[j])) ++edges;
            const double kd = static_cast<double>(kappa);
            rayleigh = (2.0 * static_cast<double>(edges) - kd * kd / 2.0) / kd;
        }
        run.trial_stats[t] = {planted ? 1.0 : 0.0, stat, static_cast<double>(detected),
                              correct ? 1.0 : 0.0, rayleigh};
    });

    std::size_t correct = 0, planted_count = 0, rayleigh_fail = 0, false_pos = 0;
    double min_planted_stat = std::numeric_limits<double>::infinity();
    for (const auto& s : run.trial_stats) {
        correct += (s[3] != 0.0);
        if (s[0] != 0.0) {
            ++planted_count;
            min_planted_stat = std::min(min_planted_stat, s[1]);
            if (s[1] < s[4] - 1e-6) ++rayleigh_fail;
        } else if (s[2] != 0.0) {
            ++false_pos;
        }
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(trials);
    const std::size_t nulls = trials - planted_count;

    run.summary.trials = trials;
    run.summary.rates["accuracy"] = {accuracy, binomial_se(accuracy, trials)};
    if (nulls > 0) {
        const double fp = static_cast<double>(false_pos) / static_cast<double>(nulls);
        run.summary.rates["false_positive_rate"] = {fp, binomial_se(fp, nulls)};
    }
    if (planted_count > 0) run.summary.statistics["min_planted_statistic"] = min_planted_stat;
    run.summary.statistics["rayleigh_failures"] = static_cast<double>(rayleigh_fail);
    run.summary.pass = rayleigh_fail == 0;
    return run;
}

// ---------------------------------------------------------------------------
// lemma-events: deviation frequencies of the bipartite edge-count statistics
// under without-replacement vertex draws, against their Chebyshev-style
// bounds. Only the seed graph's adjacency among the dense set is needed, so
// this scales to graphs far too large to materialize.
// ---------------------------------------------------------------------------

namespace detail {

struct EventBound {
    double value;
    bool vacuous() const { return value >= 1.0; }
};

}  // namespace detail

inline ExperimentRun exp_lemma_events(std::size_t m, std::size_t kappa, std::size_t n,
                                      std::size_t p, double epsilon, SeedKind seed_kind,
                                      std::size_t trials, std::uint64_t seed, unsigned jobs = 1) {
    detail::require_trials(trials);
    if (!(epsilon > 0.0 && epsilon <= 0.5))
        throw ConfigError("exp_lemma_events: epsilon must be in (0, 1/2]");
    if (kappa < 2 || kappa > m) throw ConfigError("exp_lemma_events: kappa must be in [2, m]");
    if (n == 0 || p == 0 || n >= (m + 1) / 2 || p >= (m + 1) / 2)
        throw ConfigError("exp_lemma_events: n and p must be positive and below m/2");
    if (n + p > m) throw ConfigError("exp_lemma_events: n + p exceeds m");

    const double md = static_cast<double>(m), kd = static_cast<double>(kappa);
    const double nd = static_cast<double>(n), pd = static_cast<double>(p);
    const detail::EventBound b1{8.0 / epsilon * std::sqrt(md / (nd * kd))};
    const detail::EventBound b2{8.0 / epsilon * std::sqrt(md / (pd * kd))};
    const detail::EventBound b3{4.0 / epsilon *
                                std::sqrt(md * (pd * kd + nd * kd + md) / (nd * pd * kd * kd))};

    // The dense seed is fixed across trials; randomness is over the draws.
    const bool clique = (seed_kind == SeedKind::Clique);
    if (!clique && seed_kind != SeedKind::RandomDense)
        throw ConfigError("exp_lemma_events: seed kind must be clique or random-dense");
    std::vector<std::uint64_t> h_bits;
    const std::size_t h_words = (kappa + 63) / 64;
    if (!clique) {
        RngStream hrng = derive_stream(seed, "lemma-events/seed", 0);
        const DenseSeed H = DenseSeed::random_dense(kappa, epsilon);
        h_bits.assign(kappa * h_words, 0);
        for (auto [u, v] : H.materialize(hrng)) {
            h_bits[u * h_words + v / 64] |= 1ULL << (v % 64);
            h_bits[v * h_words + u / 64] |= 1ULL << (u % 64);
        }
    }

    ExperimentRun run;
    run.summary.experiment = "lemma-events";
    run.summary.params = {{"m", m}, {"kappa", kappa}, {"n", n},
                          {"p", p}, {"epsilon", epsilon},
                          {"seed_kind", seed_kind_name(seed_kind)}, {"trials", trials}};
    run.stat_names = {"u_hits", "w_hits", "edge_count", "bad1", "bad2", "bad3"};
    run.trial_stats.assign(trials, {});

    const double mean_u = nd * kd / md;
    const double mean_w = pd * kd / md;
    const double edge_threshold = (0.5 + epsilon / 4.0) * nd * pd * kd * kd / (md * md);

    detail::run_indexed(trials, jobs, [&](std::size_t t) {
        RngStream rng = derive_stream(seed, "lemma-events", t);
        // Labels of the kappa dense-set vertices among the joint
        // without-replacement draw: multivariate hypergeometric, sampled
        // sequentially.
        std::size_t rem_u = n, rem_w = p, rem_total = m;
        std::vector<std::uint32_t> in_u, in_w;
        for (std::size_t v = 0; v < kappa; ++v) {
            const std::uint64_t r = rng.uniform_below(rem_total);
            if (r < rem_u) {
                in_u.push_back(static_cast<std::uint32_t>(v));
                --rem_u;
            } else if (r < rem_u + rem_w) {
                in_w.push_back(static_cast<std::uint32_t>(v));
                --rem_w;
            }
            --rem_total;
        }
        double edge_count;
        if (clique) {
            edge_count = static_cast<double>(in_u.size()) * static_cast<double>(in_w.size());
        } else {
            std::uint64_t count = 0;
            for (auto u : in_u)
                for (auto w : in_w)
                    count += (h_bits[u * h_words + w / 64] >> (w % 64)) & 1ULL;
            edge_count = static_cast<double>(count);
        }
        const double a = static_cast<double>(in_u.size());
        const double b = static_cast<double>(in_w.size());
        const double bad1 = std::fabs(a - mean_u) > (epsilon / 8.0) * mean_u ? 1.0 : 0.0;
        const double bad2 = std::fabs(b - mean_w) > (epsilon / 8.0) * mean_w ? 1.0 : 0.0;
        const double bad3 = edge_count < edge_threshold ? 1.0 : 0.0;
        run.trial_stats[t] = {a, b, edge_count, bad1, bad2, bad3};
    });

    const double td = static_cast<double>(trials);
    double f1 = 0, f2 = 0, f3 = 0;
    for (const auto& s : run.trial_stats) {
        f1 += s[3];
        f2 += s[4];
        f3 += s[5];
    }
    f1 /= td;
    f2 /= td;
    f3 /= td;

    run.summary.trials = trials;
    run.summary.rates["u_deviation"] = {f1, binomial_se(f1, trials)};
    run.summary.rates["w_deviation"] = {f2, binomial_se(f2, trials)};
    run.summary.rates["edge_shortfall"] = {f3, binomial_se(f3, trials)};
    run.summary.bounds["u_deviation_bound"] = b1.value;
    run.summary.bounds["w_deviation_bound"] = b2.value;
    run.summary.bounds["edge_shortfall_bound"] = b3.value;
    bool pass = true;
    auto check = [&](const char* name, double freq, const detail::EventBound& bound) {
        if (bound.vacuous()) {
            run.summary.notes.push_back(std::string(name) + " bound is vacuous (" +
                                        detail::fmt(bound.value) + "); auto-pass");
            return;
        }
        if (freq > bound.value) pass = false;
    };
    check("u_deviation", f1, b1);
    check("w_deviation", f2, b2);
    check("edge_shortfall", f3, b3);
    run.summary.pass = pass;
    return run;
}

// ---------------------------------------------------------------------------
// lemma-occupancy: rows occupied and maximum row load when k balls are chosen
// without replacement from an n-by-ell array, against the occupancy bounds.
// ---------------------------------------------------------------------------

inline ExperimentRun exp_lemma_occupancy(std::size_t n, std::size_t ell, std::size_t k, double a,
                                         double gamma, std::size_t trials, std::uint64_t seed,
                                         unsigned jobs = 1) {
    detail::require_trials(trials);
    if (k >= n) throw ConfigError("exp_lemma_occupancy: requires k < n");
    if (k < 1 || ell < 1) throw ConfigError("exp_lemma_occupancy: k and ell must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("exp_lemma_occupancy: gamma in (0, 1)");
    if (std::pow(static_cast<double>(n), gamma) < static_cast<double>(k) - 1e-9)
        throw ConfigError("exp_lemma_occupancy: needs k <= n^gamma");
    if (!(a >= 1.0)) throw ConfigError("exp_lemma_occupancy: a must be >= 1");

    const double kd = static_cast<double>(k), nd = static_cast<double>(n);
    const double occupancy_threshold = kd - kd * kd / (2.0 * nd) - std::sqrt(kd * std::log(kd));
    const detail::EventBound occ_bound{1.0 / (kd * kd)};
    const detail::EventBound load_bound{std::pow(nd, 1.0 - a * (1.0 - gamma)) *
                                        (1.0 - std::pow(nd, -(1.0 - gamma)))};

    ExperimentRun run;
    run.summary.experiment = "lemma-occupancy";
    run.summary.params = {{"n", n}, {"ell", ell}, {"k", k},
                          {"a", a}, {"gamma", gamma}, {"trials", trials}};
    run.stat_names = {"occupied_rows", "max_row_load", "occ_low", "load_high"};
    run.trial_stats.assign(trials, {});

    const std::size_t cells = n * ell;
    detail::run_indexed(trials, jobs, [&](std::size_t t) {
        RngStream rng = derive_stream(seed, "lemma-occupancy", t);
        // Floyd's sampling of k distinct cells out of n*ell.
        std::vector<std::uint64_t> chosen;
        chosen.reserve(k);
        for (std::size_t j = cells - k; j < cells; ++j) {
            const std::uint64_t c = rng.uniform_below(j + 1);
            bool present = false;
            for (auto x : chosen)
                if (x == c) { present = true; break; }
            chosen.push_back(present ? static_cast<std::uint64_t>(j) : c);
        }
        std::vector<std::uint32_t> rows;
        rows.reserve(k);
        for (auto c : chosen) rows.push_back(static_cast<std::uint32_t>(c / ell));
        std::sort(rows.begin(), rows.end());
        std::size_t occupied = 0, max_load = 0, streak = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == 0 || rows[i] != rows[i - 1]) {
                ++occupied;
                streak = 1;
            } else {
                ++streak;
            }
            max_load = std::max(max_load, streak);
        }
        run.trial_stats[t] = {static_cast<double>(occupied), static_cast<double>(max_load),
                              static_cast<double>(occupied) <= occupancy_threshold ? 1.0 : 0.0,
                              static_cast<double>(max_load) >= a ? 1.0 : 0.0};
    });

    double f_occ = 0, f_load = 0;
    for (const auto& s : run.trial_stats) {
        f_occ += s[2];
        f_load += s[3];
    }
    f_occ /= static_cast<double>(trials);
    f_load /= static_cast<double>(trials);

    run.summary.trials = trials;
    run.summary.rates["occupancy_shortfall"] = {f_occ, binomial_se(f_occ, trials)};
    run.summary.rates["load_exceedance"] = {f_load, binomial_se(f_load, trials)};
    run.summary.bounds["occupancy_bound"] = occ_bound.value;
    run.summary.bounds["load_bound"] = load_bound.value;
    run.summary.statistics["occupancy_threshold"] = occupancy_threshold;
    bool pass = true;
    if (occ_bound.vacuous())
        run.summary.notes.push_back("occupancy bound is vacuous (" + detail::fmt(occ_bound.value) +
                                    "); auto-pass");
    else if (f_occ > occ_bound.value)
        pass = false;
    if (load_bound.vacuous())
        run.summary.notes.push_back("load bound is vacuous (" + detail::fmt(load_bound.value) +
                                    "); auto-pass");
    else if (f_load > load_bound.value)
        pass = false;
    run.summary.pass = pass;
    return run;
}

// ---------------------------------------------------------------------------
// tail-bound: two-sided tails of a centred sum of squared sub-Gaussian draws
// against the Bernstein-style closed forms.
// ---------------------------------------------------------------------------

inline ExperimentRun exp_tail_bound(const SubGaussianDist& Q, std::size_t n, double theta,
                                    std::size_t trials, std::uint64_t seed, unsigned jobs = 1) {
    detail::require_trials(trials);
    if (n < 1) throw ConfigError("exp_tail_bound: n must be >= 1");
    if (!(theta > 0.0)) throw ConfigError("exp_tail_bound: theta must be positive");

    const double sigma2 = Q.sigma() * Q.sigma();
    const double sigma4 = sigma2 * sigma2;
    const double nd = static_cast<double>(n);
    const detail::EventBound upper_bound{
        std::exp(-std::min(theta * theta / (64.0 * nd * sigma4), theta / (8.0 * sigma2)))};
    const detail::EventBound lower_bound{std::exp(-theta * theta / (64.0 * nd * sigma4))};

    ExperimentRun run;
    run.summary.experiment = "tail-bound";
    run.summary.params = {{"distribution", Q.name()}, {"n", n},
                          {"theta", theta},           {"trials", trials}};
    run.stat_names = {"sum", "upper_hit", "lower_hit"};
    run.trial_stats.assign(trials, {});

    detail::run_indexed(trials, jobs, [&](std::size_t t) {
        RngStream rng = derive_stream(seed, "tail-bound", t);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = sample(Q, rng);
            sum += x * x - 1.0;  // unit variance, so E x^2 = 1
        }
        run.trial_stats[t] = {sum, sum >= theta ? 1.0 : 0.0, sum <= -theta ? 1.0 : 0.0};
    });

    double f_up = 0, f_lo = 0;
    for (const auto& s : run.trial_stats) {
        f_up += s[1];
        f_lo += s[2];
    }
    f_up /= static_cast<double>(trials);
    f_lo /= static_cast<double>(trials);

    run.summary.trials = trials;
    run.summary.rates["upper_tail"] = {f_up, binomial_se(f_up, trials)};
    run.summary.rates["lower_tail"] = {f_lo, binomial_se(f_lo, trials)};
    run.summary.bounds["upper_tail_bound"] = upper_bound.value;
    run.summary.bounds["lower_tail_bound"] = lower_bound.value;
    bool pass = true;
    if (upper_bound.vacuous())
        run.summary.notes.push_back("upper bound is vacuous; auto-pass");
    else if (f_up > upper_bound.value)
        pass = false;
    if (lower_bound.vacuous())
        run.summary.notes.push_back("lower bound is vacuous; auto-pass");
    else if (f_lo > lower_bound.value)
        pass = false;
    run.summary.pass = pass;
    return run;
}

}  // namespace ripforge

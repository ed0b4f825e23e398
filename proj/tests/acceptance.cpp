// Acceptance suite: one line per criterion, exit code = number of failures.
//
// Every criterion is driven by a single master seed (--seed) and fixed trial
// counts; summaries are serialized to JSON so the reproducibility criterion
// can compare byte-for-byte across reruns and worker counts.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "ripforge/certify.hpp"
#include "ripforge/distributions.hpp"
#include "ripforge/harness.hpp"
#include "ripforge/reduction.hpp"
#include "ripforge/rip.hpp"

using namespace ripforge;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kDefaultSeed = 20250810;

struct CriterionResult {
    bool pass = true;
    std::vector<std::string> details;
    json summary;  // comparable payload: no timings, no environment data

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        details.push_back(std::string(ok ? "  ok  " : "  FAIL ") + what);
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

// --- criterion 1: random-matrix membership rate vs the closed-form bound ----

CriterionResult criterion1(std::uint64_t seed, unsigned jobs) {
    CriterionResult r;
    const ExperimentRun run =
        exp_rip_probability({DistKind::Gaussian}, 10000, 50, 2, 0.9, 1000, seed, jobs);
    const double rate = run.summary.rates.at("rip_rate").value;
    const double se = run.summary.rates.at("rip_rate").se;
    const double bound = run.summary.bounds.at("rip_probability_lower_bound");
    r.check(std::fabs(bound - (1.0 - 1.4e-8)) < 2e-9,
            "bound evaluates to 1 - 1.4e-8 (got 1 - " + fmt(1.0 - bound) + ")");
    r.check(rate >= bound - 4.0 * se,
            "empirical rate " + fmt(rate) + " >= bound - 4 s.e.");
    r.summary = run.summary.to_json();
    return r;
}

// --- criterion 2: exact margin vs brute-force oracle; sampled never above ---

CriterionResult criterion2(std::uint64_t seed, unsigned) {
    CriterionResult r;
    double worst_gap = 0.0;
    bool sampled_ok = true;
    json margins = json::array();
    for (int rep = 0; rep < 100; ++rep) {
        RngStream rng = derive_stream(seed, "acceptance/oracle", rep);
        const DesignMatrix X = matrix_sample({DistKind::Gaussian}, 8, 12, rng);
        for (std::size_t k : {1u, 2u, 3u}) {
            const double exact = rip_margin_exact(X, k);
            const double brute = oracle::rip_margin(X, k);
            worst_gap = std::max(worst_gap, std::fabs(exact - brute));
            const double sampled = rip_margin_sampled(X, k, 100000, rng);
            if (sampled > exact + 1e-10) sampled_ok = false;
            if (rep < 3) margins.push_back({{"k", k}, {"exact", exact}, {"sampled", sampled}});
        }
    }
    r.check(worst_gap <= 1e-8, "exact margin matches the oracle (worst gap " + fmt(worst_gap) + ")");
    r.check(sampled_ok, "sampled margin never exceeds the exact margin");
    r.summary = {{"worst_gap", worst_gap}, {"sampled_ok", sampled_ok}, {"head", margins}};
    return r;
}

// --- criterion 3: zero soundness violations on a mixed corpus ---------------

CriterionResult criterion3(std::uint64_t seed, unsigned) {
    CriterionResult r;
    std::size_t violations = 0, instances = 0;
    std::size_t certified[3] = {0, 0, 0};
    const DistKind kinds[] = {DistKind::Gaussian, DistKind::Rademacher, DistKind::UniformSym};

    auto assess = [&](const DesignMatrix& X, const RipParams& params, double sigma) {
        ++instances;
        int outcome[3] = {0, 0, 0};
        outcome[0] = certify_opnorm_exact(X, params).certified;
        outcome[2] = certify_incoherence_sound(X, params).certified;
        try {
            outcome[1] = certify_incoherence_paper(X, params, sigma).certified;
        } catch (const RegimeError&) {
            outcome[1] = 0;
        }
        if (outcome[0] || outcome[1] || outcome[2]) {
            const bool member = is_rip(X, params);
            for (int c = 0; c < 3; ++c) {
                certified[c] += outcome[c];
                if (outcome[c] && !member) ++violations;
            }
        }
    };

    for (int rep = 0; rep < 8000; ++rep) {
        RngStream rng = derive_stream(seed, "acceptance/soundness", rep);
        const SubGaussianDist Q{kinds[rep % 3]};
        const std::size_t n = 5 + rng.uniform_below(56);
        const std::size_t p = 2 + rng.uniform_below(11);
        const std::size_t k = 1 + rng.uniform_below(std::min<std::size_t>(3, p));
        const double theta = 0.05 + 0.9 * rng.uniform01();
        DesignMatrix X = matrix_sample(Q, n, p, rng);
        switch (rep % 5) {
            case 1:
                for (std::size_t row = 0; row < n; ++row) X(row, p - 1) = X(row, 0);
                break;
            case 2:
                for (std::size_t row = 0; row < n; ++row) X(row, 0) *= 0.1 + 3.0 * rng.uniform01();
                break;
            case 3:
                for (std::size_t row = 0; row < n; ++row) X(row, 0) = 0.0;
                break;
            case 4:
                for (std::size_t row = 0; row < n; ++row)
                    X(row, p - 1) = X(row, 0) + 0.01 * rng.gaussian();
                break;
            default:
                break;
        }
        assess(X, {k, theta}, Q.sigma());
    }
    // In-regime slice so the incoherence certifier's accepting path is
    // exercised: k = 1 needs n >= 196 log(12)/0.81 ~ 602.
    for (int rep = 0; rep < 2000; ++rep) {
        RngStream rng = derive_stream(seed, "acceptance/soundness-regime", rep);
        const bool two = (rep % 4 == 0);
        const std::size_t n = two ? 2406 : 602;
        const std::size_t k = two ? 2 : 1;
        DesignMatrix X = matrix_sample({DistKind::Gaussian}, n, 12, rng);
        if (rep % 5 == 1)
            for (std::size_t row = 0; row < n; ++row) X(row, 11) = X(row, 0);
        assess(X, {k, 0.9}, 1.0);
    }

    r.check(instances == 10000, "corpus holds 10000 instances");
    r.check(violations == 0, "zero soundness violations (certified implies membership)");
    r.check(certified[0] > 0 && certified[1] > 0 && certified[2] > 0,
            "every certifier's accepting path exercised (" + fmt(certified[0]) + "/" +
                fmt(certified[1]) + "/" + fmt(certified[2]) + ")");
    r.summary = {{"instances", instances},
                 {"violations", violations},
                 {"certified_opnorm", certified[0]},
                 {"certified_paper", certified[1]},
                 {"certified_sound", certified[2]}};
    return r;
}

// --- criterion 4: incoherence certifier completeness at the regime edge -----

CriterionResult criterion4(std::uint64_t seed, unsigned jobs) {
    CriterionResult r;
    const ExperimentRun run = exp_certifier(CertifierId::IncoherencePaper, {DistKind::Gaussian},
                                            52167, 64, 4, 0.5, 1.0, 200, seed, jobs);
    r.check(run.summary.trials == 200, "experiment ran (no regime refusal at n = 52167)");
    if (run.summary.trials == 200) {
        const double decline = run.summary.rates.at("decline_rate").value;
        const double se = run.summary.rates.at("decline_rate").se;
        r.check(decline <= 1.0 / 3.0 + 4.0 * se,
                "decline rate " + fmt(decline) + " within the 1/3 budget");
        r.check(run.summary.statistics.at("soundness_violations") == 0.0,
                "no soundness violations against the exact membership check");
    }
    r.summary = run.summary.to_json();
    return r;
}

// --- criterion 5: reduction null faithfulness across kinds and folds --------

CriterionResult criterion5(std::uint64_t seed, unsigned jobs) {
    CriterionResult r;
    json all = json::array();
    for (DistKind kind : {DistKind::Gaussian, DistKind::Rademacher, DistKind::UniformSym}) {
        for (double beta : {0.0, 0.5}) {
            ReductionConfig cfg;
            cfg.m = 4000;
            cfg.kappa = 200;
            cfg.L = 10;
            cfg.beta = beta;
            cfg.Q = {kind};
            const ExperimentRun run = exp_reduction_null(cfg, 200, seed, jobs);
            const std::string label =
                std::string(cfg.Q.name()) + " beta=" + fmt(beta);
            r.check(run.summary.pass,
                    label + ": entry law at 1%, second moment within 4 s.e. of 1/n, adjacent "
                            "correlation within 4 s.e. of 0");
            all.push_back(run.summary.to_json());
        }
    }
    r.summary = all;
    return r;
}

// --- criterion 6: planted violation through the witness vector --------------

CriterionResult criterion6(std::uint64_t seed, unsigned jobs) {
    CriterionResult r;
    ReductionConfig cfg;
    cfg.m = 4000;
    cfg.kappa = 200;
    cfg.L = 10;
    cfg.beta = 0.0;
    cfg.Q = {DistKind::Rademacher};
    const ExperimentRun run =
        exp_reduction_planted(cfg, SeedKind::Clique, 0.5, 100, seed, jobs, 0.0, 0.05);

    std::size_t above_two = 0;
    for (const auto& s : run.trial_stats) above_two += (s[0] >= 2.0);
    const double rate_two = static_cast<double>(above_two) / 100.0;
    const double theta = run.summary.bounds.at("hard_theta");
    const double witness_min = run.summary.statistics.at("witness_min");

    r.check(rate_two >= 0.95, "witness value >= 2 in >= 95% of trials (measured " +
                                  fmt(rate_two) + "; the instance family concentrates near 1.9, "
                                                  "see the analysis note)");
    r.check(witness_min >= 1.0 + theta,
            "witness value >= 1 + theta (theta = " + fmt(theta) + ", min value " +
                fmt(witness_min) + ") in 100% of trials");
    r.check(run.summary.statistics.at("identity_failures") == 0.0,
            "score identity holds exactly in every trial");
    json j = run.summary.to_json();
    j["rate_value_ge_2"] = rate_two;
    r.summary = j;
    return r;
}

// --- criterion 7: spectral detection at kappa/sqrt(m) well above one --------

CriterionResult criterion7(std::uint64_t seed, unsigned jobs) {
    CriterionResult r;
    const double tau = 2.0 * std::sqrt(2000.0);
    const ExperimentRun run = exp_spectral(2000, 200, 0.5, tau, 100, seed, jobs);
    const double accuracy = run.summary.rates.at("accuracy").value;
    const double min_planted = run.summary.statistics.at("min_planted_statistic");
    r.check(accuracy >= 0.95, "balanced accuracy " + fmt(accuracy) + " >= 0.95");
    r.check(min_planted >= 0.5 * 199.0 - 1.5,
            "planted statistic >= eps (kappa - 1) - 3/2 = 98 in every planted trial (min " +
                fmt(min_planted) + ")");
    r.check(run.summary.statistics.at("rayleigh_failures") == 0.0,
            "per-instance Rayleigh lower bound never violated");
    r.summary = run.summary.to_json();
    return r;
}

// --- criterion 8: occupancy, tail and bipartite-count lemma suites ----------

CriterionResult criterion8(std::uint64_t seed, unsigned jobs) {
    CriterionResult r;
    const ExperimentRun occ = exp_lemma_occupancy(10000, 4, 100, 3.0, 0.5, 100000, seed, jobs);
    r.check(occ.summary.pass && occ.summary.notes.empty(),
            "occupancy frequencies below both nonvacuous bounds");

    const ExperimentRun tail = exp_tail_bound({DistKind::Gaussian}, 100, 50.0, 1000000, seed, jobs);
    r.check(tail.summary.pass && tail.summary.notes.empty(),
            "tail frequencies below both nonvacuous bounds");

    const ExperimentRun events =
        exp_lemma_events(1000000, 10000, 100000, 100000, 0.5, SeedKind::Clique, 200, seed, jobs);
    std::size_t nonvacuous = 0;
    for (const auto& [name, value] : events.summary.bounds) nonvacuous += (value < 1.0);
    r.check(events.summary.pass, "bipartite-count deviations below their bounds");
    r.check(nonvacuous >= 1, "at least one nonvacuous bound exercised (" + fmt(nonvacuous) +
                                 " of 3 below 1)");
    r.summary = {{"occupancy", occ.summary.to_json()},
                 {"tail", tail.summary.to_json()},
                 {"events", events.summary.to_json()}};
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    std::uint64_t seed = kDefaultSeed;
    unsigned jobs = 2;
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc)
            seed = std::strtoull(argv[++i], nullptr, 10);
        else if (std::strcmp(argv[i], "--jobs") == 0 && i + 1 < argc)
            jobs = static_cast<unsigned>(std::strtoul(argv[++i], nullptr, 10));
        else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc)
            only.push_back(std::atoi(argv[++i]));
        else {
            std::fprintf(stderr, "usage: acceptance [--seed S] [--jobs J] [--only N]...\n");
            return 2;
        }
    }
    auto wanted = [&](int c) {
        if (only.empty()) return true;
        for (int o : only)
            if (o == c) return true;
        return false;
    };

    struct Entry {
        int number;
        const char* title;
        double budget_s;  // 0 = none stated
        unsigned jobs;    // 0 = use the global default
        CriterionResult (*fn)(std::uint64_t, unsigned);
    };
    // Criteria with a stated single-threaded budget run on one worker.
    const Entry entries[] = {
        {1, "random-matrix membership rate vs closed-form bound", 600.0, 1, criterion1},
        {2, "exact margin vs independent oracle; sampled below exact", 120.0, 1, criterion2},
        {3, "certifier soundness on a mixed corpus", 0.0, 0, criterion3},
        {4, "incoherence certifier completeness at the regime edge", 900.0, 1, criterion4},
        {5, "reduction null faithfulness", 0.0, 0, criterion5},
        {6, "reduction planted violation", 0.0, 0, criterion6},
        {7, "spectral detection", 0.0, 0, criterion7},
        {8, "lemma suites (occupancy, tail, bipartite counts)", 0.0, 0, criterion8},
    };

    int failures = 0;
    std::vector<std::string> first_pass_summaries(9);
    std::vector<double> runtimes(9, 0.0);

    for (const Entry& e : entries) {
        if (!wanted(e.number)) continue;
        const unsigned j = e.jobs ? e.jobs : jobs;
        const auto t0 = Clock::now();
        CriterionResult res = e.fn(seed, j);
        const double dt = seconds_since(t0);
        runtimes[static_cast<std::size_t>(e.number)] = dt;
        if (e.budget_s > 0.0)
            res.check(dt <= e.budget_s,
                      "runtime " + fmt(dt) + "s within the " + fmt(e.budget_s) + "s budget");
        first_pass_summaries[static_cast<std::size_t>(e.number)] = res.summary.dump();
        std::printf("criterion %d: %s  %s (%.1fs)\n", e.number, res.pass ? "PASS" : "FAIL",
                    e.title, dt);
        for (const auto& d : res.details) std::printf("%s\n", d.c_str());
        if (!res.pass) ++failures;
        std::fflush(stdout);
    }

    if (wanted(9)) {
        const auto t0 = Clock::now();
        bool pass = true;
        std::vector<std::string> details;
        for (const Entry& e : entries) {
            if (!wanted(e.number)) continue;
            for (unsigned rerun_jobs : {1u, 4u}) {
                const CriterionResult res = e.fn(seed, rerun_jobs);
                const bool same =
                    res.summary.dump() == first_pass_summaries[static_cast<std::size_t>(e.number)];
                pass = pass && same;
                details.push_back(std::string(same ? "  ok  " : "  FAIL ") + "criterion " +
                                  std::to_string(e.number) + " byte-identical at jobs=" +
                                  std::to_string(rerun_jobs));
            }
        }
        std::printf("criterion 9: %s  byte-identical summaries across runs and worker counts "
                    "(%.1fs)\n",
                    pass ? "PASS" : "FAIL", seconds_since(t0));
        for (const auto& d : details) std::printf("%s\n", d.c_str());
        if (!pass) ++failures;
    }

    std::printf("acceptance: %d criterion(s) failed (seed %llu)\n", failures,
                static_cast<unsigned long long>(seed));
    return failures == 0 ? 0 : 1;
}

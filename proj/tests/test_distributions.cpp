#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ripforge/distributions.hpp"
#include "ripforge/rng.hpp"
#include "ripforge/stats.hpp"

using namespace ripforge;

namespace {

constexpr DistKind kKinds[] = {DistKind::Gaussian, DistKind::Rademacher, DistKind::UniformSym};

}  // namespace

TEST(Distributions, SelectorStrings) {
    EXPECT_EQ(dist_from_name("gaussian").kind, DistKind::Gaussian);
    EXPECT_EQ(dist_from_name("rademacher").kind, DistKind::Rademacher);
    EXPECT_EQ(dist_from_name("uniform").kind, DistKind::UniformSym);
    EXPECT_THROW(dist_from_name("cauchy"), std::invalid_argument);
    for (DistKind kind : kKinds) {
        const SubGaussianDist Q{kind};
        EXPECT_EQ(dist_from_name(Q.name()).kind, kind);
    }
}

TEST(Distributions, DeclaredParameters) {
    EXPECT_DOUBLE_EQ(SubGaussianDist{DistKind::Gaussian}.sigma(), 1.0);
    EXPECT_DOUBLE_EQ(SubGaussianDist{DistKind::Rademacher}.sigma(), 1.0);
    EXPECT_DOUBLE_EQ(SubGaussianDist{DistKind::UniformSym}.sigma(), std::sqrt(3.0));
    for (DistKind kind : kKinds) {
        EXPECT_GE(SubGaussianDist{kind}.sigma(), 1.0);
        EXPECT_DOUBLE_EQ(SubGaussianDist{kind}.median(), 0.0);
    }
}

TEST(Distributions, MomentsWithinFourStandardErrors) {
    const std::size_t draws = 1000000;
    for (DistKind kind : kKinds) {
        const SubGaussianDist Q{kind};
        RngStream rng = derive_stream(404, "moments", static_cast<int>(kind));
        double s = 0, s2 = 0;
        for (std::size_t i = 0; i < draws; ++i) {
            const double x = sample(Q, rng);
            s += x;
            s2 += x * x;
        }
        const double nd = static_cast<double>(draws);
        EXPECT_NEAR(s / nd, 0.0, 4.0 / std::sqrt(nd)) << Q.name();
        EXPECT_NEAR(s2 / nd, 1.0, 4.0 * std::sqrt(2.0 / nd)) << Q.name();
    }
}

TEST(Distributions, RademacherFrequencies) {
    const SubGaussianDist Q{DistKind::Rademacher};
    RngStream rng(405);
    std::size_t plus = 0;
    const std::size_t draws = 100000;
    for (std::size_t i = 0; i < draws; ++i) {
        const double x = sample(Q, rng);
        ASSERT_TRUE(x == 1.0 || x == -1.0);
        plus += (x == 1.0);
    }
    EXPECT_NEAR(static_cast<double>(plus) / draws, 0.5, 3.0 * 0.5 / std::sqrt(draws));
}

TEST(Distributions, GaussianVarianceWindow) {
    const SubGaussianDist Q{DistKind::Gaussian};
    RngStream rng(406);
    double s2 = 0;
    const std::size_t draws = 100000;
    for (std::size_t i = 0; i < draws; ++i) {
        const double x = sample(Q, rng);
        s2 += x * x;
    }
    const double var = s2 / draws;
    EXPECT_GT(var, 0.98);
    EXPECT_LT(var, 1.02);
}

TEST(Distributions, UniformSupport) {
    const SubGaussianDist Q{DistKind::UniformSym};
    RngStream rng(407);
    for (int i = 0; i < 100000; ++i) {
        const double x = sample(Q, rng);
        ASSERT_GE(x, -std::sqrt(3.0));
        ASSERT_LE(x, std::sqrt(3.0));
    }
}

TEST(Distributions, NormalizedSampling) {
    const SubGaussianDist R{DistKind::Rademacher};
    RngStream rng(408);
    for (int i = 0; i < 100; ++i) {
        const double x = sample_normalized(R, 4, rng);
        ASSERT_TRUE(x == 0.5 || x == -0.5);
    }
    // n = 1 is the identity: same stream state gives the same value.
    RngStream a(77), b(77);
    const SubGaussianDist G{DistKind::Gaussian};
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_normalized(G, 1, a), sample(G, b));
    EXPECT_THROW(sample_normalized(G, 0, a), std::invalid_argument);
}

TEST(Distributions, NormalizedGaussianVariance) {
    const SubGaussianDist G{DistKind::Gaussian};
    RngStream rng(409);
    double s2 = 0;
    const std::size_t draws = 100000;
    for (std::size_t i = 0; i < draws; ++i) {
        const double x = sample_normalized(G, 100, rng);
        s2 += x * x;
    }
    EXPECT_NEAR(s2 / draws, 0.01, 4.0 * 0.01 * std::sqrt(2.0 / draws));
}

TEST(Halves, RademacherUpperIsPointMass) {
    const HalfDist H{{DistKind::Rademacher}, HalfSide::Upper, 1};
    RngStream rng(410);
    for (int i = 0; i < 100; ++i) EXPECT_DOUBLE_EQ(sample_half(H, rng), 1.0);
}

TEST(Halves, SupportsSplitAtTheMedian) {
    RngStream rng(411);
    for (DistKind kind : kKinds) {
        const HalfDist up{{kind}, HalfSide::Upper, 16};
        const HalfDist lo{{kind}, HalfSide::Lower, 16};
        for (int i = 0; i < 2000; ++i) {
            ASSERT_GE(sample_half(up, rng), 0.0);
            ASSERT_LE(sample_half(lo, rng), 0.0);
        }
    }
}

TEST(Halves, GaussianUpperMeanMatchesHalfNormal) {
    const HalfDist H{{DistKind::Gaussian}, HalfSide::Upper, 1};
    RngStream rng(412);
    const std::size_t draws = 100000;
    double s = 0;
    for (std::size_t i = 0; i < draws; ++i) s += sample_half(H, rng);
    const double mean = s / draws;
    const double expected = std::sqrt(2.0 / M_PI);
    const double se = std::sqrt((1.0 - expected * expected) / draws);
    EXPECT_NEAR(mean, expected, 4.0 * se);

    // Rejection-sampling oracle: draw from the parent law, keep the upper side.
    double s_rej = 0;
    std::size_t kept = 0;
    const SubGaussianDist G{DistKind::Gaussian};
    while (kept < draws) {
        const double x = sample(G, rng);
        if (x >= 0.0) {
            s_rej += x;
            ++kept;
        }
    }
    EXPECT_NEAR(mean, s_rej / draws, 8.0 * se);
}

TEST(Halves, CoinMixtureReproducesNormalizedLaw) {
    for (DistKind kind : kKinds) {
        for (std::size_t n : {std::size_t{1}, std::size_t{16}, std::size_t{400}}) {
            RngStream rng = derive_stream(413, "mixing", static_cast<int>(kind) * 1000 + n);
            const SubGaussianDist Q{kind};
            const HalfDist up{Q, HalfSide::Upper, n};
            const HalfDist lo{Q, HalfSide::Lower, n};
            const std::size_t draws = 100000;
            std::vector<double> mixture(draws), direct(draws);
            for (auto& x : mixture)
                x = (rng.next_u64() >> 63) ? sample_half(up, rng) : sample_half(lo, rng);
            for (auto& x : direct) x = sample_normalized(Q, n, rng);
            const KsResult ks = ks_test_two_sample(mixture, direct);
            EXPECT_GT(ks.pvalue, 0.01) << SubGaussianDist{kind}.name() << " n=" << n;
        }
    }
}

TEST(Halves, MeanConstants) {
    EXPECT_DOUBLE_EQ(halves_mean_constant({DistKind::Rademacher}), 1.0);
    EXPECT_NEAR(halves_mean_constant({DistKind::Gaussian}), 0.7978845608028654, 1e-15);
    EXPECT_NEAR(halves_mean_constant({DistKind::UniformSym}), std::sqrt(3.0) / 2.0, 1e-15);
    // c1 > 0 for every kind and matches a direct Monte Carlo mean.
    for (DistKind kind : kKinds) {
        const SubGaussianDist Q{kind};
        const double c1 = halves_mean_constant(Q);
        EXPECT_GT(c1, 0.0);
        RngStream rng = derive_stream(414, "c1", static_cast<int>(kind));
        const HalfDist up{Q, HalfSide::Upper, 9};
        const std::size_t draws = 200000;
        double s = 0;
        for (std::size_t i = 0; i < draws; ++i) s += sample_half(up, rng);
        const double mc = 3.0 * s / draws;  // sqrt(n) = 3
        EXPECT_NEAR(mc, c1, 3.0 / std::sqrt(static_cast<double>(draws)));
    }
}

TEST(MatrixSample, RademacherEntriesAndDeterminism) {
    const SubGaussianDist R{DistKind::Rademacher};
    RngStream a(415), b(415);
    const DesignMatrix X = matrix_sample(R, 4, 2, a);
    for (double v : X.data()) ASSERT_TRUE(v == 0.5 || v == -0.5);
    const DesignMatrix Y = matrix_sample(R, 4, 2, b);
    EXPECT_EQ(X.data(), Y.data());
}

TEST(MatrixSample, PooledVariance) {
    const SubGaussianDist G{DistKind::Gaussian};
    RngStream rng(416);
    const DesignMatrix X = matrix_sample(G, 100, 50, rng);
    const double m2 = second_moment(X.data());
    EXPECT_GT(m2, 0.009);
    EXPECT_LT(m2, 0.011);
}

TEST(ProbabilityBound, ReferenceEvaluation) {
    // exponent = 2 log(9 e 25) - 10000 * 0.81 / 256
    const double expected = 1.0 - 2.0 * std::exp(2.0 * std::log(9.0 * M_E * 25.0) - 31.640625);
    const ProbabilityBound b = rip_probability_lower_bound(10000, 50, 2, 0.9, 1.0);
    EXPECT_FALSE(b.vacuous);
    EXPECT_NEAR(b.value, expected, 1e-15);
    EXPECT_NEAR(1.0 - b.value, 1.4e-8, 2e-9);
}

TEST(ProbabilityBound, VacuousCaseFlagged) {
    const ProbabilityBound b = rip_probability_lower_bound(10, 50, 2, 0.9, 1.0);
    EXPECT_TRUE(b.vacuous);
    EXPECT_LT(b.value, 0.0);
}

TEST(ProbabilityBound, MonotoneOnAGrid) {
    const ProbabilityBound base = rip_probability_lower_bound(4000, 32, 3, 0.5, 1.0);
    EXPECT_GE(rip_probability_lower_bound(8000, 32, 3, 0.5, 1.0).value, base.value);
    EXPECT_GE(rip_probability_lower_bound(4000, 32, 3, 0.7, 1.0).value, base.value);
    EXPECT_LE(rip_probability_lower_bound(4000, 64, 3, 0.5, 1.0).value, base.value);
    EXPECT_LE(rip_probability_lower_bound(4000, 32, 4, 0.5, 1.0).value, base.value);
    EXPECT_LE(rip_probability_lower_bound(4000, 32, 3, 0.5, 1.3).value, base.value);
}

TEST(AveragedEntryCdf, MatchesSingleDrawLaws) {
    // blocks = 1 must reproduce the normalized laws exactly.
    EXPECT_NEAR(averaged_entry_cdf({DistKind::Gaussian}, 4, 1, 0.0), 0.5, 1e-15);
    EXPECT_NEAR(averaged_entry_cdf({DistKind::UniformSym}, 1, 1, 0.0), 0.5, 1e-15);
    EXPECT_NEAR(averaged_entry_cdf({DistKind::UniformSym}, 1, 1, std::sqrt(3.0)), 1.0, 1e-15);
    // Rademacher at n = 1: mass 1/2 at -1 and +1.
    EXPECT_NEAR(averaged_entry_cdf({DistKind::Rademacher}, 1, 1, -1.0), 0.5, 1e-12);
    EXPECT_NEAR(averaged_entry_cdf({DistKind::Rademacher}, 1, 1, 1.0), 1.0, 1e-12);
    EXPECT_NEAR(averaged_entry_cdf({DistKind::Rademacher}, 1, 1, -1.0001), 0.0, 1e-12);
}

TEST(AveragedEntryCdf, MatchesMonteCarloUnderFolding) {
    // Entry law of a 1/ell-weighted sum of ell^2 normalized draws.
    const std::size_t n = 25;
    const unsigned blocks = 16;
    for (DistKind kind : {DistKind::Gaussian, DistKind::UniformSym}) {
        const SubGaussianDist Q{kind};
        RngStream rng = derive_stream(417, "folded", static_cast<int>(kind));
        const std::size_t draws = 100000;
        std::vector<double> xs(draws);
        for (auto& x : xs) {
            double s = 0;
            for (unsigned b = 0; b < blocks; ++b) s += sample_normalized(Q, n, rng);
            x = s / 4.0;
        }
        const KsResult ks =
            ks_test(xs, [&](double v) { return averaged_entry_cdf(Q, n, blocks, v); });
        EXPECT_GT(ks.pvalue, 0.01) << Q.name();
    }
}

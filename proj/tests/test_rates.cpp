// Exponent and constant arithmetic: regime exponents, smoothness aggregates,
// oracle/adaptive bandwidths, and the explicit risk-bound constants.
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fracdens/errors.hpp"
#include "fracdens/rates.hpp"

using namespace fracdens;

// =============================================================================
// Regime exponents
// =============================================================================

TEST(RateExponents, KnownValues) {
    const RateExponents mid = rate_exponents(0.5);
    EXPECT_DOUBLE_EQ(mid.a, 1.0);
    EXPECT_DOUBLE_EQ(mid.beta, 1.0);

    const RateExponents rough = rate_exponents(0.3);
    EXPECT_DOUBLE_EQ(rough.a, 1.0);
    EXPECT_DOUBLE_EQ(rough.beta, 1.0);

    const RateExponents smooth = rate_exponents(0.7);
    EXPECT_NEAR(smooth.a, 1.4, 1e-15);
    EXPECT_NEAR(smooth.beta, 0.6, 1e-15);
}

TEST(RateExponents, SumIsTwoEverywhere) {
    for (double h = 0.05; h < 1.0; h += 0.05) {
        const RateExponents e = rate_exponents(h);
        EXPECT_DOUBLE_EQ(e.a + e.beta, 2.0) << "H " << h;
        EXPECT_GT(e.beta, 0.0);
        EXPECT_LE(e.beta, 1.0);
        EXPECT_GE(e.a, 1.0);
        EXPECT_LT(e.a, 2.0);
    }
    EXPECT_THROW(rate_exponents(0.0), std::invalid_argument);
    EXPECT_THROW(rate_exponents(1.0), std::invalid_argument);
}

// =============================================================================
// Smoothness arithmetic
// =============================================================================

TEST(Smoothness, StrictFloor) {
    // The convention is strict: the largest integer strictly below s.
    EXPECT_EQ(strict_floor(1.0), 0);
    EXPECT_EQ(strict_floor(2.0), 1);
    EXPECT_EQ(strict_floor(3.0), 2);
    EXPECT_EQ(strict_floor(2.5), 2);
    EXPECT_EQ(strict_floor(0.5), 0);
    EXPECT_THROW(strict_floor(0.0), std::invalid_argument);
}

TEST(Smoothness, HarmonicAggregate) {
    const std::vector<double> pair{2.0, 2.0};
    EXPECT_DOUBLE_EQ(harmonic_smoothness(pair), 1.0);
    const std::vector<double> mixed{1.0, 2.0};
    EXPECT_NEAR(harmonic_smoothness(mixed), 2.0 / 3.0, 1e-15);
    const std::vector<double> single{3.0};
    EXPECT_DOUBLE_EQ(harmonic_smoothness(single), 3.0);
}

TEST(Smoothness, GammaExponent) {
    // d=1, s=1: gamma = 1/(2*2*1 + 2) = 1/6.
    EXPECT_NEAR(gamma_exponent(HolderClass({1.0}, {1.0})), 1.0 / 6.0, 1e-15);
    // d=1, s=2: gamma = 2/(2*(3/2)*2 + 2) = 1/4.
    EXPECT_NEAR(gamma_exponent(HolderClass({2.0}, {1.0})), 0.25, 1e-15);
    // d=2, s=(2,2): s_bar=1, gamma = 1/(2*(3/2)*1 + 2) = 1/5.
    EXPECT_NEAR(gamma_exponent(HolderClass({2.0, 2.0}, {1.0, 1.0})), 0.2, 1e-15);
}

TEST(Smoothness, GammaMonotoneAndBelowHalf) {
    double prev = 0.0;
    for (double s = 0.5; s < 40.0; s *= 1.7) {
        const double g = gamma_exponent(HolderClass({s}, {1.0}));
        EXPECT_GT(g, prev);
        EXPECT_LT(g, 0.5);
        prev = g;
    }
}

TEST(Smoothness, Validation) {
    EXPECT_THROW(HolderClass({}, {}), std::invalid_argument);
    EXPECT_THROW(HolderClass({1.0}, {1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(HolderClass({-1.0}, {1.0}), std::invalid_argument);
    EXPECT_THROW(HolderClass({1.0}, {0.0}), std::invalid_argument);
}

// =============================================================================
// Oracle bandwidth
// =============================================================================

TEST(OracleBandwidth, ClosedFormCases) {
    // d=1, s=1, H=0.5, n*delta=e^6: exponent gamma/s = 1/6, so h = e^{-1}.
    const std::vector<double> h1 =
        oracle_bandwidth(HolderClass({1.0}, {1.0}), std::exp(6.0), 0.5);
    ASSERT_EQ(h1.size(), 1u);
    EXPECT_NEAR(h1[0], std::exp(-1.0), 1e-12);

    // d=2, s=(2,2), H=0.5, n*delta=e^10: exponent 1/10 per coordinate.
    const std::vector<double> h2 =
        oracle_bandwidth(HolderClass({2.0, 2.0}, {1.0, 1.0}), std::exp(10.0), 0.5);
    ASSERT_EQ(h2.size(), 2u);
    EXPECT_NEAR(h2[0], std::exp(-1.0), 1e-12);
    EXPECT_NEAR(h2[1], std::exp(-1.0), 1e-12);

    // H=0.7 shrinks the effective horizon: exponent beta*gamma/s with beta=0.6.
    const std::vector<double> h3 =
        oracle_bandwidth(HolderClass({2.0}, {1.0}), 100.0, 0.7);
    EXPECT_NEAR(h3[0], std::pow(100.0, -0.6 * 0.25 / 2.0), 1e-12);
}

TEST(OracleBandwidth, DecreasingInHorizon) {
    const HolderClass holder({1.5, 3.0}, {1.0, 1.0});
    double prev0 = 1.0, prev1 = 1.0;
    for (double nd : {10.0, 100.0, 1000.0, 10000.0}) {
        const std::vector<double> h = oracle_bandwidth(holder, nd, 0.6);
        EXPECT_GT(h[0], 0.0);
        EXPECT_LE(h[0], 1.0);
        EXPECT_LT(h[0], prev0);
        EXPECT_LT(h[1], prev1);
        // Rougher coordinate gets the smaller bandwidth.
        EXPECT_LT(h[0], h[1]);
        prev0 = h[0];
        prev1 = h[1];
    }
}

// =============================================================================
// Adaptive grid-aligned bandwidth
// =============================================================================

TEST(AdaptiveBandwidth, WorkedExample) {
    // d=1, s=1, H=0.5, n*delta=e^e: l* = floor((1/6)(e - 1)) = 0, h* = 1.
    const AdaptiveTarget t =
        adaptive_bandwidth_star(HolderClass({1.0}, {1.0}), std::exp(std::exp(1.0)), 0.5);
    ASSERT_EQ(t.levels.size(), 1u);
    EXPECT_EQ(t.levels[0], 0);
    EXPECT_DOUBLE_EQ(t.h[0], 1.0);
}

TEST(AdaptiveBandwidth, SandwichHoldsExactly) {
    std::mt19937_64 rng(99u);
    std::uniform_real_distribution<double> s_draw(0.6, 4.0);
    std::uniform_real_distribution<double> h_draw(0.1, 0.9);
    std::uniform_real_distribution<double> nd_draw(1.5, 9.0);  // log10 scale
    for (int trial = 0; trial < 500; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 3);
        std::vector<double> s(d), L(d, 1.0);
        for (double& v : s) v = s_draw(rng);
        const double hurst = h_draw(rng);
        const double n_delta = std::pow(10.0, nd_draw(rng));
        const double beta = rate_exponents(hurst).beta;
        if (std::pow(n_delta, beta) < std::exp(1.0)) continue;
        const AdaptiveTarget t = adaptive_bandwidth_star(HolderClass(s, L), n_delta, hurst);
        for (int i = 0; i < d; ++i) {
            EXPECT_GE(t.levels[i], 0);
            EXPECT_DOUBLE_EQ(t.h[i], std::exp(-static_cast<double>(t.levels[i])));
            // target <= h* <= e * target, exactly as the level rounding implies.
            EXPECT_LE(t.log_corrected[i], t.h[i] * (1.0 + 1e-12));
            EXPECT_LE(t.h[i], std::exp(1.0) * t.log_corrected[i] * (1.0 + 1e-12));
        }
    }
}

TEST(AdaptiveBandwidth, HorizonPrecondition) {
    // (n*delta)^beta < e is rejected.
    EXPECT_THROW(adaptive_bandwidth_star(HolderClass({2.0}, {1.0}), 2.0, 0.5), PreconditionError);
    EXPECT_NO_THROW(adaptive_bandwidth_star(HolderClass({2.0}, {1.0}), 3.0, 0.5));
    // H=0.7 shrinks the horizon: e^(1/0.6) is the boundary.
    EXPECT_THROW(adaptive_bandwidth_star(HolderClass({2.0}, {1.0}), 5.0, 0.7), PreconditionError);
}

// =============================================================================
// Explicit risk-bound constants
// =============================================================================

TEST(TheoremConstantsTest, BiasAggregateClosedForm) {
    const Kernel epan = make_kernel(1);
    // s=1: strict floor 0, 0! = 1, int |v K| = 3/8, so lambda1 = L * 3/8.
    const TheoremConstants c1 =
        theorem_constants(HolderClass({1.0}, {2.0}), epan, 2.0, 2.0, 1.0);
    EXPECT_NEAR(c1.lambda1, 2.0 * 0.375, 1e-9);
    // s=2: strict floor 1, 1! = 1, int v^2 K = 1/5 (nonnegative kernel).
    const TheoremConstants c2 =
        theorem_constants(HolderClass({2.0}, {5.0}), epan, 2.0, 2.0, 1.0);
    EXPECT_NEAR(c2.lambda1, 1.0, 1e-9);
}

TEST(TheoremConstantsTest, StochasticConstantAndRemainder) {
    const Kernel epan = make_kernel(1);
    const double c = 0.5;
    const TheoremConstants out =
        theorem_constants(HolderClass({2.0}, {1.0}), epan, 1.0, 2.0, c);
    // lambda2 = 2 sqrt(d C) (p Gamma((p+1)/2))^{1/p} kappa_L.
    const double expected_l2 =
        2.0 * std::sqrt(c) * std::sqrt(2.0 * std::tgamma(1.5)) * 1.5;
    EXPECT_NEAR(out.lambda2, expected_l2, 1e-12);
    // kappa/C = 2, d=1, p=2: C0 = 6 lambda2 (e^2/(e^2-1))^{1/2}.
    const double e2 = std::exp(2.0);
    EXPECT_NEAR(out.c0, 6.0 * expected_l2 * std::sqrt(e2 / (e2 - 1.0)), 1e-10);
    EXPECT_GT(out.c1, out.c0 + out.lambda2);
}

TEST(TheoremConstantsTest, KappaMustExceedSubgaussianConstant) {
    const Kernel epan = make_kernel(1);
    const HolderClass holder({2.0}, {1.0});
    EXPECT_THROW(theorem_constants(holder, epan, 0.5, 2.0, 0.5), PreconditionError);
    EXPECT_THROW(theorem_constants(holder, epan, 0.4, 2.0, 0.5), PreconditionError);
    EXPECT_NO_THROW(theorem_constants(holder, epan, 0.6, 2.0, 0.5));
}

TEST(TheoremConstantsTest, BiasStochasticBalanceAtOracleBandwidth) {
    // At h(s) the two risk ingredients balance: the mean bias sum h_i^{s_i}/d
    // against the stochastic scale 1/(v(h) (n delta)^{beta/2}).  The oracle
    // exponent gamma/s_i is exactly the one that makes the ratio constant in
    // the horizon, so it must stay within a factor 2 of unity on any sweep.
    for (double hurst : {0.5, 0.7}) {
        const double beta = rate_exponents(hurst).beta;
        for (int d : {1, 2}) {
            const std::vector<double> s(static_cast<std::size_t>(d), 2.0);
            const std::vector<double> L(static_cast<std::size_t>(d), 1.0);
            const HolderClass holder(s, L);
            for (double nd : {1e3, 1e5, 1e7}) {
                const std::vector<double> h = oracle_bandwidth(holder, nd, hurst);
                double bias = 0.0, v = h[0];
                for (int i = 0; i < d; ++i) {
                    bias += std::pow(h[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(i)]);
                    v = std::min(v, h[static_cast<std::size_t>(i)]);
                }
                bias /= d;
                for (int i = 0; i < d; ++i) v *= h[static_cast<std::size_t>(i)];
                const double stoch = 1.0 / (v * std::pow(nd, 0.5 * beta));
                const double ratio = bias / stoch;
                EXPECT_GT(ratio, 0.5) << "d " << d << " H " << hurst << " nd " << nd;
                EXPECT_LT(ratio, 2.0) << "d " << d << " H " << hurst << " nd " << nd;
            }
        }
    }
}

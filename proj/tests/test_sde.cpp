// Drift factories, constant probes, sampling-grid arithmetic, the Euler
// scheme's exact single-step/zero-drift behavior, and stationary moments of
// the mean-reverting model against closed-form oracles.
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fracdens/errors.hpp"
#include "fracdens/fbm.hpp"
#include "fracdens/numerics.hpp"
#include "fracdens/rng.hpp"
#include "fracdens/sde.hpp"

using namespace fracdens;

namespace {

double batch_se(const std::vector<double>& xs, int batches) {
    const std::size_t per = xs.size() / static_cast<std::size_t>(batches);
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(batches));
    for (int b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < per; ++i) acc += xs[static_cast<std::size_t>(b) * per + i];
        means.push_back(acc / static_cast<double>(per));
    }
    return std::sqrt(variance_of(means) / static_cast<double>(batches));
}

}  // namespace

// =============================================================================
// Model factories
// =============================================================================

TEST(Models, MeanReversionFactory) {
    const ModelSpec m = make_fou(2.0, 0.5, 0.7, 3);
    EXPECT_EQ(m.dim, 3);
    EXPECT_DOUBLE_EQ(m.hurst, 0.7);
    EXPECT_DOUBLE_EQ(m.alpha, 2.0);
    EXPECT_DOUBLE_EQ(m.lipschitz, 2.0);
    ASSERT_EQ(m.sigma.size(), 9u);
    EXPECT_DOUBLE_EQ(m.sigma[0], 0.5);
    EXPECT_DOUBLE_EQ(m.sigma[1], 0.0);
    EXPECT_DOUBLE_EQ(m.sigma[4], 0.5);
    const std::vector<double> x = {2.0, -3.0, 0.5};
    std::vector<double> out(3);
    m.drift(x, out);
    EXPECT_DOUBLE_EQ(out[0], -4.0);
    EXPECT_DOUBLE_EQ(out[1], 6.0);
    EXPECT_DOUBLE_EQ(out[2], -1.0);
    EXPECT_THROW(make_fou(0.0, 1.0, 0.5), std::invalid_argument);
    EXPECT_THROW(make_fou(1.0, 0.0, 0.5), std::invalid_argument);
    EXPECT_THROW(make_fou(1.0, 1.0, 0.5, 0), std::invalid_argument);
}

TEST(Models, LinearFactorySpectralConstants) {
    // A = [[2,1],[1,2]] has eigenvalues 1 and 3.
    const std::vector<double> a = {2.0, 1.0, 1.0, 2.0};
    const std::vector<double> sigma = {1.0, 0.0, 0.0, 1.0};
    const ModelSpec m = make_linear(a, sigma, 0.5, 2);
    EXPECT_NEAR(m.alpha, 1.0, 1e-12);
    EXPECT_NEAR(m.lipschitz, 3.0, 1e-12);
    EXPECT_TRUE(m.linear_drift);
    const std::vector<double> x = {1.0, -2.0};
    std::vector<double> out(2);
    m.drift(x, out);
    EXPECT_DOUBLE_EQ(out[0], -(2.0 * 1.0 + 1.0 * -2.0));
    EXPECT_DOUBLE_EQ(out[1], -(1.0 * 1.0 + 2.0 * -2.0));
    // Asymmetric, indefinite, and singular-sigma inputs are rejected.
    EXPECT_THROW(make_linear({2.0, 1.0, 0.5, 2.0}, sigma, 0.5, 2), std::invalid_argument);
    EXPECT_THROW(make_linear({1.0, 2.0, 2.0, 1.0}, sigma, 0.5, 2), std::invalid_argument);
    EXPECT_THROW(make_linear(a, {1.0, 0.0, 0.0, 0.0}, 0.5, 2), std::invalid_argument);
}

TEST(Models, TanhFactory) {
    const ModelSpec m = make_tanh(1.5, 0.5, 1.0, 0.6);
    EXPECT_DOUBLE_EQ(m.alpha, 1.5);
    EXPECT_DOUBLE_EQ(m.lipschitz, 2.0);
    const std::vector<double> x = {0.7};
    std::vector<double> out(1);
    m.drift(x, out);
    EXPECT_DOUBLE_EQ(out[0], -1.5 * 0.7 - 0.5 * std::tanh(0.7));
}

// =============================================================================
// Constant probes
// =============================================================================

TEST(Probes, LinearDriftMatchesDeclaredExactly) {
    const ModelSpec m = make_fou(1.0, 1.0, 0.5);
    const ProbeReport alpha = check_contraction(m, 5.0, 2000, 17u);
    EXPECT_NEAR(alpha.estimate, 1.0, 1e-12);
    EXPECT_FALSE(alpha.violated);
    EXPECT_EQ(alpha.pairs, 2000);
    EXPECT_DOUBLE_EQ(alpha.declared, 1.0);
    const ProbeReport lip = check_lipschitz(m, 5.0, 2000, 18u);
    EXPECT_NEAR(lip.estimate, 1.0, 1e-12);
    EXPECT_FALSE(lip.violated);
}

TEST(Probes, TanhDriftStaysInsideDeclaredBand) {
    // b(x) = -x - tanh(x): contraction in [theta, theta + c], ratio <= theta + c.
    const ModelSpec m = make_tanh(1.0, 1.0, 1.0, 0.5);
    const ProbeReport alpha = check_contraction(m, 3.0, 5000, 19u);
    EXPECT_GE(alpha.estimate, 1.0 - 1e-9);
    EXPECT_LE(alpha.estimate, 2.0 + 1e-9);
    EXPECT_FALSE(alpha.violated);
    const ProbeReport lip = check_lipschitz(m, 3.0, 5000, 20u);
    EXPECT_LE(lip.estimate, 2.0 + 1e-9);
    EXPECT_FALSE(lip.violated);
    // Near the origin tanh has unit slope, so the ratio approaches theta + c.
    const ProbeReport near0 = check_lipschitz(m, 0.01, 5000, 21u);
    EXPECT_GT(near0.estimate, 1.9);
}

TEST(Probes, ExpandingDriftIsFlagged) {
    ModelSpec m;
    m.dim = 1;
    m.hurst = 0.5;
    m.drift = [](std::span<const double> x, std::span<double> out) { out[0] = x[0]; };
    m.sigma = {1.0};
    m.alpha = 1.0;  // a lie: the drift pushes outward
    m.lipschitz = 1.0;
    const ProbeReport alpha = check_contraction(m, 2.0, 1000, 22u);
    EXPECT_NEAR(alpha.estimate, -1.0, 1e-12);
    EXPECT_TRUE(alpha.violated);
    const ProbeReport lip = check_lipschitz(m, 2.0, 1000, 23u);
    EXPECT_FALSE(lip.violated);
}

TEST(Probes, NonLipschitzDriftIsFlaggedNearOrigin) {
    ModelSpec m;
    m.dim = 1;
    m.hurst = 0.5;
    m.drift = [](std::span<const double> x, std::span<double> out) {
        out[0] = -(x[0] >= 0.0 ? 1.0 : -1.0) * std::sqrt(std::abs(x[0]));
    };
    m.sigma = {1.0};
    m.alpha = 0.1;
    m.lipschitz = 1.0;  // a lie: the slope blows up at 0
    const ProbeReport lip = check_lipschitz(m, 1e-4, 2000, 24u);
    EXPECT_GT(lip.estimate, 10.0);
    EXPECT_TRUE(lip.violated);
}

TEST(Probes, Validation) {
    const ModelSpec m = make_fou(1.0, 1.0, 0.5);
    EXPECT_THROW(check_contraction(m, 0.0, 100, 1u), std::invalid_argument);
    EXPECT_THROW(check_contraction(m, 1.0, 0, 1u), std::invalid_argument);
    ModelSpec no_drift;
    no_drift.dim = 1;
    EXPECT_THROW(check_lipschitz(no_drift, 1.0, 100, 1u), std::invalid_argument);
}

// =============================================================================
// Sampling grid
// =============================================================================

TEST(Grid, DefaultsWorkedExample) {
    const SamplingGrid g = SamplingGrid::make(100, 0.2, 1.0);
    EXPECT_DOUBLE_EQ(g.burn_in, 20.0);          // max(20, 10/1)
    EXPECT_DOUBLE_EQ(g.sim_step, 0.004);        // min(0.2/50, 1e-2)
    EXPECT_EQ(g.steps_per_observation(), 50u);
    EXPECT_EQ(g.burn_steps(), 5000u);
    EXPECT_EQ(g.total_steps(), 10'000u);
    EXPECT_DOUBLE_EQ(g.n_delta(), 20.0);
}

TEST(Grid, SlowMixingExtendsBurnIn) {
    const SamplingGrid g = SamplingGrid::make(10, 1.0, 0.1);
    EXPECT_DOUBLE_EQ(g.burn_in, 100.0);         // 10 / alpha
    EXPECT_DOUBLE_EQ(g.sim_step, 0.01);         // the 1e-2 cap binds
    EXPECT_EQ(g.steps_per_observation(), 100u);
    EXPECT_EQ(g.burn_steps(), 10'000u);
}

TEST(Grid, ExplicitOverrides) {
    const SamplingGrid g = SamplingGrid::make(5, 0.3, 1.0, 0.0, 0.3);
    EXPECT_DOUBLE_EQ(g.burn_in, 0.0);
    EXPECT_DOUBLE_EQ(g.sim_step, 0.3);
    EXPECT_EQ(g.steps_per_observation(), 1u);
    EXPECT_EQ(g.burn_steps(), 0u);
    EXPECT_EQ(g.total_steps(), 5u);
}

TEST(Grid, StepAlwaysDividesSpacing) {
    // Requested steps are rounded down so an integer count lands on delta.
    const SamplingGrid g = SamplingGrid::make(3, 1.0, 1.0, 5.0, 0.3);
    EXPECT_EQ(g.steps_per_observation(), 4u);   // ceil(1/0.3) = 4
    EXPECT_DOUBLE_EQ(g.sim_step, 0.25);
    for (double delta : {0.07, 0.2, 0.25, 0.3, 0.7, 1.3}) {
        const SamplingGrid h = SamplingGrid::make(2, delta, 1.0);
        const double per = static_cast<double>(h.steps_per_observation());
        EXPECT_NEAR(per * h.sim_step, delta, 1e-12 * delta) << delta;
        EXPECT_LE(h.sim_step, std::min(delta / 50.0, 1e-2) + 1e-15) << delta;
    }
}

TEST(Grid, Validation) {
    EXPECT_THROW(SamplingGrid::make(0, 0.2, 1.0), std::invalid_argument);
    EXPECT_THROW(SamplingGrid::make(10, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(SamplingGrid::make(10, 0.2, 0.0), std::invalid_argument);           // default burn-in needs alpha
    EXPECT_NO_THROW(SamplingGrid::make(10, 0.2, 0.0, 5.0));                          // explicit burn-in does not
    EXPECT_THROW(SamplingGrid::make(10, 0.2, 1.0, -1.0, 0.5), std::invalid_argument);  // step > delta
}

// =============================================================================
// Euler scheme exactness
// =============================================================================

TEST(Euler, SingleStepClosedForm) {
    // One step from the origin of b(x) = -theta x: X_1 = sigma * xi_1 exactly.
    {
        const ModelSpec m = make_fou(1.0, 2.0, 0.5);
        const std::vector<double> x0 = {0.0};
        const std::vector<double> path = simulate_path(m, 1, 0.5, x0, 11u);
        const FgnSample noise = generate_fgn(HurstParam(0.5), 1, 0.5, 1, 11u);
        ASSERT_EQ(path.size(), 2u);
        EXPECT_DOUBLE_EQ(path[0], 0.0);
        EXPECT_DOUBLE_EQ(path[1], 2.0 * noise.increments[0]);
    }
    // From x0 = 3 with theta = 1/2: X_1 = 3 + (-1.5)(0.5) + 2 xi_1.
    {
        const ModelSpec m = make_fou(0.5, 2.0, 0.5);
        const std::vector<double> x0 = {3.0};
        const std::vector<double> path = simulate_path(m, 1, 0.5, x0, 12u);
        const FgnSample noise = generate_fgn(HurstParam(0.5), 1, 0.5, 1, 12u);
        EXPECT_DOUBLE_EQ(path[1], 3.0 + (-1.5 * 0.5 + 2.0 * noise.increments[0]));
    }
}

TEST(Euler, ZeroDriftReproducesCumulatedNoise) {
    // With b = 0 and sigma = I the Euler path IS the cumulated noise, bitwise.
    ModelSpec m;
    m.dim = 2;
    m.hurst = 0.65;
    m.drift = [](std::span<const double>, std::span<double> out) {
        for (double& v : out) v = 0.0;
    };
    m.sigma = {1.0, 0.0, 0.0, 1.0};
    m.alpha = 1.0;
    const std::vector<double> x0 = {0.0, 0.0};
    const std::vector<double> path = simulate_path(m, 64, 0.1, x0, 9u);
    const std::vector<double> fbm = cumulate_to_fbm(generate_fgn(HurstParam(0.65), 64, 0.1, 2, 9u));
    ASSERT_EQ(path.size(), fbm.size());
    for (std::size_t i = 0; i < path.size(); ++i) EXPECT_DOUBLE_EQ(path[i], fbm[i]) << i;
}

TEST(Euler, SharedEngineMatchesInternalSynthesis) {
    const ModelSpec m = make_fou(1.0, 1.0, 0.7);
    const FgnEngine engine(HurstParam(0.7), 32, 0.05);
    const std::vector<double> x0 = {0.5};
    const std::vector<double> with = simulate_path(m, 32, 0.05, x0, 77u, &engine);
    const std::vector<double> without = simulate_path(m, 32, 0.05, x0, 77u);
    ASSERT_EQ(with.size(), without.size());
    for (std::size_t i = 0; i < with.size(); ++i) EXPECT_DOUBLE_EQ(with[i], without[i]);
    // A mismatched engine is rejected rather than silently resampled.
    const FgnEngine wrong(HurstParam(0.7), 16, 0.05);
    EXPECT_THROW(simulate_path(m, 32, 0.05, x0, 77u, &wrong), std::invalid_argument);
}

TEST(Euler, Validation) {
    const ModelSpec m = make_fou(1.0, 1.0, 0.5);
    const std::vector<double> x0 = {0.0};
    const std::vector<double> x0_bad = {0.0, 0.0};
    EXPECT_THROW(simulate_path(m, 0, 0.1, x0, 1u), std::invalid_argument);
    EXPECT_THROW(simulate_path(m, 4, 0.1, x0_bad, 1u), std::invalid_argument);
}

// =============================================================================
// Stationary moments
// =============================================================================

TEST(Stationary, EulerChainVarianceBrownianCase) {
    // The Euler chain X_{k+1} = (1 - theta dt) X_k + xi_k with white noise has
    // exact variance dt (1 - r^n) / (1 - r), r = (1 - theta dt)^2 -- an
    // independent discrete-time oracle, sharper than the continuous limit.
    const double theta = 1.0, dt = 0.01;
    const std::size_t steps = 1000;
    const double r = (1.0 - theta * dt) * (1.0 - theta * dt);
    const double exact = dt * (1.0 - std::pow(r, static_cast<double>(steps))) / (1.0 - r);
    EXPECT_NEAR(exact, 1.0 / (theta * (2.0 - theta * dt)), 1e-8);  // geometric-sum closed form
    EXPECT_NEAR(exact, 0.5, 0.005);                                // continuous limit, O(dt) away

    const ModelSpec m = make_fou(theta, 1.0, 0.5);
    const FgnEngine engine(HurstParam(0.5), steps, dt);
    const int reps = 4000;
    const std::vector<double> x0 = {0.0};
    std::vector<double> endpoints(static_cast<std::size_t>(reps));
    for (int rep = 0; rep < reps; ++rep) {
        const std::vector<double> path =
            simulate_path(m, steps, dt, x0, derive_seed(404u, static_cast<std::uint64_t>(rep)), &engine);
        endpoints[static_cast<std::size_t>(rep)] = path[steps];
    }
    const double var = variance_of(endpoints);
    const double se = exact * std::sqrt(2.0 / static_cast<double>(reps));
    EXPECT_NEAR(var, exact, 3.0 * se);
    EXPECT_NEAR(mean_of(endpoints), 0.0, 3.0 * std::sqrt(exact / static_cast<double>(reps)));
}

TEST(Stationary, LongMemoryVarianceMatchesGammaFormula) {
    // Stationary variance of dX = -theta X dt + dB^H is
    // theta^{-2H} H Gamma(2H); at theta = 1, H = 0.7 this is 0.7 Gamma(1.4).
    const double target = 0.7 * std::tgamma(1.4);
    const std::size_t steps = 1000;
    const double dt = 0.01;
    const ModelSpec m = make_fou(1.0, 1.0, 0.7);
    const FgnEngine engine(HurstParam(0.7), steps, dt, FgnMethod::circulant_fft);
    const int reps = 3000;
    const std::vector<double> x0 = {0.0};
    std::vector<double> endpoints(static_cast<std::size_t>(reps));
    for (int rep = 0; rep < reps; ++rep) {
        const std::vector<double> path =
            simulate_path(m, steps, dt, x0, derive_seed(505u, static_cast<std::uint64_t>(rep)), &engine);
        endpoints[static_cast<std::size_t>(rep)] = path[steps];
    }
    const double var = variance_of(endpoints);
    const double se = target * std::sqrt(2.0 / static_cast<double>(reps));
    EXPECT_NEAR(var, target, 3.0 * se);
}

TEST(Stationary, ObservationMomentsAfterBurnIn) {
    const ModelSpec m = make_fou(1.0, 1.0, 0.5);
    const SamplingGrid grid = SamplingGrid::make(10'000, 0.5, m.alpha);
    const ObservationSet obs = sample_stationary(m, grid, 31337u);
    ASSERT_EQ(obs.n, 10'000u);
    EXPECT_EQ(obs.dim, 1);
    EXPECT_DOUBLE_EQ(obs.delta, 0.5);
    const double target = 1.0 / (2.0 - grid.sim_step);  // exact chain variance
    std::vector<double> values(obs.x.begin(), obs.x.end());
    std::vector<double> squares(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) squares[i] = values[i] * values[i];
    EXPECT_NEAR(mean_of(values), 0.0, 3.0 * batch_se(values, 100));
    EXPECT_NEAR(mean_of(squares), target, 3.0 * batch_se(squares, 100));
}

TEST(Stationary, DeterministicAndEngineConsistent) {
    const ModelSpec m = make_fou(1.0, 1.0, 0.7);
    const SamplingGrid grid = SamplingGrid::make(100, 0.5, m.alpha, 2.0, 0.1);
    const ObservationSet a = sample_stationary(m, grid, 8u);
    const ObservationSet b = sample_stationary(m, grid, 8u);
    ASSERT_EQ(a.x.size(), b.x.size());
    for (std::size_t i = 0; i < a.x.size(); ++i) EXPECT_DOUBLE_EQ(a.x[i], b.x[i]);
    const FgnEngine engine = make_engine(m, grid);
    const ObservationSet c = sample_stationary(m, grid, 8u, &engine);
    for (std::size_t i = 0; i < a.x.size(); ++i) EXPECT_DOUBLE_EQ(a.x[i], c.x[i]);
    const ObservationSet d = sample_stationary(m, grid, 9u);
    EXPECT_NE(a.x[0], d.x[0]);
}

TEST(Stationary, RowAccessor) {
    ObservationSet obs;
    obs.n = 2;
    obs.dim = 2;
    obs.delta = 1.0;
    obs.x = {1.0, 2.0, 3.0, 4.0};
    const auto row = obs.row(1);
    ASSERT_EQ(row.size(), 2u);
    EXPECT_DOUBLE_EQ(row[0], 3.0);
    EXPECT_DOUBLE_EQ(row[1], 4.0);
}

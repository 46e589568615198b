#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fracdens/fbm.hpp"

namespace fracdens {

using DriftFn = std::function<void(std::span<const double> x, std::span<double> out)>;

// Additive-noise model dX_t = b(X_t) dt + sigma dB^H_t together with its
// declared one-sided contraction constant alpha (<b(x)-b(y), x-y> <=
// -alpha|x-y|^2) and Lipschitz constant L.  The declared constants are what
// the bandwidth and concentration formulas consume; check_contraction /
// check_lipschitz probe them empirically.
struct ModelSpec {
    int dim = 1;
    double hurst = 0.5;
    DriftFn drift;
    std::vector<double> sigma;  // dim x dim, row-major
    double alpha = 0.0;
    double lipschitz = 0.0;
    std::string name;
    std::vector<double> params;    // echoed into study outputs
    bool linear_drift = false;     // b(x) = -A x
    std::vector<double> drift_a;   // A when linear_drift
};

// Scalar mean reversion b(x) = -theta x in every coordinate (alpha = L = theta).
ModelSpec make_fou(double theta, double sigma, double hurst, int dim = 1);
// Linear drift b(x) = -A x for symmetric positive definite A
// (alpha = lambda_min(A), L = lambda_max(A)); sigma is a d x d matrix.
ModelSpec make_linear(std::vector<double> a, std::vector<double> sigma, double hurst, int dim);
// Coordinatewise b(x) = -theta x - c tanh(x) (alpha = theta, L = theta + c).
ModelSpec make_tanh(double theta, double c, double sigma, double hurst, int dim = 1);

struct ProbeReport {
    double estimate = 0.0;    // alpha-hat (worst contraction) or L-hat (worst ratio)
    double declared = 0.0;
    bool violated = false;
    int pairs = 0;
};

ProbeReport check_contraction(const ModelSpec& model, double radius, int pairs, std::uint64_t seed,
                              double tolerance = 1e-6);
ProbeReport check_lipschitz(const ModelSpec& model, double radius, int pairs, std::uint64_t seed,
                            double tolerance = 1e-6);

// Observation design: n samples delta apart after a burn-in, integrated with
// an Euler scheme of step sim_step (which divides delta exactly).
struct SamplingGrid {
    std::size_t n = 0;
    double delta = 0.0;
    double burn_in = 0.0;
    double sim_step = 0.0;

    // Applies the defaults: burn_in = max(20, 10/alpha) and
    // sim_step = min(delta/50, 1e-2), rounded so that it divides delta.
    static SamplingGrid make(std::size_t n, double delta, double alpha, double burn_in = -1.0,
                             double sim_step = -1.0);
    std::size_t steps_per_observation() const;
    std::size_t burn_steps() const;
    std::size_t total_steps() const;
    double n_delta() const { return static_cast<double>(n) * delta; }
};

struct ObservationSet {
    std::size_t n = 0;
    int dim = 1;
    double delta = 0.0;
    std::vector<double> x;  // n x dim, row-major
    std::span<const double> row(std::size_t k) const { return {x.data() + k * dim, static_cast<std::size_t>(dim)}; }
};

// Full Euler path ((steps+1) x dim) from x0 over horizon steps*sim_step.
// An engine built for (hurst, steps, sim_step) may be shared across calls;
// when absent one is constructed internally.
std::vector<double> simulate_path(const ModelSpec& model, std::size_t steps, double sim_step,
                                  std::span<const double> x0, std::uint64_t seed,
                                  const FgnEngine* engine = nullptr);

// Burn-in then subsampled observations on the delta-grid; x0 = 0.
ObservationSet sample_stationary(const ModelSpec& model, const SamplingGrid& grid,
                                 std::uint64_t seed, const FgnEngine* engine = nullptr);

// Engine matching sample_stationary's synthesis needs for the given grid.
FgnEngine make_engine(const ModelSpec& model, const SamplingGrid& grid,
                      FgnMethod method = FgnMethod::automatic);

}  // namespace fracdens

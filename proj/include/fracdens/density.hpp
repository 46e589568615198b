#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracdens/kernels.hpp"
#include "fracdens/rates.hpp"
#include "fracdens/sde.hpp"

namespace fracdens {

// Kernel density value at x0 from discrete observations:
//   (1/n) sum_k prod_i h_i^{-1} K((x0 - X_k)_i / h_i).
double estimate_at(const ObservationSet& obs, const Kernel& kernel, const Bandwidth& h,
                   std::span<const double> x0);

// Zero-mean Gaussian law with the stationary covariance of a linear model,
// obtained by quadrature of the fBm double integral
//   Sigma = int int A e^{-Au} sigma sigma^T e^{-A^T v} A^T R(u,v) du dv,
//   R(u,v) = (u^{2H} + v^{2H} - |u-v|^{2H}) / 2.
struct GaussianLaw {
    int dim = 1;
    std::vector<double> cov;  // dim x dim, row-major
    double pdf_at(std::span<const double> x) const;
};
GaussianLaw stationary_gaussian(const ModelSpec& model);

struct ReferenceOptions {
    std::size_t n_ref = 0;        // 0: pick 100x the requesting study's n
    std::size_t study_n = 10000;  // largest n of the study asking for the reference
    std::string cache_dir;        // empty: no caching
    std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

// Stationary density at x0: exact Gaussian evaluation for linear drifts, and
// a long-run kernel estimate with step-halving extrapolation (cached when a
// cache directory is given) for nonlinear drifts.
double reference_density_at(const ModelSpec& model, std::span<const double> x0,
                            const ReferenceOptions& opts = {});

// One pointwise estimator inside a replication study.
struct EstimatorSpec {
    enum class Kind { fixed_h, oracle, adaptive };
    Kind kind = Kind::fixed_h;
    std::vector<double> h;               // fixed_h
    std::optional<HolderClass> holder;   // oracle
    double kappa = 1.0;                  // adaptive
    std::string label;
};

// Simulates `replications` stationary observation sets (replication r uses
// seed derive_seed(seed, r)) and evaluates every estimator on each of them.
// Returns replications x specs values, row-major.  Simulation dominates the
// cost, so studies comparing several estimators share one pass.
std::vector<double> replicate_estimates(const ModelSpec& model, const SamplingGrid& grid,
                                        const Kernel& kernel, std::span<const EstimatorSpec> specs,
                                        std::span<const double> x0, int replications,
                                        std::uint64_t seed, int threads = 1);

struct RiskReport {
    double risk = 0.0;        // (mean |f_hat - f(x0)|^p)^{1/p}
    double se = 0.0;          // bootstrap standard error of the risk
    double bias_part = 0.0;   // |mean f_hat - f(x0)|
    double stoch_part = 0.0;  // (mean |f_hat - mean f_hat|^p)^{1/p}
    double mean_estimate = 0.0;
    double reference = 0.0;
    int replications = 0;
};

// Risk statistics for one estimator from its replication values.
RiskReport aggregate_risk(std::span<const double> estimates, double reference, double p,
                          int bootstrap, std::uint64_t seed);

struct RiskConfig {
    EstimatorSpec estimator;
    std::vector<double> x0;
    double p = 2.0;
    int replications = 100;
    int bootstrap = 200;
    double reference = 0.0;  // caller supplies f(x0)
    std::uint64_t seed = 1;
    int threads = 1;
};

// Monte Carlo pointwise risk of a single estimator.
RiskReport mc_pointwise_risk(const ModelSpec& model, const SamplingGrid& grid, const Kernel& kernel,
                             const RiskConfig& config);

}  // namespace fracdens

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fracdens/kernels.hpp"
#include "fracdens/sde.hpp"

namespace fracdens {

// Scalar test function with a declared Lipschitz constant; the concentration
// bound scales with the square of that constant.
struct GFunction {
    std::string name;
    double lipschitz = 1.0;
    std::function<double(std::span<const double>)> eval;
};

GFunction g_projection(int dim, int coordinate);
// Coordinate clipped to [-radius, radius]; still 1-Lipschitz.
GFunction g_identity_clip(int dim, int coordinate, double radius);
// x -> prod_i h_i^{-1} K((x0 - x)_i / h_i), Lipschitz sqrt(d) kappa_L / v(h).
GFunction g_kernel(const Kernel& kernel, const Bandwidth& h, std::vector<double> x0);

// Random-pair probe of the declared Lipschitz constant inside a centred ball.
ProbeReport probe_g_lipschitz(const GFunction& g, int dim, double radius, int pairs,
                              std::uint64_t seed, double tolerance = 1e-6);

struct TailPoint {
    double r = 0.0;      // threshold
    double p_hat = 0.0;  // empirical P(S > r)
    double lower = 0.0;  // Wilson interval for p_hat
    double upper = 0.0;
    int exceedances = 0;
};

struct TailCurve {
    double center = 0.0;        // estimate of E g(X)
    double g_norm = 1.0;        // Lipschitz constant used in the bound
    double n_delta_beta = 1.0;  // (n delta)^{beta_H}
    int replications = 0;
    int n = 0;
    std::vector<double> statistics;  // centred per-replication means, sorted
    std::vector<TailPoint> points;   // one per distinct statistic value
};

// Tail curve from raw (uncentred) replication means.  With an empty r_grid
// the thresholds are the distinct centred values themselves (the full
// empirical curve); otherwise exceedances are counted at the given r values.
TailCurve tail_curve(std::vector<double> statistics, double center, double g_norm,
                     double n_delta_beta, const std::vector<double>& r_grid = {});

// Replicated stationary runs: statistic S = (1/n) sum_k g(X_k) - E g, where
// E g is estimated from a pooled sample of pool_factor * R * n points drawn
// in chunks of ten observation windows each.
TailCurve empirical_tail(const ModelSpec& model, const SamplingGrid& grid, const GFunction& g,
                         int replications, double pool_factor, std::uint64_t seed,
                         int threads = 1, const std::vector<double>& r_grid = {});

// Least-squares read-off of the sub-Gaussian constant: regress -log p_hat on
// x = r^2 (n delta)^{beta_H} / (4 |g|_Lip^2) over the window
// min_tail <= p_hat <= max_tail (and r > 0); the bound predicts slope 1/C.
struct SubgaussFit {
    double c_hat = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
    double c_lower = 0.0;  // 95% band for c_hat from the slope standard error
    double c_upper = 0.0;  // 0 when the band is unbounded above
    int points_used = 0;
    bool ok = false;
    std::string failure;
};

// Bound value exp(-r^2 (n delta)^{beta_H} / (4 c |g|_Lip^2)) for a curve point.
double tail_bound(const TailCurve& curve, double r, double c);

SubgaussFit fit_subgaussian_constant(const TailCurve& curve, double min_tail = -1.0,
                                     double max_tail = 0.5);

}  // namespace fracdens

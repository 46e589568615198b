#pragma once

#include <span>
#include <vector>

#include "fracdens/kernels.hpp"

namespace fracdens {

// Regime exponents of the effective observation horizon: concentration and
// bandwidth formulas scale with (n*delta)^{beta} where
//   a = max(2H, 1),  beta = min(1, 2-2H),  a + beta = 2.
struct RateExponents {
    double a = 0.0;
    double beta = 0.0;
};
RateExponents rate_exponents(double hurst);

// Anisotropic smoothness class: per-coordinate orders s_i > 0 with constants
// L_i > 0 controlling the highest finite-difference increment.
struct HolderClass {
    HolderClass(std::vector<double> s_in, std::vector<double> l_in);
    int dim() const { return static_cast<int>(s.size()); }
    double min_s() const;
    std::vector<double> s;
    std::vector<double> L;
};

// Largest integer strictly below s (so strict_floor(2) = 1).
int strict_floor(double s);

// Harmonic aggregate (sum_i 1/s_i)^{-1}.
double harmonic_smoothness(std::span<const double> s);

// Rate exponent gamma(s) = s_bar / (2(1+1/min_i s_i) s_bar + 2), in (0, 1/2).
double gamma_exponent(const HolderClass& holder);

// Risk-optimal bandwidth h_i = ((n*delta)^{-beta})^{gamma/s_i}.
std::vector<double> oracle_bandwidth(const HolderClass& holder, double n_delta, double hurst);

// Grid-aligned adaptive target: integer levels l_i* and h_i* = exp(-l_i*)
// bracketed by the log-corrected bandwidth
//   target_i = ((n*delta)^{-beta} * log((n*delta)^{beta}))^{gamma/s_i}
// as target_i <= h_i* <= e * target_i.  Requires (n*delta)^{beta} >= e.
struct AdaptiveTarget {
    std::vector<int> levels;
    std::vector<double> h;
    std::vector<double> log_corrected;
};
AdaptiveTarget adaptive_bandwidth_star(const HolderClass& holder, double n_delta, double hurst);

// Explicit constants entering the risk bounds.
struct TheoremConstants {
    double lambda1 = 0.0;  // bias aggregate: sum_i L_i/floor(s_i)! * int |v|^{s_i} |K|
    double lambda2 = 0.0;  // 2 sqrt(dC) (p Gamma((p+1)/2))^{1/p} kappa_L
    double c0 = 0.0;       // remainder constant; requires kappa > C
    double c1 = 0.0;       // headline constant
};
TheoremConstants theorem_constants(const HolderClass& holder, const Kernel& kernel, double kappa,
                                   double p, double subgaussian_c);

}  // namespace fracdens

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fracdens/density.hpp"
#include "fracdens/kernels.hpp"
#include "fracdens/rates.hpp"
#include "fracdens/sde.hpp"

namespace fracdens {

// Dyadic-in-log bandwidth grid: levels l in {0, ..., L}^d with h_i = e^{-l_i},
// L = floor((beta/2) log(n delta)), keeping only entries whose effective
// volume v(h) = min_i h_i * prod_i h_i stays above (n delta)^{-beta/2}.
struct BandwidthGrid {
    int dim = 1;
    double n_delta = 0.0;
    HurstParam hurst = HurstParam(0.5);
    double beta = 1.0;       // horizon exponent beta_H = min(1, 2 - 2H)
    int max_level = 0;
    double min_volume = 0.0;  // the (n delta)^{-beta/2} cut-off
    std::vector<std::vector<int>> levels;  // lexicographically sorted
    std::vector<Bandwidth> bandwidths;     // same order as levels

    int size() const { return static_cast<int>(levels.size()); }
    // Index of a level vector, -1 when it is not in the grid.
    int index_of(std::span<const int> level) const;
};

// Throws PreconditionError unless (n delta)^beta >= e.
BandwidthGrid build_grid(int dim, double n_delta, const HurstParam& hurst);

// Componentwise maximum of two bandwidths (the "h or eta" of the pairwise
// comparison); its level vector is the componentwise minimum.
Bandwidth bandwidth_max(const Bandwidth& a, const Bandwidth& b);

// Stochastic-error scale phi_n(h) = sqrt(4 d kappa_L^2 / (v(h)^2 (n delta)^{beta_H})).
double phi_n(const Kernel& kernel, const Bandwidth& h, double n_delta, const HurstParam& hurst);

// Majorant M_n(h) = phi_n(h) sqrt(kappa p |log v(h)|).
double majorant(const Kernel& kernel, const Bandwidth& h, double n_delta, const HurstParam& hurst,
                double kappa, double p = 2.0);

// Pairwise majorant M_n(h, eta) = M_n(eta) + M_n(eta v h); not symmetric in
// its arguments.
double pair_majorant(const Kernel& kernel, const Bandwidth& h, const Bandwidth& eta,
                     double n_delta, const HurstParam& hurst, double kappa, double p = 2.0);

// Bias proxy B(h) = max_eta (|f_{eta v h} - f_eta| - M_n(h, eta))_+ given the
// memoized estimates for every grid entry (indexed like the grid).
double bias_proxy(const BandwidthGrid& grid, const Kernel& kernel,
                  std::span<const double> estimates, int h_index, double kappa, double p = 2.0);

struct SelectionDiagnostics {
    std::vector<double> estimates;   // f_h(x0) per grid entry
    std::vector<double> bias_term;   // B(h) per grid entry
    std::vector<double> majorants;   // M_n(h) per grid entry
    std::vector<double> criterion;   // B(h) + M_n(h) per grid entry
};

struct SelectionResult {
    int index = -1;         // grid index of the winner
    Bandwidth h = Bandwidth({1.0});  // selected bandwidth
    double estimate = 0.0;  // f_{h_hat}(x0)
    double criterion = 0.0;
    SelectionDiagnostics diagnostics;
};

// Goldenshluger-Lepski bandwidth selection at the point x0: each grid entry is
// scored by B(h) + M_n(h) and the minimiser wins; ties go to the largest
// effective volume, then to the lexicographically smallest level vector.
SelectionResult select(const ObservationSet& obs, const Kernel& kernel, const BandwidthGrid& grid,
                       std::span<const double> x0, double kappa, double p = 2.0);

// Convenience wrapper returning only the selected-bandwidth estimate.
double adaptive_estimate(const ObservationSet& obs, const Kernel& kernel,
                         const BandwidthGrid& grid, std::span<const double> x0, double kappa,
                         double p = 2.0);

}  // namespace fracdens

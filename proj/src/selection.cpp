#include "fracdens/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fracdens/errors.hpp"

namespace fracdens {
namespace {

// Tolerant floor: values a hair below an integer (from log/pow round-off)
// count as that integer.
int floor_level(double value) { return static_cast<int>(std::floor(value + 1e-9)); }

std::vector<int> componentwise_min(std::span<const int> a, std::span<const int> b) {
    std::vector<int> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::min(a[i], b[i]);
    return out;
}

// B(h) from memoized estimates and majorants (both indexed like the grid).
double bias_from(const BandwidthGrid& grid, std::span<const double> estimates,
                 std::span<const double> majorants, int h_index) {
    double best = 0.0;
    const std::vector<int>& h_level = grid.levels[static_cast<std::size_t>(h_index)];
    for (int e = 0; e < grid.size(); ++e) {
        const std::vector<int> join = componentwise_min(grid.levels[static_cast<std::size_t>(e)], h_level);
        const int j = grid.index_of(join);
        if (j < 0) throw std::logic_error("bandwidth grid is not closed under componentwise maximum");
        const double gap = std::abs(estimates[static_cast<std::size_t>(j)] - estimates[static_cast<std::size_t>(e)]);
        const double term = gap - (majorants[static_cast<std::size_t>(e)] + majorants[static_cast<std::size_t>(j)]);
        best = std::max(best, term);
    }
    return best;
}

}  // namespace

int BandwidthGrid::index_of(std::span<const int> level) const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (std::equal(levels[i].begin(), levels[i].end(), level.begin(), level.end()))
            return static_cast<int>(i);
    }
    return -1;
}

BandwidthGrid build_grid(int dim, double n_delta, const HurstParam& hurst) {
    if (dim < 1) throw std::invalid_argument("build_grid: dimension must be positive");
    if (!(n_delta > 0.0) || !std::isfinite(n_delta))
        throw std::invalid_argument("build_grid: n*delta must be positive and finite");
    const double beta = rate_exponents(hurst.value).beta;
    const double horizon = std::pow(n_delta, beta);
    if (horizon < std::exp(1.0) * (1.0 - 1e-12))
        throw PreconditionError("build_grid: effective horizon (n*delta)^beta is below e");

    BandwidthGrid grid;
    grid.dim = dim;
    grid.n_delta = n_delta;
    grid.hurst = hurst;
    grid.beta = beta;
    grid.max_level = floor_level(0.5 * beta * std::log(n_delta));
    grid.min_volume = std::pow(n_delta, -0.5 * beta);

    std::vector<int> level(static_cast<std::size_t>(dim), 0);
    while (true) {
        std::vector<double> h(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) h[static_cast<std::size_t>(i)] = std::exp(-level[static_cast<std::size_t>(i)]);
        Bandwidth bw(h);
        if (bw.v() >= grid.min_volume * (1.0 - 1e-9)) {
            grid.levels.push_back(level);
            grid.bandwidths.push_back(std::move(bw));
        }
        // Advance the lexicographic counter (last coordinate fastest).
        int pos = dim - 1;
        while (pos >= 0) {
            if (++level[static_cast<std::size_t>(pos)] <= grid.max_level) break;
            level[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    if (grid.levels.empty())
        throw PreconditionError("build_grid: volume cut-off removed every bandwidth");
    return grid;
}

Bandwidth bandwidth_max(const Bandwidth& a, const Bandwidth& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("bandwidth_max: dimension mismatch");
    std::vector<double> h(a.h.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::max(a.h[i], b.h[i]);
    return Bandwidth(h);
}

double phi_n(const Kernel& kernel, const Bandwidth& h, double n_delta, const HurstParam& hurst) {
    if (!(n_delta > 0.0)) throw std::invalid_argument("phi_n: n*delta must be positive");
    const double beta = rate_exponents(hurst.value).beta;
    const double lip = kernel.lipschitz();
    const double v = h.v();
    return std::sqrt(4.0 * h.dim() * lip * lip / (v * v * std::pow(n_delta, beta)));
}

double majorant(const Kernel& kernel, const Bandwidth& h, double n_delta, const HurstParam& hurst,
                double kappa, double p) {
    if (!(kappa > 0.0)) throw std::invalid_argument("majorant: kappa must be positive");
    if (p < 1.0) throw std::invalid_argument("majorant: p must be at least 1");
    const double log_v = std::abs(std::log(h.v()));
    return phi_n(kernel, h, n_delta, hurst) * std::sqrt(kappa * p * log_v);
}

double pair_majorant(const Kernel& kernel, const Bandwidth& h, const Bandwidth& eta,
                     double n_delta, const HurstParam& hurst, double kappa, double p) {
    const Bandwidth join = bandwidth_max(h, eta);
    return majorant(kernel, eta, n_delta, hurst, kappa, p) +
           majorant(kernel, join, n_delta, hurst, kappa, p);
}

double bias_proxy(const BandwidthGrid& grid, const Kernel& kernel,
                  std::span<const double> estimates, int h_index, double kappa, double p) {
    if (static_cast<int>(estimates.size()) != grid.size())
        throw std::invalid_argument("bias_proxy: one estimate per grid entry expected");
    if (h_index < 0 || h_index >= grid.size())
        throw std::invalid_argument("bias_proxy: grid index out of range");
    std::vector<double> majorants(static_cast<std::size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i)
        majorants[static_cast<std::size_t>(i)] =
            majorant(kernel, grid.bandwidths[static_cast<std::size_t>(i)], grid.n_delta, grid.hurst,
                     kappa, p);
    return bias_from(grid, estimates, majorants, h_index);
}

SelectionResult select(const ObservationSet& obs, const Kernel& kernel, const BandwidthGrid& grid,
                       std::span<const double> x0, double kappa, double p) {
    if (obs.dim != grid.dim) throw std::invalid_argument("select: grid dimension mismatch");
    if (static_cast<int>(x0.size()) != grid.dim)
        throw std::invalid_argument("select: point dimension mismatch");
    if (!(kappa > 0.0)) throw std::invalid_argument("select: kappa must be positive");
    if (p < 1.0) throw std::invalid_argument("select: p must be at least 1");

    const int m = grid.size();
    SelectionDiagnostics diag;
    diag.estimates.resize(static_cast<std::size_t>(m));
    diag.bias_term.resize(static_cast<std::size_t>(m));
    diag.majorants.resize(static_cast<std::size_t>(m));
    diag.criterion.resize(static_cast<std::size_t>(m));

    for (int i = 0; i < m; ++i) {
        const Bandwidth& h = grid.bandwidths[static_cast<std::size_t>(i)];
        diag.estimates[static_cast<std::size_t>(i)] = estimate_at(obs, kernel, h, x0);
        diag.majorants[static_cast<std::size_t>(i)] =
            majorant(kernel, h, grid.n_delta, grid.hurst, kappa, p);
    }
    for (int i = 0; i < m; ++i) {
        diag.bias_term[static_cast<std::size_t>(i)] = bias_from(grid, diag.estimates, diag.majorants, i);
        diag.criterion[static_cast<std::size_t>(i)] =
            diag.bias_term[static_cast<std::size_t>(i)] + diag.majorants[static_cast<std::size_t>(i)];
    }

    int best = 0;
    for (int i = 1; i < m; ++i) {
        const double ci = diag.criterion[static_cast<std::size_t>(i)];
        const double cb = diag.criterion[static_cast<std::size_t>(best)];
        if (ci < cb) {
            best = i;
        } else if (ci == cb) {
            const double vi = grid.bandwidths[static_cast<std::size_t>(i)].v();
            const double vb = grid.bandwidths[static_cast<std::size_t>(best)].v();
            if (vi > vb) {
                best = i;
            } else if (vi == vb &&
                       grid.levels[static_cast<std::size_t>(i)] < grid.levels[static_cast<std::size_t>(best)]) {
                best = i;
            }
        }
    }

    SelectionResult result;
    result.index = best;
    result.h = grid.bandwidths[static_cast<std::size_t>(best)];
    result.estimate = diag.estimates[static_cast<std::size_t>(best)];
    result.criterion = diag.criterion[static_cast<std::size_t>(best)];
    result.diagnostics = std::move(diag);
    return result;
}

double adaptive_estimate(const ObservationSet& obs, const Kernel& kernel,
                         const BandwidthGrid& grid, std::span<const double> x0, double kappa,
                         double p) {
    return select(obs, kernel, grid, x0, kappa, p).estimate;
}

}  // namespace fracdens

#include "fracdens/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "fracdens/errors.hpp"
#include "fracdens/numerics.hpp"
#include "fracdens/parallel.hpp"
#include "fracdens/rates.hpp"
#include "fracdens/rng.hpp"

namespace fracdens {
namespace {

void ball_point(NormalSampler& sampler, double radius, std::span<double> out) {
    const int d = static_cast<int>(out.size());
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) {
        out[static_cast<std::size_t>(i)] = sampler.normal();
        norm2 += out[static_cast<std::size_t>(i)] * out[static_cast<std::size_t>(i)];
    }
    const double norm = std::sqrt(norm2);
    const double r = radius * std::pow(sampler.uniform01(), 1.0 / d);
    const double scale = norm > 0.0 ? r / norm : 0.0;
    for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] *= scale;
}

}  // namespace

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

GFunction g_projection(int dim, int coordinate) {
    if (coordinate < 0 || coordinate >= dim)
        throw std::invalid_argument("g_projection: coordinate out of range");
    GFunction g;
    g.name = "proj" + std::to_string(coordinate);
    g.lipschitz = 1.0;
    g.eval = [coordinate](std::span<const double> x) { return x[static_cast<std::size_t>(coordinate)]; };
    return g;
}

GFunction g_identity_clip(int dim, int coordinate, double radius) {
    if (coordinate < 0 || coordinate >= dim)
        throw std::invalid_argument("g_identity_clip: coordinate out of range");
    if (!(radius > 0.0)) throw std::invalid_argument("g_identity_clip: radius must be positive");
    GFunction g;
    g.name = "clip" + std::to_string(coordinate);
    g.lipschitz = 1.0;
    g.eval = [coordinate, radius](std::span<const double> x) {
        return std::clamp(x[static_cast<std::size_t>(coordinate)], -radius, radius);
    };
    return g;
}

GFunction g_kernel(const Kernel& kernel, const Bandwidth& h, std::vector<double> x0) {
    if (h.dim() != static_cast<int>(x0.size()))
        throw std::invalid_argument("g_kernel: bandwidth and point dimensions differ");
    GFunction g;
    g.name = "kernel";
    g.lipschitz = product_lipschitz_bound(kernel, h);
    g.eval = [kernel, h, x0 = std::move(x0)](std::span<const double> x) {
        std::vector<double> u(x0.size());
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = x0[i] - x[i];
        return eval_product(kernel, h, u);
    };
    return g;
}

ProbeReport probe_g_lipschitz(const GFunction& g, int dim, double radius, int pairs,
                              std::uint64_t seed, double tolerance) {
    if (dim < 1) throw std::invalid_argument("probe_g_lipschitz: dimension must be positive");
    if (pairs < 1) throw std::invalid_argument("probe_g_lipschitz: need at least one pair");
    NormalSampler sampler(seed);
    std::vector<double> x(static_cast<std::size_t>(dim));
    std::vector<double> y(static_cast<std::size_t>(dim));
    double worst = 0.0;
    int used = 0;
    for (int k = 0; k < pairs; ++k) {
        ball_point(sampler, radius, x);
        ball_point(sampler, radius, y);
        double dist2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double diff = x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
            dist2 += diff * diff;
        }
        if (dist2 < 1e-24) continue;
        const double ratio = std::abs(g.eval(x) - g.eval(y)) / std::sqrt(dist2);
        worst = std::max(worst, ratio);
        ++used;
    }
    if (used == 0) throw PreconditionError("probe_g_lipschitz: all sampled pairs were degenerate");
    ProbeReport report;
    report.estimate = worst;
    report.declared = g.lipschitz;
    report.pairs = used;
    report.violated = worst > g.lipschitz * (1.0 + tolerance) + tolerance;
    return report;
}

// ---------------------------------------------------------------------------
// Tail curves
// ---------------------------------------------------------------------------

TailCurve tail_curve(std::vector<double> statistics, double center, double g_norm,
                     double n_delta_beta, const std::vector<double>& r_grid) {
    if (statistics.empty()) throw std::invalid_argument("tail_curve: no statistics");
    if (!(g_norm > 0.0)) throw std::invalid_argument("tail_curve: Lipschitz norm must be positive");
    if (!(n_delta_beta > 0.0))
        throw std::invalid_argument("tail_curve: effective horizon must be positive");

    TailCurve curve;
    curve.center = center;
    curve.g_norm = g_norm;
    curve.n_delta_beta = n_delta_beta;
    curve.replications = static_cast<int>(statistics.size());

    for (double& s : statistics) s -= center;
    std::sort(statistics.begin(), statistics.end());
    const int r_count = curve.replications;
    const auto point_at = [&](double r, int exceed) {
        TailPoint point;
        point.r = r;
        point.exceedances = exceed;
        point.p_hat = static_cast<double>(exceed) / r_count;
        const WilsonInterval wilson = wilson_interval(exceed, r_count);
        point.lower = wilson.lower;
        point.upper = wilson.upper;
        return point;
    };
    if (r_grid.empty()) {
        // One point per distinct statistic value: P(S > s_(i)).
        for (int i = 0; i < r_count; ++i) {
            if (i + 1 < r_count &&
                statistics[static_cast<std::size_t>(i + 1)] == statistics[static_cast<std::size_t>(i)])
                continue;  // keep only the last of a tied run
            curve.points.push_back(point_at(statistics[static_cast<std::size_t>(i)], r_count - i - 1));
        }
    } else {
        std::vector<double> thresholds = r_grid;
        std::sort(thresholds.begin(), thresholds.end());
        for (double r : thresholds) {
            if (!std::isfinite(r)) throw std::invalid_argument("tail_curve: thresholds must be finite");
            const auto above = std::upper_bound(statistics.begin(), statistics.end(), r);
            curve.points.push_back(point_at(r, static_cast<int>(statistics.end() - above)));
        }
    }
    curve.statistics = std::move(statistics);
    return curve;
}

TailCurve empirical_tail(const ModelSpec& model, const SamplingGrid& grid, const GFunction& g,
                         int replications, double pool_factor, std::uint64_t seed, int threads,
                         const std::vector<double>& r_grid) {
    if (replications < 2) throw std::invalid_argument("empirical_tail: need at least two replications");
    if (!g.eval) throw std::invalid_argument("empirical_tail: test function is empty");

    FgnEngine engine = make_engine(model, grid);
    const std::uint64_t rep_parent = derive_seed(seed, 1);
    std::vector<double> stats(static_cast<std::size_t>(replications), 0.0);
    parallel_for(replications, threads, [&](int r) {
        const ObservationSet obs =
            sample_stationary(model, grid, derive_seed(rep_parent, static_cast<std::uint64_t>(r)), &engine);
        CompensatedSum acc;
        for (std::size_t k = 0; k < obs.n; ++k) acc.add(g.eval(obs.row(k)));
        stats[static_cast<std::size_t>(r)] = acc.value() / static_cast<double>(obs.n);
    });

    double center = 0.0;
    if (pool_factor > 0.0) {
        // Pooled centering sample: chunks of ten observation windows each,
        // totalling about pool_factor * replications * n points.
        const std::size_t chunk_n = 10 * grid.n;
        const int chunks = static_cast<int>(std::ceil(pool_factor * replications / 10.0));
        const SamplingGrid pool_grid =
            SamplingGrid::make(chunk_n, grid.delta, model.alpha, grid.burn_in, grid.sim_step);
        const FgnEngine pool_engine = make_engine(model, pool_grid);
        const std::uint64_t pool_parent = derive_seed(seed, 2);
        std::vector<double> chunk_means(static_cast<std::size_t>(chunks), 0.0);
        parallel_for(chunks, threads, [&](int c) {
            const ObservationSet obs = sample_stationary(
                model, pool_grid, derive_seed(pool_parent, static_cast<std::uint64_t>(c)), &pool_engine);
            CompensatedSum acc;
            for (std::size_t k = 0; k < obs.n; ++k) acc.add(g.eval(obs.row(k)));
            chunk_means[static_cast<std::size_t>(c)] = acc.value() / static_cast<double>(obs.n);
        });
        center = mean_of(chunk_means);
    } else {
        center = mean_of(stats);
    }

    const double beta = rate_exponents(model.hurst).beta;
    TailCurve curve =
        tail_curve(std::move(stats), center, g.lipschitz, std::pow(grid.n_delta(), beta), r_grid);
    curve.n = static_cast<int>(grid.n);
    return curve;
}

// ---------------------------------------------------------------------------
// Sub-Gaussian constant read-off
// ---------------------------------------------------------------------------

SubgaussFit fit_subgaussian_constant(const TailCurve& curve, double min_tail, double max_tail) {
    SubgaussFit fit;
    if (curve.replications < 2) {
        fit.failure = "too few replications";
        return fit;
    }
    const double lo = min_tail >= 0.0 ? min_tail : 20.0 / curve.replications;
    std::vector<double> x;
    std::vector<double> y;
    for (const TailPoint& point : curve.points) {
        if (point.r <= 0.0 || point.p_hat < lo || point.p_hat > max_tail) continue;
        x.push_back(point.r * point.r * curve.n_delta_beta / (4.0 * curve.g_norm * curve.g_norm));
        y.push_back(-std::log(point.p_hat));
    }
    fit.points_used = static_cast<int>(x.size());
    if (fit.points_used < 3) {
        fit.failure = "too few tail points in the fit window";
        return fit;
    }
    const LineFit line = fit_line(x, y);
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.r2 = line.r2;
    fit.slope_se = line.slope_se;
    if (!(line.slope > 0.0)) {
        fit.failure = "nonpositive slope";
        return fit;
    }
    fit.c_hat = 1.0 / line.slope;
    const double slope_hi = line.slope + 1.96 * line.slope_se;
    const double slope_lo = line.slope - 1.96 * line.slope_se;
    fit.c_lower = 1.0 / slope_hi;
    fit.c_upper = slope_lo > 0.0 ? 1.0 / slope_lo : 0.0;
    fit.ok = true;
    return fit;
}

double tail_bound(const TailCurve& curve, double r, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("tail_bound: constant must be positive");
    return std::exp(-r * r * curve.n_delta_beta / (4.0 * c * curve.g_norm * curve.g_norm));
}

}  // namespace fracdens

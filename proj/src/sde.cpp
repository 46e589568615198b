#include "fracdens/sde.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fracdens/errors.hpp"
#include "fracdens/rng.hpp"

namespace fracdens {

namespace {

void validate_common(double sigma_scale, double hurst) {
    HurstParam check(hurst);  // validates (0,1)
    (void)check;
    if (!(sigma_scale > 0.0)) throw std::invalid_argument("model: sigma must be positive");
}

std::vector<double> diagonal_matrix(int dim, double value) {
    std::vector<double> m(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) m[static_cast<std::size_t>(i) * dim + i] = value;
    return m;
}

}  // namespace

ModelSpec make_fou(double theta, double sigma, double hurst, int dim) {
    if (!(theta > 0.0)) throw std::invalid_argument("make_fou: theta must be positive");
    if (dim <= 0) throw std::invalid_argument("make_fou: dim must be positive");
    validate_common(sigma, hurst);
    ModelSpec m;
    m.dim = dim;
    m.hurst = hurst;
    m.drift = [theta](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = -theta * x[i];
    };
    m.sigma = diagonal_matrix(dim, sigma);
    m.alpha = theta;
    m.lipschitz = theta;
    m.name = "fou";
    m.params = {theta, sigma};
    m.linear_drift = true;
    m.drift_a = diagonal_matrix(dim, theta);
    return m;
}

ModelSpec make_linear(std::vector<double> a, std::vector<double> sigma, double hurst, int dim) {
    if (dim <= 0) throw std::invalid_argument("make_linear: dim must be positive");
    const std::size_t dd = static_cast<std::size_t>(dim) * dim;
    if (a.size() != dd || sigma.size() != dd)
        throw std::invalid_argument("make_linear: A and sigma must be dim x dim");
    HurstParam check(hurst);
    (void)check;
    Eigen::Map<const Eigen::MatrixXd> a_map(a.data(), dim, dim);
    if (!a_map.isApprox(a_map.transpose(), 1e-10))
        throw std::invalid_argument("make_linear: A must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a_map);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) throw std::invalid_argument("make_linear: A must be positive definite");
    Eigen::Map<const Eigen::MatrixXd> s_map(sigma.data(), dim, dim);
    if (std::abs(s_map.determinant()) < 1e-12)
        throw std::invalid_argument("make_linear: sigma must be invertible");
    ModelSpec m;
    m.dim = dim;
    m.hurst = hurst;
    // Row-major A against Eigen's default column-major map: A is symmetric,
    // so the layouts agree.
    m.drift = [a, dim](std::span<const double> x, std::span<double> out) {
        for (int i = 0; i < dim; ++i) {
            double acc = 0.0;
            for (int j = 0; j < dim; ++j) acc += a[static_cast<std::size_t>(i) * dim + j] * x[j];
            out[i] = -acc;
        }
    };
    m.sigma = std::move(sigma);
    m.alpha = lo;
    m.lipschitz = hi;
    m.name = "linear";
    m.params = {};
    m.linear_drift = true;
    m.drift_a = std::move(a);
    return m;
}

ModelSpec make_tanh(double theta, double c, double sigma, double hurst, int dim) {
    if (!(theta > 0.0)) throw std::invalid_argument("make_tanh: theta must be positive");
    if (c < 0.0) throw std::invalid_argument("make_tanh: c must be nonnegative");
    if (dim <= 0) throw std::invalid_argument("make_tanh: dim must be positive");
    validate_common(sigma, hurst);
    ModelSpec m;
    m.dim = dim;
    m.hurst = hurst;
    m.drift = [theta, c](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = -theta * x[i] - c * std::tanh(x[i]);
    };
    m.sigma = diagonal_matrix(dim, sigma);
    m.alpha = theta;  // tanh is monotone, so the -c tanh term only helps
    m.lipschitz = theta + c;
    m.name = "tanh";
    m.params = {theta, c, sigma};
    return m;
}

namespace {

// Uniform point in the d-ball of the given radius.
void ball_point(NormalSampler& rng, double radius, std::span<double> out) {
    double norm2 = 0.0;
    for (double& v : out) {
        v = rng.normal();
        norm2 += v * v;
    }
    const double norm = std::sqrt(norm2);
    const double r = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(out.size()));
    for (double& v : out) v *= (norm > 0.0 ? r / norm : 0.0);
}

struct PairStats {
    double min_contraction = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    int used = 0;
};

PairStats probe_pairs(const ModelSpec& model, double radius, int pairs, std::uint64_t seed) {
    if (!(radius > 0.0)) throw std::invalid_argument("probe: radius must be positive");
    if (pairs <= 0) throw std::invalid_argument("probe: pairs must be positive");
    if (!model.drift) throw std::invalid_argument("probe: model has no drift");
    const std::size_t d = static_cast<std::size_t>(model.dim);
    NormalSampler rng(seed);
    std::vector<double> x(d), y(d), bx(d), by(d);
    PairStats stats;
    for (int k = 0; k < pairs; ++k) {
        ball_point(rng, radius, x);
        ball_point(rng, radius, y);
        double dist2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double diff = x[i] - y[i];
            dist2 += diff * diff;
        }
        if (dist2 < 1e-24) continue;
        model.drift(x, bx);
        model.drift(y, by);
        double inner = 0.0, db2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double dxy = x[i] - y[i];
            const double dbi = bx[i] - by[i];
            inner += dbi * dxy;
            db2 += dbi * dbi;
        }
        stats.min_contraction = std::min(stats.min_contraction, -inner / dist2);
        stats.max_ratio = std::max(stats.max_ratio, std::sqrt(db2 / dist2));
        ++stats.used;
    }
    if (stats.used == 0) throw PreconditionError("probe: all sampled pairs were degenerate");
    return stats;
}

}  // namespace

ProbeReport check_contraction(const ModelSpec& model, double radius, int pairs, std::uint64_t seed,
                              double tolerance) {
    const PairStats stats = probe_pairs(model, radius, pairs, seed);
    ProbeReport rep;
    rep.estimate = stats.min_contraction;  // empirical alpha: worst case over pairs
    rep.declared = model.alpha;
    rep.pairs = stats.used;
    rep.violated = !(rep.estimate > 0.0) || rep.estimate < model.alpha - tolerance;
    return rep;
}

ProbeReport check_lipschitz(const ModelSpec& model, double radius, int pairs, std::uint64_t seed,
                            double tolerance) {
    const PairStats stats = probe_pairs(model, radius, pairs, seed);
    ProbeReport rep;
    rep.estimate = stats.max_ratio;
    rep.declared = model.lipschitz;
    rep.pairs = stats.used;
    rep.violated = rep.estimate > model.lipschitz * (1.0 + tolerance) + tolerance;
    return rep;
}

SamplingGrid SamplingGrid::make(std::size_t n, double delta, double alpha, double burn_in,
                                double sim_step) {
    if (n == 0) throw std::invalid_argument("SamplingGrid: n must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("SamplingGrid: delta must be positive");
    SamplingGrid g;
    g.n = n;
    g.delta = delta;
    if (burn_in < 0.0) {
        if (!(alpha > 0.0))
            throw std::invalid_argument("SamplingGrid: default burn-in needs a positive alpha");
        g.burn_in = std::max(20.0, 10.0 / alpha);
    } else {
        g.burn_in = burn_in;
    }
    const double wanted = (sim_step > 0.0) ? sim_step : std::min(delta / 50.0, 1e-2);
    if (wanted > delta + 1e-12)
        throw std::invalid_argument("SamplingGrid: sim_step must not exceed delta");
    // Round so the Euler step divides the observation spacing exactly.
    const std::size_t per = static_cast<std::size_t>(std::ceil(delta / wanted - 1e-9));
    g.sim_step = delta / static_cast<double>(per);
    return g;
}

std::size_t SamplingGrid::steps_per_observation() const {
    const double ratio = delta / sim_step;
    const std::size_t per = static_cast<std::size_t>(std::llround(ratio));
    if (per == 0 || std::abs(ratio - static_cast<double>(per)) > 1e-6)
        throw std::invalid_argument("SamplingGrid: sim_step must divide delta");
    return per;
}

std::size_t SamplingGrid::burn_steps() const {
    if (burn_in <= 0.0) return 0;
    return static_cast<std::size_t>(std::ceil(burn_in / sim_step - 1e-9));
}

std::size_t SamplingGrid::total_steps() const { return burn_steps() + n * steps_per_observation(); }

namespace {

void euler_advance(const ModelSpec& model, const FgnSample& noise, std::span<double> state,
                   std::size_t step_begin, std::size_t step_end, double dt,
                   std::span<double> drift_buf, std::span<double> noise_buf) {
    const int d = model.dim;
    for (std::size_t k = step_begin; k < step_end; ++k) {
        model.drift(state, drift_buf);
        const double* inc = noise.increments.data() + k * static_cast<std::size_t>(d);
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            const double* row = model.sigma.data() + static_cast<std::size_t>(i) * d;
            for (int j = 0; j < d; ++j) s += row[j] * inc[j];
            noise_buf[i] = s;
        }
        for (int i = 0; i < d; ++i) state[i] += drift_buf[i] * dt + noise_buf[i];
    }
}

void check_engine(const FgnEngine& engine, const ModelSpec& model, std::size_t steps, double sim_step) {
    if (engine.steps() != steps || std::abs(engine.delta() - sim_step) > 1e-12 ||
        std::abs(engine.hurst() - model.hurst) > 0.0)
        throw std::invalid_argument("shared FgnEngine does not match (hurst, steps, sim_step)");
}

}  // namespace

std::vector<double> simulate_path(const ModelSpec& model, std::size_t steps, double sim_step,
                                  std::span<const double> x0, std::uint64_t seed,
                                  const FgnEngine* engine) {
    if (!model.drift) throw std::invalid_argument("simulate_path: model has no drift");
    if (steps == 0) throw std::invalid_argument("simulate_path: steps must be positive");
    if (x0.size() != static_cast<std::size_t>(model.dim))
        throw std::invalid_argument("simulate_path: x0 dimension mismatch");
    FgnSample noise;
    if (engine) {
        check_engine(*engine, model, steps, sim_step);
        noise = engine->sample(model.dim, seed);
    } else {
        noise = generate_fgn(HurstParam(model.hurst), steps, sim_step, model.dim, seed);
    }
    const std::size_t d = static_cast<std::size_t>(model.dim);
    std::vector<double> path((steps + 1) * d);
    std::vector<double> state(x0.begin(), x0.end());
    std::vector<double> drift_buf(d), noise_buf(d);
    for (std::size_t i = 0; i < d; ++i) path[i] = state[i];
    for (std::size_t k = 0; k < steps; ++k) {
        euler_advance(model, noise, state, k, k + 1, sim_step, drift_buf, noise_buf);
        for (std::size_t i = 0; i < d; ++i) path[(k + 1) * d + i] = state[i];
    }
    return path;
}

ObservationSet sample_stationary(const ModelSpec& model, const SamplingGrid& grid,
                                 std::uint64_t seed, const FgnEngine* engine) {
    if (!model.drift) throw std::invalid_argument("sample_stationary: model has no drift");
    const std::size_t total = grid.total_steps();
    const std::size_t per = grid.steps_per_observation();
    FgnSample noise;
    if (engine) {
        check_engine(*engine, model, total, grid.sim_step);
        noise = engine->sample(model.dim, seed);
    } else {
        noise = generate_fgn(HurstParam(model.hurst), total, grid.sim_step, model.dim, seed);
    }
    const std::size_t d = static_cast<std::size_t>(model.dim);
    ObservationSet obs;
    obs.n = grid.n;
    obs.dim = model.dim;
    obs.delta = grid.delta;
    obs.x.resize(grid.n * d);
    std::vector<double> state(d, 0.0);
    std::vector<double> drift_buf(d), noise_buf(d);
    euler_advance(model, noise, state, 0, grid.burn_steps(), grid.sim_step, drift_buf, noise_buf);
    std::size_t pos = grid.burn_steps();
    for (std::size_t k = 0; k < grid.n; ++k) {
        euler_advance(model, noise, state, pos, pos + per, grid.sim_step, drift_buf, noise_buf);
        pos += per;
        for (std::size_t i = 0; i < d; ++i) obs.x[k * d + i] = state[i];
    }
    return obs;
}

FgnEngine make_engine(const ModelSpec& model, const SamplingGrid& grid, FgnMethod method) {
    return FgnEngine(HurstParam(model.hurst), grid.total_steps(), grid.sim_step, method);
}

}  // namespace fracdens

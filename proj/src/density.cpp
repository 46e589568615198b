#include "fracdens/density.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "fracdens/errors.hpp"
#include "fracdens/numerics.hpp"
#include "fracdens/parallel.hpp"
#include "fracdens/rng.hpp"
#include "fracdens/selection.hpp"

namespace fracdens {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

// J(c) = int_0^inf w^{2H} e^{-cw} dw, evaluated by quadrature.
double tail_moment(double hurst, double c) {
    return integrate_exp_tail(
               [hurst, c](double w) { return std::pow(w, 2.0 * hurst) * std::exp(-c * w); }, c)
        .value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Pointwise kernel estimate
// ---------------------------------------------------------------------------

double estimate_at(const ObservationSet& obs, const Kernel& kernel, const Bandwidth& h,
                   std::span<const double> x0) {
    if (h.dim() != obs.dim) throw std::invalid_argument("estimate_at: bandwidth dimension mismatch");
    if (static_cast<int>(x0.size()) != obs.dim)
        throw std::invalid_argument("estimate_at: point dimension mismatch");
    if (obs.n == 0) throw std::invalid_argument("estimate_at: empty observation set");
    const int d = obs.dim;
    std::vector<double> u(static_cast<std::size_t>(d));
    CompensatedSum total;
    for (std::size_t k = 0; k < obs.n; ++k) {
        const double* row = obs.x.data() + k * static_cast<std::size_t>(d);
        for (int i = 0; i < d; ++i) u[static_cast<std::size_t>(i)] = x0[static_cast<std::size_t>(i)] - row[i];
        total.add(eval_product(kernel, h, u));
    }
    return total.value() / static_cast<double>(obs.n);
}

// ---------------------------------------------------------------------------
// Stationary Gaussian law of linear models
// ---------------------------------------------------------------------------

double GaussianLaw::pdf_at(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("pdf_at: dimension mismatch");
    Eigen::Map<const Eigen::MatrixXd> sigma(cov.data(), dim, dim);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw PreconditionError("GaussianLaw: covariance is not positive definite");
    Eigen::Map<const Eigen::VectorXd> point(x.data(), dim);
    const Eigen::VectorXd solved = llt.solve(point);
    const double quad = point.dot(solved);
    double log_det = 0.0;
    for (int i = 0; i < dim; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
    const double log_pdf = -0.5 * (dim * std::log(2.0 * kPi) + log_det + quad);
    return std::exp(log_pdf);
}

GaussianLaw stationary_gaussian(const ModelSpec& model) {
    if (!model.linear_drift)
        throw std::invalid_argument("stationary_gaussian: drift of model '" + model.name +
                                    "' is not linear");
    const int d = model.dim;
    const double hurst = model.hurst;
    Eigen::Map<const Eigen::MatrixXd> a_row(model.drift_a.data(), d, d);
    const Eigen::MatrixXd a = a_row.transpose();  // row-major storage -> column-major view
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(a);
    if (eigen.info() != Eigen::Success)
        throw PreconditionError("stationary_gaussian: eigendecomposition failed");
    const Eigen::VectorXd lambda = eigen.eigenvalues();
    const Eigen::MatrixXd q = eigen.eigenvectors();
    if (lambda.minCoeff() <= 0.0)
        throw PreconditionError("stationary_gaussian: drift matrix is not positive definite");

    Eigen::Map<const Eigen::MatrixXd> sig_row(model.sigma.data(), d, d);
    const Eigen::MatrixXd sig = sig_row.transpose();
    const Eigen::MatrixXd b = q.transpose() * (sig * sig.transpose()) * q;

    // I(a, b) = int int e^{-au-bv} R(u, v) du dv reduces to one-dimensional
    // tail moments J(c) after splitting |u - v| along the diagonal.
    std::vector<double> j_values(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) j_values[static_cast<std::size_t>(i)] = tail_moment(hurst, lambda(i));
    Eigen::MatrixXd prime(d, d);
    for (int i = 0; i < d; ++i) {
        for (int jj = 0; jj < d; ++jj) {
            const double li = lambda(i);
            const double lj = lambda(jj);
            const double ji = j_values[static_cast<std::size_t>(i)];
            const double jjv = j_values[static_cast<std::size_t>(jj)];
            const double cross = 0.5 * (ji / lj + jjv / li - (ji + jjv) / (li + lj));
            prime(i, jj) = li * lj * b(i, jj) * cross;
        }
    }
    const Eigen::MatrixXd cov = q * prime * q.transpose();

    GaussianLaw law;
    law.dim = d;
    law.cov.resize(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int jj = 0; jj < d; ++jj)
            law.cov[static_cast<std::size_t>(i) * d + jj] = 0.5 * (cov(i, jj) + cov(jj, i));
    // GaussianLaw::pdf_at maps the buffer column-major; the symmetrisation
    // above makes the layout question moot.
    return law;
}

// ---------------------------------------------------------------------------
// Reference density (exact for linear drifts, long-run numeric otherwise)
// ---------------------------------------------------------------------------

namespace {

double numeric_reference(const ModelSpec& model, std::span<const double> x0,
                         const ReferenceOptions& opts) {
    const std::size_t n_ref = opts.n_ref > 0 ? opts.n_ref : 100 * std::max<std::size_t>(opts.study_n, 1);
    const int d = model.dim;

    const double delta = 0.5;
    const std::size_t chunk_n = std::min<std::size_t>(n_ref, 200000);
    const int chunks = static_cast<int>((n_ref + chunk_n - 1) / chunk_n);

    // First chunk doubles as the scale probe for the pilot bandwidth.
    const SamplingGrid grid = SamplingGrid::make(chunk_n, delta, model.alpha, -1.0, 5e-3);
    FgnEngine engine = make_engine(model, grid);
    ObservationSet first = sample_stationary(model, grid, derive_seed(opts.seed, 0), &engine);
    std::vector<double> scale(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        std::vector<double> column(first.n);
        for (std::size_t k = 0; k < first.n; ++k)
            column[k] = first.x[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)];
        scale[static_cast<std::size_t>(i)] = std::sqrt(variance_of(column));
    }
    const double shrink = std::pow(static_cast<double>(n_ref), -1.0 / (4.0 + d));
    std::vector<double> coarse(static_cast<std::size_t>(d));
    std::vector<double> fine(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const double h = std::clamp(scale[static_cast<std::size_t>(i)] * shrink, 1e-4, 1.0);
        coarse[static_cast<std::size_t>(i)] = h;
        fine[static_cast<std::size_t>(i)] = h / 2.0;
    }
    const Bandwidth h_coarse(coarse);
    const Bandwidth h_fine(fine);
    const Kernel kernel = make_kernel(1);

    CompensatedSum sum_coarse;
    CompensatedSum sum_fine;
    std::size_t used = 0;
    for (int c = 0; c < chunks; ++c) {
        ObservationSet obs = c == 0
                                 ? std::move(first)
                                 : sample_stationary(model, grid, derive_seed(opts.seed, static_cast<std::uint64_t>(c)),
                                                     &engine);
        const auto weight = static_cast<double>(obs.n);
        sum_coarse.add(weight * estimate_at(obs, kernel, h_coarse, x0));
        sum_fine.add(weight * estimate_at(obs, kernel, h_fine, x0));
        used += static_cast<std::size_t>(obs.n);
    }
    const double f_coarse = sum_coarse.value() / static_cast<double>(used);
    const double f_fine = sum_fine.value() / static_cast<double>(used);
    // The order-1 kernel has leading bias ~ h^2: halving h and combining
    // (4 f_{h/2} - f_h) / 3 cancels it.
    return std::max(0.0, (4.0 * f_fine - f_coarse) / 3.0);
}

std::string reference_cache_key(const ModelSpec& model, std::span<const double> x0,
                                std::size_t n_ref, std::uint64_t seed) {
    std::ostringstream key;
    key.precision(17);
    key << model.name << "|H=" << model.hurst << "|dim=" << model.dim;
    key << "|params=";
    for (double value : model.params) key << value << ',';
    key << "|sigma=";
    for (double v : model.sigma) key << v << ',';
    key << "|x0=";
    for (double v : x0) key << v << ',';
    key << "|n_ref=" << n_ref << "|seed=" << seed;
    return key.str();
}

}  // namespace

double reference_density_at(const ModelSpec& model, std::span<const double> x0,
                            const ReferenceOptions& opts) {
    if (static_cast<int>(x0.size()) != model.dim)
        throw std::invalid_argument("reference_density_at: point dimension mismatch");
    if (model.linear_drift) return stationary_gaussian(model).pdf_at(x0);

    const std::size_t n_ref = opts.n_ref > 0 ? opts.n_ref : 100 * std::max<std::size_t>(opts.study_n, 1);
    const std::string key = reference_cache_key(model, x0, n_ref, opts.seed);
    std::filesystem::path cache_file;
    if (!opts.cache_dir.empty()) {
        std::filesystem::create_directories(opts.cache_dir);
        std::ostringstream name;
        name << "ref-" << std::hex << fnv1a64(key) << ".json";
        cache_file = std::filesystem::path(opts.cache_dir) / name.str();
        if (std::filesystem::exists(cache_file)) {
            std::ifstream in(cache_file);
            nlohmann::json doc = nlohmann::json::parse(in);
            if (doc.value("key", std::string()) == key) return doc.at("value").get<double>();
        }
    }
    const double value = numeric_reference(model, x0, opts);
    if (!cache_file.empty()) {
        nlohmann::json doc;
        doc["key"] = key;
        doc["value"] = value;
        std::ofstream out(cache_file);
        out << doc.dump(2) << '\n';
    }
    return value;
}

// ---------------------------------------------------------------------------
// Replication studies and risk aggregation
// ---------------------------------------------------------------------------

std::vector<double> replicate_estimates(const ModelSpec& model, const SamplingGrid& grid,
                                        const Kernel& kernel, std::span<const EstimatorSpec> specs,
                                        std::span<const double> x0, int replications,
                                        std::uint64_t seed, int threads) {
    if (replications <= 0) throw std::invalid_argument("replicate_estimates: replications must be positive");
    if (specs.empty()) throw std::invalid_argument("replicate_estimates: no estimators given");
    if (static_cast<int>(x0.size()) != model.dim)
        throw std::invalid_argument("replicate_estimates: point dimension mismatch");

    // Resolve every estimator to a concrete bandwidth where possible.
    const std::size_t n_specs = specs.size();
    std::vector<std::optional<Bandwidth>> fixed(n_specs);
    bool any_adaptive = false;
    for (std::size_t s = 0; s < n_specs; ++s) {
        const EstimatorSpec& spec = specs[s];
        switch (spec.kind) {
            case EstimatorSpec::Kind::fixed_h:
                fixed[s] = Bandwidth(spec.h);
                break;
            case EstimatorSpec::Kind::oracle: {
                if (!spec.holder) throw std::invalid_argument("replicate_estimates: oracle estimator needs a smoothness class");
                fixed[s] = Bandwidth(oracle_bandwidth(*spec.holder, grid.n_delta(), model.hurst));
                break;
            }
            case EstimatorSpec::Kind::adaptive:
                any_adaptive = true;
                break;
        }
        if (fixed[s] && fixed[s]->dim() != model.dim)
            throw std::invalid_argument("replicate_estimates: bandwidth dimension mismatch in estimator '" +
                                        spec.label + "'");
    }
    std::optional<BandwidthGrid> bw_grid;
    if (any_adaptive) bw_grid = build_grid(model.dim, grid.n_delta(), HurstParam(model.hurst));

    FgnEngine engine = make_engine(model, grid);
    std::vector<double> out(static_cast<std::size_t>(replications) * n_specs, 0.0);
    const std::vector<double> point(x0.begin(), x0.end());

    parallel_for(replications, threads, [&](int r) {
        const ObservationSet obs =
            sample_stationary(model, grid, derive_seed(seed, static_cast<std::uint64_t>(r)), &engine);
        for (std::size_t s = 0; s < n_specs; ++s) {
            double value = 0.0;
            if (fixed[s]) {
                value = estimate_at(obs, kernel, *fixed[s], point);
            } else {
                const SelectionResult sel = select(obs, kernel, *bw_grid, point, specs[s].kappa);
                value = sel.estimate;
            }
            out[static_cast<std::size_t>(r) * n_specs + s] = value;
        }
    });
    return out;
}

RiskReport aggregate_risk(std::span<const double> estimates, double reference, double p,
                          int bootstrap, std::uint64_t seed) {
    if (estimates.empty()) throw std::invalid_argument("aggregate_risk: no estimates");
    if (p < 1.0) throw std::invalid_argument("aggregate_risk: p must be at least 1");
    const std::size_t n = estimates.size();

    const auto lp_risk = [p](std::span<const double> values, double center) {
        CompensatedSum acc;
        for (double v : values) acc.add(std::pow(std::abs(v - center), p));
        return std::pow(acc.value() / static_cast<double>(values.size()), 1.0 / p);
    };

    RiskReport report;
    report.replications = static_cast<int>(n);
    report.reference = reference;
    report.mean_estimate = mean_of(estimates);
    report.risk = lp_risk(estimates, reference);
    report.bias_part = std::abs(report.mean_estimate - reference);
    report.stoch_part = lp_risk(estimates, report.mean_estimate);

    if (bootstrap > 1 && n > 1) {
        NormalSampler sampler(seed);
        auto& rng = sampler.engine();
        std::vector<double> resample(n);
        std::vector<double> risks(static_cast<std::size_t>(bootstrap));
        for (int b = 0; b < bootstrap; ++b) {
            for (std::size_t k = 0; k < n; ++k) resample[k] = estimates[rng() % n];
            risks[static_cast<std::size_t>(b)] = lp_risk(resample, reference);
        }
        report.se = std::sqrt(variance_of(risks));
    }
    return report;
}

RiskReport mc_pointwise_risk(const ModelSpec& model, const SamplingGrid& grid, const Kernel& kernel,
                             const RiskConfig& config) {
    if (!std::isfinite(config.reference))
        throw std::invalid_argument("mc_pointwise_risk: reference density value must be finite");
    const std::vector<EstimatorSpec> specs{config.estimator};
    const std::vector<double> estimates =
        replicate_estimates(model, grid, kernel, specs, config.x0, config.replications, config.seed,
                            config.threads);
    return aggregate_risk(estimates, config.reference, config.p, config.bootstrap,
                          derive_seed(config.seed, static_cast<std::uint64_t>(config.replications) + 1));
}

}  // namespace fracdens

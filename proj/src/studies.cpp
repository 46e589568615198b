#include "fracdens/studies.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>

#include "fracdens/errors.hpp"
#include "fracdens/rng.hpp"

namespace fracdens {
namespace {

// --- config field access with contextual errors ---------------------------

const Json& require_field(const Json& j, const char* key, const char* ctx) {
    const auto it = j.find(key);
    if (it == j.end())
        throw ConfigError(std::string(ctx) + ": missing field '" + key + "'");
    return *it;
}

double require_number(const Json& j, const char* key, const char* ctx) {
    const Json& v = require_field(j, key, ctx);
    if (!v.is_number())
        throw ConfigError(std::string(ctx) + ": field '" + key + "' must be a number");
    return v.get<double>();
}

double number_or(const Json& j, const char* key, double fallback, const char* ctx) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number())
        throw ConfigError(std::string(ctx) + ": field '" + key + "' must be a number");
    return it->get<double>();
}

int int_or(const Json& j, const char* key, int fallback, const char* ctx) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_integer())
        throw ConfigError(std::string(ctx) + ": field '" + key + "' must be an integer");
    return it->get<int>();
}

std::uint64_t seed_or(const Json& j, const char* key, std::uint64_t fallback, const char* ctx) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_integer())
        throw ConfigError(std::string(ctx) + ": field '" + key + "' must be an integer seed");
    return it->get<std::uint64_t>();
}

bool bool_or(const Json& j, const char* key, bool fallback, const char* ctx) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean())
        throw ConfigError(std::string(ctx) + ": field '" + key + "' must be a boolean");
    return it->get<bool>();
}

std::string string_or(const Json& j, const char* key, const std::string& fallback, const char* ctx) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_string())
        throw ConfigError(std::string(ctx) + ": field '" + key + "' must be a string");
    return it->get<std::string>();
}

std::vector<double> require_vector(const Json& j, const char* key, const char* ctx) {
    const Json& v = require_field(j, key, ctx);
    if (!v.is_array() || v.empty())
        throw ConfigError(std::string(ctx) + ": field '" + key + "' must be a nonempty array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const Json& item : v) {
        if (!item.is_number())
            throw ConfigError(std::string(ctx) + ": field '" + key + "' must contain numbers");
        out.push_back(item.get<double>());
    }
    return out;
}

std::vector<double> vector_or(const Json& j, const char* key, std::vector<double> fallback,
                              const char* ctx) {
    if (j.find(key) == j.end()) return fallback;
    return require_vector(j, key, ctx);
}

// Square matrix: a scalar c means c * identity, otherwise nested arrays
// (row-major).  Returns the flattened matrix; dim must already be known.
std::vector<double> matrix_or_scalar(const Json& j, const char* key, int dim, const char* ctx) {
    const Json& v = require_field(j, key, ctx);
    std::vector<double> out(static_cast<std::size_t>(dim) * dim, 0.0);
    if (v.is_number()) {
        for (int i = 0; i < dim; ++i) out[static_cast<std::size_t>(i) * dim + i] = v.get<double>();
        return out;
    }
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
        throw ConfigError(std::string(ctx) + ": field '" + key + "' must be a scalar or a " +
                          std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
    for (int r = 0; r < dim; ++r) {
        const Json& row = v[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != dim)
            throw ConfigError(std::string(ctx) + ": field '" + key + "' has a malformed row");
        for (int c = 0; c < dim; ++c) {
            const Json& cell = row[static_cast<std::size_t>(c)];
            if (!cell.is_number())
                throw ConfigError(std::string(ctx) + ": field '" + key + "' must contain numbers");
            out[static_cast<std::size_t>(r) * dim + c] = cell.get<double>();
        }
    }
    return out;
}

std::string join_doubles(std::span<const double> values, char sep) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out.push_back(sep);
        out += format_double(values[i]);
    }
    return out;
}

std::string join_ints(std::span<const int> values, char sep) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out.push_back(sep);
        out += std::to_string(values[i]);
    }
    return out;
}

const char* kind_name(EstimatorSpec::Kind kind) {
    switch (kind) {
        case EstimatorSpec::Kind::fixed_h: return "fixed";
        case EstimatorSpec::Kind::oracle: return "oracle";
        case EstimatorSpec::Kind::adaptive: return "adaptive";
    }
    return "unknown";
}

std::vector<double> default_point(const Json& block, int dim, const char* ctx) {
    std::vector<double> x0 =
        vector_or(block, "x0", std::vector<double>(static_cast<std::size_t>(dim), 0.0), ctx);
    if (static_cast<int>(x0.size()) != dim)
        throw ConfigError(std::string(ctx) + ": field 'x0' must have the model dimension");
    return x0;
}

HolderClass holder_from_json(const Json& block, int dim, const char* ctx) {
    const Json& spec = require_field(block, "smoothness", ctx);
    std::vector<double> s = require_vector(spec, "s", ctx);
    std::vector<double> big_l =
        vector_or(spec, "L", std::vector<double>(s.size(), 1.0), ctx);
    if (static_cast<int>(s.size()) != dim || big_l.size() != s.size())
        throw ConfigError(std::string(ctx) + ": smoothness arrays must have the model dimension");
    return HolderClass(std::move(s), std::move(big_l));
}

Json estimator_to_json(const EstimatorSpec& spec, const RiskReport& report) {
    Json out;
    out["label"] = spec.label;
    out["kind"] = kind_name(spec.kind);
    if (spec.kind == EstimatorSpec::Kind::adaptive) out["kappa"] = spec.kappa;
    if (!spec.h.empty()) out["h"] = spec.h;
    out["risk"] = report.risk;
    out["se"] = report.se;
    out["bias_part"] = report.bias_part;
    out["stoch_part"] = report.stoch_part;
    out["mean_estimate"] = report.mean_estimate;
    out["replications"] = report.replications;
    return out;
}

Json fit_to_json(const SubgaussFit& fit) {
    Json out;
    out["ok"] = fit.ok;
    out["c_hat"] = fit.c_hat;
    out["slope"] = fit.slope;
    out["intercept"] = fit.intercept;
    out["r2"] = fit.r2;
    out["slope_se"] = fit.slope_se;
    out["c_lower"] = fit.c_lower;
    out["c_upper"] = fit.c_upper;
    out["points_used"] = fit.points_used;
    if (!fit.ok) out["failure"] = fit.failure;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Formatting and file helpers
// ---------------------------------------------------------------------------

std::string format_double(double value) {
    std::array<char, 64> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return std::string(buffer.data(), result.ptr);
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& err) {
        throw ConfigError("config file " + path + " is not valid JSON: " + err.what());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

ModelSpec model_from_json(const Json& spec) {
    static constexpr const char* ctx = "model";
    if (!spec.is_object()) throw ConfigError("model: expected an object");
    const std::string kind = string_or(spec, "kind", "", ctx);
    if (kind.empty()) throw ConfigError("model: missing field 'kind'");
    const double hurst = require_number(spec, "hurst", ctx);
    try {
        if (kind == "fou") {
            const int dim = int_or(spec, "dim", 1, ctx);
            return make_fou(require_number(spec, "theta", ctx), require_number(spec, "sigma", ctx),
                            hurst, dim);
        }
        if (kind == "linear") {
            const Json& a_field = require_field(spec, "a", ctx);
            if (!a_field.is_array() || a_field.empty())
                throw ConfigError("model: field 'a' must be a nonempty matrix");
            const int dim = static_cast<int>(a_field.size());
            const std::vector<double> a = matrix_or_scalar(spec, "a", dim, ctx);
            const std::vector<double> sigma = matrix_or_scalar(spec, "sigma", dim, ctx);
            return make_linear(a, sigma, hurst, dim);
        }
        if (kind == "tanh") {
            const int dim = int_or(spec, "dim", 1, ctx);
            return make_tanh(require_number(spec, "theta", ctx), require_number(spec, "c", ctx),
                             require_number(spec, "sigma", ctx), hurst, dim);
        }
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("model: ") + err.what());
    }
    throw ConfigError("model: unknown kind '" + kind + "'");
}

Json model_to_json(const ModelSpec& model) {
    Json out;
    out["kind"] = model.name;
    out["hurst"] = model.hurst;
    out["dim"] = model.dim;
    out["alpha"] = model.alpha;
    out["lipschitz"] = model.lipschitz;
    out["params"] = model.params;
    out["sigma"] = model.sigma;
    return out;
}

GFunction g_from_json(const Json& spec, const ModelSpec& model) {
    static constexpr const char* ctx = "g";
    if (!spec.is_object()) throw ConfigError("g: expected an object");
    const std::string kind = string_or(spec, "kind", "", ctx);
    try {
        if (kind == "projection")
            return g_projection(model.dim, int_or(spec, "coordinate", 0, ctx));
        if (kind == "clip")
            return g_identity_clip(model.dim, int_or(spec, "coordinate", 0, ctx),
                                   number_or(spec, "radius", 2.0, ctx));
        if (kind == "kernel") {
            const Kernel kernel = make_kernel(int_or(spec, "order", 1, ctx));
            std::vector<double> h = require_vector(spec, "h", ctx);
            std::vector<double> x0 = default_point(spec, model.dim, ctx);
            if (static_cast<int>(h.size()) != model.dim)
                throw ConfigError("g: field 'h' must have the model dimension");
            return g_kernel(kernel, Bandwidth(std::move(h)), std::move(x0));
        }
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("g: ") + err.what());
    }
    throw ConfigError("g: unknown kind '" + kind + "'");
}

EstimatorSpec estimator_from_json(const Json& spec, int n) {
    static constexpr const char* ctx = "estimator";
    if (!spec.is_object()) throw ConfigError("estimator: expected an object");
    const std::string kind = string_or(spec, "kind", "", ctx);
    EstimatorSpec out;
    if (kind == "fixed") {
        out.kind = EstimatorSpec::Kind::fixed_h;
        out.h = require_vector(spec, "h", ctx);
        out.label = "fixed-h=" + join_doubles(out.h, ';');
        return out;
    }
    if (kind == "oracle") {
        out.kind = EstimatorSpec::Kind::oracle;
        std::vector<double> s = require_vector(spec, "s", ctx);
        std::vector<double> big_l = vector_or(spec, "L", std::vector<double>(s.size(), 1.0), ctx);
        try {
            out.holder = HolderClass(std::move(s), std::move(big_l));
        } catch (const std::invalid_argument& err) {
            throw ConfigError(std::string("estimator: ") + err.what());
        }
        out.label = "oracle";
        return out;
    }
    if (kind == "adaptive") {
        out.kind = EstimatorSpec::Kind::adaptive;
        const Json& kappa = require_field(spec, "kappa", ctx);
        if (kappa.is_string() && kappa.get<std::string>() == "log_n") {
            if (n < 3) throw ConfigError("estimator: kappa 'log_n' needs n >= 3");
            out.kappa = std::log(static_cast<double>(n));
            out.label = "adaptive-logn";
        } else if (kappa.is_number()) {
            out.kappa = kappa.get<double>();
            out.label = "adaptive-kappa=" + format_double(out.kappa);
        } else {
            throw ConfigError("estimator: field 'kappa' must be a number or 'log_n'");
        }
        return out;
    }
    throw ConfigError("estimator: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Risk study
// ---------------------------------------------------------------------------

RiskStudyConfig RiskStudyConfig::from_json(const Json& doc) {
    static constexpr const char* ctx = "risk_study";
    RiskStudyConfig config;
    config.raw = doc;
    config.model = model_from_json(require_field(doc, "model", "config"));
    const Json& block = require_field(doc, "risk_study", "config");
    config.n = int_or(block, "n", config.n, ctx);
    if (config.n < 2) throw ConfigError("risk_study: field 'n' must be at least 2");
    config.delta = number_or(block, "delta", config.delta, ctx);
    if (!(config.delta > 0.0)) throw ConfigError("risk_study: field 'delta' must be positive");
    config.x0 = default_point(block, config.model.dim, ctx);
    config.kernel_order = int_or(block, "kernel_order", config.kernel_order, ctx);
    config.p = number_or(block, "p", config.p, ctx);
    if (config.p < 1.0) throw ConfigError("risk_study: field 'p' must be at least 1");
    const Json& estimators = require_field(block, "estimators", ctx);
    if (!estimators.is_array() || estimators.empty())
        throw ConfigError("risk_study: field 'estimators' must be a nonempty array");
    for (const Json& spec : estimators)
        config.estimators.push_back(estimator_from_json(spec, config.n));
    config.replications = int_or(block, "replications", config.replications, ctx);
    if (config.replications < 2)
        throw ConfigError("risk_study: field 'replications' must be at least 2");
    config.bootstrap = int_or(block, "bootstrap", config.bootstrap, ctx);
    config.seed = seed_or(block, "seed", config.seed, ctx);
    config.threads = int_or(block, "threads", config.threads, ctx);
    config.cache_dir = string_or(block, "cache_dir", config.cache_dir, ctx);
    return config;
}

RiskStudyResult run_risk_study(const RiskStudyConfig& config) {
    RiskStudyResult result;
    result.config = config;
    const Kernel kernel = make_kernel(config.kernel_order);
    const SamplingGrid grid = SamplingGrid::make(config.n, config.delta, config.model.alpha);

    ReferenceOptions ref_opts;
    ref_opts.study_n = static_cast<std::size_t>(config.n);
    ref_opts.cache_dir = config.cache_dir;
    ref_opts.seed = derive_seed(config.seed, 815);
    result.reference = reference_density_at(config.model, config.x0, ref_opts);

    const std::vector<double> estimates =
        replicate_estimates(config.model, grid, kernel, config.estimators, config.x0,
                            config.replications, derive_seed(config.seed, 1), config.threads);
    const std::size_t n_specs = config.estimators.size();
    for (std::size_t s = 0; s < n_specs; ++s) {
        std::vector<double> column(static_cast<std::size_t>(config.replications));
        for (int r = 0; r < config.replications; ++r)
            column[static_cast<std::size_t>(r)] = estimates[static_cast<std::size_t>(r) * n_specs + s];
        EstimatorResult entry;
        entry.spec = config.estimators[s];
        entry.report = aggregate_risk(column, result.reference, config.p, config.bootstrap,
                                      derive_seed(config.seed, 7000 + static_cast<std::uint64_t>(s)));
        result.estimators.push_back(std::move(entry));
    }
    return result;
}

std::string risk_study_csv(const RiskStudyResult& result) {
    std::string out = "# schema=fracdens/risk-study v1\n";
    out +=
        "label,kind,h,kappa,n,delta,p,replications,reference,risk,se,bias_part,stoch_part,mean_"
        "estimate\n";
    for (const EstimatorResult& entry : result.estimators) {
        out += entry.spec.label;
        out += ',';
        out += kind_name(entry.spec.kind);
        out += ',';
        out += join_doubles(entry.spec.h, ';');
        out += ',';
        if (entry.spec.kind == EstimatorSpec::Kind::adaptive) out += format_double(entry.spec.kappa);
        out += ',';
        out += std::to_string(result.config.n);
        out += ',';
        out += format_double(result.config.delta);
        out += ',';
        out += format_double(result.config.p);
        out += ',';
        out += std::to_string(entry.report.replications);
        out += ',';
        out += format_double(entry.report.reference);
        out += ',';
        out += format_double(entry.report.risk);
        out += ',';
        out += format_double(entry.report.se);
        out += ',';
        out += format_double(entry.report.bias_part);
        out += ',';
        out += format_double(entry.report.stoch_part);
        out += ',';
        out += format_double(entry.report.mean_estimate);
        out += '\n';
    }
    return out;
}

Json risk_study_json(const RiskStudyResult& result) {
    Json out;
    out["schema"] = "fracdens/risk-study";
    out["schema_version"] = 1;
    out["config"] = result.config.raw;
    out["model"] = model_to_json(result.config.model);
    out["reference"] = result.reference;
    Json estimators = Json::array();
    for (const EstimatorResult& entry : result.estimators)
        estimators.push_back(estimator_to_json(entry.spec, entry.report));
    out["estimators"] = estimators;
    return out;
}

// ---------------------------------------------------------------------------
// Rate study
// ---------------------------------------------------------------------------

RateStudyConfig RateStudyConfig::from_json(const Json& doc) {
    static constexpr const char* ctx = "rate_study";
    RateStudyConfig config;
    config.raw = doc;
    config.model = model_from_json(require_field(doc, "model", "config"));
    const Json& block = require_field(doc, "rate_study", "config");
    config.n_delta = require_vector(block, "n_delta", ctx);
    for (double value : config.n_delta)
        if (!(value > 0.0)) throw ConfigError("rate_study: 'n_delta' entries must be positive");
    config.delta = number_or(block, "delta", config.delta, ctx);
    if (!(config.delta > 0.0)) throw ConfigError("rate_study: field 'delta' must be positive");
    config.replications = int_or(block, "replications", config.replications, ctx);
    if (config.replications < 2)
        throw ConfigError("rate_study: field 'replications' must be at least 2");
    config.x0 = default_point(block, config.model.dim, ctx);
    config.kernel_order = int_or(block, "kernel_order", config.kernel_order, ctx);
    config.p = number_or(block, "p", config.p, ctx);
    if (config.p < 1.0) throw ConfigError("rate_study: field 'p' must be at least 1");
    try {
        config.holder = holder_from_json(block, config.model.dim, ctx);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("rate_study: ") + err.what());
    }
    config.include_oracle = bool_or(block, "include_oracle", config.include_oracle, ctx);
    config.include_grid = bool_or(block, "include_grid", config.include_grid, ctx);
    config.kappas = vector_or(block, "kappas", config.kappas, ctx);
    for (double kappa : config.kappas)
        if (!(kappa > 0.0)) throw ConfigError("rate_study: 'kappas' entries must be positive");
    config.include_kappa_log_n = bool_or(block, "include_kappa_log_n", config.include_kappa_log_n, ctx);
    config.bootstrap = int_or(block, "bootstrap", config.bootstrap, ctx);
    config.seed = seed_or(block, "seed", config.seed, ctx);
    config.threads = int_or(block, "threads", config.threads, ctx);
    config.cache_dir = string_or(block, "cache_dir", config.cache_dir, ctx);
    if (!config.include_oracle && !config.include_grid && config.kappas.empty() &&
        !config.include_kappa_log_n)
        throw ConfigError("rate_study: no estimator requested");
    return config;
}

RateStudyResult run_rate_study(const RateStudyConfig& config) {
    RateStudyResult result;
    result.config = config;
    const Kernel kernel = make_kernel(config.kernel_order);
    const ModelSpec& model = config.model;

    int max_n = 0;
    for (double target : config.n_delta)
        max_n = std::max(max_n, static_cast<int>(std::llround(target / config.delta)));
    ReferenceOptions ref_opts;
    ref_opts.study_n = static_cast<std::size_t>(std::max(max_n, 1));
    ref_opts.cache_dir = config.cache_dir;
    ref_opts.seed = derive_seed(config.seed, 815);
    const double reference = reference_density_at(model, config.x0, ref_opts);

    for (std::size_t case_idx = 0; case_idx < config.n_delta.size(); ++case_idx) {
        const int n = static_cast<int>(std::llround(config.n_delta[case_idx] / config.delta));
        if (n < 2) throw ConfigError("rate_study: ladder point gives fewer than two observations");
        RateCaseResult case_result;
        case_result.n = n;
        case_result.n_delta = n * config.delta;
        case_result.reference = reference;
        const SamplingGrid grid = SamplingGrid::make(n, config.delta, model.alpha);

        std::vector<EstimatorSpec> specs;
        if (config.include_oracle) {
            EstimatorSpec spec;
            spec.kind = EstimatorSpec::Kind::oracle;
            spec.holder = config.holder;
            spec.label = "oracle";
            specs.push_back(std::move(spec));
        }
        for (double kappa : config.kappas) {
            EstimatorSpec spec;
            spec.kind = EstimatorSpec::Kind::adaptive;
            spec.kappa = kappa;
            spec.label = "adaptive-kappa=" + format_double(kappa);
            specs.push_back(std::move(spec));
        }
        if (config.include_kappa_log_n) {
            EstimatorSpec spec;
            spec.kind = EstimatorSpec::Kind::adaptive;
            spec.kappa = std::log(static_cast<double>(n));
            spec.label = "adaptive-logn";
            specs.push_back(std::move(spec));
        }
        if (config.include_grid) {
            const BandwidthGrid bw_grid = build_grid(model.dim, case_result.n_delta, HurstParam(model.hurst));
            for (int i = 0; i < bw_grid.size(); ++i) {
                EstimatorSpec spec;
                spec.kind = EstimatorSpec::Kind::fixed_h;
                spec.h = bw_grid.bandwidths[static_cast<std::size_t>(i)].h;
                spec.label = "fixed-l=" + join_ints(bw_grid.levels[static_cast<std::size_t>(i)], ';');
                specs.push_back(std::move(spec));
            }
        }

        const std::vector<double> estimates = replicate_estimates(
            model, grid, kernel, specs, config.x0, config.replications,
            derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(case_idx)), config.threads);
        const std::size_t n_specs = specs.size();
        for (std::size_t s = 0; s < n_specs; ++s) {
            std::vector<double> column(static_cast<std::size_t>(config.replications));
            for (int r = 0; r < config.replications; ++r)
                column[static_cast<std::size_t>(r)] =
                    estimates[static_cast<std::size_t>(r) * n_specs + s];
            EstimatorResult entry;
            entry.spec = specs[s];
            entry.report = aggregate_risk(
                column, reference, config.p, config.bootstrap,
                derive_seed(config.seed, 7000 + 100 * static_cast<std::uint64_t>(case_idx) +
                                             static_cast<std::uint64_t>(s)));
            case_result.estimators.push_back(std::move(entry));
        }

        double best_fixed = 0.0;
        bool have_fixed = false;
        for (const EstimatorResult& entry : case_result.estimators) {
            if (entry.spec.kind != EstimatorSpec::Kind::fixed_h) continue;
            if (!have_fixed || entry.report.risk < best_fixed) {
                best_fixed = entry.report.risk;
                case_result.best_fixed_label = entry.spec.label;
                have_fixed = true;
            }
        }
        if (have_fixed) {
            case_result.best_fixed_risk = best_fixed;
            for (const EstimatorResult& entry : case_result.estimators) {
                if (entry.spec.kind != EstimatorSpec::Kind::adaptive) continue;
                AdaptiveRatio ratio;
                ratio.label = entry.spec.label;
                ratio.risk = entry.report.risk;
                ratio.ratio = best_fixed > 0.0
                                  ? entry.report.risk / best_fixed
                                  : std::numeric_limits<double>::infinity();
                case_result.adaptive.push_back(std::move(ratio));
            }
        }
        result.cases.push_back(std::move(case_result));
    }

    result.target_slope = -rate_exponents(model.hurst).beta * gamma_exponent(config.holder);
    if (config.include_oracle) {
        std::vector<double> log_x;
        std::vector<double> log_y;
        for (const RateCaseResult& case_result : result.cases) {
            for (const EstimatorResult& entry : case_result.estimators) {
                if (entry.spec.kind != EstimatorSpec::Kind::oracle) continue;
                if (entry.report.risk > 0.0) {
                    log_x.push_back(std::log(case_result.n_delta));
                    log_y.push_back(std::log(entry.report.risk));
                }
            }
        }
        if (log_x.size() >= 2) {
            result.oracle_fit = fit_line(log_x, log_y);
            result.fit_ok = true;
        }
    }
    return result;
}

std::string rate_study_csv(const RateStudyResult& result) {
    std::string out = "# schema=fracdens/rate-study v1\n";
    out += "n_delta,n,label,kind,h,kappa,reference,risk,se,bias_part,stoch_part,ratio_to_best_fixed\n";
    for (const RateCaseResult& case_result : result.cases) {
        for (const EstimatorResult& entry : case_result.estimators) {
            out += format_double(case_result.n_delta);
            out += ',';
            out += std::to_string(case_result.n);
            out += ',';
            out += entry.spec.label;
            out += ',';
            out += kind_name(entry.spec.kind);
            out += ',';
            out += join_doubles(entry.spec.h, ';');
            out += ',';
            if (entry.spec.kind == EstimatorSpec::Kind::adaptive)
                out += format_double(entry.spec.kappa);
            out += ',';
            out += format_double(case_result.reference);
            out += ',';
            out += format_double(entry.report.risk);
            out += ',';
            out += format_double(entry.report.se);
            out += ',';
            out += format_double(entry.report.bias_part);
            out += ',';
            out += format_double(entry.report.stoch_part);
            out += ',';
            if (entry.spec.kind == EstimatorSpec::Kind::adaptive && case_result.best_fixed_risk > 0.0)
                out += format_double(entry.report.risk / case_result.best_fixed_risk);
            out += '\n';
        }
    }
    return out;
}

Json rate_study_json(const RateStudyResult& result) {
    Json out;
    out["schema"] = "fracdens/rate-study";
    out["schema_version"] = 1;
    out["config"] = result.config.raw;
    out["model"] = model_to_json(result.config.model);
    out["target_slope"] = result.target_slope;
    Json fit;
    fit["ok"] = result.fit_ok;
    if (result.fit_ok) {
        fit["slope"] = result.oracle_fit.slope;
        fit["intercept"] = result.oracle_fit.intercept;
        fit["r2"] = result.oracle_fit.r2;
        fit["slope_se"] = result.oracle_fit.slope_se;
    }
    out["oracle_fit"] = fit;
    Json cases = Json::array();
    for (const RateCaseResult& case_result : result.cases) {
        Json case_json;
        case_json["n_delta"] = case_result.n_delta;
        case_json["n"] = case_result.n;
        case_json["reference"] = case_result.reference;
        Json estimators = Json::array();
        for (const EstimatorResult& entry : case_result.estimators)
            estimators.push_back(estimator_to_json(entry.spec, entry.report));
        case_json["estimators"] = estimators;
        if (!case_result.best_fixed_label.empty()) {
            case_json["best_fixed"] = {{"label", case_result.best_fixed_label},
                                       {"risk", case_result.best_fixed_risk}};
            Json ratios = Json::array();
            for (const AdaptiveRatio& ratio : case_result.adaptive)
                ratios.push_back({{"label", ratio.label}, {"risk", ratio.risk}, {"ratio", ratio.ratio}});
            case_json["adaptive_ratios"] = ratios;
        }
        cases.push_back(std::move(case_json));
    }
    out["cases"] = cases;
    return out;
}

// ---------------------------------------------------------------------------
// Concentration study
// ---------------------------------------------------------------------------

ConcStudyConfig ConcStudyConfig::from_json(const Json& doc) {
    static constexpr const char* ctx = "concentration";
    ConcStudyConfig config;
    config.raw = doc;
    config.model = model_from_json(require_field(doc, "model", "config"));
    const Json& block = require_field(doc, "concentration", "config");
    config.g_spec = require_field(block, "g", ctx);
    const Json& cases = require_field(block, "cases", ctx);
    if (!cases.is_array() || cases.empty())
        throw ConfigError("concentration: field 'cases' must be a nonempty array");
    for (const Json& entry : cases) {
        ConcCase shape;
        shape.n = int_or(entry, "n", 0, ctx);
        shape.delta = number_or(entry, "delta", 0.0, ctx);
        if (shape.n < 2 || !(shape.delta > 0.0))
            throw ConfigError("concentration: each case needs n >= 2 and delta > 0");
        config.cases.push_back(shape);
    }
    config.r_grid = vector_or(block, "r_grid", {}, ctx);
    config.replications = int_or(block, "replications", config.replications, ctx);
    if (config.replications < 50)
        throw ConfigError("concentration: field 'replications' must be at least 50");
    config.pool_factor = number_or(block, "pool_factor", config.pool_factor, ctx);
    config.safety = number_or(block, "safety", config.safety, ctx);
    if (!(config.safety >= 1.0)) throw ConfigError("concentration: field 'safety' must be >= 1");
    config.seed = seed_or(block, "seed", config.seed, ctx);
    config.threads = int_or(block, "threads", config.threads, ctx);
    return config;
}

ConcStudyResult run_concentration_study(const ConcStudyConfig& config) {
    ConcStudyResult result;
    result.config = config;
    const GFunction g = g_from_json(config.g_spec, config.model);
    result.g_name = g.name;
    result.g_norm = g.lipschitz;

    for (std::size_t case_idx = 0; case_idx < config.cases.size(); ++case_idx) {
        const ConcCase& shape = config.cases[case_idx];
        ConcCaseResult case_result;
        case_result.shape = shape;
        const SamplingGrid grid = SamplingGrid::make(shape.n, shape.delta, config.model.alpha);
        case_result.curve = empirical_tail(
            config.model, grid, g, config.replications, config.pool_factor,
            derive_seed(config.seed, 2000 + static_cast<std::uint64_t>(case_idx)), config.threads,
            config.r_grid);
        case_result.fit = fit_subgaussian_constant(case_result.curve);
        if (case_result.fit.ok) {
            // Bound check over the same tail window the fit used.
            const double lo = 20.0 / config.replications;
            double worst = -std::numeric_limits<double>::infinity();
            const double denom = 4.0 * case_result.curve.g_norm * case_result.curve.g_norm;
            for (const TailPoint& point : case_result.curve.points) {
                if (point.r <= 0.0 || point.p_hat < lo || point.p_hat > 0.5) continue;
                const double x = point.r * point.r * case_result.curve.n_delta_beta / denom;
                worst = std::max(worst,
                                 std::log(point.p_hat) + x / (config.safety * case_result.fit.c_hat));
            }
            case_result.worst_margin = worst;
            case_result.bound_ok = worst <= 0.0;
        }
        result.cases.push_back(std::move(case_result));
    }

    result.all_fits_ok = true;
    for (const ConcCaseResult& case_result : result.cases)
        result.all_fits_ok = result.all_fits_ok && case_result.fit.ok;
    if (result.all_fits_ok && result.cases.size() >= 2) {
        double worst = 0.0;
        for (std::size_t i = 0; i < result.cases.size(); ++i) {
            for (std::size_t j = i + 1; j < result.cases.size(); ++j) {
                const double ci = result.cases[i].fit.c_hat;
                const double cj = result.cases[j].fit.c_hat;
                worst = std::max(worst, std::abs(ci - cj) / std::max(ci, cj));
            }
        }
        result.agreement = worst;
    }
    return result;
}

std::string conc_study_csv(const ConcStudyResult& result) {
    // One row per tail-curve point; the per-case summary lives in the JSON.
    std::string out = "# schema=fracdens/concentration-curve v1\n";
    out += "n,delta,r,p_hat,lower,upper,exceedances,bound,bound_safe\n";
    for (const ConcCaseResult& case_result : result.cases) {
        for (const TailPoint& point : case_result.curve.points) {
            out += std::to_string(case_result.shape.n);
            out += ',';
            out += format_double(case_result.shape.delta);
            out += ',';
            out += format_double(point.r);
            out += ',';
            out += format_double(point.p_hat);
            out += ',';
            out += format_double(point.lower);
            out += ',';
            out += format_double(point.upper);
            out += ',';
            out += std::to_string(point.exceedances);
            out += ',';
            out += case_result.fit.ok
                       ? format_double(tail_bound(case_result.curve, point.r, case_result.fit.c_hat))
                       : "";
            out += ',';
            out += case_result.fit.ok
                       ? format_double(tail_bound(case_result.curve, point.r,
                                                  result.config.safety * case_result.fit.c_hat))
                       : "";
            out += '\n';
        }
    }
    return out;
}

Json conc_study_json(const ConcStudyResult& result) {
    Json out;
    out["schema"] = "fracdens/concentration";
    out["schema_version"] = 1;
    out["config"] = result.config.raw;
    out["model"] = model_to_json(result.config.model);
    out["g"] = {{"name", result.g_name}, {"lipschitz", result.g_norm}};
    out["agreement"] = result.agreement;
    out["all_fits_ok"] = result.all_fits_ok;
    Json cases = Json::array();
    for (const ConcCaseResult& case_result : result.cases) {
        Json case_json;
        case_json["n"] = case_result.shape.n;
        case_json["delta"] = case_result.shape.delta;
        case_json["fit"] = fit_to_json(case_result.fit);
        case_json["bound_ok"] = case_result.bound_ok;
        case_json["worst_margin"] = case_result.worst_margin;
        case_json["center"] = case_result.curve.center;
        case_json["n_delta_beta"] = case_result.curve.n_delta_beta;
        Json tail = Json::array();
        for (const TailPoint& point : case_result.curve.points) {
            Json point_json = {{"r", point.r},
                               {"p_hat", point.p_hat},
                               {"lower", point.lower},
                               {"upper", point.upper},
                               {"exceedances", point.exceedances}};
            if (case_result.fit.ok) {
                point_json["bound"] = tail_bound(case_result.curve, point.r, case_result.fit.c_hat);
                point_json["bound_safe"] = tail_bound(case_result.curve, point.r,
                                                      result.config.safety * case_result.fit.c_hat);
            }
            tail.push_back(std::move(point_json));
        }
        case_json["tail"] = tail;
        cases.push_back(std::move(case_json));
    }
    out["cases"] = cases;
    return out;
}

}  // namespace fracdens

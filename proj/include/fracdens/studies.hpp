#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "fracdens/concentration.hpp"
#include "fracdens/density.hpp"
#include "fracdens/numerics.hpp"
#include "fracdens/selection.hpp"

namespace fracdens {

using Json = nlohmann::json;

// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double value);

Json load_json_file(const std::string& path);            // throws ConfigError
void write_text_file(const std::string& path, const std::string& content);

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

// {"kind":"fou","theta":1,"sigma":1,"hurst":0.7,"dim":1}
// {"kind":"linear","a":[[...],...],"sigma":1 or [[...]],"hurst":0.7}
// {"kind":"tanh","theta":1,"c":1,"sigma":1,"hurst":0.7,"dim":1}
ModelSpec model_from_json(const Json& spec);
Json model_to_json(const ModelSpec& model);

// {"kind":"projection","coordinate":0}
// {"kind":"clip","coordinate":0,"radius":2}
// {"kind":"kernel","order":1,"h":[0.2],"x0":[0]}
GFunction g_from_json(const Json& spec, const ModelSpec& model);

// {"kind":"fixed","h":[0.2]} | {"kind":"oracle","s":[2],"L":[1]} |
// {"kind":"adaptive","kappa":1} | {"kind":"adaptive","kappa":"log_n"}
// "log_n" resolves to log(n) once the sample size is known.
EstimatorSpec estimator_from_json(const Json& spec, int n);

// ---------------------------------------------------------------------------
// Risk study: several estimators at one (n, delta)
// ---------------------------------------------------------------------------

struct RiskStudyConfig {
    ModelSpec model;
    int n = 1000;
    double delta = 0.2;
    std::vector<double> x0;
    int kernel_order = 1;
    double p = 2.0;
    std::vector<EstimatorSpec> estimators;
    int replications = 100;
    int bootstrap = 200;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string cache_dir;
    Json raw;  // parsed document, echoed into outputs

    static RiskStudyConfig from_json(const Json& doc);
};

struct EstimatorResult {
    EstimatorSpec spec;
    RiskReport report;
};

struct RiskStudyResult {
    RiskStudyConfig config;
    double reference = 0.0;
    std::vector<EstimatorResult> estimators;
};

RiskStudyResult run_risk_study(const RiskStudyConfig& config);
std::string risk_study_csv(const RiskStudyResult& result);
Json risk_study_json(const RiskStudyResult& result);

// ---------------------------------------------------------------------------
// Rate study: risk ladder over n*delta with a log-log slope read-off
// ---------------------------------------------------------------------------

struct RateStudyConfig {
    ModelSpec model;
    std::vector<double> n_delta;  // horizon ladder
    double delta = 0.2;
    int replications = 200;
    std::vector<double> x0;
    int kernel_order = 1;
    double p = 2.0;
    HolderClass holder = HolderClass({2.0}, {1.0});
    bool include_oracle = true;
    bool include_grid = true;       // fixed estimator at every grid bandwidth
    std::vector<double> kappas;     // adaptive variants (fixed kappa)
    bool include_kappa_log_n = false;
    int bootstrap = 200;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string cache_dir;
    Json raw;

    static RateStudyConfig from_json(const Json& doc);
};

struct AdaptiveRatio {
    std::string label;
    double risk = 0.0;
    double ratio = 0.0;  // risk / best fixed risk over the grid
};

struct RateCaseResult {
    double n_delta = 0.0;
    int n = 0;
    double reference = 0.0;
    std::vector<EstimatorResult> estimators;
    double best_fixed_risk = 0.0;  // 0 when the grid was not included
    std::string best_fixed_label;
    std::vector<AdaptiveRatio> adaptive;
};

struct RateStudyResult {
    RateStudyConfig config;
    std::vector<RateCaseResult> cases;
    bool fit_ok = false;     // oracle slope fitted (needs >= 2 cases)
    LineFit oracle_fit;      // log risk vs log n*delta
    double target_slope = 0.0;  // -beta_H * gamma(s)
};

RateStudyResult run_rate_study(const RateStudyConfig& config);
std::string rate_study_csv(const RateStudyResult& result);
Json rate_study_json(const RateStudyResult& result);

// ---------------------------------------------------------------------------
// Concentration study: empirical tails vs the sub-Gaussian bound
// ---------------------------------------------------------------------------

struct ConcCase {
    int n = 0;
    double delta = 0.0;
};

struct ConcStudyConfig {
    ModelSpec model;
    Json g_spec;  // resolved against the model at run time
    std::vector<ConcCase> cases;
    std::vector<double> r_grid;  // empty: thresholds at the observed statistics
    int replications = 5000;
    double pool_factor = 10.0;
    double safety = 1.5;  // inflation applied to the fitted constant
    std::uint64_t seed = 1;
    int threads = 1;
    Json raw;

    static ConcStudyConfig from_json(const Json& doc);
};

struct ConcCaseResult {
    ConcCase shape;
    SubgaussFit fit;
    bool bound_ok = false;      // p_hat <= exp(-x / (safety * c_hat)) over the fit window
    double worst_margin = 0.0;  // max of log p_hat + x / (safety * c_hat); <= 0 passes
    TailCurve curve;
};

struct ConcStudyResult {
    ConcStudyConfig config;
    std::string g_name;
    double g_norm = 1.0;
    std::vector<ConcCaseResult> cases;
    double agreement = 0.0;  // max pairwise |Ci - Cj| / max(Ci, Cj)
    bool all_fits_ok = false;
};

ConcStudyResult run_concentration_study(const ConcStudyConfig& config);
std::string conc_study_csv(const ConcStudyResult& result);
Json conc_study_json(const ConcStudyResult& result);

}  // namespace fracdens

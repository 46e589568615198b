// Command-line front end: simulation, selection, and study drivers around the
// fracdens library.  Outputs are plain CSV/JSON files whose bytes depend only
// on the configuration and seed (timings go to stderr, never into files).

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fracdens/errors.hpp"
#include "fracdens/fbm.hpp"
#include "fracdens/studies.hpp"

namespace {

using fracdens::Json;

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed = -1;  // -1: keep the config's seed
    int threads = 0;         // 0: keep the config's thread count
};

std::filesystem::path prepare_out_dir(const GlobalOptions& global) {
    const std::filesystem::path dir(global.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

Json load_config(const GlobalOptions& global) {
    if (global.config_path.empty())
        throw fracdens::ConfigError("this subcommand requires --config <file.json>");
    return fracdens::load_json_file(global.config_path);
}

double field_number(const Json& block, const char* key, double fallback) {
    const auto it = block.find(key);
    if (it == block.end()) return fallback;
    if (!it->is_number()) throw fracdens::ConfigError(std::string("field '") + key + "' must be a number");
    return it->get<double>();
}

std::int64_t field_int(const Json& block, const char* key, std::int64_t fallback) {
    const auto it = block.find(key);
    if (it == block.end()) return fallback;
    if (!it->is_number_integer())
        throw fracdens::ConfigError(std::string("field '") + key + "' must be an integer");
    return it->get<std::int64_t>();
}

// ---------------------------------------------------------------------------
// fbm: fractional Gaussian noise / fractional Brownian motion sample
// ---------------------------------------------------------------------------

struct FbmOptions {
    double hurst = 0.5;
    int steps = 1024;
    double delta = 1.0;
    int dim = 1;
    std::uint64_t seed = 1;
    std::string method = "auto";
    bool cumulate = false;
};

int run_fbm(const FbmOptions& opt, const GlobalOptions& global) {
    fracdens::FgnMethod method = fracdens::FgnMethod::automatic;
    if (opt.method == "circulant") method = fracdens::FgnMethod::circulant_fft;
    else if (opt.method == "cholesky") method = fracdens::FgnMethod::cholesky;
    else if (opt.method == "white") method = fracdens::FgnMethod::white_noise;
    else if (opt.method != "auto")
        throw fracdens::ConfigError("--method must be auto, circulant, cholesky, or white");

    const fracdens::FgnSample sample = fracdens::generate_fgn(
        fracdens::HurstParam(opt.hurst), opt.steps, opt.delta, opt.dim, opt.seed, method);

    std::string csv = "# schema=fracdens/fbm v1\n";
    csv += "k,t";
    for (int j = 0; j < opt.dim; ++j) csv += ",x" + std::to_string(j);
    csv += '\n';
    if (opt.cumulate) {
        const std::vector<double> path = fracdens::cumulate_to_fbm(sample);
        for (int k = 0; k <= opt.steps; ++k) {
            csv += std::to_string(k);
            csv += ',';
            csv += fracdens::format_double(k * opt.delta);
            for (int j = 0; j < opt.dim; ++j) {
                csv += ',';
                csv += fracdens::format_double(path[static_cast<std::size_t>(k) * opt.dim + j]);
            }
            csv += '\n';
        }
    } else {
        for (int k = 0; k < opt.steps; ++k) {
            csv += std::to_string(k);
            csv += ',';
            csv += fracdens::format_double((k + 1) * opt.delta);
            for (int j = 0; j < opt.dim; ++j) {
                csv += ',';
                csv += fracdens::format_double(
                    sample.increments[static_cast<std::size_t>(k) * opt.dim + j]);
            }
            csv += '\n';
        }
    }
    const auto out = prepare_out_dir(global) / "fbm.csv";
    fracdens::write_text_file(out.string(), csv);
    std::cout << "wrote " << out.string() << " (" << (opt.cumulate ? opt.steps + 1 : opt.steps)
              << " rows, H=" << fracdens::format_double(opt.hurst) << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// simulate: stationary observations of a model
// ---------------------------------------------------------------------------

int run_simulate(const GlobalOptions& global) {
    const Json doc = load_config(global);
    const fracdens::ModelSpec model = fracdens::model_from_json(
        doc.contains("model") ? doc.at("model") : Json::object());
    const Json block = doc.contains("simulate") ? doc.at("simulate") : Json::object();
    const auto n = static_cast<std::size_t>(field_int(block, "n", 1000));
    const double delta = field_number(block, "delta", 0.2);
    const double burn_in = field_number(block, "burn_in", -1.0);
    const double sim_step = field_number(block, "sim_step", -1.0);
    std::uint64_t seed = static_cast<std::uint64_t>(field_int(block, "seed", 1));
    if (global.seed >= 0) seed = static_cast<std::uint64_t>(global.seed);

    const fracdens::SamplingGrid grid =
        fracdens::SamplingGrid::make(n, delta, model.alpha, burn_in, sim_step);
    const fracdens::ObservationSet obs = fracdens::sample_stationary(model, grid, seed);

    std::string csv = "# schema=fracdens/simulate v1\n";
    csv += "k,t";
    for (int j = 0; j < model.dim; ++j) csv += ",x" + std::to_string(j);
    csv += '\n';
    for (std::size_t k = 0; k < obs.n; ++k) {
        csv += std::to_string(k);
        csv += ',';
        csv += fracdens::format_double(static_cast<double>(k + 1) * delta);
        for (int j = 0; j < model.dim; ++j) {
            csv += ',';
            csv += fracdens::format_double(obs.x[k * static_cast<std::size_t>(model.dim) + j]);
        }
        csv += '\n';
    }
    const auto out = prepare_out_dir(global) / "simulate.csv";
    fracdens::write_text_file(out.string(), csv);
    std::cout << "wrote " << out.string() << " (" << obs.n << " observations of " << model.name
              << ", delta=" << fracdens::format_double(delta) << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// select: Goldenshluger-Lepski bandwidth choice on one simulated sample
// ---------------------------------------------------------------------------

int run_select(const GlobalOptions& global) {
    const Json doc = load_config(global);
    const fracdens::ModelSpec model = fracdens::model_from_json(
        doc.contains("model") ? doc.at("model") : Json::object());
    const Json block = doc.contains("select") ? doc.at("select") : Json::object();
    const auto n = static_cast<std::size_t>(field_int(block, "n", 1000));
    const double delta = field_number(block, "delta", 0.2);
    const int kernel_order = static_cast<int>(field_int(block, "kernel_order", 1));
    const double kappa = field_number(block, "kappa", 1.0);
    const double p = field_number(block, "p", 2.0);
    std::uint64_t seed = static_cast<std::uint64_t>(field_int(block, "seed", 1));
    if (global.seed >= 0) seed = static_cast<std::uint64_t>(global.seed);
    std::vector<double> x0(static_cast<std::size_t>(model.dim), 0.0);
    if (block.contains("x0")) {
        x0 = block.at("x0").get<std::vector<double>>();
        if (static_cast<int>(x0.size()) != model.dim)
            throw fracdens::ConfigError("select: field 'x0' must have the model dimension");
    }

    const fracdens::SamplingGrid grid = fracdens::SamplingGrid::make(n, delta, model.alpha);
    const fracdens::ObservationSet obs = fracdens::sample_stationary(model, grid, seed);
    const fracdens::Kernel kernel = fracdens::make_kernel(kernel_order);
    const fracdens::BandwidthGrid bw_grid =
        fracdens::build_grid(model.dim, grid.n_delta(), fracdens::HurstParam(model.hurst));
    const fracdens::SelectionResult result =
        fracdens::select(obs, kernel, bw_grid, x0, kappa, p);

    Json out;
    out["schema"] = "fracdens/select";
    out["schema_version"] = 1;
    out["config"] = doc;
    out["model"] = fracdens::model_to_json(model);
    Json grid_json;
    grid_json["max_level"] = bw_grid.max_level;
    grid_json["min_volume"] = bw_grid.min_volume;
    grid_json["levels"] = bw_grid.levels;
    Json h_list = Json::array();
    for (const fracdens::Bandwidth& h : bw_grid.bandwidths) h_list.push_back(h.h);
    grid_json["h"] = h_list;
    out["grid"] = grid_json;
    out["estimates"] = result.diagnostics.estimates;
    out["bias_term"] = result.diagnostics.bias_term;
    out["majorants"] = result.diagnostics.majorants;
    out["criterion"] = result.diagnostics.criterion;
    out["selected"] = {{"index", result.index},
                       {"h", result.h.h},
                       {"estimate", result.estimate},
                       {"criterion", result.criterion}};
    const auto path = prepare_out_dir(global) / "select.json";
    fracdens::write_text_file(path.string(), out.dump(2) + "\n");
    std::cout << "wrote " << path.string() << " (selected h=["
              << fracdens::format_double(result.h.h[0]);
    for (std::size_t i = 1; i < result.h.h.size(); ++i)
        std::cout << "," << fracdens::format_double(result.h.h[i]);
    std::cout << "], estimate=" << fracdens::format_double(result.estimate) << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// study drivers
// ---------------------------------------------------------------------------

int run_risk(const GlobalOptions& global) {
    Json doc = load_config(global);
    fracdens::RiskStudyConfig config = fracdens::RiskStudyConfig::from_json(doc);
    if (global.seed >= 0) config.seed = static_cast<std::uint64_t>(global.seed);
    if (global.threads > 0) config.threads = global.threads;
    const fracdens::RiskStudyResult result = fracdens::run_risk_study(config);
    const auto dir = prepare_out_dir(global);
    fracdens::write_text_file((dir / "risk_study.csv").string(), fracdens::risk_study_csv(result));
    fracdens::write_text_file((dir / "risk_study.json").string(),
                              fracdens::risk_study_json(result).dump(2) + "\n");
    std::cout << "wrote " << (dir / "risk_study.csv").string() << " and .json ("
              << result.estimators.size() << " estimators, reference="
              << fracdens::format_double(result.reference) << ")\n";
    return 0;
}

int run_rates(const GlobalOptions& global) {
    Json doc = load_config(global);
    fracdens::RateStudyConfig config = fracdens::RateStudyConfig::from_json(doc);
    if (global.seed >= 0) config.seed = static_cast<std::uint64_t>(global.seed);
    if (global.threads > 0) config.threads = global.threads;
    const fracdens::RateStudyResult result = fracdens::run_rate_study(config);
    const auto dir = prepare_out_dir(global);
    fracdens::write_text_file((dir / "rate_study.csv").string(), fracdens::rate_study_csv(result));
    fracdens::write_text_file((dir / "rate_study.json").string(),
                              fracdens::rate_study_json(result).dump(2) + "\n");
    std::cout << "wrote " << (dir / "rate_study.csv").string() << " and .json ("
              << result.cases.size() << " cases";
    if (result.fit_ok)
        std::cout << ", slope=" << fracdens::format_double(result.oracle_fit.slope)
                  << " target=" << fracdens::format_double(result.target_slope);
    std::cout << ")\n";
    return 0;
}

int run_concentration(const GlobalOptions& global) {
    Json doc = load_config(global);
    fracdens::ConcStudyConfig config = fracdens::ConcStudyConfig::from_json(doc);
    if (global.seed >= 0) config.seed = static_cast<std::uint64_t>(global.seed);
    if (global.threads > 0) config.threads = global.threads;
    const fracdens::ConcStudyResult result = fracdens::run_concentration_study(config);
    const auto dir = prepare_out_dir(global);
    fracdens::write_text_file((dir / "concentration.csv").string(),
                              fracdens::conc_study_csv(result));
    fracdens::write_text_file((dir / "concentration.json").string(),
                              fracdens::conc_study_json(result).dump(2) + "\n");
    std::cout << "wrote " << (dir / "concentration.csv").string() << " and .json ("
              << result.cases.size() << " cases, agreement="
              << fracdens::format_double(result.agreement) << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stationary-density toolkit for additive fractional SDEs"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand name

    GlobalOptions global;
    app.add_option("--config", global.config_path, "JSON configuration file");
    app.add_option("--out-dir", global.out_dir, "directory for output files (default: .)");
    app.add_option("--seed", global.seed, "override the config seed (non-negative integer)");
    app.add_option("--threads", global.threads, "override the config thread count");

    FbmOptions fbm_opt;
    CLI::App* fbm = app.add_subcommand("fbm", "sample fractional Gaussian noise / fBm");
    fbm->add_option("--hurst", fbm_opt.hurst, "Hurst index in (0,1)")->required();
    fbm->add_option("--steps", fbm_opt.steps, "number of increments");
    fbm->add_option("--delta", fbm_opt.delta, "time step");
    fbm->add_option("--dim", fbm_opt.dim, "independent components");
    fbm->add_option("--method", fbm_opt.method, "auto|circulant|cholesky|white");
    fbm->add_flag("--cumulate", fbm_opt.cumulate, "emit the integrated fBm path");

    CLI::App* simulate = app.add_subcommand("simulate", "stationary observations of a model");
    CLI::App* select = app.add_subcommand("select", "Goldenshluger-Lepski bandwidth selection");
    CLI::App* risk = app.add_subcommand("risk-study", "Monte Carlo pointwise risk study");
    CLI::App* rates = app.add_subcommand("rates", "convergence-rate ladder study");
    CLI::App* conc = app.add_subcommand("concentration", "empirical concentration study");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    const auto started = std::chrono::steady_clock::now();
    int status = 1;
    try {
        if (fbm->parsed()) {
            if (global.seed >= 0) fbm_opt.seed = static_cast<std::uint64_t>(global.seed);
            status = run_fbm(fbm_opt, global);
        } else if (simulate->parsed()) {
            status = run_simulate(global);
        } else if (select->parsed()) {
            status = run_select(global);
        } else if (risk->parsed()) {
            status = run_risk(global);
        } else if (rates->parsed()) {
            status = run_rates(global);
        } else if (conc->parsed()) {
            status = run_concentration(global);
        }
    } catch (const fracdens::ConfigError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return 2;
    } catch (const fracdens::PreconditionError& err) {
        std::cerr << "precondition violated: " << err.what() << '\n';
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    std::cerr << "elapsed: " << elapsed.count() << " ms\n";
    return status;
}

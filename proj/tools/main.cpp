// circred command line: simulate | fit | forecast | report.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical non-convergence. Failures also land in <out>/errors.json.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "circred/data.hpp"
#include "circred/harness.hpp"
#include "circred/inference.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kFitArtifactVersion = 1;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)v);
    return buf;
}

struct CliConfig {
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string output_dir = "out";
    std::string note;

    std::string csv_path;
    std::string rate_units = "auto";
    double epsilon_floor = 1e-6;

    std::string sweep_parameter = "gbm_sigma";
    std::vector<double> sweep_values = {0.05, 0.10, 0.15};
    std::vector<double> horizons_years = circred::SweepSpec{}.horizons;
    int n_rho_draws = 2000;
    int rho_grid_points = 33;
    circred::SweepBaseline baseline;

    double eta = circred::FitConfig{}.eta;
    int multistart = circred::FitConfig{}.multistart;
    int max_iterations = circred::FitConfig{}.max_iterations;
    std::string diffusion = "von_mises";

    double horizon_years = 2.0;
    int forecast_n_rho_draws = 2000;
    double asset_mu_per_year = 0.05;
    double asset_sigma_per_sqrt_year = 0.10;
};

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ConfigError("unknown config key " + where + "." + key);
}

double get_number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number())
        throw ConfigError(std::string("config key ") + key + " must be a number");
    return obj[key].get<double>();
}

CliConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be an object");
    check_keys(root, {"seed", "output_dir", "note", "data", "simulate", "fit",
                      "forecast"},
               "");

    CliConfig c;
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned())
            throw ConfigError("seed must be a nonnegative integer");
        c.seed = root["seed"].get<std::uint64_t>();
        c.seed_set = true;
    }
    if (root.contains("output_dir")) c.output_dir = root["output_dir"];
    if (root.contains("note")) c.note = root["note"];

    if (root.contains("data")) {
        const json& d = root["data"];
        check_keys(d, {"csv_path", "rate_units", "epsilon_floor"}, "data");
        if (d.contains("csv_path")) c.csv_path = d["csv_path"];
        if (d.contains("rate_units")) c.rate_units = d["rate_units"];
        c.epsilon_floor = get_number(d, "epsilon_floor", c.epsilon_floor);
        if (c.rate_units != "auto" && c.rate_units != "percent" &&
            c.rate_units != "fraction")
            throw ConfigError("data.rate_units must be auto|percent|fraction");
    }

    if (root.contains("simulate")) {
        const json& s = root["simulate"];
        check_keys(s,
                   {"parameter", "values", "horizons_years", "n_rho_draws",
                    "rho_grid_points", "baseline"},
                   "simulate");
        if (s.contains("parameter")) c.sweep_parameter = s["parameter"];
        if (s.contains("values"))
            c.sweep_values = s["values"].get<std::vector<double>>();
        if (s.contains("horizons_years"))
            c.horizons_years = s["horizons_years"].get<std::vector<double>>();
        c.n_rho_draws = (int)get_number(s, "n_rho_draws", c.n_rho_draws);
        c.rho_grid_points =
            (int)get_number(s, "rho_grid_points", c.rho_grid_points);
        if (s.contains("baseline")) {
            const json& b = s["baseline"];
            check_keys(b,
                       {"mu_per_year", "sigma_per_sqrt_year", "s0", "barrier",
                        "von_lambda", "von_mu_radians", "von_sigma_theta",
                        "theta0_radians"},
                       "simulate.baseline");
            circred::SweepBaseline& bl = c.baseline;
            bl.assets.mu = get_number(b, "mu_per_year", bl.assets.mu);
            bl.assets.sigma =
                get_number(b, "sigma_per_sqrt_year", bl.assets.sigma);
            double s0 = get_number(b, "s0", bl.assets.s0[0]);
            double barrier = get_number(b, "barrier", bl.assets.barriers[0]);
            bl.assets.s0 = {s0, s0};
            bl.assets.barriers = {barrier, barrier};
            bl.model.lambda = get_number(b, "von_lambda", bl.model.lambda);
            bl.model.mu = get_number(b, "von_mu_radians", bl.model.mu);
            bl.model.sigma_theta =
                get_number(b, "von_sigma_theta", bl.model.sigma_theta);
            bl.theta0 = get_number(b, "theta0_radians", bl.theta0);
        }
    }

    if (root.contains("fit")) {
        const json& f = root["fit"];
        check_keys(f, {"eta", "multistart", "max_iterations", "diffusion"},
                   "fit");
        c.eta = get_number(f, "eta", c.eta);
        c.multistart = (int)get_number(f, "multistart", c.multistart);
        c.max_iterations =
            (int)get_number(f, "max_iterations", c.max_iterations);
        if (f.contains("diffusion")) c.diffusion = f["diffusion"];
        if (c.diffusion != "von_mises" && c.diffusion != "cbm")
            throw ConfigError("fit.diffusion must be von_mises|cbm");
    }

    if (root.contains("forecast")) {
        const json& f = root["forecast"];
        check_keys(f,
                   {"horizon_years", "n_rho_draws", "asset_mu_per_year",
                    "asset_sigma_per_sqrt_year"},
                   "forecast");
        c.horizon_years = get_number(f, "horizon_years", c.horizon_years);
        c.forecast_n_rho_draws =
            (int)get_number(f, "n_rho_draws", c.forecast_n_rho_draws);
        c.asset_mu_per_year =
            get_number(f, "asset_mu_per_year", c.asset_mu_per_year);
        c.asset_sigma_per_sqrt_year = get_number(f, "asset_sigma_per_sqrt_year",
                                                 c.asset_sigma_per_sqrt_year);
    }
    return c;
}

// Canonical serialization of the semantic configuration; feeds the
// provenance hash. Excludes output_dir so the same run written to a
// different location hashes identically.
json config_to_json(const CliConfig& c) {
    json root;
    root["seed"] = c.seed;
    if (!c.note.empty()) root["note"] = c.note;
    root["data"] = {{"csv_path", c.csv_path},
                    {"rate_units", c.rate_units},
                    {"epsilon_floor", c.epsilon_floor}};
    root["simulate"] = {
        {"parameter", c.sweep_parameter},
        {"values", c.sweep_values},
        {"horizons_years", c.horizons_years},
        {"n_rho_draws", c.n_rho_draws},
        {"rho_grid_points", c.rho_grid_points},
        {"baseline",
         {{"mu_per_year", c.baseline.assets.mu},
          {"sigma_per_sqrt_year", c.baseline.assets.sigma},
          {"s0", c.baseline.assets.s0[0]},
          {"barrier", c.baseline.assets.barriers[0]},
          {"von_lambda", c.baseline.model.lambda},
          {"von_mu_radians", c.baseline.model.mu},
          {"von_sigma_theta", c.baseline.model.sigma_theta},
          {"theta0_radians", c.baseline.theta0}}}};
    root["fit"] = {{"eta", c.eta},
                   {"multistart", c.multistart},
                   {"max_iterations", c.max_iterations},
                   {"diffusion", c.diffusion}};
    root["forecast"] = {
        {"horizon_years", c.horizon_years},
        {"n_rho_draws", c.forecast_n_rho_draws},
        {"asset_mu_per_year", c.asset_mu_per_year},
        {"asset_sigma_per_sqrt_year", c.asset_sigma_per_sqrt_year}};
    return root;
}

std::string config_hash(const CliConfig& c) {
    return hex64(fnv1a64(config_to_json(c).dump()));
}

std::string slugify(const std::string& s) {
    std::string out;
    for (unsigned char ch : s)
        out += std::isalnum(ch) ? (char)std::tolower(ch) : '_';
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw DataError("write failed for " + path.string());
}

void append_provenance(const fs::path& path, const std::string& hash,
                       std::uint64_t seed) {
    std::ofstream out(path, std::ios::app);
    out << "# config_hash=" << hash << " seed=" << seed << "\n";
}

circred::FitConfig make_fit_config(const CliConfig& c) {
    circred::FitConfig fc;
    fc.eta = c.eta;
    fc.multistart = c.multistart;
    fc.max_iterations = c.max_iterations;
    fc.diffusion_kind = c.diffusion == "cbm" ? circred::DiffusionKind::CBM
                                             : circred::DiffusionKind::VonMises;
    return fc;
}

std::vector<circred::ChargeOffSeries> load_data(const CliConfig& c,
                                                bool force_percent) {
    if (c.csv_path.empty())
        throw ConfigError("data.csv_path is required for this command");
    circred::IngestOptions opts;
    opts.epsilon_floor = c.epsilon_floor;
    if (force_percent || c.rate_units == "percent")
        opts.units = circred::RateUnits::Percent;
    else if (c.rate_units == "fraction")
        opts.units = circred::RateUnits::Fraction;
    try {
        return circred::ingest_csv(c.csv_path, opts);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

int cmd_simulate(const CliConfig& c) {
    circred::SweepSpec spec;
    try {
        spec.parameter = circred::sweep_parameter_from_string(c.sweep_parameter);
        spec.values = c.sweep_values;
        spec.horizons = c.horizons_years;
        spec.n_rho_draws = c.n_rho_draws;
        spec.rho_grid_points = c.rho_grid_points;
        spec.baseline = c.baseline;
        spec.seed = c.seed;
        spec.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    const auto rows = circred::run_sweep(spec);
    int failures = 0;
    for (const auto& r : rows) failures += r.ok ? 0 : 1;

    const std::string hash = config_hash(c);
    const fs::path dir(c.output_dir);
    fs::create_directories(dir);
    const fs::path csv = dir / ("sweep_" + c.sweep_parameter + ".csv");
    circred::emit_report_csv(rows, csv.string());
    append_provenance(csv, hash, c.seed);
    const fs::path js = dir / ("sweep_" + c.sweep_parameter + ".json");
    circred::emit_report_json(rows, js.string());
    {
        std::ifstream in(js);
        json arr = json::parse(in);
        json wrapped = {{"config_hash", hash},
                        {"seed", c.seed},
                        {"rows", std::move(arr)}};
        write_text(js, wrapped.dump(2) + "\n");
    }
    if (failures > 0) {
        json detail = json::array();
        for (const auto& r : rows)
            if (!r.ok)
                detail.push_back({{"param_value", r.param_value},
                                  {"horizon_years", r.horizon_years},
                                  {"error", r.error}});
        write_text(dir / "errors.json",
                   json{{"command", "simulate"}, {"items", detail}}.dump(2) +
                       "\n");
        throw NumericalError(std::to_string(failures) +
                             " sweep cell(s) failed; see errors.json");
    }
    std::cout << "wrote " << csv.string() << " and " << js.string() << "\n";
    return 0;
}

int cmd_fit(const CliConfig& c, bool force_percent) {
    const auto data = load_data(c, force_percent);
    const circred::FitConfig fc = make_fit_config(c);
    const std::string hash = config_hash(c);
    const fs::path dir(c.output_dir);
    fs::create_directories(dir);

    json failures = json::array();
    for (const auto& series : data) {
        circred::VasicekObs obs =
            circred::VasicekObs::from_rates(series.rates, c.epsilon_floor);
        circred::DependenceFit fit;
        try {
            fit = circred::fit_dependence_path(obs, fc);
        } catch (const std::exception& e) {
            failures.push_back(
                {{"category", series.category}, {"error", e.what()}});
            continue;
        }
        json artifact = {
            {"version", kFitArtifactVersion},
            {"config_hash", hash},
            {"seed", c.seed},
            {"category", series.category},
            {"p_bar", obs.p_bar},
            {"n_obs", obs.rates.size()},
            {"floored_count", series.floored_count},
            {"percent_detected", series.percent_detected},
            {"diffusion", fit.diffusion_kind == circred::DiffusionKind::CBM
                              ? "cbm"
                              : "von_mises"},
            {"rho_path", fit.rho_path},
            {"psi",
             {{"lambda", fit.psi.lambda},
              {"sigma", fit.psi.sigma},
              {"mu", fit.psi.mu}}},
            {"kappa", fit.kappa},
            {"objective_value", fit.objective_value},
            {"converged", fit.converged},
            {"at_bound_fraction", fit.at_bound_fraction},
        };
        const fs::path out = dir / ("fit_" + slugify(series.category) + ".json");
        write_text(out, artifact.dump(2) + "\n");
        std::cout << "wrote " << out.string() << "\n";
    }
    if (!failures.empty()) {
        write_text(dir / "errors.json",
                   json{{"command", "fit"}, {"items", failures}}.dump(2) + "\n");
        throw NumericalError(std::to_string(failures.size()) +
                             " category fit(s) failed; see errors.json");
    }
    return 0;
}

std::vector<json> load_fit_artifacts(const CliConfig& c) {
    std::vector<fs::path> paths;
    const fs::path dir(c.output_dir);
    if (!fs::is_directory(dir))
        throw DataError("output directory not found: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("fit_", 0) == 0 && entry.path().extension() == ".json")
            paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty())
        throw DataError("no fit artifacts (fit_*.json) in " + dir.string());
    std::vector<json> artifacts;
    for (const auto& p : paths) {
        std::ifstream in(p);
        json a;
        try {
            a = json::parse(in);
        } catch (const json::parse_error& e) {
            throw DataError("bad fit artifact " + p.string() + ": " + e.what());
        }
        if (!a.contains("version") || a["version"].get<int>() != kFitArtifactVersion)
            throw DataError("unsupported fit artifact version in " + p.string());
        artifacts.push_back(std::move(a));
    }
    return artifacts;
}

circred::DependenceFit fit_from_artifact(const json& a) {
    circred::DependenceFit fit;
    fit.rho_path = a["rho_path"].get<std::vector<double>>();
    fit.psi = {a["psi"]["lambda"].get<double>(),
               a["psi"]["sigma"].get<double>(), a["psi"]["mu"].get<double>()};
    fit.kappa = a["kappa"].get<double>();
    fit.objective_value = a["objective_value"].get<double>();
    fit.converged = a["converged"].get<bool>();
    fit.at_bound_fraction = a["at_bound_fraction"].get<double>();
    fit.diffusion_kind = a["diffusion"] == "cbm" ? circred::DiffusionKind::CBM
                                                 : circred::DiffusionKind::VonMises;
    return fit;
}

int cmd_report(const CliConfig& c) {
    const auto artifacts = load_fit_artifacts(c);
    const circred::FitConfig fc = make_fit_config(c);
    std::string csv = "category,rho_mean,rho_q95,rho_max,frac_at_lower_bound,kappa\n";
    json rows = json::array();
    for (const json& a : artifacts) {
        const circred::DependenceFit fit = fit_from_artifact(a);
        const circred::PathSummary s = circred::summarize_path(fit, fc);
        char line[256];
        std::snprintf(line, sizeof(line), "%s,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                      a["category"].get<std::string>().c_str(), s.mean, s.q95,
                      s.max, s.at_bound_fraction, s.kappa);
        csv += line;
        rows.push_back({{"category", a["category"]},
                        {"rho_mean", s.mean},
                        {"rho_q95", s.q95},
                        {"rho_max", s.max},
                        {"frac_at_lower_bound", s.at_bound_fraction},
                        {"kappa", s.kappa},
                        {"converged", fit.converged}});
    }
    const std::string hash = config_hash(c);
    const fs::path dir(c.output_dir);
    const fs::path csv_path = dir / "report.csv";
    write_text(csv_path, csv);
    append_provenance(csv_path, hash, c.seed);
    write_text(dir / "report.json",
               json{{"config_hash", hash}, {"seed", c.seed}, {"rows", rows}}
                       .dump(2) +
                   "\n");
    std::cout << "wrote " << csv_path.string() << "\n";
    return 0;
}

int cmd_forecast(const CliConfig& c) {
    const auto artifacts = load_fit_artifacts(c);
    std::string csv = "category,dd,p_jd,p_surv,p_fpt,kappa\n";
    json rows = json::array();
    json failures = json::array();
    for (const json& a : artifacts) {
        const circred::DependenceFit fit = fit_from_artifact(a);
        const double p_bar = a["p_bar"].get<double>();
        try {
            const circred::DDCalibration calib =
                circred::calibrate_distance_to_default(
                    p_bar, c.asset_sigma_per_sqrt_year, c.asset_mu_per_year,
                    c.horizon_years);
            const circred::ForecastResult r = circred::terminal_mixture_forecast(
                fit, calib, c.horizon_years, c.forecast_n_rho_draws, c.seed);
            char line[256];
            std::snprintf(line, sizeof(line), "%s,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                          a["category"].get<std::string>().c_str(), calib.dd,
                          r.p_jd, r.p_surv, r.p_fpt, fit.kappa);
            csv += line;
            rows.push_back({{"category", a["category"]},
                            {"dd", calib.dd},
                            {"p_jd", r.p_jd},
                            {"p_jd_se", r.p_jd_se},
                            {"p_surv", r.p_surv},
                            {"p_surv_se", r.p_surv_se},
                            {"p_fpt", r.p_fpt},
                            {"p_fpt_se", r.p_fpt_se},
                            {"kappa", fit.kappa},
                            {"n_draws", r.n_draws}});
        } catch (const std::exception& e) {
            failures.push_back(
                {{"category", a["category"]}, {"error", e.what()}});
        }
    }
    const std::string hash = config_hash(c);
    const fs::path dir(c.output_dir);
    if (!failures.empty()) {
        write_text(dir / "errors.json",
                   json{{"command", "forecast"}, {"items", failures}}.dump(2) +
                       "\n");
        throw NumericalError(std::to_string(failures.size()) +
                             " category forecast(s) failed; see errors.json");
    }
    const fs::path csv_path = dir / "forecast.csv";
    write_text(csv_path, csv);
    append_provenance(csv_path, hash, c.seed);
    write_text(dir / "forecast.json",
               json{{"config_hash", hash}, {"seed", c.seed}, {"rows", rows}}
                       .dump(2) +
                   "\n");
    std::cout << "wrote " << csv_path.string() << "\n";
    return 0;
}

void write_top_level_error(const std::string& out_dir,
                           const std::string& command, const std::string& kind,
                           const std::string& message) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) return;
    std::ofstream out(fs::path(out_dir) / "errors.json");
    if (out)
        out << json{{"command", command},
                    {"kind", kind},
                    {"items", json::array({{{"error", message}}})}}
                   .dump(2)
            << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic-correlation structural credit model"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool have_seed_override = false;
    bool percent = false;

    app.add_option("--config", config_path, "path to the run configuration")
        ->required();
    app.add_option("--out", out_override, "output directory override");
    auto* seed_opt = app.add_option("--seed", seed_override, "seed override");

    auto* sim = app.add_subcommand("simulate", "run a parameter sweep");
    auto* fit = app.add_subcommand("fit", "fit dependence paths per category");
    fit->add_flag("--percent", percent, "treat input rates as percent");
    auto* fore = app.add_subcommand("forecast", "tail-event forecasts per category");
    auto* rep = app.add_subcommand("report", "dependence-path summaries");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    have_seed_override = seed_opt->count() > 0;

    const std::string command = sim->parsed()     ? "simulate"
                                : fit->parsed()   ? "fit"
                                : fore->parsed()  ? "forecast"
                                                  : "report";
    std::string out_dir = "out";
    try {
        CliConfig config = parse_config(config_path);
        if (!out_override.empty()) config.output_dir = out_override;
        if (have_seed_override) {
            config.seed = seed_override;
            config.seed_set = true;
        }
        out_dir = config.output_dir;
        if (!config.seed_set && command != "report")
            throw ConfigError(
                "an explicit seed is required (config key `seed` or --seed)");
        fs::create_directories(config.output_dir);
        if (sim->parsed()) return cmd_simulate(config);
        if (fit->parsed()) return cmd_fit(config, percent);
        if (fore->parsed()) return cmd_forecast(config);
        return cmd_report(config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        write_top_level_error(out_dir, command, "config", e.what());
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        write_top_level_error(out_dir, command, "data", e.what());
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        write_top_level_error(out_dir, command, "numerical", e.what());
        return 4;
    }
}

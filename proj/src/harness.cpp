#include "circred/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "circred/passage.hpp"

namespace circred {

namespace {

constexpr const char* kCsvHeader =
    "sweep_param,param_value,horizon_years,p_jd,p_jd_se,p_surv,p_surv_se,"
    "p_fpt,p_fpt_se,n_draws,seed";

// Shortest representation that parses back to the identical double, so the
// CSV round trip is exact.
std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double var = n > 1 ? ss / (n - 1) : 0.0;
    return {mean, std::sqrt(var / n)};
}

// Linear-interpolation cache of a rho-dependent quantity over the draw
// range. Keeps the passage integrals out of the per-draw loop.
class RhoCache {
public:
    template <typename F>
    RhoCache(double lo, double hi, int points, F&& eval)
        : lo_(lo), hi_(hi) {
        if (!(hi_ > lo_)) {
            values_ = {eval(lo_)};
            return;
        }
        values_.resize(points);
        for (int i = 0; i < points; ++i)
            values_[i] = eval(lo_ + (hi_ - lo_) * i / (points - 1));
    }

    double operator()(double rho) const {
        if (values_.size() == 1) return values_[0];
        const double u = std::clamp((rho - lo_) / (hi_ - lo_), 0.0, 1.0) *
                         (static_cast<double>(values_.size()) - 1.0);
        const int i = std::min(static_cast<int>(u),
                               static_cast<int>(values_.size()) - 2);
        const double f = u - i;
        return values_[i] * (1.0 - f) + values_[i + 1] * f;
    }

private:
    double lo_, hi_;
    std::vector<double> values_;
};

SweepRow compute_cell(const SweepSpec& spec, double value, double horizon,
                      const AssetParams& assets,
                      const CorrelationModel& model) {
    assets.validate();
    model.validate();
    SweepRow row;
    row.parameter = spec.parameter;
    row.param_value = value;
    row.horizon_years = horizon;
    row.n_draws = spec.n_rho_draws;
    row.seed = spec.seed;

    std::vector<double> draws = sample_terminal_correlation(
        model, spec.baseline.theta0, horizon, spec.n_rho_draws, spec.seed);
    // The wedge geometry degenerates at |rho| = 1.
    for (double& d : draws) d = std::clamp(d, -0.99, 0.99);
    const auto [lo_it, hi_it] = std::minmax_element(draws.begin(), draws.end());
    const double lo = *lo_it, hi = *hi_it;

    std::vector<double> jd(draws.size()), surv(draws.size()), fpt(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i)
        jd[i] = conditional_joint_cdf(assets.barriers[0], assets.barriers[1],
                                      draws[i], assets, horizon);

    RhoCache surv_cache(lo, hi, spec.rho_grid_points, [&](double rho) {
        return conditional_survival_probability(horizon, rho, assets);
    });
    const TimeGrid2D grid = TimeGrid2D::uniform(horizon, horizon);
    RhoCache fpt_cache(lo, hi, spec.rho_grid_points, [&](double rho) {
        return conditional_fpt_probability(horizon, horizon, rho, assets, grid,
                                           {}, {}, false)
            .value;
    });
    for (std::size_t i = 0; i < draws.size(); ++i) {
        surv[i] = surv_cache(draws[i]);
        fpt[i] = fpt_cache(draws[i]);
    }

    const MeanSe mjd = mean_se(jd), msurv = mean_se(surv), mfpt = mean_se(fpt);
    row.p_jd = mjd.mean;
    row.p_jd_se = mjd.se;
    row.p_surv = msurv.mean;
    row.p_surv_se = msurv.se;
    row.p_fpt = mfpt.mean;
    row.p_fpt_se = mfpt.se;
    return row;
}

} // namespace

std::string to_string(SweepParameter p) {
    switch (p) {
    case SweepParameter::GbmSigma: return "gbm_sigma";
    case SweepParameter::VonSigma: return "von_sigma";
    case SweepParameter::VonLambda: return "von_lambda";
    }
    throw std::logic_error("unknown SweepParameter");
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
    if (s == "gbm_sigma") return SweepParameter::GbmSigma;
    if (s == "von_sigma") return SweepParameter::VonSigma;
    if (s == "von_lambda") return SweepParameter::VonLambda;
    throw std::invalid_argument("unknown sweep parameter: " + s);
}

void SweepSpec::validate() const {
    if (values.empty())
        throw std::invalid_argument("SweepSpec: values must be nonempty");
    if (horizons.empty())
        throw std::invalid_argument("SweepSpec: horizons must be nonempty");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (!(horizons[i] > 0))
            throw std::invalid_argument("SweepSpec: horizons must be positive");
        if (i > 0 && !(horizons[i] > horizons[i - 1]))
            throw std::invalid_argument("SweepSpec: horizons must be increasing");
    }
    if (n_rho_draws < 2)
        throw std::invalid_argument("SweepSpec: n_rho_draws >= 2 required");
    if (rho_grid_points < 2)
        throw std::invalid_argument("SweepSpec: rho_grid_points >= 2 required");
    baseline.assets.validate();
    baseline.model.validate();
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    spec.validate();
    std::vector<SweepRow> rows;
    rows.reserve(spec.values.size() * spec.horizons.size());
    for (double value : spec.values) {
        AssetParams assets = spec.baseline.assets;
        CorrelationModel model = spec.baseline.model;
        switch (spec.parameter) {
        case SweepParameter::GbmSigma: assets.sigma = value; break;
        case SweepParameter::VonSigma: model.sigma_theta = value; break;
        case SweepParameter::VonLambda: model.lambda = value; break;
        }
        for (double horizon : spec.horizons) {
            try {
                rows.push_back(
                    compute_cell(spec, value, horizon, assets, model));
            } catch (const std::exception& e) {
                SweepRow row;
                row.parameter = spec.parameter;
                row.param_value = value;
                row.horizon_years = horizon;
                row.n_draws = spec.n_rho_draws;
                row.seed = spec.seed;
                row.ok = false;
                row.error = e.what();
                const double nan = std::numeric_limits<double>::quiet_NaN();
                row.p_jd = row.p_jd_se = row.p_surv = row.p_surv_se =
                    row.p_fpt = row.p_fpt_se = nan;
                rows.push_back(row);
            }
        }
    }
    return rows;
}

void emit_report_csv(const std::vector<SweepRow>& rows,
                     const std::string& path) {
    if (rows.empty())
        throw std::invalid_argument("emit_report_csv: empty table");
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("emit_report_csv: cannot open " + path);
    out << kCsvHeader << "\n";
    for (const SweepRow& r : rows) {
        out << to_string(r.parameter) << ',' << format_double(r.param_value)
            << ',' << format_double(r.horizon_years) << ','
            << format_double(r.p_jd) << ',' << format_double(r.p_jd_se) << ','
            << format_double(r.p_surv) << ',' << format_double(r.p_surv_se)
            << ',' << format_double(r.p_fpt) << ',' << format_double(r.p_fpt_se)
            << ',' << r.n_draws << ',' << r.seed << "\n";
    }
    if (!out)
        throw std::runtime_error("emit_report_csv: write failed for " + path);
}

std::vector<SweepRow> parse_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("parse_report_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("parse_report_csv: bad header in " + path);
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 11)
            throw std::runtime_error("parse_report_csv: bad row in " + path);
        SweepRow r;
        r.parameter = sweep_parameter_from_string(fields[0]);
        r.param_value = std::stod(fields[1]);
        r.horizon_years = std::stod(fields[2]);
        r.p_jd = std::stod(fields[3]);
        r.p_jd_se = std::stod(fields[4]);
        r.p_surv = std::stod(fields[5]);
        r.p_surv_se = std::stod(fields[6]);
        r.p_fpt = std::stod(fields[7]);
        r.p_fpt_se = std::stod(fields[8]);
        r.n_draws = std::stoi(fields[9]);
        r.seed = std::stoull(fields[10]);
        r.ok = !std::isnan(r.p_jd);
        rows.push_back(r);
    }
    return rows;
}

void emit_report_json(const std::vector<SweepRow>& rows,
                      const std::string& path) {
    if (rows.empty())
        throw std::invalid_argument("emit_report_json: empty table");
    nlohmann::json arr = nlohmann::json::array();
    for (const SweepRow& r : rows) {
        nlohmann::json obj = {
            {"sweep_param", to_string(r.parameter)},
            {"param_value", r.param_value},
            {"horizon_years", r.horizon_years},
            {"n_draws", r.n_draws},
            {"seed", r.seed},
            {"ok", r.ok},
        };
        if (r.ok) {
            obj["p_jd"] = r.p_jd;
            obj["p_jd_se"] = r.p_jd_se;
            obj["p_surv"] = r.p_surv;
            obj["p_surv_se"] = r.p_surv_se;
            obj["p_fpt"] = r.p_fpt;
            obj["p_fpt_se"] = r.p_fpt_se;
        } else {
            obj["error"] = r.error;
        }
        arr.push_back(obj);
    }
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("emit_report_json: cannot open " + path);
    out << arr.dump(2) << "\n";
    if (!out)
        throw std::runtime_error("emit_report_json: write failed for " + path);
}

} // namespace circred

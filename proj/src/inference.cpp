#include "circred/inference.hpp"
#include "circred/joint_distribution.hpp"
#include "circred/passage.hpp"
#include "circred/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace circred {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;

double midpoint(const Interval& iv) { return 0.5 * (iv.lo + iv.hi); }

CorrelationModel make_model(const PsiParams& psi, DiffusionKind kind) {
    CorrelationModel m;
    m.kind = kind;
    m.sigma_theta = psi.sigma;
    m.lambda = kind == DiffusionKind::VonMises ? psi.lambda : 0.0;
    m.mu = psi.mu;
    m.mapping = AngleMapping::CosineSquared;
    return m;
}

// Transition evaluator for a fixed psi; the von Mises propagator is built
// once and reused across the whole path.
class TransitionEval {
public:
    TransitionEval(const PsiParams& psi, const FitConfig& cfg)
        : kind_(cfg.diffusion_kind), dt_(cfg.dt_obs),
          model_(make_model(psi, cfg.diffusion_kind)) {
        if (kind_ == DiffusionKind::VonMises)
            solver_ = std::make_unique<VonMisesTransition>(model_,
                                                           cfg.transition_modes);
    }

    double log_density(double phi, double phi_prev) const {
        double p;
        if (kind_ == DiffusionKind::VonMises)
            p = solver_->density(phi, phi_prev, dt_);
        else
            p = wrapped_normal_density(phi, phi_prev,
                                       model_.sigma_theta * model_.sigma_theta * dt_);
        return std::log(std::max(p, 1e-300));
    }

private:
    DiffusionKind kind_;
    double dt_;
    CorrelationModel model_;
    std::unique_ptr<VonMisesTransition> solver_;
};

double angle_of(double rho) { return std::acos(std::sqrt(rho)); }

double log_jacobian(double rho) {
    return std::log(0.5) - 0.5 * std::log(rho * (1.0 - rho));
}

double psi_regularizer(const PsiParams& psi, const FitConfig& cfg) {
    const double ds = std::log(psi.sigma) - std::log(midpoint(cfg.bounds_sigma));
    double v = ds * ds;
    if (cfg.diffusion_kind == DiffusionKind::VonMises) {
        const double dl =
            std::log(psi.lambda) - std::log(midpoint(cfg.bounds_lambda));
        v += dl * dl;
    }
    return cfg.regularizer_weight * v;
}

void check_bounds(const std::vector<double>& rho_path, const PsiParams& psi,
                  const FitConfig& cfg) {
    for (double r : rho_path)
        if (!(r >= cfg.bounds_rho.lo && r <= cfg.bounds_rho.hi))
            throw std::domain_error("penalized_objective: rho outside bounds");
    if (!(psi.sigma >= cfg.bounds_sigma.lo && psi.sigma <= cfg.bounds_sigma.hi))
        throw std::domain_error("penalized_objective: sigma outside bounds");
    if (cfg.diffusion_kind == DiffusionKind::VonMises) {
        if (!(psi.lambda >= cfg.bounds_lambda.lo &&
              psi.lambda <= cfg.bounds_lambda.hi))
            throw std::domain_error("penalized_objective: lambda outside bounds");
        if (!(psi.mu >= cfg.bounds_mu.lo && psi.mu <= cfg.bounds_mu.hi))
            throw std::domain_error("penalized_objective: mu outside bounds");
    }
}

double objective_impl(const std::vector<double>& rho, const PsiParams& psi,
                      const VasicekObs& obs, const FitConfig& cfg,
                      const TransitionEval& trans) {
    const std::size_t T = rho.size();
    double v = -psi_regularizer(psi, cfg);
    double phi_prev = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        const double phi = angle_of(rho[t]);
        v += vasicek_loglik(obs.rates[t], obs.p_bar, rho[t]) + log_jacobian(rho[t]);
        if (t > 0) {
            v += trans.log_density(phi, phi_prev);
            const double d = rho[t] - rho[t - 1];
            v -= cfg.eta * d * d;
        }
        phi_prev = phi;
    }
    return v;
}

// Terms of the objective touched by a single rho_t: used for the structured
// finite-difference gradient so one component costs O(1) evaluations.
double local_terms(const std::vector<double>& rho, std::size_t t, double value,
                   const VasicekObs& obs, const FitConfig& cfg,
                   const TransitionEval& trans) {
    double v = vasicek_loglik(obs.rates[t], obs.p_bar, value) + log_jacobian(value);
    const double phi = angle_of(value);
    if (t > 0) {
        v += trans.log_density(phi, angle_of(rho[t - 1]));
        const double d = value - rho[t - 1];
        v -= cfg.eta * d * d;
    }
    if (t + 1 < rho.size()) {
        v += trans.log_density(angle_of(rho[t + 1]), phi);
        const double d = rho[t + 1] - value;
        v -= cfg.eta * d * d;
    }
    return v;
}

struct Bounds {
    std::vector<double> lo, hi;
};

Bounds parameter_bounds(std::size_t T, const FitConfig& cfg) {
    Bounds b;
    b.lo.assign(T, cfg.bounds_rho.lo);
    b.hi.assign(T, cfg.bounds_rho.hi);
    if (cfg.diffusion_kind == DiffusionKind::VonMises) {
        b.lo.push_back(cfg.bounds_lambda.lo);
        b.hi.push_back(cfg.bounds_lambda.hi);
        b.lo.push_back(cfg.bounds_sigma.lo);
        b.hi.push_back(cfg.bounds_sigma.hi);
        b.lo.push_back(cfg.bounds_mu.lo);
        b.hi.push_back(cfg.bounds_mu.hi);
    } else {
        b.lo.push_back(cfg.bounds_sigma.lo);
        b.hi.push_back(cfg.bounds_sigma.hi);
    }
    return b;
}

PsiParams unpack_psi(const std::vector<double>& x, std::size_t T,
                     const FitConfig& cfg) {
    PsiParams psi;
    if (cfg.diffusion_kind == DiffusionKind::VonMises) {
        psi.lambda = x[T];
        psi.sigma = x[T + 1];
        psi.mu = x[T + 2];
    } else {
        psi.sigma = x[T];
    }
    return psi;
}

class PackedObjective {
public:
    PackedObjective(const VasicekObs& obs, const FitConfig& cfg, std::size_t T)
        : obs_(obs), cfg_(cfg), T_(T) {}

    double operator()(const std::vector<double>& x) {
        const PsiParams psi = unpack_psi(x, T_, cfg_);
        refresh(psi);
        std::vector<double> rho(x.begin(), x.begin() + T_);
        return objective_impl(rho, psi, obs_, cfg_, *trans_);
    }

    // Central-difference gradient with O(1) work per path component.
    std::vector<double> gradient(const std::vector<double>& x, const Bounds& b) {
        const PsiParams psi = unpack_psi(x, T_, cfg_);
        refresh(psi);
        std::vector<double> rho(x.begin(), x.begin() + T_);
        std::vector<double> g(x.size(), 0.0);
        for (std::size_t t = 0; t < T_; ++t) {
            const double h = 1e-6;
            const double up = std::min(rho[t] + h, b.hi[t]);
            const double dn = std::max(rho[t] - h, b.lo[t]);
            g[t] = (local_terms(rho, t, up, obs_, cfg_, *trans_) -
                    local_terms(rho, t, dn, obs_, cfg_, *trans_)) /
                   (up - dn);
        }
        for (std::size_t k = T_; k < x.size(); ++k) {
            const double h = 1e-5 * std::max(1.0, std::abs(x[k]));
            std::vector<double> xp = x, xm = x;
            xp[k] = std::min(x[k] + h, b.hi[k]);
            xm[k] = std::max(x[k] - h, b.lo[k]);
            const PsiParams pp = unpack_psi(xp, T_, cfg_);
            const PsiParams pm = unpack_psi(xm, T_, cfg_);
            TransitionEval tp(pp, cfg_), tm(pm, cfg_);
            g[k] = (objective_impl(rho, pp, obs_, cfg_, tp) -
                    objective_impl(rho, pm, obs_, cfg_, tm)) /
                   (xp[k] - xm[k]);
        }
        return g;
    }

private:
    void refresh(const PsiParams& psi) {
        if (!trans_ || psi.lambda != cached_.lambda ||
            psi.sigma != cached_.sigma || psi.mu != cached_.mu) {
            trans_ = std::make_unique<TransitionEval>(psi, cfg_);
            cached_ = psi;
        }
    }

    const VasicekObs& obs_;
    const FitConfig& cfg_;
    std::size_t T_;
    PsiParams cached_{-1.0, -1.0, -1.0};
    std::unique_ptr<TransitionEval> trans_;
};

std::vector<double> project(std::vector<double> x, const Bounds& b) {
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::clamp(x[i], b.lo[i], b.hi[i]);
    return x;
}

struct AscentResult {
    std::vector<double> x;
    double value = 0.0;
    bool converged = false;
};

// Monotone projected gradient ascent with a spectral (Barzilai-Borwein)
// step and backtracking.
AscentResult projected_ascent(PackedObjective& obj, std::vector<double> x,
                              const Bounds& b, const FitConfig& cfg) {
    x = project(std::move(x), b);
    double f = obj(x);
    std::vector<double> g = obj.gradient(x, b);
    double step = 1e-2;
    std::vector<double> x_prev, g_prev;
    bool converged = false;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        // Convergence on the projected gradient.
        double pg = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double moved = std::clamp(x[i] + g[i], b.lo[i], b.hi[i]) - x[i];
            pg = std::max(pg, std::abs(moved));
        }
        if (pg < cfg.optimizer_tol * (1.0 + std::abs(f))) {
            converged = true;
            break;
        }
        if (!x_prev.empty()) {
            double ss = 0.0, sy = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double s = x[i] - x_prev[i];
                const double y = g[i] - g_prev[i];
                ss += s * s;
                sy += s * y;
            }
            if (sy < 0.0) step = std::clamp(ss / -sy, 1e-8, 1e4);
        }
        bool accepted = false;
        double a = step;
        for (int ls = 0; ls < 40; ++ls) {
            std::vector<double> cand(x.size());
            for (std::size_t i = 0; i < x.size(); ++i)
                cand[i] = std::clamp(x[i] + a * g[i], b.lo[i], b.hi[i]);
            const double fc = obj(cand);
            if (fc > f) {
                x_prev = x;
                g_prev = g;
                x = std::move(cand);
                f = fc;
                g = obj.gradient(x, b);
                accepted = true;
                break;
            }
            a *= 0.5;
        }
        if (!accepted) {
            converged = pg < 1e2 * cfg.optimizer_tol * (1.0 + std::abs(f));
            break;
        }
    }
    return {std::move(x), f, converged};
}

// Single-observation and pooled constant-rho likelihood maximizers used to
// seed the multistart.
double flat_rho_mle(const VasicekObs& obs, const Interval& bounds) {
    auto nll = [&](double r) {
        double v = 0.0;
        for (double c : obs.rates) v += vasicek_loglik(c, obs.p_bar, r);
        return v;
    };
    const double invphi = 0.6180339887498948482;
    double lo = bounds.lo, hi = bounds.hi;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = nll(x1), f2 = nll(x2);
    for (int i = 0; i < 80 && hi - lo > 1e-10; ++i) {
        if (f1 < f2) {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + invphi * (hi - lo); f2 = nll(x2);
        } else {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - invphi * (hi - lo); f1 = nll(x1);
        }
    }
    return 0.5 * (lo + hi);
}

double per_obs_rho_q90(const VasicekObs& obs, const Interval& bounds) {
    std::vector<double> mles;
    mles.reserve(obs.rates.size());
    for (double c : obs.rates) {
        const double invphi = 0.6180339887498948482;
        double lo = bounds.lo, hi = bounds.hi;
        auto f = [&](double r) { return vasicek_loglik(c, obs.p_bar, r); };
        double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
        double f1 = f(x1), f2 = f(x2);
        for (int i = 0; i < 60 && hi - lo > 1e-8; ++i) {
            if (f1 < f2) {
                lo = x1; x1 = x2; f1 = f2;
                x2 = lo + invphi * (hi - lo); f2 = f(x2);
            } else {
                hi = x2; x2 = x1; f2 = f1;
                x1 = hi - invphi * (hi - lo); f1 = f(x1);
            }
        }
        mles.push_back(0.5 * (lo + hi));
    }
    std::sort(mles.begin(), mles.end());
    const double pos = 0.9 * (mles.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double w = pos - i;
    return i + 1 < mles.size() ? (1.0 - w) * mles[i] + w * mles[i + 1] : mles[i];
}

double quantile_interp(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double w = pos - i;
    return i + 1 < v.size() ? (1.0 - w) * v[i] + w * v[i + 1] : v[i];
}

// Piecewise-linear interpolation over a cached rho grid; keeps expensive
// conditional probabilities out of the per-draw loop.
class RhoGridCache {
public:
    RhoGridCache(const std::function<double(double)>& f, double lo, double hi,
                 int n = 33) {
        if (hi - lo < 1e-10) {
            grid_ = {lo};
            vals_ = {f(lo)};
            return;
        }
        grid_.resize(n);
        vals_.resize(n);
        for (int i = 0; i < n; ++i) {
            grid_[i] = lo + (hi - lo) * i / (n - 1);
            vals_[i] = f(grid_[i]);
        }
    }

    double operator()(double rho) const {
        if (grid_.size() == 1) return vals_[0];
        const auto it = std::upper_bound(grid_.begin(), grid_.end(), rho);
        std::size_t j = std::clamp<std::size_t>(it - grid_.begin(), 1,
                                                grid_.size() - 1);
        const double w = (rho - grid_[j - 1]) / (grid_[j] - grid_[j - 1]);
        return (1.0 - w) * vals_[j - 1] + w * vals_[j];
    }

private:
    std::vector<double> grid_, vals_;
};

struct MeanSe {
    double mean, se;
};

MeanSe mean_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, n > 1 ? std::sqrt(ss / (n * (n - 1.0))) : 0.0};
}

} // namespace

void FitConfig::validate() const {
    if (!(eta >= 0.0)) throw std::invalid_argument("FitConfig: eta >= 0 required");
    if (!(optimizer_tol > 0.0))
        throw std::invalid_argument("FitConfig: optimizer_tol > 0 required");
    if (!(dt_obs > 0.0)) throw std::invalid_argument("FitConfig: dt_obs > 0 required");
    auto check = [](const Interval& iv, const char* name) {
        if (!(iv.lo < iv.hi))
            throw std::invalid_argument(std::string("FitConfig: empty interval ") + name);
    };
    check(bounds_rho, "bounds_rho");
    check(bounds_lambda, "bounds_lambda");
    check(bounds_sigma, "bounds_sigma");
    check(bounds_mu, "bounds_mu");
    if (multistart < 1 || max_iterations < 1)
        throw std::invalid_argument("FitConfig: multistart and max_iterations >= 1");
}

double penalized_objective(const std::vector<double>& rho_path,
                           const PsiParams& psi, const VasicekObs& obs,
                           const FitConfig& config) {
    config.validate();
    if (rho_path.size() != obs.rates.size())
        throw std::invalid_argument(
            "penalized_objective: path and observation lengths differ");
    if (rho_path.empty())
        throw std::invalid_argument("penalized_objective: empty path");
    check_bounds(rho_path, psi, config);
    TransitionEval trans(psi, config);
    return objective_impl(rho_path, psi, obs, config, trans);
}

DependenceFit fit_dependence_path(const VasicekObs& obs, const FitConfig& config) {
    config.validate();
    const std::size_t T = obs.rates.size();
    if (T < 8)
        throw std::invalid_argument("fit_dependence_path: at least 8 observations");

    const Bounds b = parameter_bounds(T, config);
    PsiParams psi0;
    psi0.lambda = midpoint(config.bounds_lambda);
    psi0.sigma = midpoint(config.bounds_sigma);
    psi0.mu = midpoint(config.bounds_mu);

    std::vector<double> levels;
    levels.push_back(flat_rho_mle(obs, config.bounds_rho));
    levels.push_back(config.bounds_rho.lo);
    levels.push_back(per_obs_rho_q90(obs, config.bounds_rho));
    levels.resize(std::min<std::size_t>(levels.size(), config.multistart));

    PackedObjective obj(obs, config, T);
    AscentResult best;
    bool have = false;
    for (double level : levels) {
        std::vector<double> x(T, level);
        x.push_back(config.diffusion_kind == DiffusionKind::VonMises ? psi0.lambda
                                                                     : psi0.sigma);
        if (config.diffusion_kind == DiffusionKind::VonMises) {
            x.push_back(psi0.sigma);
            // Start the attractor angle at the start level so the
            // transition prior does not drag the path off its basin.
            x.push_back(std::clamp(angle_of(level), config.bounds_mu.lo,
                                   config.bounds_mu.hi));
        }
        AscentResult r = projected_ascent(obj, std::move(x), b, config);
        if (!have || r.value > best.value) {
            best = std::move(r);
            have = true;
        }
    }

    DependenceFit fit;
    fit.diffusion_kind = config.diffusion_kind;
    fit.rho_path.assign(best.x.begin(), best.x.begin() + T);
    fit.psi = unpack_psi(best.x, T, config);
    fit.objective_value = best.value;
    fit.converged = best.converged;
    int at_lo = 0;
    for (double r : fit.rho_path)
        if (r <= config.bounds_rho.lo + 1e-9) ++at_lo;
    fit.at_bound_fraction = static_cast<double>(at_lo) / T;
    if (config.diffusion_kind == DiffusionKind::VonMises)
        fit.kappa = 2.0 * fit.psi.lambda / (fit.psi.sigma * fit.psi.sigma);
    return fit;
}

PathSummary summarize_path(const DependenceFit& fit, const FitConfig& config) {
    if (fit.rho_path.empty())
        throw std::invalid_argument("summarize_path: empty path");
    PathSummary s;
    s.mean = std::accumulate(fit.rho_path.begin(), fit.rho_path.end(), 0.0) /
             fit.rho_path.size();
    s.q95 = quantile_interp(fit.rho_path, 0.95);
    s.max = *std::max_element(fit.rho_path.begin(), fit.rho_path.end());
    s.at_bound_fraction = fit.at_bound_fraction;
    s.kappa = fit.kappa;
    (void)config;
    return s;
}

DDCalibration calibrate_distance_to_default(double p_bar, double sigma,
                                            double mu, double T) {
    if (!(p_bar > 0.0 && p_bar < 1.0))
        throw std::domain_error("calibrate_distance_to_default: p_bar in (0,1)");
    if (!(sigma > 0.0) || !(T > 0.0))
        throw std::domain_error("calibrate_distance_to_default: sigma, T > 0");
    DDCalibration c;
    c.dd = -std_normal_quantile(p_bar);
    c.b = 100.0;
    c.mu = mu;
    c.sigma = sigma;
    c.T = T;
    c.s0 = c.b * std::exp(c.dd * sigma * std::sqrt(T) - (mu - 0.5 * sigma * sigma) * T);
    return c;
}

ForecastResult terminal_mixture_forecast(const DependenceFit& fit,
                                         const DDCalibration& calib, double T,
                                         int n_draws, std::uint64_t seed) {
    if (fit.rho_path.empty())
        throw std::invalid_argument("terminal_mixture_forecast: empty fit");
    if (!(T > 0.0) || n_draws < 2)
        throw std::invalid_argument("terminal_mixture_forecast: T > 0, n_draws >= 2");

    AssetParams assets;
    assets.mu = calib.mu;
    assets.sigma = calib.sigma;
    assets.s0 = {calib.s0, calib.s0};
    assets.barriers = {calib.b, calib.b};

    const CorrelationModel model = make_model(fit.psi, fit.diffusion_kind);
    const double theta0 = angle_of(fit.rho_path.back());
    std::vector<double> draws =
        sample_terminal_correlation(model, theta0, T, n_draws, seed);
    // The wedge series degenerates as |rho| -> 1 (the wedge angle collapses);
    // extreme draws are clamped as in the sweep harness.
    for (double& r : draws) r = std::clamp(r, -0.99, 0.99);
    const auto [lo_it, hi_it] = std::minmax_element(draws.begin(), draws.end());

    const TimeGrid2D grid = TimeGrid2D::uniform(T, T, 64, 64);
    RhoGridCache jd(
        [&](double r) {
            return conditional_joint_cdf(calib.b, calib.b, r, assets, T);
        },
        *lo_it, *hi_it);
    RhoGridCache surv(
        [&](double r) { return conditional_survival_probability(T, r, assets); },
        *lo_it, *hi_it);
    RhoGridCache fpt(
        [&](double r) {
            return conditional_fpt_probability(T, T, r, assets, grid, {}, {},
                                               false)
                .value;
        },
        *lo_it, *hi_it);

    std::vector<double> v_jd, v_surv, v_fpt;
    v_jd.reserve(draws.size());
    v_surv.reserve(draws.size());
    v_fpt.reserve(draws.size());
    for (double r : draws) {
        v_jd.push_back(jd(r));
        v_surv.push_back(surv(r));
        v_fpt.push_back(fpt(r));
    }
    ForecastResult out;
    out.n_draws = n_draws;
    MeanSe m = mean_se(v_jd);
    out.p_jd = m.mean; out.p_jd_se = m.se;
    m = mean_se(v_surv);
    out.p_surv = m.mean; out.p_surv_se = m.se;
    m = mean_se(v_fpt);
    out.p_fpt = m.mean; out.p_fpt_se = m.se;
    return out;
}

} // namespace circred

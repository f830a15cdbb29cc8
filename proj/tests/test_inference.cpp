#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "circred/inference.hpp"
#include "circred/rng.hpp"
#include "circred/special_functions.hpp"

using namespace circred;

namespace {

VasicekObs synthetic_obs(double p, double rho, int T, std::uint64_t seed) {
    std::vector<double> raw;
    raw.reserve(T);
    Rng rng(seed, 1);
    for (int t = 0; t < T; ++t)
        raw.push_back(vasicek_quantile(rng.next_uniform(), p, rho));
    return VasicekObs::from_rates(raw);
}

} // namespace

TEST_CASE("config validation") {
    FitConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.eta = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.bounds_rho = {0.5, 0.2};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("distance-to-default round trip") {
    for (double p_bar : {0.005, 0.02, 0.08}) {
        const double sigma = 0.2, mu = 0.05, T = 1.0;
        const auto calib = calibrate_distance_to_default(p_bar, sigma, mu, T);
        CHECK(calib.b == doctest::Approx(100.0));
        // P(S_T <= B) under GBM from the calibrated start must recover p_bar
        const double z = (std::log(calib.b / calib.s0) -
                          (mu - 0.5 * sigma * sigma) * T) /
                         (sigma * std::sqrt(T));
        CHECK(std::abs(std_normal_cdf(z) - p_bar) < 1e-12);
        CHECK(std::abs(calib.dd + std_normal_quantile(p_bar)) < 1e-12);
    }
}

TEST_CASE("kappa identity") {
    VasicekObs obs = synthetic_obs(0.03, 0.2, 30, 9);
    FitConfig cfg;
    cfg.multistart = 1;
    cfg.max_iterations = 40;
    const auto fit = fit_dependence_path(obs, cfg);
    CHECK(fit.kappa == 2.0 * fit.psi.lambda / (fit.psi.sigma * fit.psi.sigma));
}

TEST_CASE("penalized objective matches the reported optimum value") {
    VasicekObs obs = synthetic_obs(0.03, 0.2, 30, 10);
    FitConfig cfg;
    cfg.multistart = 1;
    cfg.max_iterations = 40;
    const auto fit = fit_dependence_path(obs, cfg);
    CHECK(fit.rho_path.size() == obs.rates.size());
    const double obj = penalized_objective(fit.rho_path, fit.psi, obs, cfg);
    CHECK(obj == doctest::Approx(fit.objective_value).epsilon(1e-10));
    for (double r : fit.rho_path) {
        CHECK(r >= cfg.bounds_rho.lo);
        CHECK(r <= cfg.bounds_rho.hi);
    }
}

TEST_CASE("roughness penalty monotonicity on a fixed path") {
    // Increasing eta lowers the objective for any non-flat path, holding
    // everything else fixed.
    VasicekObs obs = synthetic_obs(0.02, 0.15, 40, 11);
    std::vector<double> path(40);
    for (int t = 0; t < 40; ++t) path[t] = 0.1 + 0.05 * (t % 3);
    PsiParams psi{2.0, 1.0, 0.8};
    FitConfig lo, hi;
    lo.eta = 1.0;
    hi.eta = 50.0;
    CHECK(penalized_objective(path, psi, obs, hi) <
          penalized_objective(path, psi, obs, lo));
}

TEST_CASE("path summary") {
    DependenceFit fit;
    fit.rho_path = {0.01, 0.2, 0.3, 0.01, 0.5};
    fit.kappa = 4.0;
    fit.at_bound_fraction = 0.4;
    const auto s = summarize_path(fit);
    CHECK(s.mean == doctest::Approx((0.01 + 0.2 + 0.3 + 0.01 + 0.5) / 5));
    CHECK(s.max == doctest::Approx(0.5));
    CHECK(s.q95 <= 0.5);
    CHECK(s.q95 >= 0.3);
    CHECK(s.kappa == 4.0);
    CHECK(s.at_bound_fraction == doctest::Approx(0.4));
}

TEST_CASE("forecast determinism") {
    VasicekObs obs = synthetic_obs(0.02, 0.15, 40, 12);
    FitConfig cfg;
    cfg.multistart = 1;
    cfg.max_iterations = 60;
    const auto fit = fit_dependence_path(obs, cfg);
    const auto calib = calibrate_distance_to_default(obs.p_bar, 0.2, 0.05, 1.0);
    const auto f1 = terminal_mixture_forecast(fit, calib, 1.0, 100, 2024);
    const auto f2 = terminal_mixture_forecast(fit, calib, 1.0, 100, 2024);
    CHECK(f1.p_jd == f2.p_jd);
    CHECK(f1.p_surv == f2.p_surv);
    CHECK(f1.p_fpt == f2.p_fpt);
    CHECK(f1.n_draws == 100);
    CHECK(f1.p_jd >= 0.0);
    CHECK(f1.p_surv <= 1.0);
    CHECK(f1.p_surv + f1.p_fpt <= 1.0 + 3 * (f1.p_surv_se + f1.p_fpt_se));
}

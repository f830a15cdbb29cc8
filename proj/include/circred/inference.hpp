#ifndef CIRCRED_INFERENCE_HPP
#define CIRCRED_INFERENCE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "circred/circular.hpp"
#include "circred/vasicek.hpp"

namespace circred {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct FitConfig {
    double eta = 10.0; // roughness penalty weight
    Interval bounds_rho = {0.01, 0.99};
    Interval bounds_lambda = {1.0, 10.0};
    Interval bounds_sigma = {0.5, 5.0};
    Interval bounds_mu = {0.0, 1.5707963267948966};
    // Observation step in diffusion time units: 1 treats a quarter as the
    // unit step, 0.25 measures time in years.
    double dt_obs = 1.0;
    DiffusionKind diffusion_kind = DiffusionKind::VonMises;
    double regularizer_weight = 1e-3;
    std::string regularizer =
        "quadratic pull of log(lambda) and log(sigma) toward the midpoints "
        "of their bound intervals";
    double optimizer_tol = 1e-6;
    int multistart = 3;
    int max_iterations = 400;
    int transition_modes = 64; // spectral resolution of the angle transition

    void validate() const;
};

// Diffusion parameters of the fitted angle process. CBM uses sigma only.
struct PsiParams {
    double lambda = 0.0;
    double sigma = 0.0;
    double mu = 0.0;
};

struct DependenceFit {
    std::vector<double> rho_path;
    PsiParams psi;
    double objective_value = 0.0;
    bool converged = false;
    double at_bound_fraction = 0.0;
    double kappa = 0.0; // 2 lambda / sigma^2, VonMises only
    DiffusionKind diffusion_kind = DiffusionKind::VonMises;
};

struct DDCalibration {
    double dd = 0.0;
    double s0 = 0.0;
    double b = 100.0;
    double mu = 0.0, sigma = 0.0, T = 0.0;
};

struct PathSummary {
    double mean = 0.0;
    double q95 = 0.0;
    double max = 0.0;
    double at_bound_fraction = 0.0;
    double kappa = 0.0;
};

double penalized_objective(const std::vector<double>& rho_path,
                           const PsiParams& psi, const VasicekObs& obs,
                           const FitConfig& config);

DependenceFit fit_dependence_path(const VasicekObs& obs,
                                  const FitConfig& config = {});

PathSummary summarize_path(const DependenceFit& fit,
                           const FitConfig& config = {});

DDCalibration calibrate_distance_to_default(double p_bar, double sigma,
                                            double mu, double T);

struct ForecastResult {
    double p_jd = 0.0, p_jd_se = 0.0;
    double p_surv = 0.0, p_surv_se = 0.0;
    double p_fpt = 0.0, p_fpt_se = 0.0;
    int n_draws = 0;
};

ForecastResult terminal_mixture_forecast(const DependenceFit& fit,
                                         const DDCalibration& calib, double T,
                                         int n_draws, std::uint64_t seed);

} // namespace circred

#endif

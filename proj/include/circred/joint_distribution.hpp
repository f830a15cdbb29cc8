#ifndef CIRCRED_JOINT_DISTRIBUTION_HPP
#define CIRCRED_JOINT_DISTRIBUTION_HPP

#include <array>
#include <functional>
#include <vector>

#include "circred/quadrature.hpp"

namespace circred {

struct AssetParams {
    double mu = 0.0;    // GBM drift, per year
    double sigma = 0.1; // GBM volatility, per sqrt(year)
    std::array<double, 2> s0 = {100.0, 100.0};
    std::array<double, 2> barriers = {80.0, 80.0};

    void validate() const;
};

// Density of the correlation angle gamma in (0, pi).
using AngleDensity = std::function<double(double)>;

struct LaplacePoint {
    double gamma_star = 0.0;
    double g_value = 0.0;
    double g_curv = 0.0; // g''(gamma_star), negative when usable
    std::array<double, 4> cubic_coeffs = {0, 0, 0, 0}; // (a, b, c, d)
    bool used_fallback = false;
};

double conditional_joint_density(double s1, double s2, double rho,
                                 const AssetParams& assets, double t);

double conditional_joint_cdf(double y1, double y2, double rho,
                             const AssetParams& assets, double t);

LaplacePoint solve_gamma_star(double s1, double s2, const AssetParams& assets,
                              double t, const AngleDensity& angle_density);

enum class MixtureMethod { Laplace, Quadrature };

struct MixtureResult {
    double value = 0.0;
    bool used_quadrature = false; // Laplace requested but fallback engaged
};

MixtureResult mixture_joint_density_laplace(double s1, double s2,
                                            const AssetParams& assets, double t,
                                            const AngleDensity& corr_density_at_T);

double mixture_joint_density_quadrature(double s1, double s2,
                                        const AssetParams& assets, double t,
                                        const AngleDensity& corr_density_at_T,
                                        const QuadratureSpec& spec = {});

MixtureResult mixture_joint_cdf(double y1, double y2, const AssetParams& assets,
                                double t, const AngleDensity& corr_density_at_T,
                                MixtureMethod method);

// p_JD(T) by mixing the conditional joint CDF at the barriers.
double joint_default_probability(double T, const AssetParams& assets,
                                 const AngleDensity& corr_density_at_T,
                                 MixtureMethod method = MixtureMethod::Quadrature);
double joint_default_probability(double T, const AssetParams& assets,
                                 const std::vector<double>& rho_draws);

} // namespace circred

#endif

#ifndef CIRCRED_PASSAGE_HPP
#define CIRCRED_PASSAGE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "circred/circular.hpp"
#include "circred/joint_distribution.hpp"
#include "circred/quadrature.hpp"
#include "circred/special_functions.hpp"

namespace circred {

// Geometry of the absorbing wedge for a correlated bivariate Wiener process
// with upper barriers, after drift removal and the isotropizing linear map.
struct WedgeGeometry {
    double k1 = 0.0;          // K1
    double k2 = 0.0;          // K2
    double k3 = 0.0;          // K3 = sigma1 sigma2 sqrt(1 - rho^2)
    double lambda_kill = 0.0; // lambda
    double alpha = 0.0;       // wedge angle in (0, pi)
    double r0_bar = 0.0;      // radial coordinate of the start point
    double phi0 = 0.0;        // angular coordinate of the start point
    double rho = 0.0;
    double sigma1 = 0.0, sigma2 = 0.0;
    std::array<double, 2> barriers_transformed = {0.0, 0.0};
    std::array<double, 2> x0_transformed = {0.0, 0.0};
};

WedgeGeometry build_wedge_geometry(double rho, double mu1, double mu2,
                                   double sigma1, double sigma2,
                                   const std::array<double, 2>& x0,
                                   const std::array<double, 2>& barriers);

// Polar coordinates (r_bar, phi) of an interior point under the wedge map.
struct PolarPoint {
    double r_bar = 0.0;
    double phi = 0.0;
};
PolarPoint wedge_polar(const std::array<double, 2>& x, const WedgeGeometry& geom);

// Angular eigenfunction series H of the Dirichlet heat kernel in the wedge.
double wedge_kernel_H(double r_bar, double r0_bar, double phi, double phi0,
                      double t, const WedgeGeometry& geom,
                      const SeriesSpec& series = {});

// Transition density of the process killed at the first barrier hit.
double killed_density(const std::array<double, 2>& x, double t,
                      const WedgeGeometry& geom, const SeriesSpec& series = {});

// P(S_{1,t} > B_1, S_{2,t} > B_2, tau > t | rho) for two GBM names.
double conditional_survival_probability(double t, double rho,
                                        const AssetParams& assets,
                                        const SeriesSpec& series = {},
                                        const QuadratureSpec& quad = {});

// Joint density of the two barrier-hitting times at (t1, t2), t1 != t2.
double conditional_fpt_density(double t1, double t2, double rho,
                               const AssetParams& assets,
                               const SeriesSpec& series = {},
                               const QuadratureSpec& quad = {});

struct TimeGrid2D {
    std::vector<double> t1_points;
    std::vector<double> t2_points;
    enum class Rule { Trapezoid } rule = Rule::Trapezoid;

    static TimeGrid2D uniform(double T1, double T2, int n1 = 64, int n2 = 64);
    void validate() const;
};

struct FptResult {
    double value = 0.0;
    double error_estimate = 0.0; // half-resolution subgrid difference
    int n1 = 0, n2 = 0;          // grid resolution used
};

// P(tau_1 <= T1, tau_2 <= T2 | rho) by trapezoid integration of the joint
// hitting-time density over the grid.
FptResult conditional_fpt_probability(double T1, double T2, double rho,
                                      const AssetParams& assets,
                                      const TimeGrid2D& grid,
                                      const SeriesSpec& series = {},
                                      const QuadratureSpec& quad = {},
                                      bool with_error_estimate = true);

struct MixResult {
    double mean = 0.0;
    double standard_error = 0.0;
    int n_failures = 0;
};

// Sample mean and standard error of quantity(rho) over terminal correlation
// draws of the angle diffusion. Aborts if more than 1% of draws fail.
MixResult mix_over_correlation(const std::function<double(double)>& quantity,
                               const CorrelationModel& model, double theta0,
                               double T, int n_draws, std::uint64_t seed);

} // namespace circred

#endif

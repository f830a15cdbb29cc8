#ifndef CIRCRED_VASICEK_HPP
#define CIRCRED_VASICEK_HPP

#include <vector>

namespace circred {

// Default-rate time series prepared for the Vasicek observation model.
struct VasicekObs {
    std::vector<double> rates; // c_t, floored into (0,1)
    double p_bar = 0.0;        // sample mean of floored rates
    std::vector<double> z;     // z_t = Phi^{-1}(c_t)
    double z_p = 0.0;          // Phi^{-1}(p_bar)
    double epsilon_floor = 1e-6;
    int floored_count = 0;

    static VasicekObs from_rates(const std::vector<double>& raw,
                                 double epsilon_floor = 1e-6);
};

// Large-pool Vasicek loss density/likelihood/CDF, all in (0,1)^2 x (0,1).
double vasicek_loglik(double c, double p, double rho);
double vasicek_density(double x, double p, double rho);
double vasicek_cdf(double x, double p, double rho);

// Closed-form inverse of vasicek_cdf (used for inverse-transform sampling).
double vasicek_quantile(double u, double p, double rho);

} // namespace circred

#endif

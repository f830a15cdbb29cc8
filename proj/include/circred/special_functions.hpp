#ifndef CIRCRED_SPECIAL_FUNCTIONS_HPP
#define CIRCRED_SPECIAL_FUNCTIONS_HPP

#include <stdexcept>

namespace circred {

struct SeriesSpec {
    int max_terms = 800;
    double term_tol = 1e-12; // stop when |term| < term_tol * |partial sum|

    void validate() const {
        if (max_terms < 1)
            throw std::invalid_argument("SeriesSpec: max_terms >= 1 required");
        if (!(term_tol > 0.0 && term_tol < 1.0))
            throw std::invalid_argument("SeriesSpec: term_tol in (0,1) required");
    }
};

double std_normal_pdf(double x);
double std_normal_cdf(double x);

// Inverse of std_normal_cdf. Throws std::domain_error for p outside (0,1).
double std_normal_quantile(double p);

// Standard bivariate normal CDF with correlation r, |r| < 1.
double bivariate_normal_cdf(double h, double k, double r);

// Modified Bessel function of the first kind, fractional order nu >= 0.
// The scaled form returns exp(-x) * I_nu(x) and never overflows on the
// supported domain; the unscaled form may overflow to +inf for large x.
double bessel_i_scaled(double nu, double x);
double bessel_i(double nu, double x);

} // namespace circred

#endif

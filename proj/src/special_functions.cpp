#include "circred/special_functions.hpp"
#include "circred/quadrature.hpp"

#include <cmath>

namespace circred {

double std_normal_pdf(double x) {
    return 0.3989422804014326779399460599343818685 * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865475244008443621048490393);
}

// Wichura's AS241 (PPND16) rational approximations.
double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("std_normal_quantile: p must be in (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258) * r +
                3.64784832476320460504) * r + 5.76949722146069140550) * r +
              4.63033784615654529590) * r + 1.42343711074968357734) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940) * r +
              2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580) * r +
              5.46378491116411436990) * r + 6.65790464350110377720) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -x : x;
}

// Phi2(h,k;r) = Phi(h)Phi(k) + int_0^r phi2(h,k;s) ds, using the identity
// dPhi2/dr = phi2 (the bivariate density at correlation r).
double bivariate_normal_cdf(double h, double k, double r) {
    if (!(std::abs(r) < 1.0))
        throw std::domain_error("bivariate_normal_cdf: |r| < 1 required");
    const double base = std_normal_cdf(h) * std_normal_cdf(k);
    if (r == 0.0) return base;
    auto density = [h, k](double s) {
        const double oms = 1.0 - s * s;
        return std::exp(-0.5 * (h * h - 2.0 * s * h * k + k * k) / oms) /
               (6.283185307179586476925286766559 * std::sqrt(oms));
    };
    QuadratureSpec spec;
    spec.abs_tol = 1e-12;
    spec.rel_tol = 1e-12;
    spec.max_subdivisions = 400;
    QuadResult q = integrate_1d(density, 0.0, r, spec);
    double v = base + q.value;
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    return v;
}

namespace {

// Ascending power series evaluated with running renormalization; returns
// log I_nu(x). Valid for all nu >= 0, practical for x up to ~700.
double log_bessel_i_series(double nu, double x) {
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0, log_scale = 0.0;
    for (int k = 1; k < 100000; ++k) {
        term *= q / (k * (nu + k));
        sum += term;
        if (term < 1e-18 * sum) break;
        if (sum > 1e250) {
            sum *= 1e-250;
            term *= 1e-250;
            log_scale += 250.0 * 2.302585092994045684017991454684364208;
        }
    }
    return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + std::log(sum) + log_scale;
}

// Continued-fraction evaluation (CF1 for I ratio, CF2 for K), valid for
// x >= 2. Returns exp(-x) * I_nu(x).
double bessel_i_scaled_cf(double nu, double x) {
    const double eps = 1e-16;
    const int maxit = 100000;
    const int nl = static_cast<int>(nu + 0.5);
    const double xmu = nu - nl;
    const double xi = 1.0 / x;
    const double xi2 = 2.0 * xi;

    // CF1: f = I'_nu(x)/I_nu(x)
    double h = nu * xi;
    if (h < 1e-300) h = 1e-300;
    double b = xi2 * nu, d = 0.0, c = h;
    for (int i = 1; i <= maxit; ++i) {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }

    // Downward recurrence from order nu to order xmu.
    double ril = 1.0, ripl = h, log_scale = 0.0;
    double fact = nu * xi;
    for (int l = nl; l >= 1; --l) {
        const double ritemp = fact * ril + ripl;
        fact -= xi;
        ripl = fact * ritemp + ril;
        ril = ritemp;
        if (ril > 1e250) {
            ril *= 1e-250;
            ripl *= 1e-250;
            log_scale += 250.0 * 2.302585092994045684017991454684364208;
        }
    }
    const double f = ripl / ril;

    // CF2 for exp(x) * K_xmu(x) and its next order.
    const double xmu2 = xmu * xmu;
    double b2 = 2.0 * (1.0 + x);
    double d2 = 1.0 / b2;
    double h2 = d2, delh = d2;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - xmu2;
    double qs = a1, cc = a1, a = -a1;
    double s = 1.0 + qs * delh;
    for (int i = 2; i <= maxit; ++i) {
        a -= 2 * (i - 1);
        cc = -a * cc / i;
        const double qnew = (q1 - b2 * q2) / a;
        q1 = q2;
        q2 = qnew;
        qs += cc * qnew;
        b2 += 2.0;
        d2 = 1.0 / (b2 + a * d2);
        delh = (b2 * d2 - 1.0) * delh;
        h2 += delh;
        const double dels = qs * delh;
        s += dels;
        if (std::abs(dels / s) < eps) break;
    }
    h2 = a1 * h2;
    const double rkmu = std::sqrt(M_PI / (2.0 * x)) / s;   // exp(x)*K_xmu
    const double rk1 = rkmu * (xmu + x + 0.5 - h2) * xi;   // exp(x)*K_{xmu+1}
    const double rkmup = xmu * xi * rkmu - rk1;            // exp(x)*K'_xmu
    const double rimu = xi / (f * rkmu - rkmup);           // exp(-x)*I_xmu

    return rimu * std::exp(-log_scale) / ril;
}

} // namespace

double bessel_i_scaled(double nu, double x) {
    if (!(nu >= 0.0) || !(x >= 0.0))
        throw std::domain_error("bessel_i: nu >= 0 and x >= 0 required");
    if (x == 0.0) return (nu == 0.0) ? 1.0 : 0.0;
    if (x < std::max(30.0, nu * nu / 20.0))
        return std::exp(log_bessel_i_series(nu, x) - x);
    return bessel_i_scaled_cf(nu, x);
}

double bessel_i(double nu, double x) {
    if (!(nu >= 0.0) || !(x >= 0.0))
        throw std::domain_error("bessel_i: nu >= 0 and x >= 0 required");
    if (x == 0.0) return (nu == 0.0) ? 1.0 : 0.0;
    if (x < std::max(30.0, nu * nu / 20.0))
        return std::exp(log_bessel_i_series(nu, x));
    return bessel_i_scaled_cf(nu, x) * std::exp(x); // may overflow to +inf
}

} // namespace circred

#include "circred/vasicek.hpp"
#include "circred/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace circred {

namespace {
void check_args(double x, double p, double rho) {
    if (!(x > 0.0 && x < 1.0) || !(p > 0.0 && p < 1.0))
        throw std::domain_error("vasicek: x and p must be in (0,1)");
    if (!(rho > 0.0 && rho < 1.0))
        throw std::domain_error("vasicek: rho must be in (0,1)");
}
} // namespace

VasicekObs VasicekObs::from_rates(const std::vector<double>& raw,
                                  double epsilon_floor) {
    if (raw.empty())
        throw std::invalid_argument("VasicekObs: empty series");
    VasicekObs obs;
    obs.epsilon_floor = epsilon_floor;
    obs.rates.reserve(raw.size());
    double sum = 0.0;
    for (double c : raw) {
        if (!(c >= 0.0 && c < 1.0))
            throw std::invalid_argument("VasicekObs: rates must lie in [0,1)");
        if (c < epsilon_floor) {
            c = epsilon_floor;
            ++obs.floored_count;
        }
        obs.rates.push_back(c);
        sum += c;
    }
    obs.p_bar = sum / static_cast<double>(obs.rates.size());
    obs.z.reserve(obs.rates.size());
    for (double c : obs.rates) obs.z.push_back(std_normal_quantile(c));
    obs.z_p = std_normal_quantile(obs.p_bar);
    return obs;
}

double vasicek_loglik(double c, double p, double rho) {
    check_args(c, p, rho);
    const double z = std_normal_quantile(c);
    const double zp = std_normal_quantile(p);
    const double s = std::sqrt(1.0 - rho) * z - zp;
    return 0.5 * std::log((1.0 - rho) / rho) - s * s / (2.0 * rho) + 0.5 * z * z;
}

double vasicek_density(double x, double p, double rho) {
    return std::exp(vasicek_loglik(x, p, rho));
}

double vasicek_cdf(double x, double p, double rho) {
    check_args(x, p, rho);
    const double z = std_normal_quantile(x);
    const double zp = std_normal_quantile(p);
    return std_normal_cdf((std::sqrt(1.0 - rho) * z - zp) / std::sqrt(rho));
}

double vasicek_quantile(double u, double p, double rho) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("vasicek_quantile: u must be in (0,1)");
    check_args(0.5, p, rho);
    const double zp = std_normal_quantile(p);
    const double zu = std_normal_quantile(u);
    return std_normal_cdf((zp + std::sqrt(rho) * zu) / std::sqrt(1.0 - rho));
}

} // namespace circred

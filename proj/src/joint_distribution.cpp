#include "circred/joint_distribution.hpp"
#include "circred/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace circred {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;
constexpr double kTwoPi = 6.283185307179586476925286766559;

struct LogDistances {
    double l1, l2; // log s_i - log S_{i,0} - (mu - sigma^2/2) t
};

LogDistances log_distances(double s1, double s2, const AssetParams& a, double t) {
    const double drift = (a.mu - 0.5 * a.sigma * a.sigma) * t;
    return {std::log(s1) - std::log(a.s0[0]) - drift,
            std::log(s2) - std::log(a.s0[1]) - drift};
}

// g(gamma) for the density mixture, with the angle density supplied by the
// caller; returns -inf where the angle density vanishes.
double g_of_gamma(double gamma, double s1, double s2, const AssetParams& assets,
                  double t, const AngleDensity& pdens) {
    const double sg = std::sin(gamma);
    if (!(sg > 0.0)) return -std::numeric_limits<double>::infinity();
    const auto [l1, l2] = log_distances(s1, s2, assets, t);
    const double s2t = assets.sigma * assets.sigma * t;
    const double p = pdens(gamma);
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    // Half-angle forms of l1^2 - 2 l1 l2 cos(gamma) + l2^2; the direct
    // expression cancels catastrophically when l1 ~ l2 near gamma = 0 or
    // l1 ~ -l2 near gamma = pi.
    const double sh = std::sin(0.5 * gamma), ch = std::cos(0.5 * gamma);
    const double num =
        gamma < 0.5 * kPi
            ? (l1 - l2) * (l1 - l2) + 4.0 * l1 * l2 * sh * sh
            : (l1 + l2) * (l1 + l2) - 4.0 * l1 * l2 * ch * ch;
    const double quad = num / (2.0 * s2t * sg * sg);
    return -std::log(kTwoPi * s2t * sg * s1 * s2) + std::log(p) - quad;
}

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 via the companion matrix.
std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0) {
    std::vector<double> roots;
    if (std::abs(c3) < 1e-300) return roots;
    Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
    comp(0, 2) = -c0 / c3;
    comp(1, 2) = -c1 / c3;
    comp(2, 2) = -c2 / c3;
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
    for (int i = 0; i < 3; ++i) {
        const auto ev = es.eigenvalues()[i];
        if (std::abs(ev.imag()) < 1e-9 * (1.0 + std::abs(ev.real())))
            roots.push_back(ev.real());
    }
    return roots;
}

// Golden-section maximization on [lo, hi].
double golden_max(const std::function<double(double)>& f, double lo, double hi) {
    const double invphi = 0.6180339887498948482;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 90 && (b - a) > 1e-13; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

// Second derivative of log p at gamma by central differences.
double log_density_curvature(const AngleDensity& pdens, double gamma) {
    const double h = 1e-4;
    auto lp = [&](double gm) {
        const double v = pdens(gm);
        return v > 0.0 ? std::log(v) : -745.0;
    };
    return (lp(gamma + h) - 2.0 * lp(gamma) + lp(gamma - h)) / (h * h);
}

double laplace_value(double g_star, double curv, double gamma_star) {
    const double w = std::sqrt(-curv);
    const double corr = std_normal_cdf(w * (kPi - gamma_star)) -
                        std_normal_cdf(-w * gamma_star);
    return std::exp(g_star) * std::sqrt(kTwoPi / -curv) * corr;
}

// The expansion degrades when the maximizer sits within a few Gaussian
// widths 1/sqrt(-g'') of an endpoint; the integrand is strongly skewed
// there and the truncated-Gaussian correction cannot repair it.
bool laplace_usable(double gamma_star, double curv) {
    if (!(curv < -1e-3)) return false;
    const double margin = std::max(1e-3, 6.0 / std::sqrt(-curv));
    return gamma_star > margin && gamma_star < kPi - margin;
}

} // namespace

void AssetParams::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("AssetParams: sigma > 0");
    for (int i = 0; i < 2; ++i) {
        if (!(s0[i] > 0.0) || !(barriers[i] > 0.0))
            throw std::invalid_argument("AssetParams: values must be positive");
        if (!(s0[i] > barriers[i]))
            throw std::invalid_argument("AssetParams: s0 must start above the barrier");
    }
}

double conditional_joint_density(double s1, double s2, double rho,
                                 const AssetParams& assets, double t) {
    if (!(std::abs(rho) < 1.0))
        throw std::domain_error("conditional_joint_density: |rho| < 1 required");
    if (!(s1 > 0.0 && s2 > 0.0 && t > 0.0))
        throw std::domain_error("conditional_joint_density: s1, s2, t > 0 required");
    const auto [l1, l2] = log_distances(s1, s2, assets, t);
    const double s2t = assets.sigma * assets.sigma * t;
    const double om = 1.0 - rho * rho;
    const double q = (l1 * l1 - 2.0 * rho * l1 * l2 + l2 * l2) / (2.0 * s2t * om);
    return std::exp(-q) / (kTwoPi * s2t * std::sqrt(om) * s1 * s2);
}

double conditional_joint_cdf(double y1, double y2, double rho,
                             const AssetParams& assets, double t) {
    if (!(std::abs(rho) < 1.0))
        throw std::domain_error("conditional_joint_cdf: |rho| < 1 required");
    if (!(y1 > 0.0 && y2 > 0.0 && t > 0.0))
        throw std::domain_error("conditional_joint_cdf: y1, y2, t > 0 required");
    const auto [l1, l2] = log_distances(y1, y2, assets, t);
    const double sd = assets.sigma * std::sqrt(t);
    return bivariate_normal_cdf(l1 / sd, l2 / sd, rho);
}

LaplacePoint solve_gamma_star(double s1, double s2, const AssetParams& assets,
                              double t, const AngleDensity& angle_density) {
    assets.validate();
    if (!(s1 > 0.0 && s2 > 0.0 && t > 0.0))
        throw std::domain_error("solve_gamma_star: s1, s2, t > 0 required");

    const auto [l1, l2] = log_distances(s1, s2, assets, t);
    const double sig2 = assets.sigma * assets.sigma;
    const double a = l1 * l1 * sig2;
    const double b = l1 * l2 * sig2;
    const double c = l2 * l2 * sig2;
    const double d = sig2 * sig2 * t;

    LaplacePoint pt;
    pt.cubic_coeffs = {a, b, c, d};

    auto g = [&](double gm) { return g_of_gamma(gm, s1, s2, assets, t, angle_density); };

    // Stationarity of the uniform-density g in x = cos(gamma):
    //   d x^3 - b x^2 + (a + c - d) x - b = 0.
    // Roots seed the search; the full g (including the angle density) is
    // refined around the best candidate.
    std::vector<double> seeds;
    for (double x : real_cubic_roots(d, -b, a + c - d, -b))
        if (std::abs(x) < 1.0 - 1e-12) seeds.push_back(std::acos(x));
    const int grid_n = 129;
    for (int i = 1; i < grid_n; ++i) seeds.push_back(kPi * i / grid_n);

    double best_g = -std::numeric_limits<double>::infinity();
    double best_gamma = 0.5 * kPi;
    for (double gm : seeds) {
        const double v = g(gm);
        if (v > best_g) {
            best_g = v;
            best_gamma = gm;
        }
    }
    const double half = kPi / grid_n;
    const double lo = std::max(1e-10, best_gamma - half);
    const double hi = std::min(kPi - 1e-10, best_gamma + half);
    pt.gamma_star = golden_max(g, lo, hi);
    pt.g_value = g(pt.gamma_star);

    // Analytic curvature of the uniform-density part plus (log p)''.
    const double sg = std::sin(pt.gamma_star);
    const double s2g = sg * sg;
    const double x = std::cos(pt.gamma_star);
    const double quad_curv =
        ((2.0 * a + 2.0 * c + d) * s2g - 3.0 * (a + c) + b * x * (6.0 - s2g)) /
        (d * s2g * s2g);
    pt.g_curv = quad_curv + log_density_curvature(angle_density, pt.gamma_star);

    pt.used_fallback =
        !std::isfinite(pt.g_value) || !laplace_usable(pt.gamma_star, pt.g_curv);
    return pt;
}

double mixture_joint_density_quadrature(double s1, double s2,
                                        const AssetParams& assets, double t,
                                        const AngleDensity& corr_density_at_T,
                                        const QuadratureSpec& spec) {
    auto integrand = [&](double gm) {
        const double g = g_of_gamma(gm, s1, s2, assets, t, corr_density_at_T);
        return std::isfinite(g) ? std::exp(g) : 0.0;
    };
    QuadratureSpec qs = spec;
    qs.abs_tol = std::min(qs.abs_tol, 1e-12);
    // Piecewise partition: uniform segments so sharply concentrated angle
    // densities are seen by the initial panels, plus dyadic refinement of the
    // endpoint segments. Near gamma = 0 and pi the conditional density can
    // form a spike of width ~|l1 -+ l2| hugging the endpoint (the 1/sin(gamma)
    // factor loses its exponential suppression when the log-distances nearly
    // cancel); the geometric ladder covers every spike scale.
    const int segments = 32;
    std::vector<double> cuts;
    const double first = kPi / segments;
    for (int j = 46; j >= 1; --j) cuts.push_back(first * std::ldexp(1.0, -j));
    for (int k = 1; k < segments; ++k) cuts.push_back(kPi * k / segments);
    for (int j = 1; j <= 46; ++j) cuts.push_back(kPi - first * std::ldexp(1.0, -j));
    double total = 0.0;
    double lo = 0.0;
    cuts.push_back(kPi);
    for (double hi : cuts) {
        QuadResult r = integrate_1d(integrand, lo, hi, qs);
        if (!r.converged)
            throw std::runtime_error("mixture_joint_density_quadrature: no convergence");
        total += r.value;
        lo = hi;
    }
    return total;
}

MixtureResult mixture_joint_density_laplace(double s1, double s2,
                                            const AssetParams& assets, double t,
                                            const AngleDensity& corr_density_at_T) {
    LaplacePoint pt = solve_gamma_star(s1, s2, assets, t, corr_density_at_T);
    if (pt.used_fallback) {
        return {mixture_joint_density_quadrature(s1, s2, assets, t, corr_density_at_T),
                true};
    }
    return {laplace_value(pt.g_value, pt.g_curv, pt.gamma_star), false};
}

MixtureResult mixture_joint_cdf(double y1, double y2, const AssetParams& assets,
                                double t, const AngleDensity& corr_density_at_T,
                                MixtureMethod method) {
    assets.validate();
    if (!(y1 > 0.0 && y2 > 0.0 && t > 0.0))
        throw std::domain_error("mixture_joint_cdf: y1, y2, t > 0 required");

    auto quadrature = [&]() {
        auto integrand = [&](double gm) {
            const double p = corr_density_at_T(gm);
            if (!(p > 0.0)) return 0.0;
            return p * conditional_joint_cdf(y1, y2, std::cos(gm), assets, t);
        };
        QuadratureSpec qs;
        qs.abs_tol = 1e-12;
        qs.rel_tol = 1e-10;
        qs.max_subdivisions = 400;
        const int segments = 32;
        double total = 0.0;
        for (int k = 0; k < segments; ++k) {
            QuadResult r = integrate_1d(integrand, kPi * k / segments,
                                        kPi * (k + 1) / segments, qs);
            if (!r.converged)
                throw std::runtime_error("mixture_joint_cdf: quadrature non-convergence");
            total += r.value;
        }
        return std::clamp(total, 0.0, 1.0);
    };

    if (method == MixtureMethod::Quadrature) return {quadrature(), false};

    auto f = [&](double gm) {
        const double p = corr_density_at_T(gm);
        if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
        const double cdf = conditional_joint_cdf(y1, y2, std::cos(gm), assets, t);
        if (!(cdf > 0.0)) return -std::numeric_limits<double>::infinity();
        return std::log(p) + std::log(cdf);
    };
    const int grid_n = 129;
    double best_f = -std::numeric_limits<double>::infinity();
    double best_gamma = 0.5 * kPi;
    for (int i = 1; i < grid_n; ++i) {
        const double gm = kPi * i / grid_n;
        const double v = f(gm);
        if (v > best_f) {
            best_f = v;
            best_gamma = gm;
        }
    }
    const double half = kPi / grid_n;
    const double gamma_star =
        golden_max(f, std::max(1e-10, best_gamma - half),
                   std::min(kPi - 1e-10, best_gamma + half));
    const double h = 1e-4;
    const double curv = (f(gamma_star + h) - 2.0 * f(gamma_star) + f(gamma_star - h)) / (h * h);
    if (!std::isfinite(curv) || !laplace_usable(gamma_star, curv))
        return {quadrature(), true};
    return {std::clamp(laplace_value(f(gamma_star), curv, gamma_star), 0.0, 1.0),
            false};
}

double joint_default_probability(double T, const AssetParams& assets,
                                 const AngleDensity& corr_density_at_T,
                                 MixtureMethod method) {
    if (!(T > 0.0)) throw std::domain_error("joint_default_probability: T > 0");
    return mixture_joint_cdf(assets.barriers[0], assets.barriers[1], assets, T,
                             corr_density_at_T, method)
        .value;
}

double joint_default_probability(double T, const AssetParams& assets,
                                 const std::vector<double>& rho_draws) {
    if (!(T > 0.0)) throw std::domain_error("joint_default_probability: T > 0");
    if (rho_draws.empty())
        throw std::invalid_argument("joint_default_probability: no draws");
    double sum = 0.0;
    for (double rho : rho_draws)
        sum += conditional_joint_cdf(assets.barriers[0], assets.barriers[1], rho,
                                     assets, T);
    return sum / static_cast<double>(rho_draws.size());
}

} // namespace circred

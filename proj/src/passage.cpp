#include "circred/passage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace circred {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;

// Scaled angular series: sum_n sin(n pi phi / a) sin(n pi phi0 / a)
// exp(-z) I_{n pi / a}(z). The caller re-attaches the exponential so the
// whole kernel is assembled from one overflow-free exponent.
double kernel_h_scaled(double phi, double phi0, double z, double alpha,
                       const SeriesSpec& series) {
    series.validate();
    if (!(z >= 0.0)) throw std::domain_error("wedge kernel: negative argument");
    if (z == 0.0) return 0.0;
    double sum = 0.0, peak = 0.0;
    int small_run = 0;
    for (int n = 1; n <= series.max_terms; ++n) {
        const double nu = n * kPi / alpha;
        const double iv = bessel_i_scaled(nu, z);
        const double term = std::sin(nu * phi) * std::sin(nu * phi0) * iv;
        sum += term;
        peak = std::max(peak, std::abs(sum));
        // A sine factor can vanish incidentally, so require two consecutive
        // small terms before stopping. When the partial sums cancel heavily
        // the result carries an irreducible rounding error of order
        // eps * peak; terms below that floor cannot change the outcome.
        const double floor = std::max(series.term_tol * std::abs(sum),
                                      std::max(1e-16 * peak, 1e-300));
        if (std::abs(term) < floor) {
            if (++small_run >= 2) return sum;
        } else {
            small_run = 0;
        }
    }
    throw std::runtime_error("wedge kernel: series did not converge; "
                             "increase SeriesSpec::max_terms");
}

// Boundary-flux density of the hitting location: name `face` (1 or 2) hits
// its barrier first at time s while the other name sits at distance d > 0
// from its own barrier.
double boundary_flux(int face, double s, double d, const WedgeGeometry& g,
                     const SeriesSpec& series) {
    if (!(d > 0.0) || !(s > 0.0)) return 0.0;
    const double sig_other = face == 1 ? g.sigma1 : g.sigma2;
    const double z = sig_other * d * g.r0_bar / (g.k3 * g.k3 * s);
    if (!(z > 0.0)) return 0.0;

    double drift_exp;
    if (face == 1) {
        drift_exp = g.k1 * (g.barriers_transformed[0] - g.x0_transformed[0]) +
                    g.k2 * (g.barriers_transformed[1] - d - g.x0_transformed[1]);
    } else {
        drift_exp = g.k2 * (g.barriers_transformed[1] - g.x0_transformed[1]) +
                    g.k1 * (g.barriers_transformed[0] - d - g.x0_transformed[0]);
    }
    const double gap = sig_other * d - g.r0_bar;
    const double expo = drift_exp - g.lambda_kill * s -
                        gap * gap / (2.0 * g.k3 * g.k3 * s);
    if (expo < -745.0) return 0.0;

    double sum = 0.0, peak = 0.0;
    int small_run = 0;
    bool converged = false;
    for (int n = 1; n <= series.max_terms; ++n) {
        const double nu = n * kPi / g.alpha;
        const double iv = bessel_i_scaled(nu, z);
        // Normal derivative of the angular series at the face: cos(n pi) on
        // the phi = alpha face (name 1), cos(0) on the phi = 0 face.
        const double delta = face == 1 ? (n % 2 == 1 ? 1.0 : -1.0) : 1.0;
        const double term = delta * n * std::sin(nu * g.phi0) * iv;
        sum += term;
        peak = std::max(peak, std::abs(sum));
        const double floor = std::max(series.term_tol * std::abs(sum),
                                      std::max(1e-16 * peak, 1e-300));
        if (std::abs(term) < floor) {
            if (++small_run >= 2) {
                converged = true;
                break;
            }
        } else {
            small_run = 0;
        }
    }
    if (!converged)
        throw std::runtime_error("boundary flux: series did not converge; "
                                 "increase SeriesSpec::max_terms");
    const double v =
        kPi / (g.alpha * g.alpha * s * d) * std::exp(expo) * sum;
    return v > 0.0 ? v : 0.0;
}

// First-passage density of a 1-D Brownian motion with drift mu and
// volatility sigma started distance d below an upper barrier.
double scalar_fpt_density(double s, double d, double mu, double sigma) {
    if (!(s > 0.0) || !(d > 0.0)) return 0.0;
    const double var = sigma * sigma * s;
    const double dev = d - mu * s;
    const double expo = -dev * dev / (2.0 * var);
    if (expo < -745.0) return 0.0;
    return d / (sigma * std::sqrt(2.0 * kPi * s * s * s)) * std::exp(expo);
}

// Canonical transform for two GBM names: X = -log S turns the lower asset
// barriers into upper barriers for a correlated Wiener process.
struct Canonical {
    WedgeGeometry geom;
    double mu_star;
    double sigma;
};

Canonical canonical_geometry(double rho, const AssetParams& assets) {
    assets.validate();
    const double mu_star = -(assets.mu - 0.5 * assets.sigma * assets.sigma);
    const std::array<double, 2> x0 = {-std::log(assets.s0[0]),
                                      -std::log(assets.s0[1])};
    const std::array<double, 2> b = {-std::log(assets.barriers[0]),
                                     -std::log(assets.barriers[1])};
    return {build_wedge_geometry(rho, mu_star, mu_star, assets.sigma,
                                 assets.sigma, x0, b),
            mu_star, assets.sigma};
}

// Range of the other name's barrier distance that carries the mass of the
// flux-times-passage integrand.
double flux_distance_cut(const Canonical& c, double s, double lag,
                         double tail_sigmas) {
    const double sig = c.sigma;
    const double from_flux =
        c.geom.r0_bar / sig + tail_sigmas * c.geom.k3 * std::sqrt(s) / sig;
    const double from_passage =
        std::max(0.0, c.mu_star * lag) + tail_sigmas * sig * std::sqrt(lag);
    return std::max(from_flux, from_passage);
}

double fpt_density_impl(const Canonical& c, double t1, double t2,
                        const SeriesSpec& series, const QuadratureSpec& quad) {
    const int face = t1 < t2 ? 1 : 2;
    const double s = std::min(t1, t2);
    const double lag = std::abs(t2 - t1);
    const double d_max = flux_distance_cut(c, s, lag, quad.tail_cut_sigmas);
    auto integrand = [&](double d) {
        return boundary_flux(face, s, d, c.geom, series) *
               scalar_fpt_density(lag, d, c.mu_star, c.sigma);
    };
    QuadResult r = integrate_1d(integrand, 0.0, d_max, quad);
    if (!r.converged)
        throw std::runtime_error("conditional_fpt_density: quadrature did not converge");
    return std::max(r.value, 0.0);
}

double trapezoid_2d(const std::vector<double>& t1,
                    const std::vector<double>& t2,
                    const std::vector<std::vector<double>>& f, int stride) {
    double total = 0.0;
    for (std::size_t i = stride; i < t1.size(); i += stride) {
        const double h1 = t1[i] - t1[i - stride];
        for (std::size_t j = stride; j < t2.size(); j += stride) {
            const double h2 = t2[j] - t2[j - stride];
            total += 0.25 * h1 * h2 *
                     (f[i][j] + f[i - stride][j] + f[i][j - stride] +
                      f[i - stride][j - stride]);
        }
    }
    return total;
}

} // namespace

WedgeGeometry build_wedge_geometry(double rho, double mu1, double mu2,
                                   double sigma1, double sigma2,
                                   const std::array<double, 2>& x0,
                                   const std::array<double, 2>& barriers) {
    if (!(std::abs(rho) < 1.0))
        throw std::domain_error("build_wedge_geometry: |rho| < 1 required");
    if (!(sigma1 > 0.0 && sigma2 > 0.0))
        throw std::domain_error("build_wedge_geometry: volatilities must be positive");
    for (int i = 0; i < 2; ++i)
        if (!(x0[i] < barriers[i]))
            throw std::domain_error("build_wedge_geometry: x0 must start below the barriers");

    WedgeGeometry g;
    g.rho = rho;
    g.sigma1 = sigma1;
    g.sigma2 = sigma2;
    g.barriers_transformed = barriers;
    g.x0_transformed = x0;
    const double omr = 1.0 - rho * rho;
    g.k1 = (sigma2 * mu1 - rho * sigma1 * mu2) / (sigma1 * sigma1 * sigma2 * omr);
    g.k2 = (sigma1 * mu2 - rho * sigma2 * mu1) / (sigma1 * sigma2 * sigma2 * omr);
    g.k3 = sigma1 * sigma2 * std::sqrt(omr);
    g.lambda_kill = (sigma1 * sigma1 * mu2 * mu2 -
                     2.0 * rho * sigma1 * sigma2 * mu1 * mu2 +
                     sigma2 * sigma2 * mu1 * mu1) /
                    (2.0 * g.k3 * g.k3);
    g.alpha = std::atan2(std::sqrt(omr), -rho);
    const PolarPoint p0 = wedge_polar(x0, g);
    g.r0_bar = p0.r_bar;
    g.phi0 = p0.phi;
    return g;
}

PolarPoint wedge_polar(const std::array<double, 2>& x, const WedgeGeometry& geom) {
    const double d1 = geom.barriers_transformed[0] - x[0];
    const double d2 = geom.barriers_transformed[1] - x[1];
    const double y1 = geom.sigma2 * d1 - geom.rho * geom.sigma1 * d2;
    const double y2 = geom.sigma1 * std::sqrt(1.0 - geom.rho * geom.rho) * d2;
    return {std::hypot(y1, y2), std::atan2(y2, y1)};
}

double wedge_kernel_H(double r_bar, double r0_bar, double phi, double phi0,
                      double t, const WedgeGeometry& geom,
                      const SeriesSpec& series) {
    if (!(t > 0.0)) throw std::domain_error("wedge_kernel_H: t > 0 required");
    if (phi < 0.0 || phi > geom.alpha || phi0 < 0.0 || phi0 > geom.alpha)
        throw std::domain_error("wedge_kernel_H: angles must lie in [0, alpha]");
    const double z = r_bar * r0_bar / (geom.k3 * geom.k3 * t);
    return std::exp(z) * kernel_h_scaled(phi, phi0, z, geom.alpha, series);
}

double killed_density(const std::array<double, 2>& x, double t,
                      const WedgeGeometry& geom, const SeriesSpec& series) {
    if (!(t > 0.0)) throw std::domain_error("killed_density: t > 0 required");
    if (x[0] >= geom.barriers_transformed[0] || x[1] >= geom.barriers_transformed[1])
        return 0.0;
    const PolarPoint p = wedge_polar(x, geom);
    const double z = p.r_bar * geom.r0_bar / (geom.k3 * geom.k3 * t);
    const double gap = p.r_bar - geom.r0_bar;
    const double expo =
        geom.k1 * (x[0] - geom.x0_transformed[0]) +
        geom.k2 * (x[1] - geom.x0_transformed[1]) - geom.lambda_kill * t -
        gap * gap / (2.0 * geom.k3 * geom.k3 * t);
    if (expo < -745.0) return 0.0;
    const double h = kernel_h_scaled(p.phi, geom.phi0, z, geom.alpha, series);
    const double v = 2.0 / (geom.alpha * geom.k3 * t) * std::exp(expo) * h;
    return v > 0.0 ? v : 0.0;
}

double conditional_survival_probability(double t, double rho,
                                        const AssetParams& assets,
                                        const SeriesSpec& series,
                                        const QuadratureSpec& quad) {
    if (!(t > 0.0))
        throw std::domain_error("conditional_survival_probability: t > 0 required");
    quad.validate();
    const Canonical c = canonical_geometry(rho, assets);
    const double spread = quad.tail_cut_sigmas * c.sigma * std::sqrt(t);
    Rectangle dom;
    dom.x_hi = c.geom.barriers_transformed[0];
    dom.y_hi = c.geom.barriers_transformed[1];
    dom.x_lo = std::min(c.geom.x0_transformed[0],
                        c.geom.x0_transformed[0] + c.mu_star * t) - spread;
    dom.y_lo = std::min(c.geom.x0_transformed[1],
                        c.geom.x0_transformed[1] + c.mu_star * t) - spread;
    auto f = [&](double x1, double x2) {
        return killed_density({x1, x2}, t, c.geom, series);
    };
    QuadResult r = integrate_2d(f, dom, quad);
    if (!r.converged)
        throw std::runtime_error(
            "conditional_survival_probability: quadrature did not converge");
    return std::clamp(r.value, 0.0, 1.0);
}

double conditional_fpt_density(double t1, double t2, double rho,
                               const AssetParams& assets,
                               const SeriesSpec& series,
                               const QuadratureSpec& quad) {
    if (!(t1 > 0.0 && t2 > 0.0))
        throw std::domain_error("conditional_fpt_density: times must be positive");
    if (t1 == t2)
        throw std::invalid_argument(
            "conditional_fpt_density: t1 == t2 is degenerate; evaluate the "
            "symmetric limit on a grid instead");
    quad.validate();
    const Canonical c = canonical_geometry(rho, assets);
    return fpt_density_impl(c, t1, t2, series, quad);
}

TimeGrid2D TimeGrid2D::uniform(double T1, double T2, int n1, int n2) {
    if (!(T1 > 0.0 && T2 > 0.0) || n1 < 2 || n2 < 2)
        throw std::invalid_argument("TimeGrid2D: positive horizons and n >= 2");
    TimeGrid2D g;
    g.t1_points.reserve(n1);
    g.t2_points.reserve(n2);
    for (int i = 1; i <= n1; ++i) g.t1_points.push_back(T1 * i / n1);
    for (int j = 1; j <= n2; ++j) g.t2_points.push_back(T2 * j / n2);
    return g;
}

void TimeGrid2D::validate() const {
    auto check = [](const std::vector<double>& t) {
        if (t.empty() || !(t.front() > 0.0))
            throw std::invalid_argument("TimeGrid2D: points must start above 0");
        for (std::size_t i = 1; i < t.size(); ++i)
            if (!(t[i] > t[i - 1]))
                throw std::invalid_argument("TimeGrid2D: points must be increasing");
    };
    check(t1_points);
    check(t2_points);
}

FptResult conditional_fpt_probability(double T1, double T2, double rho,
                                      const AssetParams& assets,
                                      const TimeGrid2D& grid,
                                      const SeriesSpec& series,
                                      const QuadratureSpec& quad,
                                      bool with_error_estimate) {
    grid.validate();
    quad.validate();
    if (std::abs(grid.t1_points.back() - T1) > 1e-12 * std::max(1.0, T1) ||
        std::abs(grid.t2_points.back() - T2) > 1e-12 * std::max(1.0, T2))
        throw std::invalid_argument(
            "conditional_fpt_probability: grid must end at (T1, T2)");
    const Canonical c = canonical_geometry(rho, assets);

    // Density grid including the zero row/column where the density vanishes.
    std::vector<double> t1 = {0.0}, t2 = {0.0};
    t1.insert(t1.end(), grid.t1_points.begin(), grid.t1_points.end());
    t2.insert(t2.end(), grid.t2_points.begin(), grid.t2_points.end());
    const std::size_t n1 = t1.size(), n2 = t2.size();
    std::vector<std::vector<double>> f(n1, std::vector<double>(n2, 0.0));

    // The flux factor depends on (min(t1,t2), d) only, so evaluate it once
    // per row at fixed Gauss nodes and sweep the other time with cheap
    // one-dimensional passage densities.
    const int n_nodes = 64;
    std::vector<double> nodes(n_nodes), weights(n_nodes), flux(n_nodes);
    const double h1_min = t1[1] - t1[0];
    const double h2_min = t2[1] - t2[0];
    for (int face = 1; face <= 2; ++face) {
        const std::vector<double>& ts = face == 1 ? t1 : t2;
        const std::vector<double>& to = face == 1 ? t2 : t1;
        const double lag_max =
            face == 1 ? t2.back() - t1.front() : t1.back() - t2.front();
        for (std::size_t i = 1; i < ts.size(); ++i) {
            const double s = ts[i];
            const double d_max =
                flux_distance_cut(c, s, lag_max, quad.tail_cut_sigmas);
            gauss_legendre(n_nodes, 0.0, d_max, nodes.data(), weights.data());
            for (int k = 0; k < n_nodes; ++k)
                flux[k] = boundary_flux(face, s, nodes[k], c.geom, series);
            for (std::size_t j = 1; j < to.size(); ++j) {
                if (!(to[j] > s)) continue;
                const double lag = to[j] - s;
                double v = 0.0;
                for (int k = 0; k < n_nodes; ++k)
                    v += weights[k] * flux[k] *
                         scalar_fpt_density(lag, nodes[k], c.mu_star, c.sigma);
                if (face == 1)
                    f[i][j] = std::max(v, 0.0);
                else
                    f[j][i] = std::max(v, 0.0);
            }
        }
    }
    // Equal-time nodes sit on the removable diagonal singularity; use the
    // symmetric half-step average of the two one-sided branches.
    for (std::size_t i = 1; i < n1; ++i)
        for (std::size_t j = 1; j < n2; ++j)
            if (std::abs(t1[i] - t2[j]) < 1e-12) {
                const double h = 0.5 * std::min(h1_min, h2_min);
                f[i][j] = 0.5 * (fpt_density_impl(c, t1[i], t2[j] + h, series, quad) +
                                 fpt_density_impl(c, t1[i] + h, t2[j], series, quad));
            }

    FptResult out;
    out.n1 = static_cast<int>(grid.t1_points.size());
    out.n2 = static_cast<int>(grid.t2_points.size());
    const double full = trapezoid_2d(t1, t2, f, 1);
    out.value = std::clamp(full, 0.0, 1.0);
    // The density has a mild integrable singularity on the equal-time
    // diagonal, so the trapezoid converges at first order and a same-data
    // stride-2 comparison misses the grid-dependent diagonal values. Estimate
    // the error against a genuine half-resolution recomputation:
    // |I_h - I_2h| ~ err_h at first order, doubled as a safety margin for
    // pre-asymptotic convergence ratios.
    if (!with_error_estimate) {
        out.error_estimate = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    if ((n1 - 1) % 2 == 0 && (n2 - 1) % 2 == 0 && n1 > 4 && n2 > 4) {
        TimeGrid2D coarse;
        for (std::size_t i = 2; i < n1; i += 2) coarse.t1_points.push_back(t1[i]);
        for (std::size_t j = 2; j < n2; j += 2) coarse.t2_points.push_back(t2[j]);
        const FptResult half = conditional_fpt_probability(
            T1, T2, rho, assets, coarse, series, quad, false);
        out.error_estimate = 2.0 * std::abs(full - half.value);
    } else {
        out.error_estimate = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

MixResult mix_over_correlation(const std::function<double(double)>& quantity,
                               const CorrelationModel& model, double theta0,
                               double T, int n_draws, std::uint64_t seed) {
    if (n_draws < 2)
        throw std::invalid_argument("mix_over_correlation: n_draws >= 2 required");
    const std::vector<double> draws =
        sample_terminal_correlation(model, theta0, T, n_draws, seed);
    MixResult out;
    std::vector<double> values;
    values.reserve(draws.size());
    const int budget = std::max(1, n_draws / 100);
    for (double rho : draws) {
        try {
            values.push_back(quantity(rho));
        } catch (const std::exception&) {
            if (++out.n_failures > budget)
                throw std::runtime_error(
                    "mix_over_correlation: failure budget exceeded");
        }
    }
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    out.mean = mean;
    out.standard_error = std::sqrt(ss / (n * (n - 1.0)));
    return out;
}

} // namespace circred

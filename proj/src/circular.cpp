#include "circred/circular.hpp"
#include "circred/rng.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace circred {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void CorrelationModel::validate() const {
    if (!(sigma_theta >= 0.0))
        throw std::invalid_argument("CorrelationModel: sigma_theta >= 0 required");
    if (kind == DiffusionKind::VonMises && lambda < 0.0)
        throw std::invalid_argument("CorrelationModel: lambda >= 0 required");
}

double wrap_angle(double theta) {
    double w = std::fmod(theta, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w;
}

double wrapped_normal_density(double theta, double theta0, double variance,
                              const SeriesSpec& series) {
    series.validate();
    if (!(variance > 0.0))
        throw std::invalid_argument("wrapped_normal_density: variance > 0 required");
    const double delta = theta - theta0;
    double sum = 1.0;
    for (int n = 1; n <= series.max_terms; ++n) {
        const double term = 2.0 * std::exp(-0.5 * n * n * variance) * std::cos(n * delta);
        sum += term;
        // Fourier coefficients decay monotonically; the first omitted term
        // bounds the truncation error.
        if (2.0 * std::exp(-0.5 * (n + 1.0) * (n + 1.0) * variance) <
            series.term_tol * std::abs(sum))
            break;
    }
    double v = sum / kTwoPi;
    return v > 0.0 ? v : 0.0;
}

VonMisesTransition::VonMisesTransition(const CorrelationModel& model, int modes)
    : model_(model), modes_(modes) {
    model_.validate();
    if (model_.kind != DiffusionKind::VonMises)
        throw std::invalid_argument("VonMisesTransition: model.kind must be VonMises");
    if (modes_ < 4) throw std::invalid_argument("VonMisesTransition: modes >= 4");
    const int n = 2 * modes_ + 1;
    generator_ = Eigen::MatrixXd::Zero(n, n);
    // Fourier modes m = -M..M of the Fokker-Planck generator:
    //   dc_m/dt = (lambda*m/2)(c_{m-1} - c_{m+1}) - (sigma^2 m^2 / 2) c_m
    const double s2 = model_.sigma_theta * model_.sigma_theta;
    for (int m = -modes_; m <= modes_; ++m) {
        const int i = m + modes_;
        generator_(i, i) = -0.5 * s2 * m * m;
        if (m - 1 >= -modes_) generator_(i, i - 1) += 0.5 * model_.lambda * m;
        if (m + 1 <= modes_) generator_(i, i + 1) -= 0.5 * model_.lambda * m;
    }
}

const Eigen::MatrixXd& VonMisesTransition::propagator(double dt) const {
    auto it = cache_.find(dt);
    if (it == cache_.end()) {
        Eigen::MatrixXd p = (generator_ * dt).exp();
        it = cache_.emplace(dt, std::move(p)).first;
    }
    return it->second;
}

double VonMisesTransition::density(double theta, double theta0, double dt) const {
    if (!(dt > 0.0))
        throw std::invalid_argument("VonMisesTransition: dt > 0 required");
    const Eigen::MatrixXd& P = propagator(dt);
    const int n = 2 * modes_ + 1;
    const double u = theta - model_.mu;
    const double u0 = theta0 - model_.mu;
    Eigen::VectorXd vre(n), vim(n);
    for (int m = -modes_; m <= modes_; ++m) {
        vre(m + modes_) = std::cos(m * u0) / kTwoPi;
        vim(m + modes_) = -std::sin(m * u0) / kTwoPi;
    }
    Eigen::VectorXd wre = P * vre;
    Eigen::VectorXd wim = P * vim;
    double p = 0.0, tail = 0.0, total = 0.0;
    for (int m = -modes_; m <= modes_; ++m) {
        const int i = m + modes_;
        const double mag = std::hypot(wre(i), wim(i));
        total += mag;
        if (std::abs(m) == modes_) tail += mag;
        p += wre(i) * std::cos(m * u) - wim(i) * std::sin(m * u);
    }
    if (tail > 1e-8 * total)
        throw std::runtime_error(
            "VonMisesTransition: spectral truncation not converged; increase modes");
    return p > 0.0 ? p : 0.0;
}

double von_mises_transition_density(double theta, double theta0,
                                    const CorrelationModel& model, double dt,
                                    int modes) {
    VonMisesTransition solver(model, modes);
    return solver.density(theta, theta0, dt);
}

double von_mises_stationary_density(double theta, const CorrelationModel& model) {
    model.validate();
    const double kappa =
        2.0 * model.lambda / (model.sigma_theta * model.sigma_theta);
    return std::exp(kappa * (std::cos(theta - model.mu) - 1.0)) /
           (kTwoPi * bessel_i_scaled(0.0, kappa));
}

AnglePath simulate_angle_path(const CorrelationModel& model, double theta0,
                              double dt, int n_steps, std::uint64_t seed) {
    model.validate();
    if (!(dt > 0.0) || n_steps < 1)
        throw std::invalid_argument("simulate_angle_path: dt > 0 and n_steps >= 1");
    AnglePath path;
    path.seed = seed;
    path.times.reserve(n_steps + 1);
    path.angles.reserve(n_steps + 1);
    Rng rng(seed, 0);
    double theta = wrap_angle(theta0);
    path.times.push_back(0.0);
    path.angles.push_back(theta);
    const double sq = model.sigma_theta * std::sqrt(dt);
    for (int k = 1; k <= n_steps; ++k) {
        double drift = 0.0;
        if (model.kind == DiffusionKind::VonMises)
            drift = -model.lambda * std::sin(theta - model.mu) * dt;
        theta = wrap_angle(theta + drift + sq * rng.next_normal());
        path.times.push_back(k * dt);
        path.angles.push_back(theta);
    }
    return path;
}

double angle_to_correlation(double theta, AngleMapping mapping) {
    const double c = std::cos(theta);
    return mapping == AngleMapping::Cosine ? c : c * c;
}

AngleWithJacobian correlation_to_angle(double rho, AngleMapping mapping) {
    if (mapping == AngleMapping::Cosine) {
        if (!(rho > -1.0 && rho < 1.0))
            throw std::domain_error("correlation_to_angle: rho in (-1,1) required");
        return {std::acos(rho), 1.0 / std::sqrt(1.0 - rho * rho)};
    }
    if (!(rho > 0.0 && rho < 1.0))
        throw std::domain_error("correlation_to_angle: rho in (0,1) required");
    return {std::acos(std::sqrt(rho)), 0.5 / std::sqrt(rho * (1.0 - rho))};
}

std::vector<double> sample_terminal_correlation(const CorrelationModel& model,
                                                double theta0, double T,
                                                int n_draws, std::uint64_t seed,
                                                double max_step) {
    model.validate();
    if (!(T > 0.0) || n_draws < 1)
        throw std::invalid_argument("sample_terminal_correlation: T > 0 and n_draws >= 1");
    const int n_steps = std::max(1, static_cast<int>(std::ceil(T / max_step)));
    const double dt = T / n_steps;
    const double sq = model.sigma_theta * std::sqrt(dt);
    std::vector<double> draws(n_draws);
    for (int i = 0; i < n_draws; ++i) {
        Rng rng(seed, static_cast<std::uint64_t>(i) + 1);
        double theta = wrap_angle(theta0);
        for (int k = 0; k < n_steps; ++k) {
            double drift = 0.0;
            if (model.kind == DiffusionKind::VonMises)
                drift = -model.lambda * std::sin(theta - model.mu) * dt;
            theta = wrap_angle(theta + drift + sq * rng.next_normal());
        }
        draws[i] = angle_to_correlation(theta, model.mapping);
    }
    return draws;
}

} // namespace circred

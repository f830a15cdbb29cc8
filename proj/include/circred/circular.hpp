#ifndef CIRCRED_CIRCULAR_HPP
#define CIRCRED_CIRCULAR_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "circred/special_functions.hpp"

namespace circred {

enum class DiffusionKind { CBM, VonMises };
enum class AngleMapping { Cosine, CosineSquared };

struct CorrelationModel {
    DiffusionKind kind = DiffusionKind::CBM;
    double sigma_theta = 1.0; // diffusion coefficient
    double lambda = 0.0;      // mean-reversion speed (VonMises)
    double mu = 0.0;          // long-run mean direction (VonMises)
    AngleMapping mapping = AngleMapping::Cosine;

    void validate() const;
};

struct AnglePath {
    std::vector<double> times;  // years, strictly increasing
    std::vector<double> angles; // radians, reduced mod 2*pi
    std::uint64_t seed = 0;
};

// Canonical representative in [0, 2*pi).
double wrap_angle(double theta);

// Fourier-series wrapped normal transition density on the circle.
double wrapped_normal_density(double theta, double theta0, double variance,
                              const SeriesSpec& series = {});

// Transition density of the von Mises (circular Ornstein-Uhlenbeck) process,
// computed by a spectral Fourier-Galerkin solution of the Fokker-Planck
// equation on the circle. The mode-coupling generator is exponentiated
// exactly; results are cached per time step.
class VonMisesTransition {
public:
    explicit VonMisesTransition(const CorrelationModel& model, int modes = 64);

    double density(double theta, double theta0, double dt) const;

private:
    const Eigen::MatrixXd& propagator(double dt) const;

    CorrelationModel model_;
    int modes_;
    Eigen::MatrixXd generator_;
    mutable std::map<double, Eigen::MatrixXd> cache_;
};

double von_mises_transition_density(double theta, double theta0,
                                    const CorrelationModel& model, double dt,
                                    int modes = 64);

double von_mises_stationary_density(double theta, const CorrelationModel& model);

// Euler-Maruyama path, reduced mod 2*pi, deterministic given seed.
AnglePath simulate_angle_path(const CorrelationModel& model, double theta0,
                              double dt, int n_steps, std::uint64_t seed);

double angle_to_correlation(double theta, AngleMapping mapping);

struct AngleWithJacobian {
    double angle;    // principal-branch angle
    double jacobian; // |d angle / d rho|
};

AngleWithJacobian correlation_to_angle(double rho, AngleMapping mapping);

// n_draws independent draws of rho at horizon T; draw i uses substream
// (seed, i), so results do not depend on evaluation order.
std::vector<double> sample_terminal_correlation(const CorrelationModel& model,
                                                double theta0, double T,
                                                int n_draws, std::uint64_t seed,
                                                double max_step = 1.0 / 252.0);

} // namespace circred

#endif

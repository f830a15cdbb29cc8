#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "circred/circular.hpp"
#include "circred/quadrature.hpp"
#include "oracles.hpp"

using namespace circred;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TEST_CASE("wrapped normal vs wrapped-sum oracle") {
    for (double v : {0.01, 0.1, 1.0, 10.0}) {
        double sup = 0.0;
        for (double th = 0.0; th < kTwoPi; th += 0.37) {
            const double a = wrapped_normal_density(th, 1.3, v);
            const double b = oracles::wrapped_normal_sum(th, 1.3, v);
            sup = std::max(sup, std::abs(a - b));
        }
        CHECK(sup < 1e-10);
    }
}

TEST_CASE("transition densities normalize") {
    auto wn = [](double th) { return wrapped_normal_density(th, 1.0, 0.3); };
    CHECK(integrate_1d(wn, 0, kTwoPi).value ==
          doctest::Approx(1.0).epsilon(1e-6));

    CorrelationModel m{DiffusionKind::VonMises, 1.0, 1.0, M_PI / 4,
                       AngleMapping::Cosine};
    VonMisesTransition vt(m);
    auto vm = [&](double th) { return vt.density(th, 2.0, 0.5); };
    CHECK(integrate_1d(vm, 0, kTwoPi).value ==
          doctest::Approx(1.0).epsilon(1e-6));
    auto stat = [&](double th) { return von_mises_stationary_density(th, m); };
    CHECK(integrate_1d(stat, 0, kTwoPi).value ==
          doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("lambda = 0 reduces to wrapped normal") {
    CorrelationModel m0{DiffusionKind::VonMises, 1.0, 0.0, 0.0,
                        AngleMapping::Cosine};
    VonMisesTransition vt0(m0);
    double worst = 0.0;
    for (double th = 0.0; th < kTwoPi; th += 0.7) {
        worst = std::max(worst, std::abs(vt0.density(th, 1.3, 0.4) -
                                         wrapped_normal_density(th, 1.3, 0.4)));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("Chapman-Kolmogorov residual") {
    CorrelationModel m{DiffusionKind::VonMises, 1.0, 1.0, M_PI / 4,
                       AngleMapping::Cosine};
    VonMisesTransition vt(m);
    auto ck = [&](double eta) {
        return vt.density(1.9, eta, 0.3) * vt.density(eta, 0.6, 0.2);
    };
    const double lhs = integrate_1d(ck, 0, kTwoPi).value;
    const double rhs = vt.density(1.9, 0.6, 0.5);
    CHECK(std::abs(lhs - rhs) < 1e-5);
}

TEST_CASE("long-horizon transition approaches the stationary law") {
    CorrelationModel m{DiffusionKind::VonMises, 1.0, 1.0, M_PI / 4,
                       AngleMapping::Cosine};
    VonMisesTransition vt(m);
    double sup = 0.0;
    for (double th = 0.0; th < kTwoPi; th += 0.3) {
        sup = std::max(sup, std::abs(vt.density(th, 2.5, 20.0) -
                                     von_mises_stationary_density(th, m)));
    }
    CHECK(sup < 1e-4);
}

TEST_CASE("von Mises transition vs Euler-Maruyama histogram") {
    CorrelationModel m{DiffusionKind::VonMises, 0.8, 1.5, 1.0,
                       AngleMapping::Cosine};
    const double theta0 = 2.0, T = 0.5;
    const int n_paths = 200000, n_bins = 24, n_steps = 250;
    std::vector<long> counts(n_bins, 0);
    for (int i = 0; i < n_paths; ++i) {
        Rng rng(2718, i + 1);
        double th = theta0;
        const double dt = T / n_steps;
        const double sq = m.sigma_theta * std::sqrt(dt);
        for (int k = 0; k < n_steps; ++k)
            th += -m.lambda * std::sin(th - m.mu) * dt + sq * rng.next_normal();
        ++counts[static_cast<int>(wrap_angle(th) / kTwoPi * n_bins)];
    }
    VonMisesTransition vt(m);
    int outside = 0;
    for (int b = 0; b < n_bins; ++b) {
        const double lo = kTwoPi * b / n_bins, hi = kTwoPi * (b + 1) / n_bins;
        auto f = [&](double th) { return vt.density(th, theta0, T); };
        const double p = integrate_1d(f, lo, hi).value;
        const double phat = static_cast<double>(counts[b]) / n_paths;
        const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / n_paths);
        if (std::abs(phat - p) > 3 * se) ++outside;
    }
    // 24 bins at 3 SE: an occasional outlier is expected noise
    CHECK(outside <= 1);
}

TEST_CASE("angle mappings and jacobians") {
    CHECK(angle_to_correlation(0.0, AngleMapping::Cosine) == 1.0);
    CHECK(angle_to_correlation(M_PI / 3, AngleMapping::Cosine) ==
          doctest::Approx(0.5).epsilon(1e-15));
    CHECK(angle_to_correlation(M_PI / 4, AngleMapping::CosineSquared) ==
          doctest::Approx(0.5).epsilon(1e-15));
    for (double rho : {0.05, 0.3, 0.7, 0.95}) {
        auto aj = correlation_to_angle(rho, AngleMapping::CosineSquared);
        CHECK(angle_to_correlation(aj.angle, AngleMapping::CosineSquared) ==
              doctest::Approx(rho).epsilon(1e-12));
        // |d phi / d rho| = 1 / (2 sqrt(rho (1 - rho)))
        CHECK(aj.jacobian ==
              doctest::Approx(0.5 / std::sqrt(rho * (1 - rho))).epsilon(1e-10));
        auto cj = correlation_to_angle(rho, AngleMapping::Cosine);
        CHECK(std::cos(cj.angle) == doctest::Approx(rho).epsilon(1e-12));
    }
}

TEST_CASE("terminal correlation draws are deterministic substreams") {
    CorrelationModel m{DiffusionKind::VonMises, 1.0, 2.0, M_PI / 4,
                       AngleMapping::Cosine};
    auto d1 = sample_terminal_correlation(m, 0.7, 1.0, 50, 42);
    auto d2 = sample_terminal_correlation(m, 0.7, 1.0, 50, 42);
    CHECK(d1 == d2);
    auto d3 = sample_terminal_correlation(m, 0.7, 1.0, 50, 43);
    CHECK(d1 != d3);
    for (double r : d1) {
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);
    }
}

#ifndef CIRCRED_QUADRATURE_HPP
#define CIRCRED_QUADRATURE_HPP

#include <functional>
#include <stdexcept>

namespace circred {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_subdivisions = 200;
    double tail_cut_sigmas = 8.0; // truncation half-width for unbounded domains

    void validate() const {
        if (!(abs_tol > 0) || !(rel_tol > 0))
            throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
        if (max_subdivisions < 1)
            throw std::invalid_argument("QuadratureSpec: max_subdivisions >= 1 required");
        if (!(tail_cut_sigmas >= 4))
            throw std::invalid_argument("QuadratureSpec: tail_cut_sigmas >= 4 required");
    }
};

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
    int subdivisions = 0;
};

// Globally adaptive Gauss-Kronrod 15(7) on [a,b].
QuadResult integrate_1d(const std::function<double(double)>& f,
                        double a, double b, const QuadratureSpec& spec = {});

struct Rectangle {
    double x_lo, x_hi, y_lo, y_hi;
};

// Iterated adaptive quadrature over an axis-aligned rectangle.
QuadResult integrate_2d(const std::function<double(double, double)>& f,
                        const Rectangle& domain, const QuadratureSpec& spec = {});

// Fixed-order Gauss-Legendre nodes/weights mapped to [a,b]; n in {16, 32, 64}.
void gauss_legendre(int n, double a, double b,
                    double* nodes, double* weights);

} // namespace circred

#endif

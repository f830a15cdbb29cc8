#include "circred/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace circred {

namespace {

// Gauss-Kronrod 15-point rule on [-1,1] (7-point Gauss embedded).
const double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
const double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
const double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Panel {
    double a, b, value, error;
};

Panel eval_panel(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int j = 0; j < 7; ++j) {
        fv[j] = f(c - h * kXgk[j]);
        fv[14 - j] = f(c + h * kXgk[j]);
    }
    fv[7] = f(c);
    double resk = kWgk[7] * fv[7];
    double resg = kWg[3] * fv[7];
    for (int j = 0; j < 7; ++j) {
        resk += kWgk[j] * (fv[j] + fv[14 - j]);
        if (j % 2 == 1) resg += kWg[j / 2] * (fv[j] + fv[14 - j]);
    }
    Panel p;
    p.a = a;
    p.b = b;
    p.value = resk * h;
    p.error = std::abs((resk - resg) * h);
    return p;
}

} // namespace

QuadResult integrate_1d(const std::function<double(double)>& f,
                        double a, double b, const QuadratureSpec& spec) {
    spec.validate();
    QuadResult res;
    if (a == b) return res;

    std::vector<Panel> panels;
    panels.push_back(eval_panel(f, a, b));
    int splits = 0;
    while (true) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        double worst_err = -1.0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].value;
            err += panels[i].error;
            if (panels[i].error > worst_err) {
                worst_err = panels[i].error;
                worst = i;
            }
        }
        const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
        if (err <= tol) {
            res.value = total;
            res.error_estimate = err;
            res.converged = true;
            res.subdivisions = splits;
            return res;
        }
        if (splits >= spec.max_subdivisions) {
            res.value = total;
            res.error_estimate = err;
            res.converged = false;
            res.subdivisions = splits;
            return res;
        }
        Panel w = panels[worst];
        const double mid = 0.5 * (w.a + w.b);
        panels[worst] = eval_panel(f, w.a, mid);
        panels.push_back(eval_panel(f, mid, w.b));
        ++splits;
    }
}

QuadResult integrate_2d(const std::function<double(double, double)>& f,
                        const Rectangle& domain, const QuadratureSpec& spec) {
    spec.validate();
    // Inner integrals are resolved a bit tighter than the outer request so
    // that their noise does not masquerade as outer structure.
    QuadratureSpec inner = spec;
    inner.abs_tol = 0.1 * spec.abs_tol;
    inner.rel_tol = 0.1 * spec.rel_tol;
    bool inner_ok = true;
    auto outer = [&](double x) {
        QuadResult r = integrate_1d(
            [&](double y) { return f(x, y); }, domain.y_lo, domain.y_hi, inner);
        if (!r.converged) inner_ok = false;
        return r.value;
    };
    QuadResult r = integrate_1d(outer, domain.x_lo, domain.x_hi, spec);
    r.converged = r.converged && inner_ok;
    return r;
}

void gauss_legendre(int n, double a, double b, double* nodes, double* weights) {
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        nodes[i] = xm - xl * z;
        nodes[n - 1 - i] = xm + xl * z;
        weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

} // namespace circred

#include "vollab/vstoxx.hpp"
#include "vollab/errors.hpp"
#include "vollab/math/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace vollab::vstoxx {

namespace {

double log1p_over(double w) {
    if (std::abs(w) < 1e-4) {
        return 1.0 + w * (-0.5 + w * (1.0 / 3.0 + w * -0.25));
    }
    return std::log1p(w) / w;
}

} // namespace

IndexWindow IndexWindow::from(const heston::HestonParams& params) {
    IndexWindow win;
    const double kt = params.kappa * win.tau_bar;
    win.a = -std::expm1(-kt) / kt;
    win.b = params.theta * (1.0 - win.a);
    return win;
}

double vstoxx_index(const heston::HestonParams& params) {
    params.validate();
    const IndexWindow win = IndexWindow::from(params);
    return 100.0 * std::sqrt(win.a * params.v0 + win.b);
}

double future_integrand(double s, const heston::HestonParams& params, double tau) {
    if (!(s > 0.0)) {
        throw ValidationError("future_integrand: s must be positive");
    }
    const double kappa = params.kappa, theta = params.theta, xi = params.xi;
    const IndexWindow win = IndexWindow::from(params);
    const double phi = -s * win.a;

    // C = -(2 kappa theta / xi^2) log(1 + (xi^2 phi / 2 kappa)(e^{-kappa tau} - 1)),
    // rearranged through log1p(w)/w so the xi -> 0 limit keeps full precision.
    const double w = (xi * xi * phi / (2.0 * kappa)) * std::expm1(-kappa * tau);
    const double c_term = -theta * phi * std::expm1(-kappa * tau) * log1p_over(w);
    // D = 2 kappa phi / (xi^2 phi + (2 kappa - xi^2 phi) e^{kappa tau}); the
    // denominator is summed as two positive terms.
    const double denom = 2.0 * kappa * std::exp(kappa * tau) - xi * xi * phi * std::expm1(kappa * tau);
    const double d_term = 2.0 * kappa * phi / denom;

    const double exponent = c_term + d_term * params.v0 - s * win.b;
    return std::pow(s, -1.5) * -std::expm1(exponent);
}

double vstoxx_future(const heston::HestonParams& params, double tau, const FutureGrid& grid,
                     bool serial_reference) {
    params.validate();
    if (tau < 0.0) {
        throw ValidationError("vstoxx_future: tau must be non-negative");
    }
    const auto integrand = [&](double s) {
        const double g = future_integrand(s, params, tau);
        if (!std::isfinite(g)) {
            throw NumericalError("vstoxx_future: non-finite integrand at s=" + std::to_string(s));
        }
        return g;
    };
    const double integral =
        quad::log_grid_trapezoid(integrand, grid.s_min, grid.s_max, grid.n_nodes, serial_reference);
    return 100.0 * integral / (2.0 * std::sqrt(std::numbers::pi));
}

} // namespace vollab::vstoxx

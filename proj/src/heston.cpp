#include "vollab/heston.hpp"
#include "vollab/black.hpp"
#include "vollab/errors.hpp"
#include "vollab/math/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace vollab::heston {

namespace {

using cplx = std::complex<double>;

// log(1 + w) for complex w without cancellation at small |w|.
cplx log1p_c(cplx w) {
    const double re = w.real(), im = w.imag();
    return {0.5 * std::log1p(2.0 * re + re * re + im * im), std::atan2(im, 1.0 + re)};
}

// log(1 + w) / w, continuous through w = 0.
cplx log1p_over(cplx w) {
    if (std::abs(w) < 1e-4) {
        return 1.0 + w * (-0.5 + w * (1.0 / 3.0 + w * (-0.25 + w / 5.0)));
    }
    return log1p_c(w) / w;
}

// exp(w) - 1 for complex w without cancellation at small |w|.
cplx expm1_c(cplx w) {
    const double re = w.real(), im = w.imag();
    const double half_sin = std::sin(0.5 * im);
    return {std::expm1(re) * std::cos(im) - 2.0 * half_sin * half_sin,
            std::exp(re) * std::sin(im)};
}

} // namespace

// Pricing-level sanity: variance-like fields strictly positive, correlation
// a correlation. The tighter calibration box is enforced by in_box() and the
// optimizer bounds, not here: limit checks (xi -> 0) price outside the box.
void HestonParams::validate() const {
    const auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError(std::string("heston: ") + name + "=" + std::to_string(v) +
                                  " must be positive and finite");
        }
    };
    positive(kappa, "kappa");
    positive(theta, "theta");
    positive(xi, "xi");
    positive(v0, "v0");
    if (!(rho >= kRhoBounds.lo) || !(rho <= kRhoBounds.hi)) {
        throw ValidationError("heston: rho=" + std::to_string(rho) + " outside [-1, 1]");
    }
}

bool HestonParams::in_box() const {
    return kappa >= kKappaBounds.lo && kappa <= kKappaBounds.hi && theta >= kThetaBounds.lo &&
           theta <= kThetaBounds.hi && xi >= kXiBounds.lo && xi <= kXiBounds.hi &&
           rho >= kRhoBounds.lo && rho <= kRhoBounds.hi && v0 >= kV0Bounds.lo &&
           v0 <= kV0Bounds.hi;
}

// The usual A + B*v0 exponents, rearranged so that beta - d is evaluated as
// -xi^2 y / (beta + d) and the log ratio as a single log1p. The rearrangement
// is algebraically identical to the branch-continuous formulation but keeps
// full precision in the xi -> 0 limit, where the raw subtraction loses the
// entire O(xi^2) signal.
std::complex<double> characteristic_fn(cplx z, double tau, const HestonParams& params) {
    if (!(tau > 0.0)) {
        throw ValidationError("characteristic_fn: tau must be positive");
    }
    const double kappa = params.kappa, theta = params.theta, xi = params.xi;
    if (z == cplx(0.0, 0.0)) {
        return {1.0, 0.0};
    }
    const cplx beta = kappa - cplx(0.0, 1.0) * params.rho * xi * z;
    const cplx y = z * z + cplx(0.0, 1.0) * z;
    const cplx d = std::sqrt(beta * beta + xi * xi * y);
    const cplx p = beta + d;                      // Re(d) >= 0 keeps |p| away from 0
    const cplx g = -(xi * xi) * y / (p * p);      // (beta - d)/(beta + d)
    const cplx em = -expm1_c(-d * tau);           // 1 - e^{-d tau}
    const cplx one_minus_ge = (1.0 - g) + g * em; // 1 - g e^{-d tau}
    const cplx b_coef = -y * em / (p * one_minus_ge);
    const cplx w = g * em / (1.0 - g);
    const cplx w_over_xi2 = -y * em / (p * p * (1.0 - g));
    const cplx a_coef = kappa * theta * (-y * tau / p - 2.0 * w_over_xi2 * log1p_over(w));
    return std::exp(a_coef + b_coef * params.v0);
}

std::vector<double> heston_call_batch(const HestonParams& params, double forward,
                                      const std::vector<double>& strikes, double tau,
                                      double integration_tol) {
    params.validate();
    if (!(forward > 0.0)) {
        throw ValidationError("heston_call: forward must be positive");
    }
    if (!(tau > 0.0)) {
        throw ValidationError("heston_call: tau must be positive");
    }
    const std::size_t n = strikes.size();
    std::vector<double> log_moneyness(n);
    std::vector<double> tol(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!(strikes[j] > 0.0)) {
            throw ValidationError("heston_call: strike must be positive");
        }
        log_moneyness[j] = std::log(forward / strikes[j]);
        // price tolerance integration_tol * forward, mapped through the
        // sqrt(F K)/pi prefactor
        tol[j] = integration_tol * forward * std::numbers::pi / std::sqrt(forward * strikes[j]);
    }

    // Substitution u = (1 - t)/t maps t in (0, 1] onto u in [0, inf).
    const auto integrand = [&](double t, std::vector<double>& out) {
        if (t <= 0.0) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        const double u = (1.0 - t) / t;
        const cplx cf = characteristic_fn(cplx(u, -0.5), tau, params);
        const double jac = 1.0 / (t * t);
        const double denom = u * u + 0.25;
        for (std::size_t j = 0; j < n; ++j) {
            const double phase = u * log_moneyness[j];
            const double re = cf.real() * std::cos(phase) - cf.imag() * std::sin(phase);
            out[j] = re / denom * jac;
        }
    };

    std::vector<double> integral;
    try {
        integral = quad::adaptive_lobatto_vec(integrand, 0.0, 1.0, tol);
    } catch (const NumericalError&) {
        throw NumericalError("heston_call: quadrature failed to reach tolerance " +
                             std::to_string(integration_tol));
    }
    std::vector<double> prices(n);
    for (std::size_t j = 0; j < n; ++j) {
        prices[j] =
            forward - std::sqrt(forward * strikes[j]) / std::numbers::pi * integral[j];
    }
    return prices;
}

double heston_call(const HestonParams& params, double forward, double strike, double tau,
                   double integration_tol) {
    return heston_call_batch(params, forward, {strike}, tau, integration_tol)[0];
}

double heston_put(const HestonParams& params, double forward, double strike, double tau,
                  double integration_tol) {
    // Same integral; only the residue term differs.
    return heston_call(params, forward, strike, tau, integration_tol) - (forward - strike);
}

std::vector<double> model_smile(const HestonParams& params, double forward,
                                const std::vector<double>& strikes, double tau) {
    const std::vector<double> prices = heston_call_batch(params, forward, strikes, tau);
    std::vector<double> vols(strikes.size());
    for (std::size_t j = 0; j < strikes.size(); ++j) {
        try {
            vols[j] = black::implied_vol(prices[j], forward, strikes[j], tau, true);
        } catch (const NumericalError& e) {
            throw NumericalError("model_smile: inversion failed at strike " +
                                 std::to_string(strikes[j]) + ": " + e.what());
        }
    }
    return vols;
}

} // namespace vollab::heston

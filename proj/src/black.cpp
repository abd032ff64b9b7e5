#include "vollab/black.hpp"
#include "vollab/errors.hpp"
#include "vollab/math/normal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vollab::black {

namespace {

void check_domain(double forward, double strike, double tau, double sigma) {
    if (!(forward > 0.0) || !(strike > 0.0)) {
        throw ValidationError("black: forward and strike must be positive");
    }
    if (tau < 0.0 || sigma < 0.0 || !std::isfinite(tau) || !std::isfinite(sigma)) {
        throw ValidationError("black: tau and sigma must be non-negative and finite");
    }
}

double intrinsic(double forward, double strike, bool is_call) {
    return is_call ? std::max(forward - strike, 0.0) : std::max(strike - forward, 0.0);
}

} // namespace

double black_price(double forward, double strike, double tau, double sigma, bool is_call) {
    check_domain(forward, strike, tau, sigma);
    const double stddev = sigma * std::sqrt(tau);
    if (stddev <= 0.0) {
        return intrinsic(forward, strike, is_call);
    }
    const double d1 = std::log(forward / strike) / stddev + 0.5 * stddev;
    const double d2 = d1 - stddev;
    if (is_call) {
        return forward * norm_cdf(d1) - strike * norm_cdf(d2);
    }
    return strike * norm_cdf(-d2) - forward * norm_cdf(-d1);
}

double vega(double spot_or_forward, double strike, double tau, double sigma, double mu) {
    if (!(spot_or_forward > 0.0) || !(strike > 0.0)) {
        throw ValidationError("vega: spot and strike must be positive");
    }
    if (!(tau > 0.0) || !(sigma > 0.0)) {
        throw ValidationError("vega: tau and sigma must be positive");
    }
    const double sqrt_tau = std::sqrt(tau);
    const double d1 =
        (std::log(spot_or_forward / strike) + (mu + 0.5 * sigma * sigma) * tau) / (sigma * sqrt_tau);
    return spot_or_forward * sqrt_tau * norm_pdf(d1);
}

double implied_vol(double price, double forward, double strike, double tau, bool is_call) {
    check_domain(forward, strike, tau, 0.0);
    if (!(tau > 0.0)) {
        throw ValidationError("implied_vol: tau must be positive");
    }
    const double lower = intrinsic(forward, strike, is_call);
    const double upper = is_call ? forward : strike;
    if (!(price > lower) || !(price < upper)) {
        throw NoSolutionError("implied_vol: price " + std::to_string(price) +
                              " outside the open no-arbitrage band (" + std::to_string(lower) +
                              ", " + std::to_string(upper) + ")");
    }

    // Work on the out-of-the-money side; an in-the-money quote carries its
    // extrinsic value only in the difference to parity, so peel it off once.
    bool solve_call = is_call;
    double target = price;
    if (is_call && forward > strike) {
        solve_call = false;
        target = price - (forward - strike);
    } else if (!is_call && strike > forward) {
        solve_call = true;
        target = price + (forward - strike);
    }
    if (!(target > 0.0)) {
        throw NoSolutionError("implied_vol: extrinsic value vanishes at double precision");
    }

    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 80 && black_price(forward, strike, tau, hi, solve_call) < target; ++i) {
        lo = hi;
        hi *= 2.0;
    }

    const double tol = 1e-14 * target;
    const double log_target = std::log(target);
    double sigma = 0.5 * (lo + hi);
    for (int iter = 0; iter < 100; ++iter) {
        const double model = black_price(forward, strike, tau, sigma, solve_call);
        const double diff = model - target;
        if (std::abs(diff) <= tol) {
            return sigma;
        }
        if (diff > 0.0) {
            hi = sigma;
        } else {
            lo = sigma;
        }
        double next = sigma;
        const double slope = vega(forward, strike, tau, sigma);
        if (slope > 0.0 && model > 0.0) {
            // Newton on log-price: far from the money the price spans dozens
            // of orders of magnitude per unit vol, raw Newton barely moves.
            next = sigma - (std::log(model) - log_target) * model / slope;
        }
        if (!(next > lo) || !(next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next == sigma) {
            return sigma; // bracket exhausted at double resolution
        }
        sigma = next;
    }
    return sigma; // bisection bracket is a few ulps wide by now
}

double moneyness(double forward, double strike, double sigma_atm, double tau) {
    if (!(forward > 0.0) || !(strike > 0.0) || !(sigma_atm > 0.0) || !(tau > 0.0)) {
        throw ValidationError("moneyness: all inputs must be positive");
    }
    return std::log(forward / strike) / (sigma_atm * std::sqrt(tau));
}

} // namespace vollab::black

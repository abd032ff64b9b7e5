#pragma once

#include <vector>

namespace vollab::black {

// One filtered option quote of a smile slice.
struct OptionQuote {
    double strike = 0.0;
    double implied_vol = 0.0;
    double price = 0.0;
    double vega = 0.0;
    double moneyness = 0.0;
    bool is_call = true;
};

// Undiscounted Black (forward-measure) price. Everything in this project is
// a forward price: rates and dividends are zero by convention.
double black_price(double forward, double strike, double tau, double sigma, bool is_call = true);

// S0 * sqrt(tau) * phi(d1) with d1 = (ln(S0/K) + (mu + sigma^2/2) tau) / (sigma sqrt(tau)).
// mu only shifts the weighting of quotes in calibration, never a price.
double vega(double spot_or_forward, double strike, double tau, double sigma, double mu = 0.0);

// Inverts black_price in sigma. Bisection-bracketed Newton, 100-iteration cap.
// Throws NoSolutionError for prices at or outside the no-arbitrage band.
double implied_vol(double price, double forward, double strike, double tau, bool is_call = true);

// ln(F/K) / (sigma_atm * sqrt(tau)). By convention the ATM implied vol is used
// for every strike of a slice.
double moneyness(double forward, double strike, double sigma_atm, double tau);

} // namespace vollab::black

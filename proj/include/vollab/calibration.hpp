#pragma once

#include "vollab/black.hpp"
#include "vollab/dates.hpp"
#include "vollab/heston.hpp"
#include "vollab/optim.hpp"
#include "vollab/vstoxx.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vollab::calib {

// One raw option-chain row as ingested (pre-filtering).
struct ChainRow {
    Date expiry;
    double strike = 0.0;
    double implied_vol = 0.0;
    double forward = 0.0;
};

// One expiry's filtered quotes with derived fields.
struct SmileSlice {
    Date as_of;
    Date expiry;
    double tau = 0.0;     // ACT/365
    double forward = 0.0;
    double atm_vol = 0.0; // implied vol of the strike nearest the forward
    std::vector<black::OptionQuote> quotes;
};

// One trading day's calibration inputs and observed prices.
struct MarketDay {
    Date date;
    SmileSlice slice;
    double vstoxx_observed = 0.0;
    Date future_expiry;
    double future_market_price = 0.0;
};

struct Weights {
    double smile = 10000.0; // w_sigma = 100^2
    double index = 2.0;     // w_idx
};

struct CalibrationResult {
    heston::HestonParams params;
    double objective = 0.0;
    double smile_mse = 0.0;
    double index_se = 0.0;
    bool converged = false;
    int n_evaluations = 0;
};

inline constexpr double kMoneynessMin = -14.0;
inline constexpr double kMoneynessMax = 5.0;
inline constexpr int kMaxDaysToExpiry = 300;

// Discards expiries beyond 300 calendar days, keeps the hindmost survivor,
// then filters quotes to moneyness in [-14, 5] computed with the ATM vol.
SmileSlice select_slice(const std::vector<ChainRow>& chain, Date as_of);

// Vega-weighted mean squared smile error against the model smile.
double smile_mse(const heston::HestonParams& params, const SmileSlice& slice);

// Squared error of the closed-form index level.
double index_se(const heston::HestonParams& params, double vstoxx_observed);

double combined_objective(const heston::HestonParams& params, const SmileSlice& slice,
                          double vstoxx_observed, const Weights& weights = Weights{});

// Differential evolution over the parameter box followed by a local polish.
// Never throws for optimizer trouble: non-convergence comes back as
// converged = false with the best point seen.
CalibrationResult calibrate_global(const SmileSlice& slice, double vstoxx_observed,
                                   std::uint64_t seed, const Weights& weights = Weights{});

// Local quasi-Newton refinement from the previous trading day's parameters.
CalibrationResult calibrate_warm(const SmileSlice& slice, double vstoxx_observed,
                                 const heston::HestonParams& prev,
                                 const Weights& weights = Weights{});

struct DayRecord {
    Date date;
    heston::HestonParams params;
    double objective = 0.0;
    double model_future = 0.0;
    double market_future = 0.0;
    double diff_price = 0.0;
    bool converged = false;
    bool ok = false;
    std::string error;
};

// First day cold-started, every following day warm-started from the previous
// successful fit. Per-day failures are recorded in the row, never thrown.
std::vector<DayRecord> run_timeseries(const std::vector<MarketDay>& days, std::uint64_t seed,
                                      const Weights& weights = Weights{},
                                      const vstoxx::FutureGrid& grid = vstoxx::FutureGrid{});

} // namespace vollab::calib

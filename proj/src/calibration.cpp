#include "vollab/calibration.hpp"
#include "vollab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vollab::calib {

namespace {

const std::vector<double> kBoxLo{heston::kKappaBounds.lo, heston::kThetaBounds.lo,
                                 heston::kXiBounds.lo, heston::kRhoBounds.lo,
                                 heston::kV0Bounds.lo};
const std::vector<double> kBoxHi{heston::kKappaBounds.hi, heston::kThetaBounds.hi,
                                 heston::kXiBounds.hi, heston::kRhoBounds.hi,
                                 heston::kV0Bounds.hi};

heston::HestonParams from_vector(const std::vector<double>& x) {
    return {x[0], x[1], x[2], x[3], x[4]};
}

std::vector<double> to_vector(const heston::HestonParams& p) {
    return {p.kappa, p.theta, p.xi, p.rho, p.v0};
}

// Pricing faults inside the optimizer count as an infinitely bad point, not
// an abort: the box admits parameter sets the quadrature dislikes.
opt::Objective make_objective(const SmileSlice& slice, double vstoxx_observed,
                              const Weights& weights) {
    return [&slice, vstoxx_observed, weights](const std::vector<double>& x) {
        try {
            return combined_objective(from_vector(x), slice, vstoxx_observed, weights);
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::max();
        }
    };
}

CalibrationResult finish(const SmileSlice& slice, double vstoxx_observed, const Weights& weights,
                         const opt::OptResult& opt_result) {
    CalibrationResult result;
    result.params = from_vector(opt_result.x);
    result.converged = opt_result.converged;
    result.n_evaluations = opt_result.n_evaluations;
    try {
        result.smile_mse = smile_mse(result.params, slice);
        result.index_se = index_se(result.params, vstoxx_observed);
        result.objective = weights.smile * result.smile_mse + weights.index * result.index_se;
    } catch (const NumericalError&) {
        result.smile_mse = std::numeric_limits<double>::quiet_NaN();
        result.index_se = std::numeric_limits<double>::quiet_NaN();
        result.objective = opt_result.fx;
        result.converged = false;
    }
    return result;
}

} // namespace

SmileSlice select_slice(const std::vector<ChainRow>& chain, Date as_of) {
    if (chain.empty()) {
        throw DataError("select_slice: empty option chain");
    }
    Date best_expiry;
    bool found = false;
    for (const ChainRow& row : chain) {
        const std::int64_t days = row.expiry - as_of;
        if (days > 0 && days <= kMaxDaysToExpiry && (!found || row.expiry > best_expiry)) {
            best_expiry = row.expiry;
            found = true;
        }
    }
    if (!found) {
        throw DataError("select_slice: no expiry within " + std::to_string(kMaxDaysToExpiry) +
                        " days of " + as_of.to_string());
    }

    SmileSlice slice;
    slice.as_of = as_of;
    slice.expiry = best_expiry;
    slice.tau = year_fraction(as_of, best_expiry);

    std::vector<const ChainRow*> rows;
    for (const ChainRow& row : chain) {
        if (row.expiry == best_expiry) {
            rows.push_back(&row);
        }
    }
    slice.forward = rows.front()->forward;

    // ATM vol: strike nearest the forward, ties to the lower strike.
    const ChainRow* atm = rows.front();
    for (const ChainRow* row : rows) {
        const double d = std::abs(row->strike - slice.forward);
        const double d_atm = std::abs(atm->strike - slice.forward);
        if (d < d_atm || (d == d_atm && row->strike < atm->strike)) {
            atm = row;
        }
    }
    slice.atm_vol = atm->implied_vol;

    for (const ChainRow* row : rows) {
        const double m = black::moneyness(slice.forward, row->strike, slice.atm_vol, slice.tau);
        if (m < kMoneynessMin || m > kMoneynessMax) {
            continue;
        }
        black::OptionQuote quote;
        quote.strike = row->strike;
        quote.implied_vol = row->implied_vol;
        quote.price = black::black_price(slice.forward, row->strike, slice.tau, row->implied_vol);
        quote.vega = black::vega(slice.forward, row->strike, slice.tau, row->implied_vol);
        quote.moneyness = m;
        quote.is_call = true;
        slice.quotes.push_back(quote);
    }
    if (slice.quotes.empty()) {
        throw DataError("select_slice: moneyness filter removed every quote for " +
                        as_of.to_string());
    }
    return slice;
}

double smile_mse(const heston::HestonParams& params, const SmileSlice& slice) {
    if (slice.quotes.empty()) {
        throw ValidationError("smile_mse: empty slice");
    }
    std::vector<double> strikes(slice.quotes.size());
    for (std::size_t i = 0; i < slice.quotes.size(); ++i) {
        strikes[i] = slice.quotes[i].strike;
    }
    const std::vector<double> model_vols =
        heston::model_smile(params, slice.forward, strikes, slice.tau);
    double weighted = 0.0, total_vega = 0.0;
    for (std::size_t i = 0; i < slice.quotes.size(); ++i) {
        const double err = slice.quotes[i].implied_vol - model_vols[i];
        weighted += slice.quotes[i].vega * err * err;
        total_vega += slice.quotes[i].vega;
    }
    return weighted / total_vega;
}

double index_se(const heston::HestonParams& params, double vstoxx_observed) {
    if (!(vstoxx_observed > 0.0)) {
        throw ValidationError("index_se: observed index must be positive");
    }
    const double diff = vstoxx_observed - vstoxx::vstoxx_index(params);
    return diff * diff;
}

double combined_objective(const heston::HestonParams& params, const SmileSlice& slice,
                          double vstoxx_observed, const Weights& weights) {
    return weights.smile * smile_mse(params, slice) +
           weights.index * index_se(params, vstoxx_observed);
}

CalibrationResult calibrate_global(const SmileSlice& slice, double vstoxx_observed,
                                   std::uint64_t seed, const Weights& weights) {
    const auto objective = make_objective(slice, vstoxx_observed, weights);
    opt::DeSettings de;
    de.seed = seed;
    opt::OptResult global = opt::differential_evolution(objective, kBoxLo, kBoxHi, de);
    opt::OptResult polished = opt::lbfgsb_minimize(objective, global.x, kBoxLo, kBoxHi);
    polished.n_evaluations += global.n_evaluations;
    polished.converged = global.converged || polished.converged;
    if (global.fx < polished.fx) {
        polished.x = global.x;
        polished.fx = global.fx;
    }
    return finish(slice, vstoxx_observed, weights, polished);
}

CalibrationResult calibrate_warm(const SmileSlice& slice, double vstoxx_observed,
                                 const heston::HestonParams& prev, const Weights& weights) {
    prev.validate();
    const auto objective = make_objective(slice, vstoxx_observed, weights);
    const opt::OptResult local = opt::lbfgsb_minimize(objective, to_vector(prev), kBoxLo, kBoxHi);
    return finish(slice, vstoxx_observed, weights, local);
}

std::vector<DayRecord> run_timeseries(const std::vector<MarketDay>& days, std::uint64_t seed,
                                      const Weights& weights, const vstoxx::FutureGrid& grid) {
    for (std::size_t i = 1; i < days.size(); ++i) {
        if (!(days[i - 1].date < days[i].date)) {
            throw ValidationError("run_timeseries: days must be strictly sorted by date");
        }
    }
    std::vector<DayRecord> records;
    records.reserve(days.size());
    bool have_prev = false;
    heston::HestonParams prev{};
    for (const MarketDay& day : days) {
        DayRecord record;
        record.date = day.date;
        record.market_future = day.future_market_price;
        try {
            const CalibrationResult fit =
                have_prev ? calibrate_warm(day.slice, day.vstoxx_observed, prev, weights)
                          : calibrate_global(day.slice, day.vstoxx_observed, seed, weights);
            record.params = fit.params;
            record.objective = fit.objective;
            record.converged = fit.converged;
            const double tau_future = year_fraction(day.date, day.future_expiry);
            record.model_future = vstoxx::vstoxx_future(fit.params, tau_future, grid);
            record.diff_price = day.future_market_price - record.model_future;
            record.ok = true;
            prev = fit.params;
            have_prev = true;
        } catch (const std::exception& e) {
            record.ok = false;
            record.error = e.what();
        }
        records.push_back(std::move(record));
    }
    return records;
}

} // namespace vollab::calib

#include <doctest.h>

#include "vollab/calibration.hpp"
#include "vollab/errors.hpp"
#include "vollab/math/rng.hpp"
#include "vollab/vstoxx.hpp"

#include <cmath>

using namespace vollab;
using namespace vollab::calib;

namespace {

const heston::HestonParams kTrue{2.1, 0.045, 0.55, -0.62, 0.055};

// Chain of exact model quotes for one expiry.
std::vector<ChainRow> model_chain(const heston::HestonParams& params, Date as_of, Date expiry,
                                  double forward) {
    const double tau = year_fraction(as_of, expiry);
    const double atm_price = heston::heston_call(params, forward, forward, tau);
    const double atm_vol = black::implied_vol(atm_price, forward, forward, tau);
    const double moneyness_grid[] = {-4.5, -3.0, -2.0, -1.3, -0.8, -0.4, 0.0,
                                     0.4,  0.9,  1.5,  2.2,  3.0};
    std::vector<double> strikes;
    for (double m : moneyness_grid) {
        strikes.push_back(forward * std::exp(-m * atm_vol * std::sqrt(tau)));
    }
    const std::vector<double> vols = heston::model_smile(params, forward, strikes, tau);
    std::vector<ChainRow> chain;
    for (std::size_t i = 0; i < strikes.size(); ++i) {
        chain.push_back({expiry, strikes[i], vols[i], forward});
    }
    return chain;
}

SmileSlice model_slice(const heston::HestonParams& params, double forward = 3400.0,
                       int days_out = 280) {
    const Date as_of = Date::parse("2017-03-06");
    return select_slice(model_chain(params, as_of, as_of + days_out, forward), as_of);
}

} // namespace

TEST_CASE("select_slice keeps the hindmost expiry within 300 days") {
    const Date as_of = Date::parse("2017-03-06");
    std::vector<ChainRow> chain;
    for (int days : {30, 120, 280, 350}) {
        chain.push_back({as_of + days, 3400.0, 0.2, 3400.0});
    }
    const SmileSlice slice = select_slice(chain, as_of);
    CHECK(slice.expiry - as_of == 280);
    CHECK(slice.tau == doctest::Approx(280.0 / 365.0).epsilon(1e-12));
}

TEST_CASE("select_slice errors when every expiry is beyond 300 days") {
    const Date as_of = Date::parse("2017-03-06");
    const std::vector<ChainRow> chain{{as_of + 301, 3400.0, 0.2, 3400.0},
                                      {as_of + 400, 3400.0, 0.2, 3400.0}};
    CHECK_THROWS_AS(select_slice(chain, as_of), DataError);
}

TEST_CASE("an at-the-forward quote is always retained") {
    const Date as_of = Date::parse("2017-03-06");
    const std::vector<ChainRow> chain{{as_of + 100, 3400.0, 0.21, 3400.0}};
    const SmileSlice slice = select_slice(chain, as_of);
    CHECK(slice.quotes.size() == 1);
    CHECK(slice.quotes[0].moneyness == 0.0);
    CHECK(slice.atm_vol == 0.21);
}

TEST_CASE("the moneyness filter drops a quote at m = -15") {
    const Date as_of = Date::parse("2017-03-06");
    const double forward = 3400.0, atm_vol = 0.2;
    const double tau = 100.0 / 365.0;
    std::vector<ChainRow> chain{{as_of + 100, forward, atm_vol, forward}};
    const double far = forward * std::exp(15.0 * atm_vol * std::sqrt(tau));
    chain.push_back({as_of + 100, far, 0.3, forward});
    const SmileSlice slice = select_slice(chain, as_of);
    CHECK(slice.quotes.size() == 1); // the m = -15 strike is gone
    // m = -14 sits exactly on the boundary and stays
    std::vector<ChainRow> edge = chain;
    edge[1].strike = forward * std::exp(14.0 * atm_vol * std::sqrt(tau));
    CHECK(select_slice(edge, as_of).quotes.size() == 2);
}

TEST_CASE("smile_mse vanishes when model and market coincide") {
    const SmileSlice slice = model_slice(kTrue);
    CHECK(smile_mse(kTrue, slice) <= 1e-10);
}

TEST_CASE("smile_mse is the vega-weighted mean of squared vol errors") {
    SmileSlice slice = model_slice(kTrue);
    slice.quotes.resize(2);
    const double tau = slice.tau;
    std::vector<double> strikes{slice.quotes[0].strike, slice.quotes[1].strike};
    const auto model_vols = heston::model_smile(kTrue, slice.forward, strikes, tau);
    slice.quotes[0].vega = 1.0;
    slice.quotes[0].implied_vol = model_vols[0] + 0.1; // squared error 0.01
    slice.quotes[1].vega = 3.0;
    slice.quotes[1].implied_vol = model_vols[1]; // squared error 0
    CHECK(smile_mse(kTrue, slice) == doctest::Approx(0.0025).epsilon(1e-9));
}

TEST_CASE("smile_mse is invariant under uniform vega rescaling") {
    SmileSlice slice = model_slice(kTrue);
    for (auto& quote : slice.quotes) {
        quote.implied_vol += 0.01;
    }
    const double base = smile_mse(kTrue, slice);
    for (auto& quote : slice.quotes) {
        quote.vega *= 7.5;
    }
    CHECK(smile_mse(kTrue, slice) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("index squared error") {
    const heston::HestonParams params{2.0, 0.04, 0.5, -0.7, 0.04}; // index exactly 20
    CHECK(index_se(params, vstoxx::vstoxx_index(params)) <= 1e-24);
    CHECK(index_se(params, 22.0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(index_se(params, 21.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(index_se(params, 0.0), ValidationError);
}

TEST_CASE("combined objective applies the published weights") {
    const SmileSlice slice = model_slice(kTrue);
    const double idx = vstoxx::vstoxx_index(kTrue);
    // perfect smile, index off by one point -> 2.0
    CHECK(combined_objective(kTrue, slice, idx + 1.0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(combined_objective(kTrue, slice, idx) <= 1e-6);
    const Weights w{10000.0, 2.0};
    const double direct = w.smile * smile_mse(kTrue, slice) + w.index * index_se(kTrue, idx + 1.0);
    CHECK(combined_objective(kTrue, slice, idx + 1.0, w) == direct);
}

TEST_CASE("cold calibration recovers the futures price from a synthetic day") {
    const SmileSlice slice = model_slice(kTrue);
    const double idx = vstoxx::vstoxx_index(kTrue);
    const CalibrationResult fit = calibrate_global(slice, idx, 4242);

    // objective decomposition identity
    CHECK(fit.objective ==
          doctest::Approx(10000.0 * fit.smile_mse + 2.0 * fit.index_se).epsilon(1e-12));
    CHECK(fit.params.in_box());

    const double tau_future = 21.0 / 365.0;
    const double model_future = vstoxx::vstoxx_future(fit.params, tau_future);
    const double true_future = vstoxx::vstoxx_future(kTrue, tau_future);
    CHECK(std::abs(model_future / true_future - 1.0) <= 1e-3);

    // optimality spot check against random box samples
    rng::Xoshiro256 gen(777, 0);
    const auto objective = [&](const heston::HestonParams& p) {
        return combined_objective(p, slice, idx);
    };
    for (int i = 0; i < 1000; ++i) {
        const heston::HestonParams p{
            heston::kKappaBounds.lo +
                gen.next_uniform() * (heston::kKappaBounds.hi - heston::kKappaBounds.lo),
            heston::kThetaBounds.lo +
                gen.next_uniform() * (heston::kThetaBounds.hi - heston::kThetaBounds.lo),
            heston::kXiBounds.lo +
                gen.next_uniform() * (heston::kXiBounds.hi - heston::kXiBounds.lo),
            heston::kRhoBounds.lo +
                gen.next_uniform() * (heston::kRhoBounds.hi - heston::kRhoBounds.lo),
            heston::kV0Bounds.lo +
                gen.next_uniform() * (heston::kV0Bounds.hi - heston::kV0Bounds.lo)};
        CHECK(fit.objective <= objective(p) + 1e-12);
    }
}

TEST_CASE("cold calibration is bit-identical under the same seed") {
    const SmileSlice slice = model_slice(kTrue);
    const double idx = vstoxx::vstoxx_index(kTrue);
    const CalibrationResult a = calibrate_global(slice, idx, 11);
    const CalibrationResult b = calibrate_global(slice, idx, 11);
    CHECK(a.params.kappa == b.params.kappa);
    CHECK(a.params.theta == b.params.theta);
    CHECK(a.params.xi == b.params.xi);
    CHECK(a.params.rho == b.params.rho);
    CHECK(a.params.v0 == b.params.v0);
    CHECK(a.objective == b.objective);
    CHECK(a.n_evaluations == b.n_evaluations);
}

TEST_CASE("warm calibration from the true parameters is already converged") {
    const SmileSlice slice = model_slice(kTrue);
    const double idx = vstoxx::vstoxx_index(kTrue);
    const CalibrationResult fit = calibrate_warm(slice, idx, kTrue);
    CHECK(fit.objective <= 1e-10);
}

TEST_CASE("warm calibration improves on a perturbed start") {
    const SmileSlice slice = model_slice(kTrue);
    const double idx = vstoxx::vstoxx_index(kTrue);
    heston::HestonParams prev = kTrue;
    prev.kappa *= 1.1;
    prev.theta *= 1.1;
    prev.xi *= 1.1;
    prev.rho *= 1.1;
    prev.v0 *= 1.1;
    const double start_objective = combined_objective(prev, slice, idx);
    const CalibrationResult fit = calibrate_warm(slice, idx, prev);
    CHECK(fit.objective <= start_objective);
    CHECK(fit.params.in_box());

    // warm lands near the cold solution in futures-price terms
    const CalibrationResult cold = calibrate_global(slice, idx, 4242);
    const double tau_future = 21.0 / 365.0;
    const double warm_future = vstoxx::vstoxx_future(fit.params, tau_future);
    const double cold_future = vstoxx::vstoxx_future(cold.params, tau_future);
    CHECK(std::abs(warm_future / cold_future - 1.0) <= 0.05);
}

TEST_CASE("run_timeseries: single day equals cold calibration plus pricing") {
    const Date date = Date::parse("2017-03-06");
    MarketDay day;
    day.date = date;
    day.slice = model_slice(kTrue);
    day.vstoxx_observed = vstoxx::vstoxx_index(kTrue);
    day.future_expiry = date + 21;
    day.future_market_price = vstoxx::vstoxx_future(kTrue, 21.0 / 365.0);

    const auto records = run_timeseries({day}, 4242);
    REQUIRE(records.size() == 1);
    CHECK(records[0].ok);
    const CalibrationResult direct = calibrate_global(day.slice, day.vstoxx_observed, 4242);
    CHECK(records[0].params.kappa == direct.params.kappa);
    CHECK(records[0].model_future ==
          vstoxx::vstoxx_future(direct.params, year_fraction(date, day.future_expiry)));
    CHECK(records[0].diff_price ==
          day.future_market_price - records[0].model_future);
}

TEST_CASE("run_timeseries rejects unsorted days") {
    MarketDay day;
    day.date = Date::parse("2017-03-06");
    day.slice = model_slice(kTrue);
    day.vstoxx_observed = 20.0;
    day.future_expiry = day.date + 21;
    day.future_market_price = 20.0;
    MarketDay earlier = day;
    earlier.date = day.date + (-1);
    CHECK_THROWS_AS(run_timeseries({day, earlier}, 1), ValidationError);
}

TEST_CASE("run_timeseries records per-day failures without aborting") {
    const Date date = Date::parse("2017-03-06");
    MarketDay good;
    good.date = date;
    good.slice = model_slice(kTrue);
    good.vstoxx_observed = vstoxx::vstoxx_index(kTrue);
    good.future_expiry = date + 21;
    good.future_market_price = 22.0;

    MarketDay bad = good;
    bad.date = date + 1;
    bad.vstoxx_observed = -5.0; // index_se will refuse

    MarketDay after = good;
    after.date = date + 2;

    const auto records = run_timeseries({good, bad, after}, 4242);
    REQUIRE(records.size() == 3);
    CHECK(records[0].ok);
    CHECK(!records[1].ok);
    CHECK(!records[1].error.empty());
    CHECK(records[2].ok);
}

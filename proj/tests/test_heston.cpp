#include <doctest.h>

#include "vollab/black.hpp"
#include "vollab/errors.hpp"
#include "vollab/heston.hpp"
#include "vollab/math/rng.hpp"
#include "vollab/mc.hpp"
#include "test_util.hpp"

#include <cmath>
#include <complex>

using namespace vollab;
using namespace vollab::heston;
using cplx = std::complex<double>;

namespace {
const HestonParams kRef{2.0, 0.04, 0.5, -0.7, 0.09};
} // namespace

TEST_CASE("characteristic function is 1 at u = 0") {
    CHECK(characteristic_fn({0.0, 0.0}, 0.5, kRef) == cplx(1.0, 0.0));
}

TEST_CASE("characteristic function has the deterministic-variance limit") {
    // With xi ~ 0 the log-forward is Gaussian with variance
    // w = theta tau + (v0 - theta)(1 - e^{-kappa tau})/kappa.
    const double tau = 0.5;
    const HestonParams params{2.0, 0.04, 1e-6, -0.7, 0.09};
    const double w = params.theta * tau +
                     (params.v0 - params.theta) * (1.0 - std::exp(-params.kappa * tau)) /
                         params.kappa;
    for (double u : {0.5, 1.0, 3.0, 8.0}) {
        const cplx limit = std::exp(cplx(0.0, u) * (-w / 2.0) - u * u * w / 2.0);
        const cplx value = characteristic_fn({u, 0.0}, tau, params);
        CHECK(std::abs(value - limit) <= 1e-6); // genuine O(xi) residual remains
    }
    // One order closer to the limit the residual shrinks in step.
    const HestonParams tighter{2.0, 0.04, 1e-8, -0.7, 0.09};
    const cplx value = characteristic_fn({1.0, 0.0}, tau, tighter);
    const cplx limit = std::exp(cplx(0.0, 1.0) * (-w / 2.0) - w / 2.0);
    CHECK(std::abs(value - limit) <= 1e-8);
}

TEST_CASE("characteristic function satisfies conjugate symmetry") {
    rng::Xoshiro256 gen(99, 0);
    for (int i = 0; i < 100; ++i) {
        const HestonParams params = testutil::random_box_params(gen);
        const double u = 0.05 + 60.0 * gen.next_uniform();
        const double tau = 0.05 + 2.0 * gen.next_uniform();
        const cplx plus = characteristic_fn({u, 0.0}, tau, params);
        const cplx minus = characteristic_fn({-u, 0.0}, tau, params);
        CHECK(std::abs(minus - std::conj(plus)) <= 1e-12);
    }
}

TEST_CASE("characteristic function against the Monte Carlo oracle") {
    const double tau = 0.5;
    const cplx cf = characteristic_fn({1.0, 0.0}, tau, kRef);
    const auto mc = mc::mc_characteristic_fn(kRef, 1.0, tau, 150000, 250, 4711);
    CHECK(std::abs(cf.real() - mc.re) <= 3.0 * mc.re_std_error);
    CHECK(std::abs(cf.imag() - mc.im) <= 3.0 * mc.im_std_error);
}

TEST_CASE("call prices match frozen high-precision references") {
    // 40-digit quadrature of the same transform, frozen up front.
    CHECK(heston_call(kRef, 100.0, 80.0, 0.5) ==
          doctest::Approx(21.5206407196898104).epsilon(1e-9));
    CHECK(heston_call(kRef, 100.0, 100.0, 0.5) ==
          doctest::Approx(7.1052203626470277).epsilon(1e-9));
    CHECK(heston_call(kRef, 100.0, 120.0, 0.5) ==
          doctest::Approx(0.833646620919333049).epsilon(1e-8));
    CHECK(heston_call(kRef, 100.0, 100.0, 2.0) ==
          doctest::Approx(11.7255508001131758).epsilon(1e-9));
    CHECK(heston_call(kRef, 100.0, 60.0, 0.25) ==
          doctest::Approx(40.0203397027896543).epsilon(1e-9));
}

TEST_CASE("deterministic-variance limit reduces to the Black price") {
    // The residual is genuinely O(xi): at xi = 1e-4 the at-the-money gap is
    // ~5e-6 relative, one order in xi deeper it is inside 1e-6.
    const double black_atm = black::black_price(100.0, 100.0, 1.0, 0.2, true);
    const HestonParams loose{2.0, 0.04, 1e-4, -0.7, 0.04};
    CHECK(heston_call(loose, 100.0, 100.0, 1.0) ==
          doctest::Approx(black_atm).epsilon(1e-5));
    const HestonParams tight{2.0, 0.04, 1e-6, -0.7, 0.04};
    for (double strike : {80.0, 100.0, 120.0}) {
        const double black = black::black_price(100.0, strike, 1.0, 0.2, true);
        CHECK(heston_call(tight, 100.0, strike, 1.0) ==
              doctest::Approx(black).epsilon(3e-6));
    }
}

TEST_CASE("strikeless call tends to the forward") {
    CHECK(heston_call(kRef, 100.0, 1e-6, 0.5) == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("put from the same integral satisfies parity exactly") {
    for (double strike : {70.0, 100.0, 130.0}) {
        const double call = heston_call(kRef, 100.0, strike, 0.5);
        const double put = heston_put(kRef, 100.0, strike, 0.5);
        CHECK(std::abs(call - put - (100.0 - strike)) <= 1e-12 * 100.0);
    }
}

TEST_CASE("call prices are within no-arbitrage bounds and convex in strike") {
    rng::Xoshiro256 gen(5150, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const HestonParams params = testutil::random_box_params(gen);
        const double tau = 0.1 + gen.next_uniform();
        std::vector<double> strikes;
        for (double k = 60.0; k <= 140.0; k += 2.0) {
            strikes.push_back(k);
        }
        const std::vector<double> prices = heston_call_batch(params, 100.0, strikes, tau, 1e-12);
        for (std::size_t i = 0; i < strikes.size(); ++i) {
            CHECK(prices[i] >= std::max(100.0 - strikes[i], 0.0) - 1e-9);
            CHECK(prices[i] <= 100.0 + 1e-9);
            if (i >= 2) {
                // butterfly: second difference in strike stays non-negative
                const double fly = prices[i] - 2.0 * prices[i - 1] + prices[i - 2];
                CHECK(fly >= -1e-8);
            }
            if (i >= 1) {
                CHECK(prices[i] <= prices[i - 1] + 1e-9); // decreasing in strike
            }
        }
    }
}

TEST_CASE("call price against the Monte Carlo oracle") {
    const auto mc = mc::mc_call(kRef, 100.0, 110.0, 0.5, 200000, 250, 2911);
    const double cf = heston_call(kRef, 100.0, 110.0, 0.5);
    CHECK(std::abs(cf - mc.value) <= 3.0 * mc.std_error);
}

TEST_CASE("model smile is flat in the deterministic limit") {
    const HestonParams params{2.0, 0.04, 1e-4, -0.7, 0.04};
    const std::vector<double> strikes{80.0, 90.0, 100.0, 110.0, 125.0};
    const std::vector<double> vols = model_smile(params, 100.0, strikes, 1.0);
    for (double vol : vols) {
        CHECK(vol == doctest::Approx(0.2).epsilon(1e-4));
    }
}

TEST_CASE("zero-correlation smile is symmetric in log-moneyness") {
    const HestonParams params{2.0, 0.04, 0.5, 0.0, 0.04};
    const double x = 0.15;
    const std::vector<double> strikes{100.0 * std::exp(-x), 100.0 * std::exp(x)};
    const std::vector<double> vols = model_smile(params, 100.0, strikes, 0.75);
    CHECK(std::abs(vols[0] - vols[1]) <= 1e-4);
}

TEST_CASE("negative correlation produces a downward skew") {
    const std::vector<double> strikes{80.0, 120.0};
    const std::vector<double> vols = model_smile(kRef, 100.0, strikes, 0.5);
    CHECK(vols[0] > vols[1]);
}

TEST_CASE("smile inversion failure names the strike") {
    // Far enough out that the extrinsic value sits below quadrature resolution.
    const HestonParams calm{2.0, 0.04, 0.01, 0.0, 0.04};
    try {
        model_smile(calm, 100.0, {100.0, 2000.0}, 30.0 / 365.0);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("2000") != std::string::npos);
    }
}

TEST_CASE("pricing rejects invalid inputs") {
    CHECK_THROWS_AS(heston_call(kRef, -1.0, 100.0, 0.5), ValidationError);
    CHECK_THROWS_AS(heston_call(kRef, 100.0, 0.0, 0.5), ValidationError);
    CHECK_THROWS_AS(heston_call(kRef, 100.0, 100.0, 0.0), ValidationError);
    const HestonParams bad{2.0, 0.04, 0.5, -1.5, 0.09};
    CHECK_THROWS_AS(heston_call(bad, 100.0, 100.0, 0.5), ValidationError);
}

#include <doctest.h>

#include "vollab/errors.hpp"
#include "vollab/math/rng.hpp"
#include "vollab/mc.hpp"
#include "vollab/vstoxx.hpp"
#include "test_util.hpp"

#include <cmath>
#include <omp.h>

using namespace vollab;
using namespace vollab::vstoxx;

namespace {
const heston::HestonParams kRef{2.0, 0.04, 0.5, -0.7, 0.09};

double expected_variance(const heston::HestonParams& p, double tau) {
    return p.theta + (p.v0 - p.theta) * std::exp(-p.kappa * tau);
}
} // namespace

TEST_CASE("index equals 100 sqrt(theta) when v0 = theta, for any kappa") {
    for (double kappa : {0.01, 0.5, 2.0, 20.0}) {
        const heston::HestonParams params{kappa, 0.04, 0.5, -0.7, 0.04};
        CHECK(std::abs(vstoxx_index(params) - 20.0) <= 1e-12 * 20.0);
    }
}

TEST_CASE("index tends to 100 sqrt(v0) as kappa -> 0") {
    const heston::HestonParams params{1e-8, 0.04, 0.5, -0.7, 0.09};
    CHECK(vstoxx_index(params) == doctest::Approx(30.0).epsilon(1e-6));
}

TEST_CASE("window constants stay in range over the box") {
    rng::Xoshiro256 gen(31, 0);
    for (int i = 0; i < 200; ++i) {
        const auto params = testutil::random_box_params(gen);
        const IndexWindow win = IndexWindow::from(params);
        CHECK(win.a > 0.0);
        CHECK(win.a < 1.0);
        CHECK(win.b >= 0.0);
    }
}

TEST_CASE("integrand reduces to the deterministic form as xi -> 0") {
    const heston::HestonParams params{2.0, 0.04, 1e-6, -0.7, 0.09};
    const double tau = 21.0 / 365.0;
    const IndexWindow win = IndexWindow::from(params);
    const double ev = expected_variance(params, tau);
    for (double s : {1e-8, 1e-3, 1.0, 50.0, 1e4}) {
        const double expected = std::pow(s, -1.5) * -std::expm1(-s * (win.a * ev + win.b));
        CHECK(future_integrand(s, params, tau) == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("integrand diverges as s^{-1/2} at the lower boundary") {
    // log-log slope fitted on s in [1e-10, 1e-8]
    rng::Xoshiro256 gen(17, 0);
    for (int i = 0; i < 20; ++i) {
        const auto params = testutil::random_box_params(gen);
        const double tau = 7.0 / 365.0 + gen.next_uniform() * 0.15;
        const double g_lo = future_integrand(1e-10, params, tau);
        const double g_hi = future_integrand(1e-8, params, tau);
        const double slope = (std::log(g_hi) - std::log(g_lo)) / (std::log(1e-8) - std::log(1e-10));
        CHECK(slope == doctest::Approx(-0.5).epsilon(0.02));
    }
}

TEST_CASE("integrand guards its domain and survives huge s") {
    CHECK_THROWS_AS(future_integrand(0.0, kRef, 0.1), ValidationError);
    CHECK_THROWS_AS(future_integrand(-1.0, kRef, 0.1), ValidationError);
    // f underflows: the integrand degrades to s^{-3/2} exactly
    const double s = 1e18;
    CHECK(future_integrand(s, kRef, 0.1) == doctest::Approx(std::pow(s, -1.5)).epsilon(1e-12));
}

TEST_CASE("futures price matches frozen high-precision references") {
    CHECK(vstoxx_future(kRef, 7.0 / 365.0) == doctest::Approx(28.86719061730918).epsilon(1e-6));
    CHECK(vstoxx_future(kRef, 21.0 / 365.0) == doctest::Approx(27.95082374686345).epsilon(1e-6));
    CHECK(vstoxx_future(kRef, 35.0 / 365.0) == doctest::Approx(27.08605026464195).epsilon(1e-6));
}

TEST_CASE("futures price reduces to the index at tau = 0") {
    rng::Xoshiro256 gen(23, 0);
    for (int i = 0; i < 20; ++i) {
        const auto params = testutil::random_box_params(gen);
        CHECK(vstoxx_future(params, 0.0) ==
              doctest::Approx(vstoxx_index(params)).epsilon(1e-6));
    }
}

TEST_CASE("futures price matches the closed form in the xi -> 0 limit") {
    const heston::HestonParams params{2.0, 0.04, 1e-4, -0.7, 0.09};
    const double tau = 21.0 / 365.0;
    const IndexWindow win = IndexWindow::from(params);
    const double closed = 100.0 * std::sqrt(win.a * expected_variance(params, tau) + win.b);
    CHECK(vstoxx_future(params, tau) == doctest::Approx(closed).epsilon(1e-5));
}

TEST_CASE("Jensen bound holds across the box") {
    rng::Xoshiro256 gen(41, 0);
    for (int i = 0; i < 200; ++i) {
        const auto params = testutil::random_box_params(gen);
        const double tau = (5.0 + 40.0 * gen.next_uniform()) / 365.0;
        const IndexWindow win = IndexWindow::from(params);
        const double upper = 100.0 * std::sqrt(win.a * expected_variance(params, tau) + win.b);
        CHECK(vstoxx_future(params, tau) <= upper + 1e-9);
    }
}

TEST_CASE("rho does not enter the futures price") {
    for (double rho : {-1.0, 0.0, 1.0}) {
        heston::HestonParams params = kRef;
        params.rho = rho;
        CHECK(vstoxx_future(params, 21.0 / 365.0) == vstoxx_future(kRef, 21.0 / 365.0));
    }
}

TEST_CASE("doubling the grid moves the price by less than 1e-6 relative") {
    rng::Xoshiro256 gen(53, 0);
    FutureGrid doubled;
    doubled.n_nodes *= 2;
    for (int i = 0; i < 50; ++i) {
        const auto params = testutil::random_box_params(gen);
        const double tau = (5.0 + 40.0 * gen.next_uniform()) / 365.0;
        const double base = vstoxx_future(params, tau);
        const double fine = vstoxx_future(params, tau, doubled);
        CHECK(std::abs(fine / base - 1.0) < 1e-6);
    }
}

TEST_CASE("the published 1e4-node grid carries its known discretization bias") {
    // The sqrt identity on the coarse grid is ~9e-6 relative; the production
    // default keeps the bounds and raises the node count to 1e5.
    const heston::HestonParams params{2.0, 0.04, 0.5, -0.7, 0.04}; // index exactly 20
    const double coarse = vstoxx_future(params, 0.0, FutureGrid::coarse_reference());
    const double rel = std::abs(coarse / 20.0 - 1.0);
    CHECK(rel > 1e-6);
    CHECK(rel < 5e-5);
    CHECK(vstoxx_future(params, 0.0) == doctest::Approx(20.0).epsilon(1e-7));
}

TEST_CASE("futures price agrees with the Monte Carlo oracle (scaled-down run)") {
    const double tau = 21.0 / 365.0;
    const auto mc = mc::mc_vstoxx_future(kRef, tau, 200000, 250, 314159);
    CHECK(std::abs(vstoxx_future(kRef, tau) - mc.value) <= 3.0 * mc.std_error);
}

TEST_CASE("serial reference and OpenMP trapezoid agree") {
    const double parallel = vstoxx_future(kRef, 21.0 / 365.0, {}, false);
    const double serial = vstoxx_future(kRef, 21.0 / 365.0, {}, true);
    CHECK(parallel == doctest::Approx(serial).epsilon(1e-13));
}

TEST_CASE("futures price is identical for any thread count") {
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const double one = vstoxx_future(kRef, 21.0 / 365.0);
    omp_set_num_threads(2);
    const double two = vstoxx_future(kRef, 21.0 / 365.0);
    omp_set_num_threads(saved);
    CHECK(one == two);
}

#include <doctest.h>

#include "vollab/errors.hpp"
#include "vollab/math/rng.hpp"
#include "vollab/optim.hpp"

#include <cmath>

using namespace vollab;
using namespace vollab::opt;

namespace {

double sphere(const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - 0.3 * static_cast<double>(i + 1);
        s += d * d;
    }
    return s;
}

double rosenbrock(const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
}

} // namespace

TEST_CASE("differential evolution solves a separable quadratic in a box") {
    const std::vector<double> lo(5, -2.0), hi(5, 2.0);
    DeSettings settings;
    settings.seed = 42;
    const OptResult result = differential_evolution(sphere, lo, hi, settings);
    CHECK(result.converged);
    CHECK(result.fx <= 1e-7); // population spread tolerance 1e-8
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(result.x[i] == doctest::Approx(0.3 * static_cast<double>(i + 1)).epsilon(1e-4));
        CHECK(result.x[i] >= lo[i]);
        CHECK(result.x[i] <= hi[i]);
    }
    CHECK(result.n_evaluations > 0);
}

TEST_CASE("differential evolution beats random box sampling") {
    const std::vector<double> lo{-2.0, -2.0}, hi{2.0, 2.0};
    DeSettings settings;
    settings.seed = 7;
    const OptResult result = differential_evolution(rosenbrock, lo, hi, settings);
    rng::Xoshiro256 gen(123, 0);
    for (int i = 0; i < 1000; ++i) {
        const std::vector<double> x{lo[0] + gen.next_uniform() * (hi[0] - lo[0]),
                                    lo[1] + gen.next_uniform() * (hi[1] - lo[1])};
        CHECK(result.fx <= rosenbrock(x));
    }
}

TEST_CASE("differential evolution is deterministic under its seed") {
    const std::vector<double> lo(3, -1.0), hi(3, 1.0);
    DeSettings settings;
    settings.seed = 99;
    const OptResult a = differential_evolution(sphere, lo, hi, settings);
    const OptResult b = differential_evolution(sphere, lo, hi, settings);
    CHECK(a.x == b.x);
    CHECK(a.fx == b.fx);
    CHECK(a.n_evaluations == b.n_evaluations);
}

TEST_CASE("projected quasi-Newton finds an interior optimum") {
    const std::vector<double> lo(2, -5.0), hi(2, 5.0);
    const OptResult result = lbfgsb_minimize(rosenbrock, {-1.2, 1.0}, lo, hi);
    CHECK(result.fx <= 1e-9);
    CHECK(result.x[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(result.x[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("projected quasi-Newton respects active bounds") {
    // unconstrained optimum at (3, -4): clipped to the box on both coordinates
    const auto f = [](const std::vector<double>& x) {
        return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] + 4.0) * (x[1] + 4.0);
    };
    const std::vector<double> lo{-1.0, -1.0}, hi{1.0, 1.0};
    const OptResult result = lbfgsb_minimize(f, {0.0, 0.0}, lo, hi);
    CHECK(result.x[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(result.x[1] == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(result.converged);
}

TEST_CASE("quasi-Newton never returns a worse point than the start") {
    rng::Xoshiro256 gen(2718, 0);
    const std::vector<double> lo(4, -3.0), hi(4, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x0(4);
        for (double& v : x0) {
            v = -3.0 + 6.0 * gen.next_uniform();
        }
        const double f0 = sphere(x0);
        const OptResult result = lbfgsb_minimize(sphere, x0, lo, hi);
        CHECK(result.fx <= f0);
    }
}

TEST_CASE("optimizers validate their boxes") {
    CHECK_THROWS_AS(differential_evolution(sphere, {}, {}, DeSettings{}), ValidationError);
    CHECK_THROWS_AS(differential_evolution(sphere, {1.0}, {0.0}, DeSettings{}), ValidationError);
    CHECK_THROWS_AS(lbfgsb_minimize(sphere, {0.0}, {0.0, 1.0}, {1.0, 2.0}), ValidationError);
}

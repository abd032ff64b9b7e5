// Timing comparison of the OpenMP kernels against their serial reference
// implementations. Not a correctness gate (the test suite asserts bitwise
// agreement); this target answers "is the parallel path worth it here".

#include "vollab/learners.hpp"
#include "vollab/math/rng.hpp"
#include "vollab/mc.hpp"
#include "vollab/vstoxx.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

namespace {

double seconds(const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
}

void print_row(const char* name, double serial, double parallel) {
    std::printf("%-34s %10.3fs %10.3fs %8.2fx\n", name, serial, parallel, serial / parallel);
}

} // namespace

int main() {
    const vollab::heston::HestonParams params{2.0, 0.04, 0.5, -0.7, 0.09};
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-34s %11s %11s %9s\n", "kernel", "serial", "openmp", "speedup");

    {
        const double tau = 21.0 / 365.0;
        std::vector<double> serial_out, parallel_out;
        const double t_serial = seconds([&] {
            serial_out =
                vollab::mc::serial_ref::simulate_terminal_variance(params, tau, 400000, 200, 7);
        });
        const double t_parallel = seconds([&] {
            parallel_out = vollab::mc::simulate_terminal_variance(params, tau, 400000, 200, 7);
        });
        print_row("mc terminal variance 4e5x200", t_serial, t_parallel);
        if (serial_out != parallel_out) {
            std::printf("  MISMATCH between serial and parallel results!\n");
            return 1;
        }
    }

    {
        const double t_serial = seconds(
            [&] { (void)vollab::mc::serial_ref::mc_call(params, 100, 100, 0.5, 100000, 200, 7); });
        const double t_parallel =
            seconds([&] { (void)vollab::mc::mc_call(params, 100, 100, 0.5, 100000, 200, 7); });
        print_row("mc call 1e5x200", t_serial, t_parallel);
    }

    {
        const double t_serial = seconds(
            [&] { (void)vollab::vstoxx::vstoxx_future(params, 21.0 / 365.0, {}, true); });
        const double t_parallel =
            seconds([&] { (void)vollab::vstoxx::vstoxx_future(params, 21.0 / 365.0, {}, false); });
        print_row("futures trapezoid 1e5 nodes", t_serial, t_parallel);
    }

    {
        // Nonlinear regression problem, 400 rows x 15 features.
        vollab::rng::Xoshiro256 gen(11, 0);
        vollab::learners::Matrix x(400, std::vector<double>(15));
        std::vector<double> y(400);
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (double& v : x[i]) {
                v = gen.next_normal();
            }
            y[i] = std::tanh(x[i][0]) * x[i][1] + 0.1 * gen.next_normal();
        }
        vollab::learners::ForestSettings settings;
        settings.n_trees = 250;
        settings.seed = 3;
        vollab::learners::ForestModel serial_model, parallel_model;
        const double t_serial = seconds(
            [&] { serial_model = vollab::learners::serial_ref::forest_fit(x, y, settings); });
        const double t_parallel =
            seconds([&] { parallel_model = vollab::learners::forest_fit(x, y, settings); });
        print_row("forest fit 250 trees", t_serial, t_parallel);
        if (serial_model.predict(x[0]) != parallel_model.predict(x[0])) {
            std::printf("  MISMATCH between serial and parallel forests!\n");
            return 1;
        }
    }
    return 0;
}

#pragma once

#include "vollab/heston.hpp"

#include <cstdint>
#include <vector>

namespace vollab::mc {

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    int n_steps = 0;
    std::uint64_t seed = 0;
};

// Full-truncation Euler terminal variance samples: the negative part of v is
// floored inside drift and diffusion, and the returned samples are clipped at
// zero. Each path owns an RNG stream derived from (seed, path index), so the
// result is bit-identical for any thread count.
std::vector<double> simulate_terminal_variance(const heston::HestonParams& params, double tau,
                                               std::int64_t n_paths, int n_steps,
                                               std::uint64_t seed, bool antithetic = false);

// E[100 sqrt(a v_tau + b)]: the settlement value of the futures contract.
McEstimate mc_vstoxx_future(const heston::HestonParams& params, double tau, std::int64_t n_paths,
                            int n_steps, std::uint64_t seed, bool antithetic = false);

// Correlated log-spot/variance simulation; undiscounted call payoff mean.
McEstimate mc_call(const heston::HestonParams& params, double forward, double strike, double tau,
                   std::int64_t n_paths, int n_steps, std::uint64_t seed,
                   bool antithetic = false);

// Monte Carlo estimate of E[exp(i u x_tau)] for characteristic function
// cross-checks; returns {Re value, Re std_error, Im value, Im std_error}.
struct McComplexEstimate {
    double re = 0.0, re_std_error = 0.0;
    double im = 0.0, im_std_error = 0.0;
};
McComplexEstimate mc_characteristic_fn(const heston::HestonParams& params, double u, double tau,
                                       std::int64_t n_paths, int n_steps, std::uint64_t seed);

namespace serial_ref {
// Plain single-threaded loops kept as the reference implementation for tests
// and the benchmark target. Must agree bit-for-bit with the OpenMP kernels.
std::vector<double> simulate_terminal_variance(const heston::HestonParams& params, double tau,
                                               std::int64_t n_paths, int n_steps,
                                               std::uint64_t seed, bool antithetic = false);
McEstimate mc_call(const heston::HestonParams& params, double forward, double strike, double tau,
                   std::int64_t n_paths, int n_steps, std::uint64_t seed,
                   bool antithetic = false);
} // namespace serial_ref

} // namespace vollab::mc

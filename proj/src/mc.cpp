#include "vollab/mc.hpp"
#include "vollab/errors.hpp"
#include "vollab/math/rng.hpp"
#include "vollab/vstoxx.hpp"

#include <algorithm>
#include <cmath>

namespace vollab::mc {

namespace {

void check_budget(const heston::HestonParams& params, double tau, std::int64_t n_paths,
                  int n_steps) {
    params.validate();
    if (tau < 0.0) {
        throw ValidationError("mc: tau must be non-negative");
    }
    if (n_paths < 1 || n_steps < 1) {
        throw ValidationError("mc: need n_paths >= 1 and n_steps >= 1");
    }
}

// Mean and standard error of the mean over a sample vector, summed serially.
McEstimate summarize(const std::vector<double>& samples, int n_steps, std::uint64_t seed) {
    const auto n = static_cast<std::int64_t>(samples.size());
    double sum = 0.0;
    for (double x : samples) {
        sum += x;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double x : samples) {
        ss += (x - mean) * (x - mean);
    }
    const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n)), n, n_steps, seed};
}

struct VariancePathSpec {
    double kappa, theta, xi, v0, dt, sqrt_dt;
    int n_steps;
};

// One full-truncation Euler step of the variance process.
inline double variance_step(const VariancePathSpec& s, double v, double z) {
    const double vp = std::max(v, 0.0);
    return v + s.kappa * (s.theta - vp) * s.dt + s.xi * std::sqrt(vp) * s.sqrt_dt * z;
}

template <typename PerIndex>
void run_indexed(std::int64_t n, bool parallel, const PerIndex& body) {
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            body(i);
        }
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            body(i);
        }
    }
}

std::vector<double> terminal_variance_impl(const heston::HestonParams& params, double tau,
                                           std::int64_t n_paths, int n_steps, std::uint64_t seed,
                                           bool antithetic, bool parallel) {
    check_budget(params, tau, n_paths, n_steps);
    const VariancePathSpec spec{params.kappa, params.theta,    params.xi, params.v0,
                                tau / n_steps, std::sqrt(tau / n_steps), n_steps};
    std::vector<double> out(static_cast<std::size_t>(n_paths));
    if (antithetic) {
        const std::int64_t n_pairs = (n_paths + 1) / 2;
        run_indexed(n_pairs, parallel, [&](std::int64_t pair) {
            rng::Xoshiro256 gen(seed, static_cast<std::uint64_t>(pair));
            double v_plus = spec.v0, v_minus = spec.v0;
            for (int step = 0; step < spec.n_steps; ++step) {
                const double z = gen.next_normal();
                v_plus = variance_step(spec, v_plus, z);
                v_minus = variance_step(spec, v_minus, -z);
            }
            out[static_cast<std::size_t>(2 * pair)] = std::max(v_plus, 0.0);
            if (2 * pair + 1 < n_paths) {
                out[static_cast<std::size_t>(2 * pair + 1)] = std::max(v_minus, 0.0);
            }
        });
    } else {
        run_indexed(n_paths, parallel, [&](std::int64_t path) {
            rng::Xoshiro256 gen(seed, static_cast<std::uint64_t>(path));
            double v = spec.v0;
            for (int step = 0; step < spec.n_steps; ++step) {
                v = variance_step(spec, v, gen.next_normal());
            }
            out[static_cast<std::size_t>(path)] = std::max(v, 0.0);
        });
    }
    return out;
}

McEstimate mc_call_impl(const heston::HestonParams& params, double forward, double strike,
                        double tau, std::int64_t n_paths, int n_steps, std::uint64_t seed,
                        bool antithetic, bool parallel) {
    check_budget(params, tau, n_paths, n_steps);
    if (!(forward > 0.0) || !(strike > 0.0)) {
        throw ValidationError("mc_call: forward and strike must be positive");
    }
    const VariancePathSpec spec{params.kappa, params.theta,    params.xi, params.v0,
                                tau / n_steps, std::sqrt(tau / n_steps), n_steps};
    const double rho = params.rho;
    const double rho_perp = std::sqrt(1.0 - rho * rho);
    std::vector<double> payoff(static_cast<std::size_t>(n_paths));

    // One joint Euler path of (x, v); z_v = rho z_x + sqrt(1-rho^2) z_perp.
    const auto advance = [&](double& x, double& v, double z_x, double z_perp) {
        const double vp = std::max(v, 0.0);
        const double z_v = rho * z_x + rho_perp * z_perp;
        x += -0.5 * vp * spec.dt + std::sqrt(vp) * spec.sqrt_dt * z_x;
        v = variance_step(spec, v, z_v);
    };
    const auto call_payoff = [&](double x) {
        return std::max(forward * std::exp(x) - strike, 0.0);
    };

    if (antithetic) {
        const std::int64_t n_pairs = (n_paths + 1) / 2;
        run_indexed(n_pairs, parallel, [&](std::int64_t pair) {
            rng::Xoshiro256 gen(seed, static_cast<std::uint64_t>(pair));
            double x_plus = 0.0, v_plus = spec.v0, x_minus = 0.0, v_minus = spec.v0;
            for (int step = 0; step < spec.n_steps; ++step) {
                const double z_x = gen.next_normal();
                const double z_perp = gen.next_normal();
                advance(x_plus, v_plus, z_x, z_perp);
                advance(x_minus, v_minus, -z_x, -z_perp);
            }
            payoff[static_cast<std::size_t>(2 * pair)] = call_payoff(x_plus);
            if (2 * pair + 1 < n_paths) {
                payoff[static_cast<std::size_t>(2 * pair + 1)] = call_payoff(x_minus);
            }
        });
    } else {
        run_indexed(n_paths, parallel, [&](std::int64_t path) {
            rng::Xoshiro256 gen(seed, static_cast<std::uint64_t>(path));
            double x = 0.0, v = spec.v0;
            for (int step = 0; step < spec.n_steps; ++step) {
                const double z_x = gen.next_normal();
                const double z_perp = gen.next_normal();
                advance(x, v, z_x, z_perp);
            }
            payoff[static_cast<std::size_t>(path)] = call_payoff(x);
        });
    }
    return summarize(payoff, n_steps, seed);
}

} // namespace

std::vector<double> simulate_terminal_variance(const heston::HestonParams& params, double tau,
                                               std::int64_t n_paths, int n_steps,
                                               std::uint64_t seed, bool antithetic) {
    return terminal_variance_impl(params, tau, n_paths, n_steps, seed, antithetic, true);
}

McEstimate mc_vstoxx_future(const heston::HestonParams& params, double tau, std::int64_t n_paths,
                            int n_steps, std::uint64_t seed, bool antithetic) {
    const std::vector<double> v_terminal =
        simulate_terminal_variance(params, tau, n_paths, n_steps, seed, antithetic);
    const vstoxx::IndexWindow win = vstoxx::IndexWindow::from(params);
    std::vector<double> settlement(v_terminal.size());
    for (std::size_t i = 0; i < v_terminal.size(); ++i) {
        settlement[i] = 100.0 * std::sqrt(win.a * v_terminal[i] + win.b);
    }
    return summarize(settlement, n_steps, seed);
}

McEstimate mc_call(const heston::HestonParams& params, double forward, double strike, double tau,
                   std::int64_t n_paths, int n_steps, std::uint64_t seed, bool antithetic) {
    return mc_call_impl(params, forward, strike, tau, n_paths, n_steps, seed, antithetic, true);
}

McComplexEstimate mc_characteristic_fn(const heston::HestonParams& params, double u, double tau,
                                       std::int64_t n_paths, int n_steps, std::uint64_t seed) {
    check_budget(params, tau, n_paths, n_steps);
    const VariancePathSpec spec{params.kappa, params.theta,    params.xi, params.v0,
                                tau / n_steps, std::sqrt(tau / n_steps), n_steps};
    const double rho = params.rho;
    const double rho_perp = std::sqrt(1.0 - rho * rho);
    std::vector<double> re(static_cast<std::size_t>(n_paths));
    std::vector<double> im(static_cast<std::size_t>(n_paths));
#pragma omp parallel for schedule(static)
    for (std::int64_t path = 0; path < n_paths; ++path) {
        rng::Xoshiro256 gen(seed, static_cast<std::uint64_t>(path));
        double x = 0.0, v = spec.v0;
        for (int step = 0; step < spec.n_steps; ++step) {
            const double z_x = gen.next_normal();
            const double z_perp = gen.next_normal();
            const double vp = std::max(v, 0.0);
            const double z_v = rho * z_x + rho_perp * z_perp;
            x += -0.5 * vp * spec.dt + std::sqrt(vp) * spec.sqrt_dt * z_x;
            v = variance_step(spec, v, z_v);
        }
        re[static_cast<std::size_t>(path)] = std::cos(u * x);
        im[static_cast<std::size_t>(path)] = std::sin(u * x);
    }
    const McEstimate re_est = summarize(re, n_steps, seed);
    const McEstimate im_est = summarize(im, n_steps, seed);
    return {re_est.value, re_est.std_error, im_est.value, im_est.std_error};
}

namespace serial_ref {

std::vector<double> simulate_terminal_variance(const heston::HestonParams& params, double tau,
                                               std::int64_t n_paths, int n_steps,
                                               std::uint64_t seed, bool antithetic) {
    return terminal_variance_impl(params, tau, n_paths, n_steps, seed, antithetic, false);
}

McEstimate mc_call(const heston::HestonParams& params, double forward, double strike, double tau,
                   std::int64_t n_paths, int n_steps, std::uint64_t seed, bool antithetic) {
    return mc_call_impl(params, forward, strike, tau, n_paths, n_steps, seed, antithetic, false);
}

} // namespace serial_ref

} // namespace vollab::mc

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace vollab::opt {

using Objective = std::function<double(const std::vector<double>&)>;

struct DeSettings {
    int pop_per_dim = 15;
    int max_generations = 200;
    double spread_tol = 1e-8; // stop when max-min population objective falls below
    double weight = 0.8;      // differential weight, best/1/bin
    double crossover = 0.9;
    std::uint64_t seed = 0;
};

struct OptResult {
    std::vector<double> x;
    double fx = 0.0;
    int n_evaluations = 0;
    bool converged = false;
};

// Differential evolution (best/1/bin) on a box. Trial points are projected
// onto the box; trial evaluations run in parallel with results stored by
// population index, so the outcome is independent of thread count.
OptResult differential_evolution(const Objective& f, const std::vector<double>& lo,
                                 const std::vector<double>& hi, const DeSettings& settings);

struct LbfgsSettings {
    int max_iterations = 200;
    int memory = 6;
    double fd_rel_step = 1e-6; // central-difference step, relative per coordinate
    double grad_tol = 1e-7;    // on the projected gradient, scaled by 1 + |f|
    double f_tol = 1e-13;      // relative objective improvement
};

// Projected L-BFGS with box constraints: two-loop direction, backtracking
// Armijo line search along the projected path, gradients by central finite
// differences projected onto the box. Returns the best iterate seen; since
// x0 is evaluated first, result.fx <= f(x0) always.
OptResult lbfgsb_minimize(const Objective& f, const std::vector<double>& x0,
                          const std::vector<double>& lo, const std::vector<double>& hi,
                          const LbfgsSettings& settings = LbfgsSettings{});

} // namespace vollab::opt

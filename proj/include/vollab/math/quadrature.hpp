#pragma once

#include <functional>
#include <vector>

namespace vollab::quad {

// Adaptive Gauss-Lobatto integration after Gander & Gautschi. An interval is
// accepted when the 7-point Kronrod and 4-point Lobatto estimates agree to
// within the interval's proportional share of abs_tol, so the total error is
// bounded by abs_tol. Throws NumericalError once max_depth is exceeded.
double adaptive_lobatto(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth = 28);

// Vector-valued variant: f fills `out` with n_components values at one
// abscissa, an interval is refined until every component meets its own
// tolerance. Used to price a whole strike ladder off shared characteristic
// function evaluations.
std::vector<double> adaptive_lobatto_vec(
    const std::function<void(double, std::vector<double>&)>& f, double a, double b,
    const std::vector<double>& abs_tol, int max_depth = 28);

// Trapezoid rule on a log-spaced grid, the integration scheme of the futures
// pricer. Deterministic fixed-block OpenMP reduction; `serial_reference`
// selects the plain loop kept for testing and benchmarking.
double log_grid_trapezoid(const std::function<double(double)>& f, double s_min, double s_max,
                          int n_nodes, bool serial_reference = false);

} // namespace vollab::quad

#pragma once

#include <cmath>
#include <numbers>

namespace vollab {

// Standard normal CDF. erfc keeps full relative precision deep in the left
// tail, which the implied-vol solver relies on for far-from-the-money quotes.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

} // namespace vollab

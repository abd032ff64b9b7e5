#pragma once

#include <complex>
#include <vector>

namespace vollab::heston {

// Model parameter box used throughout calibration.
struct ParamBounds {
    double lo;
    double hi;
};
inline constexpr ParamBounds kKappaBounds{0.01, 20.0};
inline constexpr ParamBounds kThetaBounds{0.01, 1.0};
inline constexpr ParamBounds kXiBounds{0.01, 5.0};
inline constexpr ParamBounds kRhoBounds{-1.0, 1.0};
inline constexpr ParamBounds kV0Bounds{0.01, 1.0};

struct HestonParams {
    double kappa = 0.0; // mean-reversion speed, 1/years
    double theta = 0.0; // long-term variance
    double xi = 0.0;    // vol of vol
    double rho = 0.0;   // spot/variance correlation
    double v0 = 0.0;    // initial variance

    // Throws ValidationError unless variance-like fields are positive and all
    // fields sit inside the calibration box.
    void validate() const;
    bool in_box() const;
};

// E[exp(i z x_tau)] for the zero-drift log-forward process. Branch-continuous
// formulation, stable down to the deterministic-variance limit xi -> 0.
std::complex<double> characteristic_fn(std::complex<double> z, double tau,
                                       const HestonParams& params);

// Undiscounted forward call via the alpha = 1/2 transform:
//   C = F - sqrt(F K)/pi * Int_0^inf Re[e^{iuk} cf(u - i/2)] / (u^2 + 1/4) du.
// Adaptive quadrature with absolute tolerance integration_tol * forward;
// throws NumericalError if the refinement budget is exhausted.
double heston_call(const HestonParams& params, double forward, double strike, double tau,
                   double integration_tol = 1e-10);

// Put from the same integral (parity-exact against heston_call).
double heston_put(const HestonParams& params, double forward, double strike, double tau,
                  double integration_tol = 1e-10);

// Whole strike ladder priced off shared characteristic function evaluations.
std::vector<double> heston_call_batch(const HestonParams& params, double forward,
                                      const std::vector<double>& strikes, double tau,
                                      double integration_tol = 1e-10);

// Implied-vol smile: elementwise inversion of heston_call_batch. Inversion
// failures are rethrown with the offending strike attached.
std::vector<double> model_smile(const HestonParams& params, double forward,
                                const std::vector<double>& strikes, double tau);

} // namespace vollab::heston

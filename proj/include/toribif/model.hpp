#ifndef TORIBIF_MODEL_HPP
#define TORIBIF_MODEL_HPP

#include <cmath>

#include "toribif/errors.hpp"

namespace toribif {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// cos(2 pi t) with the half-period antisymmetry cos_f(t + 1/2) == -cos_f(t)
// exact in floating point: the quarter-wave fold arguments below are exact
// differences (Sterbenz), so symmetric phases hit identical cos calls.
inline double forcing_cos(double t) {
    double u = t - std::floor(t);
    if (u < 0.25) return std::cos(two_pi * u);
    if (u < 0.50) return -std::cos(two_pi * (0.5 - u));
    if (u < 0.75) return -std::cos(two_pi * (u - 0.5));
    return std::cos(two_pi * (1.0 - u));
}

// tanh with bit-exact odd symmetry
inline double odd_tanh(double x) {
    return std::copysign(std::tanh(std::fabs(x)), x);
}

// Parameters of the delayed-feedback oscillator
//   h'(t) = -b tanh(kappa h(t - tau)) + c cos(2 pi t).
// Time is measured in units of the forcing period.
struct ModelParams {
    double b = 1.0;       // feedback amplitude
    double kappa = 11.0;  // coupling strength
    double c = 0.0;       // forcing amplitude
    double tau = 0.9395;  // feedback delay

    void validate() const {
        if (!(kappa > 0.0)) throw PreconditionError("kappa must be positive");
        if (!(tau > 0.0)) throw PreconditionError("tau must be positive (the pure ODE case tau=0 is unsupported)");
        if (!(b >= 0.0)) throw PreconditionError("b must be nonnegative");
        if (!(c >= 0.0)) throw PreconditionError("c must be nonnegative");
    }
};

inline double rhs(double t, double h_delayed, const ModelParams& p) {
    return -p.b * odd_tanh(p.kappa * h_delayed) + p.c * forcing_cos(t);
}

// d(rhs)/d(h_delayed) along a reference orbit value.  sech^2 = 1 - tanh^2
// stays exact through the saturated regime, unlike 1/cosh^2 which overflows.
inline double rhs_linearized(double orbit_delayed_value, const ModelParams& p) {
    const double th = odd_tanh(p.kappa * orbit_delayed_value);
    return -p.b * p.kappa * (1.0 - th * th);
}

} // namespace toribif

#endif

#ifndef TORIBIF_HISTORY_HPP
#define TORIBIF_HISTORY_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "toribif/errors.hpp"
#include "toribif/model.hpp"

namespace toribif {

// Cubic Hermite interpolation on a uniform grid of (value, derivative) samples.
// Queries that land on a grid node (within 1e-9 of a step) return the stored
// sample exactly.
inline double hermite_eval(const std::vector<double>& y, const std::vector<double>& yd,
                           double t_start, double dt, double t) {
    const double u = (t - t_start) / dt;
    long i = static_cast<long>(std::floor(u + 1e-9));
    double th = u - static_cast<double>(i);
    if (std::fabs(th) < 1e-9) th = 0.0;
    const long last = static_cast<long>(y.size()) - 1;
    if (i < 0 || i > last || (i == last && th > 0.0))
        throw PreconditionError("hermite_eval: query outside grid");
    if (th == 0.0) return y[static_cast<size_t>(i)];
    const double h = y[static_cast<size_t>(i)], h1 = y[static_cast<size_t>(i) + 1];
    const double d = yd[static_cast<size_t>(i)], d1 = yd[static_cast<size_t>(i) + 1];
    const double t2 = th * th, t3 = t2 * th;
    return (2 * t3 - 3 * t2 + 1) * h + (t3 - 2 * t2 + th) * dt * d
         + (-2 * t3 + 3 * t2) * h1 + (t3 - t2) * dt * d1;
}

inline double hermite_eval_deriv(const std::vector<double>& y, const std::vector<double>& yd,
                                 double t_start, double dt, double t) {
    const double u = (t - t_start) / dt;
    long i = static_cast<long>(std::floor(u + 1e-9));
    double th = u - static_cast<double>(i);
    if (std::fabs(th) < 1e-9) th = 0.0;
    const long last = static_cast<long>(y.size()) - 1;
    if (i < 0 || i > last || (i == last && th > 0.0))
        throw PreconditionError("hermite_eval_deriv: query outside grid");
    if (th == 0.0) return yd[static_cast<size_t>(i)];
    const double h = y[static_cast<size_t>(i)], h1 = y[static_cast<size_t>(i) + 1];
    const double d = yd[static_cast<size_t>(i)], d1 = yd[static_cast<size_t>(i) + 1];
    const double t2 = th * th;
    return ((6 * t2 - 6 * th) * h + (3 * t2 - 4 * th + 1) * dt * d
          + (-6 * t2 + 6 * th) * h1 + (3 * t2 - 2 * th) * dt * d1) / dt;
}

// One delay interval of (h, h') samples on a uniform grid ending at t0.
// The grid spacing divides the delay exactly: dt = tau / intervals().
struct HistorySegment {
    double t0 = 0.0;              // time of the newest sample
    double dt = 0.0;
    std::vector<double> h, hdot;  // oldest first; h.front() is h(t0 - tau)

    int intervals() const { return static_cast<int>(h.size()) - 1; }
    double tau() const { return dt * intervals(); }
    double t_begin() const { return t0 - tau(); }

    double headpoint_h() const { return h.back(); }
    double headpoint_delayed() const { return h.front(); }

    double eval(double t) const { return hermite_eval(h, hdot, t_begin(), dt, t); }

    void check() const {
        if (h.size() < 2 || h.size() != hdot.size())
            throw PreconditionError("history needs >= 2 aligned (h, hdot) samples");
        if (!(dt > 0.0)) throw PreconditionError("history dt must be positive");
        for (size_t i = 0; i < h.size(); ++i)
            if (!std::isfinite(h[i]) || !std::isfinite(hdot[i]))
                throw PreconditionError("history contains non-finite samples");
    }
};

// Snap a target step to dt = tau / N with N = round(tau/dt_target).
inline int history_intervals(double tau, double dt_target) {
    if (!(tau > 0.0) || !(dt_target > 0.0)) throw PreconditionError("tau and dt must be positive");
    int n = static_cast<int>(std::lround(tau / dt_target));
    if (n < 1) n = 1;
    return n;
}

inline HistorySegment make_constant_history(double value, double tau, double dt_target, double t0 = 0.0) {
    const int n = history_intervals(tau, dt_target);
    HistorySegment hs;
    hs.t0 = t0;
    hs.dt = tau / n;
    hs.h.assign(n + 1, value);
    hs.hdot.assign(n + 1, 0.0);
    return hs;
}

// h(t) = a sin(2 pi t) over the delay interval ending at t0.
inline HistorySegment make_sinusoid_history(double a, double tau, double dt_target, double t0 = 0.0) {
    const int n = history_intervals(tau, dt_target);
    HistorySegment hs;
    hs.t0 = t0;
    hs.dt = tau / n;
    hs.h.resize(n + 1);
    hs.hdot.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double t = t0 - tau + i * hs.dt;
        hs.h[static_cast<size_t>(i)] = a * std::sin(two_pi * t);
        hs.hdot[static_cast<size_t>(i)] = two_pi * a * std::cos(two_pi * t);
    }
    return hs;
}

} // namespace toribif

#endif

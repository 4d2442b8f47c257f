#ifndef TORIBIF_INTEGRATE_HPP
#define TORIBIF_INTEGRATE_HPP

#include <cmath>

#include "toribif/model.hpp"
#include "toribif/trajectory.hpp"

namespace toribif {

// Linear drift of the forcing amplitude c between two times; constant outside.
struct RampSpec {
    double c_start = 0.0, c_end = 0.0;
    double t_ramp_start = 0.0, t_ramp_end = 1.0;

    void check() const {
        if (!(t_ramp_end > t_ramp_start)) throw PreconditionError("ramp needs t_ramp_end > t_ramp_start");
    }
    double c_at(double t) const {
        if (c_start == c_end || t <= t_ramp_start) return c_start;
        if (t >= t_ramp_end) return c_end;
        return c_start + (c_end - c_start) * (t - t_ramp_start) / (t_ramp_end - t_ramp_start);
    }
};

// Right-hand side of the forced delayed-feedback model, with optionally
// ramped c.  Satisfies the scalar forced-DDE interface f(t, delayed value).
struct GztRhs {
    ModelParams p;
    const RampSpec* ramp = nullptr;  // not owned; null means constant c

    double operator()(double t, double h_delayed) const {
        const double c = ramp ? ramp->c_at(t) : p.c;
        return -p.b * odd_tanh(p.kappa * h_delayed) + c * forcing_cos(t);
    }
};

// Time-dependent linear delay equation xi'(t) = a(t) xi(t - tau), with the
// coefficient tabulated on the integration grid (a0 at nodes, am at midpoints).
struct TabulatedLinearRhs {
    const std::vector<double>* a0;
    const std::vector<double>* am;
    double t_origin, dt;

    double at_node(long k) const { return (*a0)[static_cast<size_t>(k)]; }
    double at_mid(long k) const { return (*am)[static_cast<size_t>(k)]; }
};

inline constexpr double divergence_bound = 1e6;

// Explicit RK4 advance with cubic Hermite lookup of the delayed value at the
// stage midpoint.  The right-hand side depends only on (t, delayed value), so
// the two middle stages coincide and the step reduces to a Simpson update of
// the delayed integrand.
template <class Rhs>
Trajectory integrate_dde(const HistorySegment& hist, double t_end, const Rhs& rhs_f) {
    hist.check();
    const int N = hist.intervals();
    const double dt = hist.dt;
    const double t0 = hist.t0;
    if (!(t_end > t0)) throw PreconditionError("integrate: t_end must exceed the history time");
    const long steps = static_cast<long>(std::ceil((t_end - t0) / dt - 1e-9));

    Trajectory traj;
    traj.t_start = t0 - hist.tau();
    traj.dt = dt;
    traj.n_history = N;
    traj.h.reserve(static_cast<size_t>(N + steps) + 1);
    traj.hdot.reserve(static_cast<size_t>(N + steps) + 1);
    traj.h = hist.h;
    traj.hdot = hist.hdot;

    // A history that is not a solution segment has a derivative kink at t0:
    // the stored hdot there describes the history side, while delayed lookups
    // in the panel right of t0 need the solution side.
    const double d_junction_right = rhs_f(t0, hist.h.front());

    for (long k = 0; k < steps; ++k) {
        const long i = N + k;
        const double t = t0 + static_cast<double>(k) * dt;
        const double y0 = traj.h[static_cast<size_t>(i - N)];
        const double y1 = traj.h[static_cast<size_t>(i - N + 1)];
        const double d0 = (i - N == N) ? d_junction_right : traj.hdot[static_cast<size_t>(i - N)];
        const double ym = 0.5 * (y0 + y1)
                        + 0.125 * dt * (d0 - traj.hdot[static_cast<size_t>(i - N + 1)]);
        const double k1 = rhs_f(t, y0);
        const double k2 = rhs_f(t + 0.5 * dt, ym);
        const double k4 = rhs_f(t + dt, y1);
        const double next = traj.h[static_cast<size_t>(i)] + dt / 6.0 * (k1 + 4.0 * k2 + k4);
        if (!std::isfinite(next) || std::fabs(next) > divergence_bound)
            throw DivergenceError(t + dt, next);
        traj.h.push_back(next);
        traj.hdot.push_back(k4);
    }
    return traj;
}

inline Trajectory integrate(const HistorySegment& hist, double t_end, const ModelParams& p) {
    p.validate();
    if (std::fabs(hist.tau() - p.tau) > 1e-9 * p.tau)
        throw PreconditionError("history delay interval does not match params.tau");
    return integrate_dde(hist, t_end, GztRhs{p, nullptr});
}

inline Trajectory integrate(const HistorySegment& hist, double t_end, const ModelParams& p, const RampSpec& ramp) {
    p.validate();
    ramp.check();
    if (std::fabs(hist.tau() - p.tau) > 1e-9 * p.tau)
        throw PreconditionError("history delay interval does not match params.tau");
    return integrate_dde(hist, t_end, GztRhs{p, &ramp});
}

// History produced by a previous run: the final delay interval of traj.
inline HistorySegment history_from_trajectory_tail(const Trajectory& traj) { return tail_history(traj); }

// Advance one forcing period and rebuild the history at t0 + 1.  The new
// grid does not generally contain the old nodes (dt = tau/N vs period 1), so
// h is resampled from the dense output and hdot from the model identity
// h'(s) = f(s, h(s - tau)), which needs tau < 1 to stay inside the output.
template <class Rhs>
HistorySegment advance_one_period(const HistorySegment& hist, const Rhs& rhs_f) {
    const double tau = hist.tau();
    if (!(tau < 1.0)) throw PreconditionError("one-period map requires tau < forcing period");
    const Trajectory traj = integrate_dde(hist, hist.t0 + 1.0, rhs_f);
    const double t_at = hist.t0 + 1.0;
    HistorySegment out;
    out.t0 = t_at;
    out.dt = hist.dt;
    const int n = hist.intervals();
    out.h.resize(static_cast<size_t>(n) + 1);
    out.hdot.resize(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        const double s = t_at - tau + i * hist.dt;
        out.h[static_cast<size_t>(i)] = traj.eval(s);
        out.hdot[static_cast<size_t>(i)] = rhs_f(s, traj.eval(s - tau));
    }
    return out;
}

// q-fold composition of the one-period map, so that applying it for q1 and
// then q2 periods runs the identical step sequence as one q1+q2 application.
template <class Rhs>
HistorySegment time_q_map_rhs(const HistorySegment& hist, int q, const Rhs& rhs_f) {
    if (q < 1) throw PreconditionError("time_q_map: q must be >= 1");
    HistorySegment cur = hist;
    for (int k = 0; k < q; ++k) cur = advance_one_period(cur, rhs_f);
    return cur;
}

inline HistorySegment time_q_map(const HistorySegment& hist, int q, const ModelParams& p) {
    p.validate();
    return time_q_map_rhs(hist, q, GztRhs{p, nullptr});
}

} // namespace toribif

#endif

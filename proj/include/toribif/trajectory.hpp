#ifndef TORIBIF_TRAJECTORY_HPP
#define TORIBIF_TRAJECTORY_HPP

#include <cmath>
#include <vector>

#include "toribif/history.hpp"

namespace toribif {

// Dense integration output on a uniform grid, including the initial history
// (samples 0 .. n_history).
struct Trajectory {
    double t_start = 0.0;  // time of samples[0], i.e. t0 - tau
    double dt = 0.0;
    int n_history = 0;
    std::vector<double> h, hdot;

    size_t size() const { return h.size(); }
    double t_end() const { return t_start + dt * (static_cast<double>(h.size()) - 1.0); }
    double t0() const { return t_start + dt * n_history; }  // where integration started
    double tau() const { return dt * n_history; }

    double eval(double t) const { return hermite_eval(h, hdot, t_start, dt, t); }
    double eval_deriv(double t) const { return hermite_eval_deriv(h, hdot, t_start, dt, t); }

    // max of h over [t_from, t_end] using the stored samples
    double max_h_from(double t_from) const {
        size_t i0 = 0;
        if (t_from > t_start) {
            const double u = (t_from - t_start) / dt;
            i0 = static_cast<size_t>(std::max(0.0, std::floor(u)));
        }
        double m = -1e308;
        for (size_t i = i0; i < h.size(); ++i) m = std::max(m, h[i]);
        return m;
    }
};

// Resample a history segment of n_intervals steps of spacing dt ending at
// time t_at from a dense trajectory.  Node-aligned queries copy samples
// exactly; off-grid values come from the Hermite interpolant.
inline HistorySegment tail_history(const Trajectory& traj, double t_at, double dt, int n_intervals) {
    const double span = dt * n_intervals;
    if (t_at - span < traj.t_start - 1e-12 || t_at > traj.t_end() + 1e-12)
        throw InsufficientHistoryError("trajectory shorter than the requested delay interval");
    HistorySegment hs;
    hs.t0 = t_at;
    hs.dt = dt;
    hs.h.resize(static_cast<size_t>(n_intervals) + 1);
    hs.hdot.resize(static_cast<size_t>(n_intervals) + 1);
    for (int i = 0; i <= n_intervals; ++i) {
        const double t = t_at - span + i * dt;
        hs.h[static_cast<size_t>(i)] = traj.eval(t);
        hs.hdot[static_cast<size_t>(i)] = traj.eval_deriv(t);
    }
    return hs;
}

// Final delay interval of a trajectory, keeping its own grid spacing.
inline HistorySegment tail_history(const Trajectory& traj) {
    return tail_history(traj, traj.t_end(), traj.dt, traj.n_history);
}

// The involution t -> -h(t + 1/2) on trajectories, realised on the original
// time grid; requires the grid to resolve the half-period shift exactly.
inline Trajectory apply_symmetry(const Trajectory& traj) {
    const double kf = 0.5 / traj.dt;
    const long k = std::lround(kf);
    if (k < 1 || std::fabs(kf - static_cast<double>(k)) > 1e-9 * kf)
        throw AlignmentError("grid spacing does not divide 1/2");
    if (static_cast<size_t>(k) >= traj.h.size())
        throw AlignmentError("trajectory shorter than half a forcing period");
    Trajectory out;
    out.t_start = traj.t_start;
    out.dt = traj.dt;
    out.n_history = traj.n_history;
    const size_t n = traj.h.size() - static_cast<size_t>(k);
    out.h.resize(n);
    out.hdot.resize(n);
    for (size_t i = 0; i < n; ++i) {
        out.h[i] = -traj.h[i + static_cast<size_t>(k)];
        out.hdot[i] = -traj.hdot[i + static_cast<size_t>(k)];
    }
    return out;
}

} // namespace toribif

#endif

#include "toribif/strobe.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

#include "toribif/parallel.hpp"

namespace toribif {

StroboscopicTrace strobe(const Trajectory& traj, double transient) {
    const double t0 = traj.t0();
    if (!(traj.t_end() - t0 > transient + 2.0))
        throw PreconditionError("strobe: trajectory shorter than transient + 2");
    const double tau = traj.tau();
    StroboscopicTrace trace;
    double t = std::floor(t0 + transient) + 1.0;
    if (t <= t0 + transient) t += 1.0;
    trace.t_first = t;
    for (; t <= traj.t_end() + 1e-9; t += 1.0) {
        if (t > traj.t_end()) break;
        trace.points.push_back({traj.eval(t), traj.eval(t - tau)});
    }
    return trace;
}

namespace {

double dist2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

// largest Euclidean gap between angular neighbours about the centroid
double max_angular_gap(const std::vector<std::array<double, 2>>& pts) {
    double cx = 0, cy = 0;
    for (const auto& p : pts) { cx += p[0]; cy += p[1]; }
    cx /= static_cast<double>(pts.size());
    cy /= static_cast<double>(pts.size());
    std::vector<std::pair<double, size_t>> order(pts.size());
    for (size_t i = 0; i < pts.size(); ++i)
        order[i] = {std::atan2(pts[i][1] - cy, pts[i][0] - cx), i};
    std::sort(order.begin(), order.end());
    double worst = 0.0;
    for (size_t i = 0; i < order.size(); ++i) {
        const auto& a = pts[order[i].second];
        const auto& b = pts[order[(i + 1) % order.size()].second];
        worst = std::max(worst, dist2(a, b));
    }
    return std::sqrt(worst);
}

double diameter(const std::vector<std::array<double, 2>>& pts) {
    double lo0 = 1e308, hi0 = -1e308, lo1 = 1e308, hi1 = -1e308;
    for (const auto& p : pts) {
        lo0 = std::min(lo0, p[0]); hi0 = std::max(hi0, p[0]);
        lo1 = std::min(lo1, p[1]); hi1 = std::max(hi1, p[1]);
    }
    return std::hypot(hi0 - lo0, hi1 - lo1);
}

// cyclic strict local maxima of one period of yearly h values
int count_local_max_clusters(const std::vector<double>& seq) {
    const int q = static_cast<int>(seq.size());
    if (q <= 1) return 0;
    int p = 0;
    for (int i = 0; i < q; ++i) {
        const double prev = seq[static_cast<size_t>((i + q - 1) % q)];
        const double next = seq[static_cast<size_t>((i + 1) % q)];
        if (seq[static_cast<size_t>(i)] > prev && seq[static_cast<size_t>(i)] >= next) ++p;
    }
    return p;
}

} // namespace

bool curve_filling(const std::vector<std::array<double, 2>>& pts, const ClassifyOptions& opt) {
    if (pts.size() < 16) return false;
    const double diam = diameter(pts);
    if (!(diam > 0.0)) return false;
    const double g_all = max_angular_gap(pts);
    std::vector<std::array<double, 2>> half(pts.begin(), pts.begin() + static_cast<long>(pts.size() / 2));
    const double g_half = max_angular_gap(half);
    return g_all < opt.shrink_factor * g_half || g_all < opt.fill_fraction * diam;
}

AttractorClass classify(const StroboscopicTrace& trace, const ClassifyOptions& opt) {
    const auto& pts = trace.points;
    const int n = static_cast<int>(pts.size());
    if (n < 4 * opt.q_max)
        throw PreconditionError("classify: need at least 4*q_max trace points");

    AttractorClass out;
    for (const auto& p : pts) out.max_h = std::max(out.max_h, p[0]);

    for (int q = 1; q <= opt.q_max; ++q) {
        double worst = 0.0;
        for (int i = 0; i + q < n; ++i)
            worst = std::max(worst, dist2(pts[static_cast<size_t>(i)], pts[static_cast<size_t>(i + q)]));
        if (std::sqrt(worst) < opt.eps_lock) {
            out.kind = AttractorClass::Kind::locked;
            out.q = q;
            std::vector<double> seq(static_cast<size_t>(q));
            for (int i = 0; i < q; ++i) seq[static_cast<size_t>(i)] = pts[static_cast<size_t>(n - q + i)][0];
            out.p = count_local_max_clusters(seq);
            return out;
        }
    }

    if (curve_filling(pts, opt)) {
        out.kind = AttractorClass::Kind::quasiperiodic;
        return out;
    }
    out.kind = AttractorClass::Kind::undecided;
    return out;
}

std::vector<SweepPoint> sweep_column(double tau, double c_from, double c_to, int n_steps,
                                     const SweepOptions& opt) {
    if (n_steps < 1) throw PreconditionError("sweep_column: n_steps must be >= 1");
    std::vector<SweepPoint> out;
    out.reserve(static_cast<size_t>(n_steps));
    HistorySegment carried = make_constant_history(opt.seed_value, tau, opt.dt);
    for (int k = 0; k < n_steps; ++k) {
        const double c = n_steps == 1 ? c_from
                                      : c_from + (c_to - c_from) * static_cast<double>(k) / (n_steps - 1);
        ModelParams p{opt.b, opt.kappa, c, tau};
        SweepPoint sp;
        sp.c = c;
        try {
            // transient chunk is discarded to bound memory
            Trajectory tr1 = integrate(carried, carried.t0 + opt.transient, p);
            HistorySegment mid = history_from_trajectory_tail(tr1);
            tr1 = Trajectory{};
            Trajectory tr2 = integrate(mid, mid.t0 + opt.window, p);
            sp.cls = classify(strobe(tr2, 0.0), opt.classify);
            sp.cls.max_h = tr2.max_h_from(tr2.t0());
            carried = history_from_trajectory_tail(tr2);
        } catch (const DivergenceError&) {
            sp.cls.kind = AttractorClass::Kind::diverged;
            sp.cls.max_h = std::numeric_limits<double>::quiet_NaN();
            carried = make_constant_history(opt.seed_value, tau, opt.dt);
        }
        out.push_back(std::move(sp));
    }
    return out;
}

MaxMap max_map(const MaxMapGrid& grid, MaxMap::Direction dir, const SweepOptions& opt, int workers) {
    if (grid.n_tau < 1 || grid.n_c < 1) throw PreconditionError("max_map: grid must be at least 1x1");
    MaxMap map;
    map.direction = dir;
    map.taus.resize(static_cast<size_t>(grid.n_tau));
    for (int i = 0; i < grid.n_tau; ++i)
        map.taus[static_cast<size_t>(i)] =
            grid.n_tau == 1 ? grid.tau_from
                            : grid.tau_from + (grid.tau_to - grid.tau_from) * i / (grid.n_tau - 1.0);
    map.cs.resize(static_cast<size_t>(grid.n_c));
    for (int j = 0; j < grid.n_c; ++j)
        map.cs[static_cast<size_t>(j)] =
            grid.n_c == 1 ? grid.c_from : grid.c_from + (grid.c_to - grid.c_from) * j / (grid.n_c - 1.0);

    map.cells.resize(static_cast<size_t>(grid.n_tau) * static_cast<size_t>(grid.n_c));
    const bool up = dir == MaxMap::Direction::up;
    parallel_for(grid.n_tau, workers, [&](int i) {
        const double tau = map.taus[static_cast<size_t>(i)];
        const double c_lo = map.cs.front(), c_hi = map.cs.back();
        auto col = sweep_column(tau, up ? c_lo : c_hi, up ? c_hi : c_lo, grid.n_c, opt);
        for (int j = 0; j < grid.n_c; ++j) {
            const int jj = up ? j : grid.n_c - 1 - j;
            MaxMapCell& cell = map.cells[static_cast<size_t>(i) * static_cast<size_t>(grid.n_c) + static_cast<size_t>(jj)];
            cell.tau = tau;
            cell.c = col[static_cast<size_t>(j)].c;
            cell.cls = col[static_cast<size_t>(j)].cls;
        }
    });
    return map;
}

std::vector<std::array<double, 2>> power_spectrum(const Trajectory& traj, double window_years) {
    const double span = traj.t_end() - traj.t_start;
    if (window_years > span + 1e-9)
        throw PreconditionError("power_spectrum: window longer than the trajectory");
    const size_t n = static_cast<size_t>(std::floor(window_years / traj.dt));
    if (n < 16) throw PreconditionError("power_spectrum: window too short");
    std::vector<double> x(n);
    const size_t off = traj.h.size() - n;
    for (size_t k = 0; k < n; ++k) {
        const double w = 0.5 * (1.0 - std::cos(two_pi * static_cast<double>(k) / static_cast<double>(n - 1)));
        x[k] = w * traj.h[off + k];
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> X;
    fft.fwd(X, x);
    std::vector<std::array<double, 2>> out;
    out.reserve(n / 2 + 1);
    const double df = 1.0 / (static_cast<double>(n) * traj.dt);
    for (size_t k = 0; k <= n / 2; ++k) {
        const double pw = std::norm(X[k]);
        out.push_back({static_cast<double>(k) * df, std::log10(pw + 1e-300)});
    }
    return out;
}

} // namespace toribif

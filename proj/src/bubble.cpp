#include "toribif/bubble.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "toribif/parallel.hpp"

namespace toribif {

double point_polyline_dist(const std::array<double, 2>& p,
                           const std::vector<std::array<double, 2>>& poly) {
    double best = 1e308;
    for (size_t i = 0; i + 1 < poly.size(); ++i) {
        const double ax = poly[i][0], ay = poly[i][1];
        const double bx = poly[i + 1][0], by = poly[i + 1][1];
        const double vx = bx - ax, vy = by - ay;
        const double den = vx * vx + vy * vy;
        double t = den > 0.0 ? ((p[0] - ax) * vx + (p[1] - ay) * vy) / den : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(p[0] - (ax + t * vx), p[1] - (ay + t * vy)));
    }
    if (poly.size() == 1) best = std::hypot(p[0] - poly[0][0], p[1] - poly[0][1]);
    return best;
}

std::vector<std::array<double, 2>> polyline_intersections(
    const std::vector<std::array<double, 2>>& a, const std::vector<std::array<double, 2>>& b) {
    std::vector<std::array<double, 2>> out;
    for (size_t i = 0; i + 1 < a.size(); ++i) {
        for (size_t j = 0; j + 1 < b.size(); ++j) {
            const double x1 = a[i][0], y1 = a[i][1], x2 = a[i + 1][0], y2 = a[i + 1][1];
            const double x3 = b[j][0], y3 = b[j][1], x4 = b[j + 1][0], y4 = b[j + 1][1];
            const double den = (x2 - x1) * (y4 - y3) - (y2 - y1) * (x4 - x3);
            if (std::fabs(den) < 1e-300) continue;
            const double s = ((x3 - x1) * (y4 - y3) - (y3 - y1) * (x4 - x3)) / den;
            const double t = ((x3 - x1) * (y2 - y1) - (y3 - y1) * (x2 - x1)) / den;
            if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0) continue;
            out.push_back({x1 + s * (x2 - x1), y1 + s * (y2 - y1)});
        }
    }
    return out;
}

std::optional<double> polyline_crossing(const std::vector<std::array<double, 2>>& poly, int axis,
                                        double value) {
    for (size_t i = 0; i + 1 < poly.size(); ++i) {
        const double a = poly[i][static_cast<size_t>(axis)], b = poly[i + 1][static_cast<size_t>(axis)];
        if ((a - value) * (b - value) > 0.0) continue;
        if (a == b) return poly[i][static_cast<size_t>(1 - axis)];
        const double t = (value - a) / (b - a);
        return poly[i][static_cast<size_t>(1 - axis)] +
               t * (poly[i + 1][static_cast<size_t>(1 - axis)] - poly[i][static_cast<size_t>(1 - axis)]);
    }
    return std::nullopt;
}

PeriodicOrbit bootstrap_locked_orbit(double tau, double c_from, double c_to, int steps, int q,
                                     double dt, const SolveOptions& so) {
    HistorySegment h = make_constant_history(0.1, tau, dt);
    Trajectory window;
    for (int k = 0; k < steps; ++k) {
        const double c = steps == 1 ? c_to : c_from + (c_to - c_from) * k / (steps - 1.0);
        ModelParams p{1.0, 11.0, c, tau};
        Trajectory t1 = integrate(h, h.t0 + 400.0, p);
        HistorySegment mid = history_from_trajectory_tail(t1);
        t1 = Trajectory{};
        window = integrate(mid, mid.t0 + 250.0, p);
        h = history_from_trajectory_tail(window);
    }
    ModelParams p{1.0, 11.0, c_to, tau};
    PeriodicOrbit orb = solve_orbit_from_trajectory(window, q, p, so);
    // guard against having locked on a period-1 state instead
    double dq = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double t = q * (i + 0.5) / 64.0;
        dq = std::max(dq, std::fabs(orb.eval(t + 1.0) - orb.eval(t)));
    }
    if (q > 1 && dq < 0.05)
        throw NoConvergenceError("bootstrap collapsed onto a period-1 state", dq);
    return orb;
}

namespace {

PeriodicOrbit resolve_at(const PeriodicOrbit& seed, double tau, double c, const SolveOptions& so) {
    PeriodicOrbit g = seed;
    g.params.tau = tau;
    g.params.c = c;
    return solve_orbit(g, so);
}

const BranchPoint* nearest_point(const Branch& br, double param, FloquetSpectrum::Class cls) {
    const BranchPoint* best = nullptr;
    for (const auto& bp : br.points) {
        if (bp.spec.cls != cls) continue;
        if (!best || std::fabs(bp.param - param) < std::fabs(best->param - param)) best = &bp;
    }
    return best;
}

} // namespace

void build_bubble_branches(BubbleSet& bs) {
    const BubbleConfig& cfg = bs.cfg;
    if (cfg.verbose) std::cerr << "bubble: bootstrapping the locked orbit\n";
    bs.stable27 = bootstrap_locked_orbit(cfg.anchor_tau, cfg.anchor_c - 0.027, cfg.anchor_c, 7,
                                         cfg.q, cfg.dt, cfg.solve);

    ContinuationOptions co = cfg.copts;
    co.floq = cfg.floq;
    co.max_points = 600;

    if (cfg.verbose) std::cerr << "bubble: c-branch through the tongue\n";
    bs.c_branch = continue_branch(bs.stable27, ActiveParam::c, cfg.c_window[0] - 0.004,
                                  cfg.c_window[1] + 0.004, co);

    const BranchPoint* sp = nearest_point(bs.c_branch, cfg.anchor_c, FloquetSpectrum::Class::saddle1);
    if (!sp) throw Error("bubble: no 1-saddle found on the c-branch");
    bs.saddle27 = resolve_at(sp->orbit, cfg.anchor_tau, cfg.anchor_c, cfg.solve);

    if (cfg.verbose) std::cerr << "bubble: tau-branches at the anchor forcing\n";
    ContinuationOptions cot = co;
    cot.max_points = 400;
    bs.tau_branch_central = continue_branch(bs.stable27, ActiveParam::tau, cfg.tau_window[0] - 0.002,
                                            cfg.tau_window[1] + 0.002, cot);
    bs.tau_branch_saddle = continue_branch(bs.saddle27, ActiveParam::tau, cfg.tau_window[0] - 0.002,
                                           cfg.tau_window[1] + 0.002, cot);
}

void build_bubble_curves(BubbleSet& bs) {
    const BubbleConfig& cfg = bs.cfg;

    std::vector<const BifurcationEvent*> sn_events;
    for (const auto& ev : bs.c_branch.events)
        if (ev.kind == EventKind::SN) sn_events.push_back(&ev);
    if (sn_events.size() < 2) throw Error("bubble: expected two folds on the c-branch");
    std::sort(sn_events.begin(), sn_events.end(),
              [](const BifurcationEvent* a, const BifurcationEvent* b) { return a->c < b->c; });

    const BifurcationEvent* t_seed = nullptr;
    for (const auto& ev : bs.tau_branch_central.events)
        if (ev.kind == EventKind::T && !t_seed) t_seed = &ev;
    if (!t_seed) throw Error("bubble: no torus bifurcation on the central tau-branch");

    const BifurcationEvent* np_seed = nullptr;
    for (const auto& ev : bs.tau_branch_saddle.events)
        if (ev.kind == EventKind::NP && !np_seed) np_seed = &ev;
    if (!np_seed) throw Error("bubble: no neutral-saddle point on the saddle tau-branch");

    CurveOptions cuo;
    cuo.tau_window = cfg.tau_window;
    cuo.c_window = cfg.c_window;
    cuo.copts = cfg.copts;
    cuo.copts.floq = cfg.floq;
    cuo.verbose = cfg.verbose;

    struct Job {
        CurveKind kind;
        const BifurcationEvent* seed;
        int axis;
        Codim1Curve* out;
    };
    std::vector<Job> jobs = {
        {CurveKind::SN, sn_events.front(), 0, &bs.sn_low},
        {CurveKind::SN, sn_events.back(), 0, &bs.sn_high},
        {CurveKind::T, t_seed, 1, &bs.t_curve},
        {CurveKind::NP, np_seed, 1, &bs.np_curve},
    };
    parallel_for(static_cast<int>(jobs.size()), cfg.workers, [&](int i) {
        Job& j = jobs[static_cast<size_t>(i)];
        CurveOptions o = cuo;
        o.march_axis = j.axis;
        if (cfg.verbose) std::cerr << "bubble: tracing " << curve_name(j.kind) << " curve\n";
        *j.out = trace_codim1(j.kind, *j.seed, o);
    });
}

namespace {

TransitionOptions make_transition_options(const BubbleConfig& cfg) {
    TransitionOptions to;
    to.refine_tol = cfg.locus_refine_tol;
    to.man.n_seeds = cfg.probe_seeds;
    to.man.n_iters = cfg.probe_iters;
    to.man.dt_target = cfg.dt;
    to.man.floq = cfg.floq;
    to.solve = cfg.solve;
    to.solve.L = 40;  // manifold seeding needs the finer consistency mesh
    to.floq = cfg.floq;
    to.dt = cfg.dt;
    to.verbose = false;
    return to;
}

// nearest curve orbit usable as a solve seed near (tau, c)
PeriodicOrbit seed_near(const BubbleSet& bs, double tau, double c, bool saddle) {
    const PeriodicOrbit* best = nullptr;
    double bd = 1e308;
    auto consider = [&](const PeriodicOrbit& o, FloquetSpectrum::Class cls, bool want_saddle) {
        const bool is_sad = cls == FloquetSpectrum::Class::saddle1;
        if (want_saddle != is_sad) return;
        const double d = std::hypot((o.params.tau - tau) * 50.0, o.params.c - c);
        if (d < bd) { bd = d; best = &o; }
    };
    for (const auto& bp : bs.tau_branch_saddle.points) consider(bp.orbit, bp.spec.cls, saddle);
    for (const auto& bp : bs.tau_branch_central.points) consider(bp.orbit, bp.spec.cls, saddle);
    for (const auto& bp : bs.c_branch.points) consider(bp.orbit, bp.spec.cls, saddle);
    if (!best) return saddle ? bs.saddle27 : bs.stable27;
    return *best;
}

std::optional<double> tongue_bound(const BubbleSet& bs, double tau, bool upper) {
    return polyline_crossing(upper ? bs.sn_high.pts : bs.sn_low.pts, 0, tau);
}

} // namespace

void build_bubble_loci(BubbleSet& bs) {
    const BubbleConfig& cfg = bs.cfg;
    const TransitionOptions to = make_transition_options(cfg);

    // ---- homoclinic locus: slices in c, scans in tau just left of the T curve
    {
        double c_lo = 1e308, c_hi = -1e308;
        for (const auto& p : bs.t_curve.pts) { c_lo = std::min(c_lo, p[1]); c_hi = std::max(c_hi, p[1]); }
        const double pad = 0.08 * (c_hi - c_lo);
        std::vector<double> slices;
        for (int i = 0; i < cfg.hoc_slices; ++i)
            slices.push_back(c_lo + pad + (c_hi - c_lo - 2 * pad) * i / std::max(1, cfg.hoc_slices - 1));

        auto hoc_at = [&](double c) -> std::optional<TransitionPoint> {
            const auto t_tau = polyline_crossing(bs.t_curve.pts, 1, c);
            if (!t_tau) return std::nullopt;
            BubbleObjects objs(seed_near(bs, *t_tau, c, false), seed_near(bs, *t_tau, c, true));
            const double right = *t_tau - 2e-4;
            const double step = 6e-4;
            for (int k = 1; k <= 8; ++k) {
                try {
                    return locate_hoc(objs, c, right - k * step, right, to);
                } catch (const NoBracketError&) {
                    continue;
                } catch (const Error&) {
                    return std::nullopt;
                }
            }
            return std::nullopt;
        };
        if (cfg.verbose) std::cerr << "bubble: homoclinic locus (" << slices.size() << " slices)\n";
        bs.hoc = trace_locus(TransitionKind::HoC, slices, hoc_at, cfg.end_refine_tol, cfg.workers);
    }

    // ---- heteroclinic loci: slices in tau, one locus per manifold branch
    std::vector<double> tau_slices;
    for (int i = 0; i < cfg.hec_slices; ++i)
        tau_slices.push_back(cfg.tau_window[0] + 0.002 +
                             (cfg.tau_window[1] - cfg.tau_window[0] - 0.004) * i /
                                 std::max(1, cfg.hec_slices - 1));

    auto hec_at = [&](double tau, int sign) -> std::optional<TransitionPoint> {
        const auto lo_b = tongue_bound(bs, tau, false);
        const auto hi_b = tongue_bound(bs, tau, true);
        if (!lo_b || !hi_b || !(*hi_b > *lo_b)) return std::nullopt;
        const double width = *hi_b - *lo_b;
        const double c_mid = 0.5 * (*lo_b + *hi_b);
        BubbleObjects objs(seed_near(bs, tau, c_mid, false), seed_near(bs, tau, c_mid, true));
        // step outward from the middle until the heteroclinic signature flips
        const double step = std::max(0.12 * width, 3.0 * to.refine_tol);
        for (int dirn : {+1, -1}) {
            double prev = c_mid;
            for (int k = 1; k <= 6; ++k) {
                const double cc = c_mid + dirn * k * step;
                if (cc <= *lo_b + 0.05 * width || cc >= *hi_b - 0.05 * width) break;
                try {
                    return locate_hec(objs, tau, std::min(prev, cc), std::max(prev, cc), sign, to);
                } catch (const NoBracketError&) {
                    prev = cc;
                    continue;
                } catch (const Error&) {
                    break;
                }
            }
        }
        return std::nullopt;
    };

    if (cfg.verbose) std::cerr << "bubble: heteroclinic loci\n";
    bs.hec_plus = trace_locus(TransitionKind::HeC, tau_slices,
                              [&](double tau) { return hec_at(tau, +1); }, cfg.end_refine_tol,
                              cfg.workers);
    bs.hec_minus = trace_locus(TransitionKind::HeC, tau_slices,
                               [&](double tau) { return hec_at(tau, -1); }, cfg.end_refine_tol,
                               cfg.workers);

    // ---- folding-tori loci: carried sweeps riding the rotational curve
    auto snt_at = [&](double tau, bool upward) -> std::optional<TransitionPoint> {
        // start just past the heteroclinic locus in the scan direction
        const TransitionLocus* hec_first = upward ? &bs.hec_plus : &bs.hec_minus;
        const TransitionLocus* hec_second = upward ? &bs.hec_minus : &bs.hec_plus;
        auto pick = [&](const TransitionLocus& l) -> std::optional<double> {
            std::vector<std::array<double, 2>> poly;
            for (const auto& p : l.points) poly.push_back({p.tau, p.c});
            if (poly.size() < 2) return std::nullopt;
            return polyline_crossing(poly, 0, tau);
        };
        std::optional<double> c_hec;
        for (const TransitionLocus* l : {hec_first, hec_second}) {
            const auto cc = pick(*l);
            if (!cc) continue;
            if (!c_hec || (upward ? *cc > *c_hec : *cc < *c_hec)) c_hec = cc;
        }
        if (!c_hec) return std::nullopt;
        const double dirn = upward ? 1.0 : -1.0;
        const double c_start = *c_hec + dirn * 4e-4;

        // rider: a manifold seed that accumulates on the rotational curve
        std::optional<HistorySegment> rider;
        try {
            BubbleObjects objs(seed_near(bs, tau, c_start, false), seed_near(bs, tau, c_start, true));
            auto loc = objs.at(tau, c_start, to.solve, to.floq);
            for (int sign : {+1, -1}) {
                const ManifoldTrace tr = trace_manifold(loc.saddle, sign, loc.ctx, to.man);
                for (size_t i = 0; i < tr.destinations.size(); ++i) {
                    if (tr.destinations[i] == Destination::rotational_curve &&
                        !tr.final_states[i].h.empty()) {
                        rider = tr.final_states[i];
                        break;
                    }
                }
                if (rider) break;
            }
        } catch (const Error&) {
            return std::nullopt;
        }
        if (!rider) return std::nullopt;

        const double c_end = upward ? cfg.c_window[1] : cfg.c_window[0];
        try {
            return locate_snt(tau, c_start, c_end, &*rider, to);
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    if (cfg.verbose) std::cerr << "bubble: folding-tori loci\n";
    bs.snt_up = trace_locus(TransitionKind::SNT, tau_slices,
                            [&](double tau) { return snt_at(tau, true); }, cfg.end_refine_tol,
                            cfg.workers);
    bs.snt_down = trace_locus(TransitionKind::SNT, tau_slices,
                              [&](double tau) { return snt_at(tau, false); }, cfg.end_refine_tol,
                              cfg.workers);
}

namespace {

std::vector<std::array<double, 2>> locus_polyline(const TransitionLocus& l) {
    std::vector<std::array<double, 2>> poly;
    for (const auto& p : l.points) poly.push_back({p.tau, p.c});
    return poly;
}

} // namespace

void extract_special_points(BubbleSet& bs) {
    SpecialPoints& sp = bs.points;
    sp = SpecialPoints{};
    auto near_sn = [&](const std::array<double, 2>& p) {
        return std::min(point_polyline_dist(p, bs.sn_low.pts), point_polyline_dist(p, bs.sn_high.pts));
    };
    for (const Codim1Curve* curve : {&bs.t_curve, &bs.np_curve}) {
        if (curve->pts.empty()) continue;
        for (const auto& end : {curve->pts.front(), curve->pts.back()})
            if (near_sn(end) < 3e-3) sp.B.push_back(end);
    }
    for (const TransitionLocus* l : {&bs.hec_plus, &bs.hec_minus}) {
        const auto poly = locus_polyline(*l);
        if (poly.empty()) continue;
        for (const auto& end : {poly.front(), poly.back()})
            if (near_sn(end) < 3e-3) sp.Z.push_back(end);
    }
    {
        const auto xs = polyline_intersections(locus_polyline(bs.hec_plus), locus_polyline(bs.hec_minus));
        if (!xs.empty()) sp.N = xs.front();
    }
    for (const TransitionLocus* l : {&bs.snt_up, &bs.snt_down}) {
        const auto poly = locus_polyline(*l);
        if (poly.empty()) continue;
        const auto xs = polyline_intersections(poly, bs.t_curve.pts);
        if (!xs.empty() && !sp.X) sp.X = xs.front();
        for (const auto& end : {poly.front(), poly.back()})
            if (point_polyline_dist(end, bs.np_curve.pts) < 4e-3) sp.K.push_back(end);
    }
}

BubbleSet build_bubble(const BubbleConfig& cfg) {
    BubbleSet bs;
    bs.cfg = cfg;
    build_bubble_branches(bs);
    build_bubble_curves(bs);
    build_bubble_loci(bs);
    extract_special_points(bs);
    return bs;
}

} // namespace toribif

#include "toribif/transitions.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "toribif/parallel.hpp"

namespace toribif {

namespace {

// Newton re-solve at shifted parameters, halving the parameter move on
// failure so long marches across the window stay robust.
PeriodicOrbit walk_to(const PeriodicOrbit& seed, double tau, double c, const SolveOptions& so) {
    PeriodicOrbit cur = seed;
    int pieces = 1;
    while (pieces <= 8) {
        bool ok = true;
        PeriodicOrbit attempt = cur;
        for (int k = 1; k <= pieces && ok; ++k) {
            PeriodicOrbit g = attempt;
            const double f = static_cast<double>(k) / pieces;
            g.params.tau = cur.params.tau + f * (tau - cur.params.tau);
            g.params.c = cur.params.c + f * (c - cur.params.c);
            try {
                attempt = solve_orbit(g, so);
            } catch (const Error&) {
                ok = false;
            }
        }
        if (ok) return attempt;
        pieces *= 2;
    }
    throw NoConvergenceError("orbit did not track to the requested parameters", 0.0);
}

} // namespace

BubbleObjects::Local BubbleObjects::at(double tau, double c, const SolveOptions& so,
                                       const FloquetOptions& fo) {
    if (central_seed_.L != so.L) central_seed_ = resample_orbit(central_seed_, so.L, so);
    if (saddle_seed_.L != so.L) saddle_seed_ = resample_orbit(saddle_seed_, so.L, so);
    Local loc;
    loc.central = walk_to(central_seed_, tau, c, so);
    central_seed_ = loc.central;
    loc.saddle = walk_to(saddle_seed_, tau, c, so);
    saddle_seed_ = loc.saddle;
    loc.partner = solve_orbit(orbit_symmetry_image(loc.saddle), so);
    loc.central_spec = floquet(loc.central, fo);

    const auto central_pts = loc.central.headpoints();
    const auto central_img = solve_orbit(orbit_symmetry_image(loc.central), so).headpoints();
    const auto saddle_pts = loc.saddle.headpoints();
    const auto partner_pts = loc.partner.headpoints();

    DestinationContext& ctx = loc.ctx;
    if (loc.central_spec.cls == FloquetSpectrum::Class::stable) {
        ctx.stable_points = central_pts;
        ctx.stable_points.insert(ctx.stable_points.end(), central_img.begin(), central_img.end());
    }
    ctx.saddle_points = saddle_pts;
    ctx.saddle_points.insert(ctx.saddle_points.end(), partner_pts.begin(), partner_pts.end());
    ctx.partner_saddle_points = partner_pts;
    ctx.ring_centroid = {0.0, 0.0};
    for (const auto& p : central_pts) { ctx.ring_centroid[0] += p[0]; ctx.ring_centroid[1] += p[1]; }
    for (const auto& p : central_img) { ctx.ring_centroid[0] += p[0]; ctx.ring_centroid[1] += p[1]; }
    const double m = static_cast<double>(central_pts.size() + central_img.size());
    ctx.ring_centroid[0] /= m;
    ctx.ring_centroid[1] /= m;
    return loc;
}

namespace {

struct HocProbe {
    bool ua_plus = false, ua_minus = false;  // "uniform attracting point" per branch
    std::string describe(int sign) const {
        const bool ua = sign > 0 ? ua_plus : ua_minus;
        return ua ? "uniform_attracting" : "tangle_or_curve";
    }
};

HocProbe hoc_probe(BubbleObjects& objs, double tau, double c, const TransitionOptions& opt) {
    auto loc = objs.at(tau, c, opt.solve, opt.floq);
    HocProbe pr;
    for (int sign : {+1, -1}) {
        const ManifoldTrace tr = trace_manifold(loc.saddle, sign, loc.ctx, opt.man);
        const DestinationSummary s = classify_destinations(tr);
        const bool ua = s.uniform && s.label == Destination::attracting_point;
        (sign > 0 ? pr.ua_plus : pr.ua_minus) = ua;
    }
    return pr;
}

} // namespace

TransitionPoint locate_hoc(BubbleObjects& objs, double c_fixed, double tau_lo, double tau_hi,
                           const TransitionOptions& opt) {
    if (!(tau_lo < tau_hi)) throw PreconditionError("locate_hoc: bad range");
    HocProbe lo = hoc_probe(objs, tau_lo, c_fixed, opt);
    HocProbe hi = hoc_probe(objs, tau_hi, c_fixed, opt);

    int sign = 0;
    if (lo.ua_plus != hi.ua_plus) sign = +1;
    else if (lo.ua_minus != hi.ua_minus) sign = -1;
    if (sign == 0) throw NoBracketError("homoclinic signature equal at both scan ends");
    auto ua_of = [&](const HocProbe& p) { return sign > 0 ? p.ua_plus : p.ua_minus; };
    if (!ua_of(lo) || ua_of(hi))
        throw NoBracketError("homoclinic signature oriented the wrong way");

    double a = tau_lo, b = tau_hi;
    HocProbe pa = lo, pb = hi;
    while (b - a > opt.refine_tol) {
        const double m = 0.5 * (a + b);
        const HocProbe pm = hoc_probe(objs, m, c_fixed, opt);
        if (opt.verbose)
            std::cerr << "HoC probe tau=" << m << " -> " << pm.describe(sign) << "\n";
        if (ua_of(pm)) { a = m; pa = pm; }
        else { b = m; pb = pm; }
    }
    TransitionPoint pt;
    pt.kind = TransitionKind::HoC;
    pt.tau = 0.5 * (a + b);
    pt.c = c_fixed;
    pt.bracket_lo = a;
    pt.bracket_hi = b;
    pt.before_sig = pb.describe(sign);  // larger tau side
    pt.after_sig = pa.describe(sign);
    pt.branch_sign = sign;
    return pt;
}

namespace {

bool hec_after(BubbleObjects& objs, double tau, double c, int branch_sign,
               const TransitionOptions& opt, std::string* sig = nullptr) {
    auto loc = objs.at(tau, c, opt.solve, opt.floq);
    const ManifoldTrace tr = trace_manifold(loc.saddle, branch_sign, loc.ctx, opt.man);
    const DestinationSummary s = classify_destinations(tr);
    const bool rot = s.has(Destination::rotational_curve);
    const bool het = tr.min_dist_partner < loc.ctx.delta_het;
    if (sig) *sig = rot ? "rotational_curve" : het ? "near_partner_saddle" : "attracting_points";
    return rot || het;
}

} // namespace

TransitionPoint locate_hec(BubbleObjects& objs, double tau_fixed, double c_lo, double c_hi,
                           int branch_sign, const TransitionOptions& opt) {
    if (!(c_lo < c_hi)) throw PreconditionError("locate_hec: bad range");
    std::string sig_lo, sig_hi;
    const bool lo = hec_after(objs, tau_fixed, c_lo, branch_sign, opt, &sig_lo);
    const bool hi = hec_after(objs, tau_fixed, c_hi, branch_sign, opt, &sig_hi);
    if (lo == hi) throw NoBracketError("heteroclinic signature equal at both scan ends");

    double a = c_lo, b = c_hi;
    std::string sig_a = sig_lo, sig_b = sig_hi;
    while (b - a > opt.refine_tol) {
        const double m = 0.5 * (a + b);
        std::string sig_m;
        const bool after = hec_after(objs, tau_fixed, m, branch_sign, opt, &sig_m);
        if (opt.verbose) std::cerr << "HeC probe c=" << m << " -> " << sig_m << "\n";
        if (after == hi) { b = m; sig_b = sig_m; }
        else { a = m; sig_a = sig_m; }
    }
    TransitionPoint pt;
    pt.kind = TransitionKind::HeC;
    pt.tau = tau_fixed;
    pt.c = 0.5 * (a + b);
    pt.bracket_lo = a;
    pt.bracket_hi = b;
    pt.before_sig = hi ? sig_a : sig_b;  // side where the connection has not happened
    pt.after_sig = hi ? sig_b : sig_a;
    pt.branch_sign = branch_sign;
    return pt;
}

TransitionPoint locate_snt(double tau, double c_from, double c_to, const HistorySegment* rider,
                           const TransitionOptions& opt) {
    if (c_from == c_to) throw PreconditionError("locate_snt: empty scan");
    const double dir = c_to > c_from ? 1.0 : -1.0;
    const double fine = opt.refine_tol;
    const double coarse = opt.snt_coarse_factor * fine;

    HistorySegment state = rider ? *rider : make_constant_history(0.1, tau, opt.dt);

    auto probe = [&](HistorySegment& h, double c) {
        ModelParams p{opt.b, opt.kappa, c, tau};
        Trajectory t1 = integrate(h, h.t0 + opt.snt_transient, p);
        HistorySegment mid = history_from_trajectory_tail(t1);
        t1 = Trajectory{};
        Trajectory t2 = integrate(mid, mid.t0 + opt.snt_window, p);
        const double mh = t2.max_h_from(t2.t0());
        h = history_from_trajectory_tail(t2);
        return mh;
    };

    auto march = [&](HistorySegment h0, double c0, double c1, double step)
        -> std::optional<std::tuple<double, double, HistorySegment, double, double>> {
        HistorySegment h = std::move(h0);
        double c_prev = c0;
        HistorySegment h_prev = h;
        double m_prev = probe(h, c0);
        h_prev = h;
        for (double c = c0 + dir * step;; c += dir * step) {
            if (dir * (c - c1) > 1e-12) break;
            const double m = probe(h, c);
            if (opt.verbose) std::cerr << "SNT probe c=" << c << " max_h=" << m << "\n";
            if (std::fabs(m - m_prev) > opt.snt_jump)
                return std::make_tuple(c_prev, c, std::move(h_prev), m_prev, m);
            c_prev = c;
            m_prev = m;
            h_prev = h;
        }
        return std::nullopt;
    };

    auto hit = march(state, c_from, c_to, coarse);
    if (!hit) throw NoBracketError("no amplitude jump along the scan range");
    auto [c_lo, c_hi, pre_state, m_before, m_after] = *hit;
    if (std::fabs(c_hi - c_lo) > fine * 1.5) {
        auto fine_hit = march(pre_state, c_lo, c_hi + dir * 0.5 * fine, fine);
        if (fine_hit) std::tie(c_lo, c_hi, pre_state, m_before, m_after) = *fine_hit;
    }

    TransitionPoint pt;
    pt.kind = TransitionKind::SNT;
    pt.tau = tau;
    pt.c = 0.5 * (c_lo + c_hi);
    pt.bracket_lo = std::min(c_lo, c_hi);
    pt.bracket_hi = std::max(c_lo, c_hi);
    pt.before_sig = "max_h=" + std::to_string(m_before);
    pt.after_sig = "max_h=" + std::to_string(m_after);
    return pt;
}

TransitionLocus trace_locus(TransitionKind kind, const std::vector<double>& slices,
                            const std::function<std::optional<TransitionPoint>(double)>& locate_at,
                            double end_refine_tol, int workers) {
    TransitionLocus locus;
    locus.kind = kind;
    std::vector<std::optional<TransitionPoint>> found(slices.size());
    parallel_for(static_cast<int>(slices.size()), workers,
                 [&](int i) { found[static_cast<size_t>(i)] = locate_at(slices[static_cast<size_t>(i)]); });

    // refine each boundary between a bracketed slice and an empty neighbour
    struct EndJob { double good, bad; };
    std::vector<EndJob> ends;
    for (size_t i = 0; i + 1 < slices.size(); ++i) {
        if (found[i].has_value() != found[i + 1].has_value()) {
            const double good = found[i] ? slices[i] : slices[i + 1];
            const double bad = found[i] ? slices[i + 1] : slices[i];
            ends.push_back({good, bad});
        }
    }
    std::vector<std::vector<TransitionPoint>> extra(ends.size());
    parallel_for(static_cast<int>(ends.size()), workers, [&](int e) {
        double good = ends[static_cast<size_t>(e)].good, bad = ends[static_cast<size_t>(e)].bad;
        while (std::fabs(bad - good) > end_refine_tol) {
            const double m = 0.5 * (good + bad);
            auto r = locate_at(m);
            if (r) {
                extra[static_cast<size_t>(e)].push_back(*r);
                good = m;
            } else {
                bad = m;
            }
        }
    });

    std::vector<std::pair<double, TransitionPoint>> all;
    for (size_t i = 0; i < slices.size(); ++i) {
        if (found[i]) all.emplace_back(slices[i], *found[i]);
        else {
            const double prev = i > 0 ? slices[i - 1] : slices[i];
            locus.gaps.push_back({std::min(prev, slices[i]), std::max(prev, slices[i])});
        }
    }
    for (size_t e = 0; e < ends.size(); ++e)
        for (const auto& pt : extra[e]) {
            const double sval = kind == TransitionKind::HoC ? pt.c : pt.tau;
            all.emplace_back(sval, pt);
        }
    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [s, pt] : all) {
        locus.slice_values.push_back(s);
        locus.points.push_back(std::move(pt));
    }
    return locus;
}

DriftResult drift_run(const ModelParams& base, const RampSpec& ramp, const HistorySegment& init,
                      double t_end, const std::vector<std::pair<std::string, double>>& event_cs) {
    DriftResult out;
    out.tau = base.tau;
    out.ramp = ramp;
    out.traj = integrate(init, t_end, base, ramp);

    const double t0 = out.traj.t0();
    const long years = static_cast<long>(std::floor((out.traj.t_end() - t0) + 1e-9));
    for (long y = 0; y < years; ++y) {
        const double ta = t0 + static_cast<double>(y);
        const double tb = ta + 1.0;
        const size_t ia = static_cast<size_t>(std::ceil((ta - out.traj.t_start) / out.traj.dt - 1e-9));
        const size_t ib = std::min(out.traj.h.size() - 1,
                                   static_cast<size_t>(std::floor((tb - out.traj.t_start) / out.traj.dt + 1e-9)));
        double m = 0.0;
        for (size_t i = ia; i <= ib; ++i) m = std::max(m, std::fabs(out.traj.h[i]));
        out.year_max.push_back({tb, m});
    }

    for (const auto& [name, ce] : event_cs) {
        const double f = (ce - ramp.c_start) / (ramp.c_end - ramp.c_start);
        out.event_times.emplace_back(name, ramp.t_ramp_start + f * (ramp.t_ramp_end - ramp.t_ramp_start));
    }
    return out;
}

double collapse_time(const DriftResult& dr, int confirm_years) {
    const auto& ym = dr.year_max;
    if (ym.size() < 400) return std::numeric_limits<double>::quiet_NaN();
    auto median_of = [&](size_t a, size_t b) {
        std::vector<double> v;
        for (size_t i = a; i < b; ++i) v.push_back(ym[i][1]);
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    const double early = median_of(50, std::min<size_t>(300, ym.size() / 3));
    const double late = median_of(ym.size() - 200, ym.size());
    if (early - late < 0.2) return std::numeric_limits<double>::quiet_NaN();
    const double thr = 0.5 * (early + late);
    for (size_t i = 0; i + static_cast<size_t>(confirm_years) < ym.size(); ++i) {
        bool all = true;
        for (size_t j = i; j < i + static_cast<size_t>(confirm_years); ++j)
            if (ym[j][1] >= thr) { all = false; break; }
        if (all) return ym[i][0];
    }
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace toribif

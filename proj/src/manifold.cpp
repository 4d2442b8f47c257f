#include "toribif/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "toribif/parallel.hpp"

namespace toribif {

const char* destination_name(Destination d) {
    switch (d) {
        case Destination::attracting_point: return "attracting_point";
        case Destination::rotational_curve: return "rotational_curve";
        case Destination::contractible_curve: return "contractible_curve";
        case Destination::saddle_neighborhood: return "saddle_neighborhood";
        case Destination::escaped: return "escaped";
        default: return "undecided";
    }
}

namespace {

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double min_dist_to(const std::array<double, 2>& p, const std::vector<std::array<double, 2>>& set) {
    double best = 1e308;
    for (const auto& s : set) best = std::min(best, dist(p, s));
    return best;
}

// largest angular gap (radians) of the points seen from a center
double max_circular_gap(const std::vector<std::array<double, 2>>& pts,
                        const std::array<double, 2>& center) {
    std::vector<double> ang;
    ang.reserve(pts.size());
    for (const auto& p : pts) ang.push_back(std::atan2(p[1] - center[1], p[0] - center[0]));
    std::sort(ang.begin(), ang.end());
    double worst = two_pi - (ang.back() - ang.front());
    for (size_t i = 0; i + 1 < ang.size(); ++i) worst = std::max(worst, ang[i + 1] - ang[i]);
    return worst;
}

} // namespace

Destination label_tail(const std::vector<std::array<double, 2>>& iterates,
                       const DestinationContext& ctx) {
    if (iterates.size() < 12) return Destination::undecided;
    const size_t n = iterates.size();
    const size_t tail_start = n / 2;
    std::vector<std::array<double, 2>> tail(iterates.begin() + static_cast<long>(tail_start),
                                            iterates.end());

    // converged onto a known attracting point
    if (!ctx.stable_points.empty()) {
        for (const auto& s : ctx.stable_points) {
            bool all = true;
            for (size_t i = n - std::min<size_t>(10, n); i < n; ++i)
                if (dist(iterates[i], s) > ctx.delta) { all = false; break; }
            if (all) return Destination::attracting_point;
        }
    }

    for (const auto& p : tail)
        if (min_dist_to(p, ctx.saddle_points) < ctx.delta) return Destination::saddle_neighborhood;

    // still spiralling in: distance to the nearest stable point keeps shrinking
    if (!ctx.stable_points.empty()) {
        const std::array<double, 2> target =
            *std::min_element(ctx.stable_points.begin(), ctx.stable_points.end(),
                              [&](const auto& a, const auto& b) {
                                  return dist(iterates.back(), a) < dist(iterates.back(), b);
                              });
        const size_t half = tail.size() / 2;
        double r_early = 0.0, r_late = 0.0;
        for (size_t i = 0; i < half; ++i) r_early += dist(tail[i], target);
        for (size_t i = half; i < tail.size(); ++i) r_late += dist(tail[i], target);
        r_early /= static_cast<double>(half);
        r_late /= static_cast<double>(tail.size() - half);
        if (r_late < 0.72 * r_early && r_late < 0.2) return Destination::attracting_point;
    }

    // closed-curve destinations, told apart by the winding about the ring of
    // locked points: a rotational curve surrounds it, a contractible one sits
    // beside one point
    const double gap_ring = max_circular_gap(tail, ctx.ring_centroid);
    if (gap_ring < 0.8) {
        double r_min = 1e308, r_max = 0.0;
        for (const auto& p : tail) {
            const double r = dist(p, ctx.ring_centroid);
            r_min = std::min(r_min, r);
            r_max = std::max(r_max, r);
        }
        if (r_min > 0.0 && r_max / r_min < 8.0) return Destination::rotational_curve;
    }
    std::array<double, 2> local{0.0, 0.0};
    for (const auto& p : tail) { local[0] += p[0]; local[1] += p[1]; }
    local[0] /= static_cast<double>(tail.size());
    local[1] /= static_cast<double>(tail.size());
    const double gap_local = max_circular_gap(tail, local);
    if (gap_local < 1.2) {
        double r_min = 1e308;
        for (const auto& p : tail) r_min = std::min(r_min, dist(p, local));
        if (r_min > ctx.delta) return Destination::contractible_curve;
    }
    return Destination::undecided;
}

ManifoldTrace trace_manifold(const PeriodicOrbit& saddle, int sign, const DestinationContext& ctx,
                             const ManifoldOptions& opt) {
    if (sign != +1 && sign != -1) throw PreconditionError("trace_manifold: sign must be +-1");
    if (opt.n_seeds < 1 || opt.n_iters < 1) throw PreconditionError("trace_manifold: bad seed/iter counts");

    ManifoldTrace trace;
    trace.q = saddle.q;
    trace.sign = sign;

    FloquetOptions fopt = opt.floq;
    fopt.dt_target = opt.dt_target;
    const HistorySegment v = unstable_eigenfunction(saddle, &trace.mu_u, fopt);
    const HistorySegment base = saddle.history_at(v.t0, opt.dt_target);
    if (v.h.size() != base.h.size()) throw Error("eigenfunction grid does not match the history grid");

    trace.eps_abs = opt.eps_rel * saddle.amplitude();
    trace.seed_scales.resize(static_cast<size_t>(opt.n_seeds));
    for (int i = 0; i < opt.n_seeds; ++i)
        trace.seed_scales[static_cast<size_t>(i)] =
            std::pow(trace.mu_u, static_cast<double>(i) / static_cast<double>(opt.n_seeds));

    trace.iterates.assign(static_cast<size_t>(opt.n_seeds), {});
    trace.destinations.assign(static_cast<size_t>(opt.n_seeds), Destination::undecided);
    trace.final_states.assign(static_cast<size_t>(opt.n_seeds), HistorySegment{});

    const ModelParams params = saddle.params;
    const int q = saddle.q;
    const double eps = trace.eps_abs;

    std::vector<char> escaped(static_cast<size_t>(opt.n_seeds), 0);
    parallel_for(opt.n_seeds, opt.workers, [&](int i) {
        const double s = trace.seed_scales[static_cast<size_t>(i)] * static_cast<double>(sign);
        HistorySegment h = base;
        for (size_t j = 0; j < h.h.size(); ++j) {
            h.h[j] += eps * s * v.h[j];
            h.hdot[j] += eps * s * v.hdot[j];
        }
        auto& pts = trace.iterates[static_cast<size_t>(i)];
        pts.reserve(static_cast<size_t>(opt.n_iters));
        for (int it = 0; it < opt.n_iters; ++it) {
            try {
                h = time_q_map(h, q, params);
            } catch (const DivergenceError&) {
                escaped[static_cast<size_t>(i)] = 1;
                break;
            }
            pts.push_back({h.headpoint_h(), h.headpoint_delayed()});
            if (std::fabs(h.headpoint_h()) > 6.0) {
                escaped[static_cast<size_t>(i)] = 1;
                break;
            }
        }
        if (!escaped[static_cast<size_t>(i)]) trace.final_states[static_cast<size_t>(i)] = h;
    });

    // linear-regime certificate from the innermost seed
    {
        HistorySegment h = base;
        for (size_t j = 0; j < h.h.size(); ++j) {
            h.h[j] += eps * static_cast<double>(sign) * v.h[j];
            h.hdot[j] += eps * static_cast<double>(sign) * v.hdot[j];
        }
        h = time_q_map(h, q, params);
        double dev = 0.0;
        for (size_t j = 0; j < h.h.size(); ++j) dev = std::max(dev, std::fabs(h.h[j] - base.h[j]));
        trace.first_iter_growth = dev / eps;
    }

    for (int i = 0; i < opt.n_seeds; ++i) {
        auto& pts = trace.iterates[static_cast<size_t>(i)];
        for (const auto& p : pts)
            trace.min_dist_partner = std::min(trace.min_dist_partner,
                                              min_dist_to(p, ctx.partner_saddle_points));
        trace.destinations[static_cast<size_t>(i)] =
            escaped[static_cast<size_t>(i)] ? Destination::escaped : label_tail(pts, ctx);
    }
    return trace;
}

DestinationSummary classify_destinations(const ManifoldTrace& trace) {
    size_t longest = 0;
    for (const auto& pts : trace.iterates) longest = std::max(longest, pts.size());
    if (longest < 50) throw PreconditionError("classify_destinations: need at least 50 iterates");
    DestinationSummary out;
    for (const auto& d : trace.destinations) ++out.histogram[d];
    out.uniform = out.histogram.size() == 1;
    if (out.uniform) out.label = out.histogram.begin()->first;
    return out;
}

} // namespace toribif

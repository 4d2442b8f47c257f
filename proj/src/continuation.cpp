#include "toribif/continuation.hpp"

#include <cmath>
#include <iostream>

namespace toribif {

namespace {

bool is_real_mu(const std::complex<double>& mu) {
    return std::fabs(mu.imag()) <= 1e-8 * std::max(1.0, std::abs(mu));
}

FloquetSpectrum make_spectrum(std::vector<std::complex<double>> mus, double mu_tol) {
    FloquetSpectrum s;
    s.mu_tol = mu_tol;
    s.multipliers = std::move(mus);
    for (const auto& mu : s.multipliers) {
        const double m = std::abs(mu);
        if (m > 1.0 + mu_tol) ++s.n_unstable;
        else if (m >= 1.0 - mu_tol) ++s.n_critical;
    }
    s.cls = s.n_unstable == 0   ? FloquetSpectrum::Class::stable
            : s.n_unstable == 1 ? FloquetSpectrum::Class::saddle1
            : s.n_unstable == 2 ? FloquetSpectrum::Class::saddle2
                                : FloquetSpectrum::Class::higher;
    return s;
}

} // namespace

std::optional<double> event_test_value(EventKind kind, const FloquetSpectrum& spec) {
    switch (kind) {
        case EventKind::SN: {
            double m = -1e308;
            bool any = false;
            for (const auto& mu : spec.multipliers)
                if (is_real_mu(mu)) { any = true; m = std::max(m, mu.real()); }
            if (!any) return std::nullopt;
            return m - 1.0;
        }
        case EventKind::PD: {
            double m = 1e308;
            bool any = false;
            for (const auto& mu : spec.multipliers)
                if (is_real_mu(mu)) { any = true; m = std::min(m, mu.real()); }
            if (!any) return std::nullopt;
            return -(m + 1.0);
        }
        case EventKind::T: {
            double m = -1e308;
            bool any = false;
            for (const auto& mu : spec.multipliers)
                if (!is_real_mu(mu)) { any = true; m = std::max(m, std::abs(mu)); }
            if (!any) return std::nullopt;
            return m - 1.0;
        }
        case EventKind::NP: {
            // the two largest-modulus real multipliers, excluding any within
            // mu_tol of +1 so an adjacent fold does not contaminate the test
            double m1 = 0.0, m2 = 0.0;
            int found = 0;
            for (const auto& mu : spec.multipliers) {
                if (!is_real_mu(mu)) continue;
                if (std::fabs(mu.real() - 1.0) <= spec.mu_tol) continue;
                if (found == 0) { m1 = mu.real(); found = 1; }
                else { m2 = mu.real(); found = 2; break; }
            }
            if (found < 2) return std::nullopt;
            return m1 * m2 - 1.0;
        }
    }
    return std::nullopt;
}

bool bordered_correct(PeriodicOrbit& orb, ActiveParam ap, const Eigen::VectorXd& dir_u,
                      double dir_p, const Eigen::VectorXd& u_pred, double p_pred,
                      const ContinuationOptions& opt) {
    const int n = orb.n();
    Eigen::VectorXd r, fp;
    Eigen::MatrixXd Jb(n + 1, n + 1);
    Eigen::VectorXd rhs_b(n + 1), delta;
    const double scale = std::max(1.0, orb.u.lpNorm<Eigen::Infinity>());

    auto residual = [&](double& g) {
        collocation_residual(orb, r);
        const double p = get_param(orb.params, ap);
        g = dir_u.dot(orb.u - u_pred) / n + dir_p * (p - p_pred);
        return std::max(r.lpNorm<Eigen::Infinity>(), std::fabs(g));
    };

    double g = 0.0;
    double res = residual(g);
    for (int it = 0; it < opt.max_newton && res >= opt.newton_tol; ++it) {
        collocation_jacobian_into(orb, Jb);
        collocation_dparam(orb, ap == ActiveParam::tau, fp);
        Jb.block(0, n, n, 1) = fp;
        Jb.row(n).head(n) = dir_u.transpose() / static_cast<double>(n);
        Jb(n, n) = dir_p;
        rhs_b.head(n) = -r;
        rhs_b(n) = -g;
        Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>> lu(Jb);  // in place
        delta = lu.solve(rhs_b);
        if (!delta.allFinite()) return false;
        if (delta.head(n).lpNorm<Eigen::Infinity>() > 1e4 * scale) return false;
        orb.u += delta.head(n);
        set_param(orb.params, ap, get_param(orb.params, ap) + delta(n));
        res = residual(g);
    }
    if (res < opt.newton_tol) {
        orb.residual_norm = r.lpNorm<Eigen::Infinity>();
        return true;
    }
    return false;
}

namespace {

struct EvalPoint {
    PeriodicOrbit orbit;
    FloquetSpectrum spec;
    double phi = 0.0;
};

std::optional<BifurcationEvent> locate_event(EventKind kind, const BranchPoint& A,
                                             const BranchPoint& B, ActiveParam ap,
                                             const ContinuationOptions& opt) {
    auto pa = event_test_value(kind, A.spec);
    auto pb = event_test_value(kind, B.spec);
    if (!pa || !pb) return std::nullopt;
    if ((*pa > 0.0) == (*pb > 0.0)) return std::nullopt;

    EvalPoint a{A.orbit, A.spec, *pa};
    EvalPoint b{B.orbit, B.spec, *pb};
    const int n = A.orbit.n();

    for (int it = 0; it < 60; ++it) {
        if (std::min(std::fabs(a.phi), std::fabs(b.phi)) < opt.event_test_tol) break;
        const double p_a = get_param(a.orbit.params, ap);
        const double p_b = get_param(b.orbit.params, ap);
        Eigen::VectorXd du = b.orbit.u - a.orbit.u;
        const double dp = p_b - p_a;
        const double s = std::sqrt(du.squaredNorm() / n + dp * dp);
        if (s < 1e-13) break;
        const Eigen::VectorXd dir_u = du / s;
        const double dir_p = dp / s;

        // bisection first, then secant on the test function
        double t = it < 3 ? 0.5 : std::clamp(a.phi / (a.phi - b.phi), 0.05, 0.95);
        bool ok = false;
        EvalPoint m;
        for (int attempt = 0; attempt < 4 && !ok; ++attempt, t *= 0.5) {
            PeriodicOrbit mid = a.orbit;
            mid.u = a.orbit.u + t * du;
            set_param(mid.params, ap, p_a + t * dp);
            const Eigen::VectorXd u_pred = mid.u;
            const double p_pred = get_param(mid.params, ap);
            if (!bordered_correct(mid, ap, dir_u, dir_p, u_pred, p_pred, opt)) continue;
            FloquetSpectrum spec = floquet(mid, opt.floq);
            auto pm = event_test_value(kind, spec);
            if (!pm) break;
            m = EvalPoint{std::move(mid), std::move(spec), *pm};
            ok = true;
        }
        if (!ok) break;
        if ((m.phi > 0.0) == (a.phi > 0.0)) a = std::move(m);
        else b = std::move(m);
    }

    const EvalPoint& best = std::fabs(a.phi) <= std::fabs(b.phi) ? a : b;
    BifurcationEvent ev;
    ev.kind = kind;
    ev.tau = best.orbit.params.tau;
    ev.c = best.orbit.params.c;
    ev.param = get_param(best.orbit.params, ap);
    ev.multipliers = best.spec.multipliers;
    ev.test_value = std::fabs(best.phi);
    ev.orbit = best.orbit;
    return ev;
}

} // namespace

Branch continue_branch(const PeriodicOrbit& start, ActiveParam ap, double range_lo,
                       double range_hi, const ContinuationOptions& opt) {
    if (!(range_lo < range_hi)) throw PreconditionError("continue_branch: empty range");
    PeriodicOrbit orb = start;
    if (!orb.converged(10 * opt.newton_tol)) orb = solve_orbit(orb);
    const double p0 = get_param(orb.params, ap);
    if (p0 < range_lo - 1e-12 || p0 > range_hi + 1e-12)
        throw PreconditionError("continue_branch: start parameter outside range");

    Branch br;
    br.active = ap;
    const int n = orb.n();

    auto push_point = [&](PeriodicOrbit o) {
        BranchPoint bp;
        bp.param = get_param(o.params, ap);
        bp.spec = floquet(o, opt.floq);
        bp.orbit = std::move(o);
        br.points.push_back(std::move(bp));
    };
    push_point(std::move(orb));

    // initial tangent: J du/dp = -F_p
    Eigen::VectorXd dir_u;
    double dir_p;
    {
        const PeriodicOrbit& o = br.points.front().orbit;
        Eigen::MatrixXd J;
        collocation_jacobian(o, J);
        Eigen::VectorXd fp;
        collocation_dparam(o, ap == ActiveParam::tau, fp);
        Eigen::VectorXd up = J.partialPivLu().solve(-fp);
        if (!up.allFinite()) throw SingularityError("initial tangent (starting at a fold?)");
        const double w = std::sqrt(up.squaredNorm() / n + 1.0);
        dir_u = up / w;
        dir_p = 1.0 / w;
        if (opt.initial_direction < 0) { dir_u = -dir_u; dir_p = -dir_p; }
    }

    double step = opt.max_step;
    int successes = 0;
    double traveled = 0.0;
    const Eigen::VectorXd u_start = br.points.front().orbit.u;
    const double p_start = br.points.front().param;

    while (static_cast<int>(br.points.size()) < opt.max_points) {
        const BranchPoint& last = br.points.back();
        PeriodicOrbit trial;
        bool ok = false;
        while (step >= opt.min_step) {
            trial = last.orbit;
            trial.u = last.orbit.u + step * dir_u;
            set_param(trial.params, ap, last.param + step * dir_p);
            const Eigen::VectorXd u_pred = trial.u;
            const double p_pred = get_param(trial.params, ap);
            ok = bordered_correct(trial, ap, dir_u, dir_p, u_pred, p_pred, opt);
            if (ok) break;
            step *= 0.5;
            successes = 0;
        }
        if (!ok) { br.termination = "step_underflow"; break; }

        Eigen::VectorXd du = trial.u - last.orbit.u;
        const double dp = get_param(trial.params, ap) - last.param;
        const double s = std::sqrt(du.squaredNorm() / n + dp * dp);
        dir_u = du / s;
        dir_p = dp / s;

        push_point(std::move(trial));
        const size_t k = br.points.size();
        for (EventKind kind : {EventKind::SN, EventKind::PD, EventKind::T, EventKind::NP}) {
            auto ev = locate_event(kind, br.points[k - 2], br.points[k - 1], ap, opt);
            if (ev) {
                if (opt.verbose)
                    std::cerr << "event " << event_name(kind) << " at " << ev->param
                              << " |phi|=" << ev->test_value << "\n";
                br.events.push_back(std::move(*ev));
            }
        }

        if (++successes >= 5) {
            step = std::min(step * 2.0, opt.max_step);
            successes = 0;
        }
        const double p = br.points.back().param;
        if (p < range_lo - 1e-12 || p > range_hi + 1e-12) { br.termination = "range_exit"; break; }

        // a closed branch (fold pair traversed both ways) returns to its start
        traveled += s;
        if (traveled > 10.0 * opt.max_step) {
            const double d_start = std::sqrt(
                (br.points.back().orbit.u - u_start).squaredNorm() / n +
                (p - p_start) * (p - p_start));
            if (d_start < 1.2 * step) { br.termination = "closed_loop"; break; }
        }
    }
    if (br.termination.empty()) br.termination = "max_points";
    return br;
}

std::optional<BifurcationEvent> refine_curve_point(CurveKind kind, int frozen_axis,
                                                   double frozen_value, double free_guess,
                                                   double radius, const PeriodicOrbit& seed,
                                                   const ContinuationOptions& copts) {
    const ActiveParam frozen_ap = frozen_axis == 0 ? ActiveParam::tau : ActiveParam::c;
    const ActiveParam free_ap = frozen_axis == 0 ? ActiveParam::c : ActiveParam::tau;

    PeriodicOrbit orb = seed;
    set_param(orb.params, frozen_ap, frozen_value);
    set_param(orb.params, free_ap, free_guess);
    try {
        orb = solve_orbit(orb);
    } catch (const Error&) {
        orb = seed;
        set_param(orb.params, frozen_ap, frozen_value);
        try {
            orb = solve_orbit(orb);
            set_param(orb.params, free_ap, free_guess);
            orb = solve_orbit(orb);
        } catch (const Error&) {
            return std::nullopt;
        }
    }

    const EventKind ek = kind == CurveKind::SN   ? EventKind::SN
                         : kind == CurveKind::T ? EventKind::T
                                                : EventKind::NP;
    ContinuationOptions o = copts;
    o.max_points = 60;
    o.max_step = std::max(radius / 5.0, 2e-5);
    const double p0 = get_param(orb.params, free_ap);

    std::optional<BifurcationEvent> best;
    for (int dirn : {+1, -1}) {
        o.initial_direction = dirn;
        Branch b;
        try {
            b = continue_branch(orb, free_ap, p0 - radius, p0 + radius, o);
        } catch (const Error&) {
            continue;
        }
        for (auto& ev : b.events) {
            if (ev.kind != ek) continue;
            if (!best || std::fabs(ev.param - free_guess) < std::fabs(best->param - free_guess))
                best = std::move(ev);
        }
        if (best) break;  // the first direction already crossed the curve
    }
    return best;
}

Codim1Curve trace_codim1(CurveKind kind, const BifurcationEvent& seed, const CurveOptions& opt) {
    const double tw = opt.tau_window[1] - opt.tau_window[0];
    const double cw = opt.c_window[1] - opt.c_window[0];
    if (!(tw > 0.0) || !(cw > 0.0)) throw PreconditionError("trace_codim1: bad window");

    auto to_norm = [&](double tau, double c) {
        return std::array<double, 2>{(tau - opt.tau_window[0]) / tw, (c - opt.c_window[0]) / cw};
    };
    auto to_plane = [&](const std::array<double, 2>& x) {
        return std::array<double, 2>{opt.tau_window[0] + x[0] * tw, opt.c_window[0] + x[1] * cw};
    };

    struct Vertex {
        BifurcationEvent ev;
    };

    auto march = [&](int sgn, std::string& reason) {
        std::vector<Vertex> out;
        std::array<double, 2> pos = to_norm(seed.tau, seed.c);
        PeriodicOrbit cur = seed.orbit;
        std::array<double, 2> dir{0.0, 0.0};
        dir[static_cast<size_t>(opt.march_axis)] = sgn;
        double h = opt.step0;
        reason = "max_vertices";
        while (static_cast<int>(out.size()) < opt.max_vertices) {
            const std::array<double, 2> pred{pos[0] + h * dir[0], pos[1] + h * dir[1]};
            if (pred[0] < -0.02 || pred[0] > 1.02 || pred[1] < -0.02 || pred[1] > 1.02) {
                reason = "window_boundary";
                break;
            }
            const int fa = std::fabs(dir[0]) >= std::fabs(dir[1]) ? 0 : 1;  // freeze fast axis
            const int fr = 1 - fa;
            const auto pp = to_plane(pred);
            const double span_fr = fr == 0 ? tw : cw;
            const double radius = (2.5 * h + 0.005) * span_fr;
            auto ev = refine_curve_point(kind, fa, pp[static_cast<size_t>(fa)],
                                         pp[static_cast<size_t>(fr)], radius, cur, opt.copts);
            bool accepted = false;
            if (ev) {
                const auto npos = to_norm(ev->tau, ev->c);
                const double jump = std::hypot(npos[0] - pos[0], npos[1] - pos[1]);
                if (jump < 3.0 * h + 0.01 && jump > 1e-10) {
                    const std::array<double, 2> nd{(npos[0] - pos[0]) / jump, (npos[1] - pos[1]) / jump};
                    dir = nd;
                    pos = npos;
                    cur = ev->orbit;
                    out.push_back(Vertex{std::move(*ev)});
                    h = std::min(h * 1.4, opt.max_step);
                    accepted = true;
                    if (opt.verbose)
                        std::cerr << curve_name(kind) << " vertex " << out.size() << " at ("
                                  << out.back().ev.tau << ", " << out.back().ev.c << ")\n";
                }
            }
            if (!accepted) {
                h *= 0.5;
                if (h < opt.min_step) {
                    reason = "step_failure";
                    break;
                }
            }
        }
        return out;
    };

    std::string r_fwd, r_bwd;
    const std::vector<Vertex> fwd = march(+1, r_fwd);
    const std::vector<Vertex> bwd = march(-1, r_bwd);

    Codim1Curve curve;
    curve.kind = kind;
    curve.end_reason_front = r_bwd;
    curve.end_reason_back = r_fwd;
    auto push = [&](const BifurcationEvent& ev) {
        curve.pts.push_back({ev.tau, ev.c});
        curve.test_values.push_back(ev.test_value);
        curve.orbits.push_back(ev.orbit);
        curve.spectra.push_back(make_spectrum(ev.multipliers, curve.spectra.empty()
                                                                 ? 1e-6
                                                                 : curve.spectra.front().mu_tol));
    };
    for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) push(it->ev);
    push(seed);
    for (const auto& v : fwd) push(v.ev);
    return curve;
}

SecondaryTongue find_secondary_tongue(int q_rel, const Codim1Curve& t_curve,
                                      const SecondaryTongueOptions& opt) {
    if (q_rel < 5) throw PreconditionError("secondary tongue: q_rel in the strong-resonance range");
    if (t_curve.kind != CurveKind::T || t_curve.pts.size() < 3)
        throw PreconditionError("secondary tongue needs a traced torus curve");

    const double target = two_pi / q_rel;
    const size_t nv = t_curve.pts.size();
    std::vector<double> ang(nv, std::numeric_limits<double>::quiet_NaN());
    for (size_t i = 0; i < nv; ++i) {
        try {
            ang[i] = rotation_angle(t_curve.spectra[i], 1e-3);
        } catch (const NotApplicableError&) {}
    }
    int ia = -1;
    for (size_t i = 0; i + 1 < nv; ++i) {
        if (std::isnan(ang[i]) || std::isnan(ang[i + 1])) continue;
        if ((ang[i] - target) * (ang[i + 1] - target) <= 0.0) { ia = static_cast<int>(i); break; }
    }
    if (ia < 0) throw NoBracketError("angle 2*pi/q_rel not attained along the torus curve");

    // refine the root along the curve by secant on the rotation angle
    const auto& A = t_curve.pts[static_cast<size_t>(ia)];
    const auto& B = t_curve.pts[static_cast<size_t>(ia) + 1];
    const int fa = std::fabs(B[0] - A[0]) * 200.0 >= std::fabs(B[1] - A[1]) ? 0 : 1;  // tau span is ~200x smaller
    const int fr = 1 - fa;
    double sa = 0.0, sb = 1.0, fa_val = ang[static_cast<size_t>(ia)] - target,
           fb_val = ang[static_cast<size_t>(ia) + 1] - target;
    PeriodicOrbit root_orbit = t_curve.orbits[static_cast<size_t>(ia)];
    std::array<double, 2> root{A};
    const double seg = std::fabs(B[static_cast<size_t>(fr)] - A[static_cast<size_t>(fr)]);
    for (int it = 0; it < 12; ++it) {
        const double s = std::clamp(sa - fa_val * (sb - sa) / (fb_val - fa_val), 0.0, 1.0);
        const double frozen = A[static_cast<size_t>(fa)] + s * (B[static_cast<size_t>(fa)] - A[static_cast<size_t>(fa)]);
        const double guess = A[static_cast<size_t>(fr)] + s * (B[static_cast<size_t>(fr)] - A[static_cast<size_t>(fr)]);
        auto ev = refine_curve_point(CurveKind::T, fa, frozen, guess, std::max(2.0 * seg, 1e-4),
                                     root_orbit, opt.copts);
        if (!ev) break;
        root_orbit = ev->orbit;
        root = {ev->tau, ev->c};
        double a = rotation_angle(make_spectrum(ev->multipliers, 1e-6), 1e-3) - target;
        if (std::fabs(a) < 2e-5) break;
        if ((a > 0.0) == (fa_val > 0.0)) { sa = s; fa_val = a; }
        else { sb = s; fb_val = a; }
    }
    if (opt.verbose)
        std::cerr << "secondary 1:" << q_rel << " root near (" << root[0] << ", " << root[1] << ")\n";

    // which side of the curve has the stable base orbit
    root_orbit = solve_orbit(root_orbit, opt.solve);
    PeriodicOrbit base;
    bool have_base = false;
    for (double off : {opt.offset, -opt.offset, 2.0 * opt.offset, -2.0 * opt.offset}) {
        PeriodicOrbit cand = root_orbit;
        cand.params.tau += off;
        try {
            cand = solve_orbit(cand, opt.solve);
        } catch (const Error&) {
            continue;
        }
        if (floquet(cand, opt.floq).cls == FloquetSpectrum::Class::stable) {
            base = std::move(cand);
            have_base = true;
            break;
        }
    }
    if (!have_base) throw NoConvergenceError("no stable side found near the tongue root", 0.0);

    // torus eigenfunction of the root orbit, extended over one base period;
    // the eigen-pair is anchored at the integer phase ef.re.t0
    const ComplexEigenfunction ef = critical_pair_eigenfunction(root_orbit, opt.floq);
    const Trajectory re_dense = integrate_variational(root_orbit, ef.re);
    const Trajectory im_dense = integrate_variational(root_orbit, ef.im);
    const double phase0 = ef.re.t0;
    const int qb = root_orbit.q;
    const int Q = qb * q_rel;
    const std::complex<double> rho = std::polar(1.0, two_pi / q_rel);
    const std::complex<double> mu = ef.mu.imag() >= 0.0 ? ef.mu : std::conj(ef.mu);
    const std::complex<double> lambda = std::log(rho / mu);

    double xi_max = 0.0;
    for (int i = 0; i < 400; ++i) {
        const double s = qb * (i + 0.5) / 400.0;
        xi_max = std::max(xi_max, std::abs(std::complex<double>(re_dense.eval(s), im_dense.eval(s))));
    }
    if (!(xi_max > 0.0)) throw Error("torus eigenfunction vanished");

    const double amp_base = base.amplitude();
    auto pert_at = [&](double t) {
        const double u = t - phase0;
        const int k = static_cast<int>(std::floor(u / qb));
        const double s = u - static_cast<double>(k) * qb;
        const std::complex<double> xi(re_dense.eval(s), im_dense.eval(s));
        const std::complex<double> xit = xi / xi_max * std::exp(lambda * (s / qb));
        const std::complex<double> rho_k = std::polar(1.0, two_pi * k / q_rel);
        return (rho_k * xit).real();
    };

    for (double A_rel : opt.amplitudes) {
        PeriodicOrbit guess;
        guess.q = Q;
        guess.L = base.L;
        guess.params = base.params;
        guess.u.resize(guess.n());
        Eigen::VectorXd w(guess.n());
        for (int j = 0; j < guess.n_intervals(); ++j) {
            for (int k = 0; k < CollocationBasis::M; ++k) {
                const double t = guess.node_time(j, k);
                const double pert = pert_at(t);
                const int idx = guess.node_index(j, k);
                w[idx] = pert;
                guess.u[idx] = base.eval(t) + A_rel * amp_base * pert;
            }
        }
        w /= std::sqrt(w.squaredNorm() / guess.n());

        PeriodicOrbit orb = guess;
        ContinuationOptions co = opt.copts;
        co.max_newton = 14;
        const Eigen::VectorXd u_pred = guess.u;
        if (!bordered_correct(orb, ActiveParam::c, w, 0.0, u_pred, guess.params.c, co)) {
            if (opt.verbose) std::cerr << "secondary solve failed at amplitude " << A_rel << "\n";
            continue;
        }
        // reject collapse onto the base orbit (which is also Q-periodic)
        double d_base = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double t = Q * (i + 0.3) / 200.0;
            d_base = std::max(d_base, std::fabs(orb.eval(t + qb) - orb.eval(t)));
        }
        if (d_base < std::max(1e-6, 0.02 * A_rel * amp_base)) {
            if (opt.verbose) std::cerr << "secondary solve collapsed to the base orbit\n";
            continue;
        }

        SecondaryTongue out;
        out.q_rel = q_rel;
        out.root = root;
        out.spec = floquet(orb, opt.floq);
        out.orbit = orb;
        ContinuationOptions bo = opt.copts;
        bo.max_points = 2 * opt.branch_span;
        try {
            out.branch = continue_branch(orb, ActiveParam::c, orb.params.c - 2e-3,
                                         orb.params.c + 2e-3, bo);
        } catch (const Error&) {}
        return out;
    }
    throw NoConvergenceError("secondary tongue guess failed to lock at every amplitude", 0.0);
}

} // namespace toribif

#include "toribif/floquet.hpp"

#include <algorithm>
#include <cmath>

namespace toribif {

namespace {

// Variational stepping data, anchored at a reference phase t0 of the orbit.
// The anchor is the canonical phase so that symmetry-partner orbits produce
// bit-mirrored coefficient tables and hence identical spectra.
struct VariationalTable {
    int N = 0;
    double dt = 0.0;
    long S = 0;
    double q = 0.0;
    double t0 = 0.0;
    std::vector<double> a0, am;
};

VariationalTable make_table(const PeriodicOrbit& orbit, double dt_target, double t0,
                            double horizon_years) {
    VariationalTable tab;
    const double tau = orbit.params.tau;
    tab.N = history_intervals(tau, dt_target);
    tab.dt = tau / tab.N;
    tab.q = static_cast<double>(orbit.q);
    tab.t0 = t0;
    tab.S = static_cast<long>(std::ceil(horizon_years / tab.dt - 1e-9));
    tab.a0.resize(static_cast<size_t>(tab.S) + 1);
    tab.am.resize(static_cast<size_t>(tab.S));
    for (long k = 0; k <= tab.S; ++k) {
        const double t = t0 + static_cast<double>(k) * tab.dt;
        tab.a0[static_cast<size_t>(k)] = rhs_linearized(orbit.eval(t - tau), orbit.params);
    }
    for (long k = 0; k < tab.S; ++k) {
        const double t = t0 + (static_cast<double>(k) + 0.5) * tab.dt;
        tab.am[static_cast<size_t>(k)] = rhs_linearized(orbit.eval(t - tau), orbit.params);
    }
    return tab;
}

// Same stepping as the nonlinear integrator, with the coefficient tabulated.
// Times are relative to the anchor: samples span [-tau, S*dt].
Trajectory variational_run(const VariationalTable& tab, const std::vector<double>& xi0,
                           const std::vector<double>& xid0) {
    Trajectory traj;
    traj.t_start = -tab.dt * tab.N;
    traj.dt = tab.dt;
    traj.n_history = tab.N;
    traj.h.reserve(static_cast<size_t>(tab.N + tab.S) + 1);
    traj.hdot.reserve(static_cast<size_t>(tab.N + tab.S) + 1);
    traj.h = xi0;
    traj.hdot = xid0;
    const int N = tab.N;
    const double dt = tab.dt;
    for (long k = 0; k < tab.S; ++k) {
        const long i = N + k;
        const double y0 = traj.h[static_cast<size_t>(i - N)];
        const double y1 = traj.h[static_cast<size_t>(i - N + 1)];
        const double ym = 0.5 * (y0 + y1)
                        + 0.125 * dt * (traj.hdot[static_cast<size_t>(i - N)] - traj.hdot[static_cast<size_t>(i - N + 1)]);
        const double k1 = tab.a0[static_cast<size_t>(k)] * y0;
        const double k2 = tab.am[static_cast<size_t>(k)] * ym;
        const double k4 = tab.a0[static_cast<size_t>(k + 1)] * y1;
        traj.h.push_back(traj.h[static_cast<size_t>(i)] + dt / 6.0 * (k1 + 4.0 * k2 + k4));
        traj.hdot.push_back(k4);
    }
    return traj;
}

// piecewise-linear hat on the coarse grid, sampled with smoothed derivative
void hat_to_fine(int b, int M_coarse, double tau, const VariationalTable& tab,
                 std::vector<double>& xi, std::vector<double>& xid) {
    const double dc = tau / (M_coarse - 1);
    const double theta_b = -tau + b * dc;
    auto hat = [&](double th) { return std::max(0.0, 1.0 - std::fabs(th - theta_b) / dc); };
    xi.resize(static_cast<size_t>(tab.N) + 1);
    xid.resize(static_cast<size_t>(tab.N) + 1);
    for (int i = 0; i <= tab.N; ++i) {
        const double th = -tau + i * tab.dt;
        xi[static_cast<size_t>(i)] = hat(th);
        xid[static_cast<size_t>(i)] = (hat(th + 0.5 * tab.dt) - hat(th - 0.5 * tab.dt)) / tab.dt;
    }
}

// values of an arbitrary coarse vector interpolated onto the fine grid
void coarse_to_fine(const Eigen::VectorXd& v, double tau, const VariationalTable& tab,
                    std::vector<double>& xi, std::vector<double>& xid) {
    const int Mc = static_cast<int>(v.size());
    const double dc = tau / (Mc - 1);
    auto pl = [&](double th) {
        double s = (th + tau) / dc;
        int j = static_cast<int>(std::floor(s));
        if (j < 0) j = 0;
        if (j > Mc - 2) j = Mc - 2;
        const double f = s - j;
        return (1.0 - f) * v[j] + f * v[j + 1];
    };
    xi.resize(static_cast<size_t>(tab.N) + 1);
    xid.resize(static_cast<size_t>(tab.N) + 1);
    for (int i = 0; i <= tab.N; ++i) {
        const double th = -tau + i * tab.dt;
        xi[static_cast<size_t>(i)] = pl(th);
        xid[static_cast<size_t>(i)] = (pl(th + 0.5 * tab.dt) - pl(th - 0.5 * tab.dt)) / tab.dt;
    }
}

// history segment at relative time s_at, with hdot from the variational
// identity xi'(s) = a(s) xi(s - tau)
HistorySegment variational_tail(const PeriodicOrbit& orbit, const Trajectory& traj,
                                const VariationalTable& tab, double s_at) {
    const double tau = orbit.params.tau;
    HistorySegment hs;
    hs.t0 = tab.t0 + s_at;
    hs.dt = tab.dt;
    hs.h.resize(static_cast<size_t>(tab.N) + 1);
    hs.hdot.resize(static_cast<size_t>(tab.N) + 1);
    for (int i = 0; i <= tab.N; ++i) {
        const double s = s_at - tau + i * tab.dt;
        hs.h[static_cast<size_t>(i)] = traj.eval(s);
        const double a = rhs_linearized(orbit.eval(tab.t0 + s - tau), orbit.params);
        hs.hdot[static_cast<size_t>(i)] = a * traj.eval(s - tau);
    }
    return hs;
}

bool is_real_eig(const std::complex<double>& mu) {
    return std::fabs(mu.imag()) <= 1e-8 * std::max(1.0, std::abs(mu));
}

} // namespace

Trajectory integrate_variational(const PeriodicOrbit& orbit, const HistorySegment& xi0) {
    if (!orbit.converged(1e-8)) throw PreconditionError("variational run needs a converged orbit");
    VariationalTable tab = make_table(orbit, xi0.dt, xi0.t0, static_cast<double>(orbit.q));
    if (tab.N != xi0.intervals())
        throw PreconditionError("variational history grid does not match the delay");
    return variational_run(tab, xi0.h, xi0.hdot);
}

Eigen::MatrixXd monodromy_matrix(const PeriodicOrbit& orbit, const FloquetOptions& opt) {
    if (!orbit.converged(1e-8)) throw PreconditionError("floquet needs a converged orbit");
    if (opt.M < 8) throw PreconditionError("floquet: history grid M too small");
    const double tau = orbit.params.tau;
    const VariationalTable tab =
        make_table(orbit, opt.dt_target, canonical_phase(orbit), static_cast<double>(orbit.q));
    const double dc = tau / (opt.M - 1);

    Eigen::MatrixXd mono(opt.M, opt.M);
    std::vector<double> xi, xid;
    for (int b = 0; b < opt.M; ++b) {
        hat_to_fine(b, opt.M, tau, tab, xi, xid);
        const Trajectory traj = variational_run(tab, xi, xid);
        for (int i = 0; i < opt.M; ++i) {
            const double s = tab.q - tau + i * dc;
            mono(i, b) = traj.eval(s);
        }
    }
    return mono;
}

FloquetSpectrum spectrum_from_matrix(const Eigen::MatrixXd& mono, double mu_tol) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(mono, false);
    if (es.info() != Eigen::Success) throw Error("eigenvalue computation failed");
    FloquetSpectrum spec;
    spec.mu_tol = mu_tol;
    spec.multipliers.resize(static_cast<size_t>(mono.rows()));
    for (long i = 0; i < mono.rows(); ++i) spec.multipliers[static_cast<size_t>(i)] = es.eigenvalues()[i];
    std::sort(spec.multipliers.begin(), spec.multipliers.end(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  return std::abs(a) > std::abs(b);
              });
    for (const auto& mu : spec.multipliers) {
        const double m = std::abs(mu);
        if (m > 1.0 + mu_tol) ++spec.n_unstable;
        else if (m >= 1.0 - mu_tol) ++spec.n_critical;
    }
    spec.cls = spec.n_unstable == 0   ? FloquetSpectrum::Class::stable
               : spec.n_unstable == 1 ? FloquetSpectrum::Class::saddle1
               : spec.n_unstable == 2 ? FloquetSpectrum::Class::saddle2
                                      : FloquetSpectrum::Class::higher;
    return spec;
}

FloquetSpectrum floquet(const PeriodicOrbit& orbit, const FloquetOptions& opt) {
    return spectrum_from_matrix(monodromy_matrix(orbit, opt), opt.mu_tol);
}

HistorySegment unstable_eigenfunction(const PeriodicOrbit& orbit, double* mu_out,
                                      const FloquetOptions& opt) {
    const Eigen::MatrixXd mono = monodromy_matrix(orbit, opt);
    Eigen::EigenSolver<Eigen::MatrixXd> es(mono, true);
    if (es.info() != Eigen::Success) throw Error("eigenvalue computation failed");

    int idx = -1;
    int n_unstable = 0;
    for (long i = 0; i < mono.rows(); ++i) {
        if (std::abs(es.eigenvalues()[i]) > 1.0 + opt.mu_tol) {
            ++n_unstable;
            if (idx < 0 || std::abs(es.eigenvalues()[i]) > std::abs(es.eigenvalues()[idx])) idx = static_cast<int>(i);
        }
    }
    if (n_unstable != 1) throw NotApplicableError("orbit is not a 1-saddle");
    const std::complex<double> mu = es.eigenvalues()[idx];
    if (!is_real_eig(mu) || mu.real() <= 1.0)
        throw NotApplicableError("leading unstable multiplier is not real and > 1");
    if (mu_out) *mu_out = mu.real();

    Eigen::VectorXcd vc = es.eigenvectors().col(idx);
    long imax = 0;
    vc.cwiseAbs().maxCoeff(&imax);
    vc /= vc[imax] / std::abs(vc[imax]);
    if (vc.imag().lpNorm<Eigen::Infinity>() > 1e-6 * vc.real().lpNorm<Eigen::Infinity>())
        throw NotApplicableError("unstable eigenvector has a nontrivial imaginary part");
    Eigen::VectorXd v = vc.real();

    // one variational pass smooths the coarse vector and lands the direction
    // on the next integer phase, matching the stroboscopic seeding grid
    const double t_star = canonical_phase(orbit);
    const double m_phase = std::ceil(t_star - 1e-12);
    const double horizon = static_cast<double>(orbit.q) + (m_phase - t_star);
    const VariationalTable tab = make_table(orbit, opt.dt_target, t_star, horizon);
    std::vector<double> xi, xid;
    coarse_to_fine(v, orbit.params.tau, tab, xi, xid);
    const Trajectory traj = variational_run(tab, xi, xid);
    HistorySegment dir = variational_tail(orbit, traj, tab, horizon);

    double amax = 0.0;
    size_t iamax = 0;
    for (size_t i = 0; i < dir.h.size(); ++i)
        if (std::fabs(dir.h[i]) > amax) { amax = std::fabs(dir.h[i]); iamax = i; }
    if (!(amax > 0.0)) throw Error("unstable eigenfunction vanished");
    const double scale = (dir.h[iamax] > 0 ? 1.0 : -1.0) / amax;
    for (size_t i = 0; i < dir.h.size(); ++i) { dir.h[i] *= scale; dir.hdot[i] *= scale; }
    dir.t0 = m_phase;
    return dir;
}

ComplexEigenfunction critical_pair_eigenfunction(const PeriodicOrbit& orbit,
                                                 const FloquetOptions& opt) {
    const Eigen::MatrixXd mono = monodromy_matrix(orbit, opt);
    Eigen::EigenSolver<Eigen::MatrixXd> es(mono, true);
    if (es.info() != Eigen::Success) throw Error("eigenvalue computation failed");

    int idx = -1;
    double best = 1e308;
    for (long i = 0; i < mono.rows(); ++i) {
        const std::complex<double> mu = es.eigenvalues()[i];
        if (is_real_eig(mu) || mu.imag() < 0.0) continue;
        const double d = std::fabs(std::abs(mu) - 1.0);
        if (d < best) { best = d; idx = static_cast<int>(i); }
    }
    if (idx < 0) throw NotApplicableError("no complex pair found");

    ComplexEigenfunction out;
    out.mu = es.eigenvalues()[idx];
    Eigen::VectorXcd vc = es.eigenvectors().col(idx);
    double amax = vc.cwiseAbs().maxCoeff();
    vc /= amax;

    const double t_star = canonical_phase(orbit);
    const double m_phase = std::ceil(t_star - 1e-12);
    const double horizon = static_cast<double>(orbit.q) + (m_phase - t_star);
    const VariationalTable tab = make_table(orbit, opt.dt_target, t_star, horizon);
    std::vector<double> xi, xid;
    coarse_to_fine(vc.real().eval(), orbit.params.tau, tab, xi, xid);
    out.re = variational_tail(orbit, variational_run(tab, xi, xid), tab, horizon);
    coarse_to_fine(vc.imag().eval(), orbit.params.tau, tab, xi, xid);
    out.im = variational_tail(orbit, variational_run(tab, xi, xid), tab, horizon);
    out.re.t0 = out.im.t0 = m_phase;
    return out;
}

double rotation_angle(const FloquetSpectrum& spec, double circle_tol) {
    double best = 1e308;
    std::complex<double> found;
    for (const auto& mu : spec.multipliers) {
        if (is_real_eig(mu)) continue;
        const double d = std::fabs(std::abs(mu) - 1.0);
        if (d < best) { best = d; found = mu; }
    }
    if (!(best <= circle_tol)) throw NotApplicableError("no critical complex pair in the spectrum");
    return std::fabs(std::arg(found));
}

} // namespace toribif

#include "toribif/orbit.hpp"

#include <cmath>
#include <optional>

namespace toribif {

namespace {

constexpr int M = CollocationBasis::M;

// representation nodes k/M, k = 0..M
double rep_node(int k) { return static_cast<double>(k) / M; }

} // namespace

void CollocationBasis::weights(double theta, double* w) {
    for (int k = 0; k <= M; ++k) {
        double v = 1.0;
        for (int j = 0; j <= M; ++j) {
            if (j == k) continue;
            v *= (theta - rep_node(j)) / (rep_node(k) - rep_node(j));
        }
        w[k] = v;
    }
}

void CollocationBasis::dweights(double theta, double* dw) {
    for (int k = 0; k <= M; ++k) {
        double sum = 0.0;
        for (int i = 0; i <= M; ++i) {
            if (i == k) continue;
            double prod = 1.0 / (rep_node(k) - rep_node(i));
            for (int j = 0; j <= M; ++j) {
                if (j == k || j == i) continue;
                prod *= (theta - rep_node(j)) / (rep_node(k) - rep_node(j));
            }
            sum += prod;
        }
        dw[k] = sum;
    }
}

const CollocationBasis& CollocationBasis::get() {
    static const CollocationBasis basis = [] {
        CollocationBasis b;
        // Gauss-Legendre nodes on (0,1), degree 4
        const double r1 = 0.3399810435848562648026658;
        const double r2 = 0.8611363115940525752239465;
        b.gauss = {0.5 * (1.0 - r2), 0.5 * (1.0 - r1), 0.5 * (1.0 + r1), 0.5 * (1.0 + r2)};
        for (int i = 0; i < M; ++i) {
            weights(b.gauss[static_cast<size_t>(i)], b.lag[static_cast<size_t>(i)].data());
            dweights(b.gauss[static_cast<size_t>(i)], b.dlag[static_cast<size_t>(i)].data());
        }
        return b;
    }();
    return basis;
}

double PeriodicOrbit::eval(double t) const {
    const int N = n_intervals();
    double tm = std::fmod(t, static_cast<double>(q));
    if (tm < 0.0) tm += q;
    double s = tm * L;
    int j = static_cast<int>(std::floor(s));
    if (j >= N) { j = N - 1; }
    double theta = s - j;
    if (theta > 1.0) theta = 1.0;
    double w[M + 1];
    CollocationBasis::weights(theta, w);
    double v = 0.0;
    for (int k = 0; k <= M; ++k) v += w[k] * u[node_index(j, k)];
    return v;
}

double PeriodicOrbit::eval_deriv(double t) const {
    const int N = n_intervals();
    double tm = std::fmod(t, static_cast<double>(q));
    if (tm < 0.0) tm += q;
    double s = tm * L;
    int j = static_cast<int>(std::floor(s));
    if (j >= N) { j = N - 1; }
    double theta = s - j;
    if (theta > 1.0) theta = 1.0;
    double dw[M + 1];
    CollocationBasis::dweights(theta, dw);
    double v = 0.0;
    for (int k = 0; k <= M; ++k) v += dw[k] * u[node_index(j, k)];
    return v * L;
}

double PeriodicOrbit::max_h() const {
    double m = -1e308;
    for (int i = 0; i < n(); ++i) m = std::max(m, u[i]);
    return m;
}

double PeriodicOrbit::min_h() const {
    double m = 1e308;
    for (int i = 0; i < n(); ++i) m = std::min(m, u[i]);
    return m;
}

std::array<double, 2> PeriodicOrbit::headpoint(int k) const {
    const double t = static_cast<double>(k);
    return {eval(t), eval(t - params.tau)};
}

std::vector<std::array<double, 2>> PeriodicOrbit::headpoints() const {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(static_cast<size_t>(q));
    for (int k = 0; k < q; ++k) pts.push_back(headpoint(k));
    return pts;
}

HistorySegment PeriodicOrbit::history_at(double t0, double dt_target) const {
    const int N = history_intervals(params.tau, dt_target);
    HistorySegment hs;
    hs.t0 = t0;
    hs.dt = params.tau / N;
    hs.h.resize(static_cast<size_t>(N) + 1);
    hs.hdot.resize(static_cast<size_t>(N) + 1);
    for (int i = 0; i <= N; ++i) {
        const double t = t0 - params.tau + i * hs.dt;
        hs.h[static_cast<size_t>(i)] = eval(t);
        // the model identity keeps (h, hdot) consistent with the integrator
        hs.hdot[static_cast<size_t>(i)] = rhs(t, eval(t - params.tau), params);
    }
    return hs;
}

void collocation_residual(const PeriodicOrbit& orb, Eigen::VectorXd& r) {
    const CollocationBasis& B = CollocationBasis::get();
    const int N = orb.n_intervals();
    const double width = orb.interval_width();
    r.resize(orb.n());
    double w[M + 1];
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < M; ++i) {
            const double tc = (static_cast<double>(j) + B.gauss[static_cast<size_t>(i)]) * width;
            double up = 0.0;
            for (int k = 0; k <= M; ++k)
                up += B.dlag[static_cast<size_t>(i)][static_cast<size_t>(k)] * orb.u[orb.node_index(j, k)];
            up /= width;

            double td = std::fmod(tc - orb.params.tau, static_cast<double>(orb.q));
            if (td < 0.0) td += orb.q;
            double s = td * orb.L;
            int jd = static_cast<int>(std::floor(s));
            if (jd >= N) jd = N - 1;
            const double theta = std::min(s - jd, 1.0);
            CollocationBasis::weights(theta, w);
            double ud = 0.0;
            for (int k = 0; k <= M; ++k) ud += w[k] * orb.u[orb.node_index(jd, k)];

            r[j * M + i] = up - rhs(tc, ud, orb.params);
        }
    }
}

void collocation_jacobian(const PeriodicOrbit& orb, Eigen::MatrixXd& J) {
    J.resize(orb.n(), orb.n());
    collocation_jacobian_into(orb, J);
}

void collocation_jacobian_into(const PeriodicOrbit& orb, Eigen::MatrixXd& J) {
    const CollocationBasis& B = CollocationBasis::get();
    const int N = orb.n_intervals();
    const double width = orb.interval_width();
    if (J.rows() < orb.n() || J.cols() < orb.n())
        throw PreconditionError("jacobian target too small");
    J.topLeftCorner(orb.n(), orb.n()).setZero();
    double w[M + 1];
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < M; ++i) {
            const int row = j * M + i;
            const double tc = (static_cast<double>(j) + B.gauss[static_cast<size_t>(i)]) * width;
            for (int k = 0; k <= M; ++k)
                J(row, orb.node_index(j, k)) += B.dlag[static_cast<size_t>(i)][static_cast<size_t>(k)] / width;

            double td = std::fmod(tc - orb.params.tau, static_cast<double>(orb.q));
            if (td < 0.0) td += orb.q;
            double s = td * orb.L;
            int jd = static_cast<int>(std::floor(s));
            if (jd >= N) jd = N - 1;
            const double theta = std::min(s - jd, 1.0);
            CollocationBasis::weights(theta, w);
            double ud = 0.0;
            for (int k = 0; k <= M; ++k) ud += w[k] * orb.u[orb.node_index(jd, k)];
            const double fu = rhs_linearized(ud, orb.params);
            for (int k = 0; k <= M; ++k) J(row, orb.node_index(jd, k)) -= fu * w[k];
        }
    }
}

void collocation_dparam(const PeriodicOrbit& orb, bool wrt_tau, Eigen::VectorXd& fp) {
    const CollocationBasis& B = CollocationBasis::get();
    const int N = orb.n_intervals();
    const double width = orb.interval_width();
    fp.resize(orb.n());
    double w[M + 1], dw[M + 1];
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < M; ++i) {
            const int row = j * M + i;
            const double tc = (static_cast<double>(j) + B.gauss[static_cast<size_t>(i)]) * width;
            if (!wrt_tau) {
                fp[row] = -forcing_cos(tc);
                continue;
            }
            double td = std::fmod(tc - orb.params.tau, static_cast<double>(orb.q));
            if (td < 0.0) td += orb.q;
            double s = td * orb.L;
            int jd = static_cast<int>(std::floor(s));
            if (jd >= N) jd = N - 1;
            const double theta = std::min(s - jd, 1.0);
            CollocationBasis::weights(theta, w);
            CollocationBasis::dweights(theta, dw);
            double ud = 0.0, udp = 0.0;
            for (int k = 0; k <= M; ++k) {
                ud += w[k] * orb.u[orb.node_index(jd, k)];
                udp += dw[k] * orb.u[orb.node_index(jd, k)];
            }
            udp *= orb.L;
            // d/dtau of -f(tc, u(tc - tau)) = f_u * u'(tc - tau)
            fp[row] = rhs_linearized(ud, orb.params) * udp;
        }
    }
}

PeriodicOrbit solve_orbit(const PeriodicOrbit& guess, const SolveOptions& opt) {
    if (guess.q < 1) throw PreconditionError("solve_orbit: q must be >= 1");
    guess.params.validate();
    PeriodicOrbit orb = guess;
    if (orb.u.size() != orb.n()) throw PreconditionError("solve_orbit: guess size does not match mesh");

    Eigen::VectorXd r, du;
    Eigen::MatrixXd J(orb.n(), orb.n());
    std::optional<Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>>> lu;  // factors J in place

    collocation_residual(orb, r);
    double res = r.lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, orb.u.lpNorm<Eigen::Infinity>());

    for (int it = 0; it < opt.max_iter; ++it) {
        if (res < opt.newton_tol) {
            orb.residual_norm = res;
            return orb;
        }
        if (opt.refresh_jacobian_each_iter || !lu || it % 2 == 0) {
            collocation_jacobian_into(orb, J);
            lu.emplace(J);
        }
        du = lu->solve(-r);
        if (!du.allFinite()) throw SingularityError("collocation Jacobian is singular");
        if (du.lpNorm<Eigen::Infinity>() > 1e4 * scale)
            throw NoConvergenceError("Newton step blew up", res);
        orb.u += du;
        collocation_residual(orb, r);
        res = r.lpNorm<Eigen::Infinity>();
    }
    if (res < opt.newton_tol) {
        orb.residual_norm = res;
        return orb;
    }
    throw NoConvergenceError("orbit Newton exceeded max_iter", res);
}

PeriodicOrbit solve_orbit_from_trajectory(const Trajectory& traj, int q, const ModelParams& p,
                                          const SolveOptions& opt) {
    if (q < 1) throw PreconditionError("solve_orbit: q must be >= 1");
    if (traj.t_end() - traj.t_start < q)
        throw PreconditionError("solve_orbit: trajectory does not cover one period");
    PeriodicOrbit orb;
    orb.q = q;
    orb.L = opt.L;
    orb.params = p;
    orb.u.resize(orb.n());
    const double t_base = traj.t_end() - q;
    for (int j = 0; j < orb.n_intervals(); ++j)
        for (int k = 0; k < M; ++k)
            orb.u[orb.node_index(j, k)] = traj.eval(t_base + orb.node_time(j, k));
    return solve_orbit(orb, opt);
}

PeriodicOrbit orbit_symmetry_image(const PeriodicOrbit& orb) {
    PeriodicOrbit img = orb;
    for (int j = 0; j < orb.n_intervals(); ++j)
        for (int k = 0; k < M; ++k)
            img.u[img.node_index(j, k)] = -orb.eval(orb.node_time(j, k) + 0.5);
    img.residual_norm = 1e308;
    return img;
}

PeriodicOrbit resample_orbit(const PeriodicOrbit& orb, int L, const SolveOptions& opt) {
    if (orb.L == L) return orb;
    PeriodicOrbit g;
    g.q = orb.q;
    g.L = L;
    g.params = orb.params;
    g.u.resize(g.n());
    for (int j = 0; j < g.n_intervals(); ++j)
        for (int k = 0; k < M; ++k)
            g.u[g.node_index(j, k)] = orb.eval(g.node_time(j, k));
    SolveOptions so = opt;
    so.L = L;
    return solve_orbit(g, so);
}

double canonical_phase(const PeriodicOrbit& orb) {
    int best = 0;
    for (int i = 1; i < orb.n(); ++i)
        if (std::fabs(orb.u[i]) > std::fabs(orb.u[best])) best = i;
    return orb.node_time(best / M, best % M);
}

PeriodicOrbit orbit_guess_from_recurrence(const Trajectory& traj, int q, const ModelParams& p,
                                          int L) {
    const double span = traj.t_end() - traj.t_start;
    if (span < 2 * q + 2) throw PreconditionError("trajectory too short to search for a recurrent window");
    // pick the integer start time whose headpoint recurs best after q years
    const double t_min = traj.t0() + 1.0;
    const double t_max = traj.t_end() - q - 1.0;
    double best_t = t_min, best_d = 1e308;
    const double tau = traj.tau();
    for (double t = std::ceil(t_min); t <= t_max; t += 1.0) {
        const double d = std::hypot(traj.eval(t + q) - traj.eval(t),
                                    traj.eval(t + q - tau) - traj.eval(t - tau));
        if (d < best_d) { best_d = d; best_t = t; }
    }
    PeriodicOrbit orb;
    orb.q = q;
    orb.L = L;
    orb.params = p;
    orb.u.resize(orb.n());
    for (int j = 0; j < orb.n_intervals(); ++j)
        for (int k = 0; k < M; ++k)
            orb.u[orb.node_index(j, k)] = traj.eval(best_t + orb.node_time(j, k));
    orb.residual_norm = 1e308;
    return orb;
}

} // namespace toribif

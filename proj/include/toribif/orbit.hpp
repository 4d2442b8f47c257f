#ifndef TORIBIF_ORBIT_HPP
#define TORIBIF_ORBIT_HPP

#include <array>

#include <Eigen/Dense>

#include "toribif/model.hpp"
#include "toribif/trajectory.hpp"

namespace toribif {

// Piecewise-polynomial basis shared by every orbit: degree 4 on uniform
// representation nodes k/4, collocated at the 4 Gauss-Legendre points.
struct CollocationBasis {
    static constexpr int M = 4;
    std::array<double, M> gauss{};
    std::array<std::array<double, M + 1>, M> lag{};   // lag[i][k]  = l_k(gauss[i])
    std::array<std::array<double, M + 1>, M> dlag{};  // dlag[i][k] = l_k'(gauss[i])

    static const CollocationBasis& get();
    static void weights(double theta, double* w);      // l_k(theta), k = 0..4
    static void dweights(double theta, double* dw);
};

// Periodic solution of integer period q represented by its values at the
// collocation mesh nodes; q*L intervals of width 1/L, M unknowns each.
// Periodic closure h(0) = h(q) holds by construction (wrapped indexing).
struct PeriodicOrbit {
    int q = 0;
    int L = 20;
    ModelParams params;
    Eigen::VectorXd u;
    double residual_norm = 1e308;

    int n_intervals() const { return q * L; }
    int n() const { return q * L * CollocationBasis::M; }
    double interval_width() const { return 1.0 / L; }
    int node_index(int interval, int k) const { return (interval * CollocationBasis::M + k) % n(); }
    double node_time(int interval, int k) const {
        return (static_cast<double>(interval) + static_cast<double>(k) / CollocationBasis::M) / L;
    }

    double eval(double t) const;
    double eval_deriv(double t) const;
    double max_h() const;
    double min_h() const;
    double amplitude() const { return 0.5 * (max_h() - min_h()); }
    std::array<double, 2> headpoint(int k) const;  // (h(k), h(k - tau)) for integer k
    std::vector<std::array<double, 2>> headpoints() const;

    bool converged(double tol = 1e-9) const { return residual_norm < tol; }

    // history segment of the orbit at integer phase, on the integrator grid
    HistorySegment history_at(double t0, double dt_target = 1e-3) const;
};

struct SolveOptions {
    double newton_tol = 1e-10;
    int max_iter = 50;
    int L = 20;
    bool refresh_jacobian_each_iter = true;  // large systems may reuse the factorization
};

// Newton iteration on the collocation system; throws NoConvergenceError /
// SingularityError on failure.
PeriodicOrbit solve_orbit(const PeriodicOrbit& guess, const SolveOptions& opt = {});
PeriodicOrbit solve_orbit_from_trajectory(const Trajectory& traj, int q, const ModelParams& p,
                                          const SolveOptions& opt = {});

// residual and Jacobian of the collocation system at u (exposed for the
// continuation module's bordered solves)
void collocation_residual(const PeriodicOrbit& orb, Eigen::VectorXd& r);
void collocation_jacobian(const PeriodicOrbit& orb, Eigen::MatrixXd& J);
// fill the top-left n x n block of a (possibly larger) preallocated matrix
void collocation_jacobian_into(const PeriodicOrbit& orb, Eigen::MatrixXd& J);
// derivative of the residual with respect to c or tau at fixed u
void collocation_dparam(const PeriodicOrbit& orb, bool wrt_tau, Eigen::VectorXd& fp);

// The image of the orbit under h(t) -> -h(t + 1/2); an exact solution again,
// returned unconverged (one short Newton re-solve tightens the residual).
PeriodicOrbit orbit_symmetry_image(const PeriodicOrbit& orb);

// Same orbit on a different mesh, re-converged.
PeriodicOrbit resample_orbit(const PeriodicOrbit& orb, int L, const SolveOptions& opt = {});

// Anchor phase used by the Floquet machinery: the node carrying max |h|.
// The symmetry image maps it half a period along, so spectra of partner
// orbits are computed from bit-mirrored data (requires even L).
double canonical_phase(const PeriodicOrbit& orb);

// Guess for a period-q orbit from the most recurrent q-year window of a
// trajectory tail.
PeriodicOrbit orbit_guess_from_recurrence(const Trajectory& traj, int q, const ModelParams& p,
                                          int L = 20);

} // namespace toribif

#endif

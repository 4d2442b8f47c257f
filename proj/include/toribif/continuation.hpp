#ifndef TORIBIF_CONTINUATION_HPP
#define TORIBIF_CONTINUATION_HPP

#include <optional>

#include "toribif/floquet.hpp"
#include "toribif/orbit.hpp"

namespace toribif {

enum class ActiveParam { c, tau };

inline double get_param(const ModelParams& p, ActiveParam ap) {
    return ap == ActiveParam::c ? p.c : p.tau;
}
inline void set_param(ModelParams& p, ActiveParam ap, double v) {
    if (ap == ActiveParam::c) p.c = v; else p.tau = v;
}

enum class EventKind { SN, PD, T, NP };

inline const char* event_name(EventKind k) {
    switch (k) {
        case EventKind::SN: return "SN";
        case EventKind::PD: return "PD";
        case EventKind::T: return "T";
        default: return "NP";
    }
}

struct BifurcationEvent {
    EventKind kind = EventKind::SN;
    double tau = 0.0, c = 0.0;
    double param = 0.0;  // active-parameter value at detection
    std::vector<std::complex<double>> multipliers;
    double test_value = 0.0;  // |test function| after refinement
    PeriodicOrbit orbit;
};

struct BranchPoint {
    double param = 0.0;
    PeriodicOrbit orbit;
    FloquetSpectrum spec;
};

struct Branch {
    ActiveParam active = ActiveParam::c;
    std::vector<BranchPoint> points;
    std::vector<BifurcationEvent> events;
    std::string termination;
};

struct ContinuationOptions {
    double max_step = 1e-2;        // in the weighted (orbit, parameter) norm
    double min_step = 1e-10;
    double newton_tol = 1e-10;
    int max_newton = 8;
    int max_points = 2000;
    double event_param_tol = 1e-8;
    double event_test_tol = 1e-9;
    int initial_direction = +1;
    FloquetOptions floq;
    bool verbose = false;
};

// Test function whose zero marks the event; absent when the spectrum lacks
// the required multipliers.
std::optional<double> event_test_value(EventKind kind, const FloquetSpectrum& spec);

// Newton corrector for the collocation system bordered with the arclength
// condition <dir, X - X_pred>_w = 0; weighted norm |X|^2 = |u|^2/n + p^2.
bool bordered_correct(PeriodicOrbit& orb, ActiveParam ap, const Eigen::VectorXd& dir_u,
                      double dir_p, const Eigen::VectorXd& u_pred, double p_pred,
                      const ContinuationOptions& opt);

Branch continue_branch(const PeriodicOrbit& start, ActiveParam ap, double range_lo,
                       double range_hi, const ContinuationOptions& opt = {});

enum class CurveKind { SN, T, NP };

inline const char* curve_name(CurveKind k) {
    switch (k) {
        case CurveKind::SN: return "SN";
        case CurveKind::T: return "T";
        default: return "NP";
    }
}

struct Codim1Curve {
    CurveKind kind = CurveKind::SN;
    std::vector<std::array<double, 2>> pts;  // (tau, c) along the curve
    std::vector<double> test_values;
    std::vector<PeriodicOrbit> orbits;
    std::vector<FloquetSpectrum> spectra;
    std::string end_reason_front, end_reason_back;
};

struct CurveOptions {
    std::array<double, 2> tau_window{0.94, 0.96};
    std::array<double, 2> c_window{2.97, 3.01};
    double step0 = 0.02;     // normalized plane step
    double min_step = 1e-3;
    double max_step = 0.04;
    int max_vertices = 240;
    int march_axis = 0;      // 0 = tau, 1 = c (initial direction)
    ContinuationOptions copts;
    bool verbose = false;
};

// Relocate a curve point of the given kind with one plane coordinate frozen,
// searching the other within +- radius of the guess.
std::optional<BifurcationEvent> refine_curve_point(CurveKind kind, int frozen_axis,
                                                   double frozen_value, double free_guess,
                                                   double radius, const PeriodicOrbit& seed,
                                                   const ContinuationOptions& copts);

// Two-parameter curve traced by freeze-and-refine marching from a seed event.
Codim1Curve trace_codim1(CurveKind kind, const BifurcationEvent& seed, const CurveOptions& opt);

struct SecondaryTongueOptions {
    double offset = 2.5e-4;  // shift from the root towards the stable side
    std::vector<double> amplitudes{0.01, 0.003, 0.03, 0.08};  // relative to orbit amplitude
    int branch_span = 6;     // continuation points along the tongue
    SolveOptions solve;
    FloquetOptions floq;
    ContinuationOptions copts;
    bool verbose = false;
};

struct SecondaryTongue {
    int q_rel = 0;
    std::array<double, 2> root{};  // (tau, c) on the torus curve
    PeriodicOrbit orbit;           // locked orbit of period q * q_rel
    FloquetSpectrum spec;
    Branch branch;
};

// Locked orbit of relative period q_rel rooted on the torus-bifurcation
// curve where the critical pair has angle 2*pi/q_rel; the guess perturbs the
// base orbit along the torus eigenfunction and the solve leaves c free.
SecondaryTongue find_secondary_tongue(int q_rel, const Codim1Curve& t_curve,
                                      const SecondaryTongueOptions& opt = {});

} // namespace toribif

#endif

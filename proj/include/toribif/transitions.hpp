#ifndef TORIBIF_TRANSITIONS_HPP
#define TORIBIF_TRANSITIONS_HPP

#include <functional>
#include <optional>

#include "toribif/continuation.hpp"
#include "toribif/manifold.hpp"

namespace toribif {

// Re-solves the locked-orbit pair near a point of the (tau, c)-plane from
// cached seeds; one instance per scan (not thread-safe across slices).
class BubbleObjects {
public:
    BubbleObjects(PeriodicOrbit central_seed, PeriodicOrbit saddle_seed)
        : central_seed_(std::move(central_seed)), saddle_seed_(std::move(saddle_seed)) {}

    struct Local {
        PeriodicOrbit central;  // the branch that is stable left of the torus curve
        PeriodicOrbit saddle;   // 1-saddle partner
        PeriodicOrbit partner;  // symmetry image of the saddle
        FloquetSpectrum central_spec;
        DestinationContext ctx;
    };

    Local at(double tau, double c, const SolveOptions& so = {}, const FloquetOptions& fo = {});

private:
    PeriodicOrbit central_seed_, saddle_seed_;
};

enum class TransitionKind { HoC, HeC, SNT };

inline const char* transition_name(TransitionKind k) {
    switch (k) {
        case TransitionKind::HoC: return "HoC";
        case TransitionKind::HeC: return "HeC";
        default: return "SNT";
    }
}

struct TransitionPoint {
    TransitionKind kind = TransitionKind::HoC;
    double tau = 0.0, c = 0.0;      // bracket midpoint in the plane
    double bracket_lo = 0.0, bracket_hi = 0.0;  // scan-parameter bracket
    std::string before_sig, after_sig;
    int branch_sign = 0;
};

struct TransitionOptions {
    double refine_tol = 1e-4;
    ManifoldOptions man;
    SolveOptions solve;
    FloquetOptions floq;
    double snt_jump = 0.3;
    double snt_transient = 300.0;
    double snt_window = 200.0;
    double snt_coarse_factor = 5.0;
    double dt = 1e-3;
    double b = 1.0, kappa = 11.0;
    bool verbose = false;
};

// Homoclinic transition: scanned in tau at fixed c; before (larger tau) the
// relevant manifold branch shows a contractible curve or a mixed tangle,
// after it spirals uniformly into the attracting points.
TransitionPoint locate_hoc(BubbleObjects& objs, double c_fixed, double tau_lo, double tau_hi,
                           const TransitionOptions& opt);

// Heteroclinic transition: scanned in c at fixed tau for one manifold branch;
// past the transition the branch accumulates on a rotational invariant curve
// (approaching the partner saddle within delta_het on the way).
TransitionPoint locate_hec(BubbleObjects& objs, double tau_fixed, double c_lo, double c_hi,
                           int branch_sign, const TransitionOptions& opt);

// Folding-tori locus: a carried-history sweep in c; the ridden attractor
// disappears with a max_h jump larger than snt_jump.  A null rider starts
// cold from the default constant history at c_from.
TransitionPoint locate_snt(double tau, double c_from, double c_to, const HistorySegment* rider,
                           const TransitionOptions& opt);

struct TransitionLocus {
    TransitionKind kind = TransitionKind::HoC;
    std::vector<TransitionPoint> points;   // ordered by slice value
    std::vector<double> slice_values;
    std::vector<std::array<double, 2>> gaps;  // slice intervals with no bracket
};

// Run per-slice locators, record gaps, and refine the locus endpoints by
// bisection on the slice coordinate down to end_refine_tol.
TransitionLocus trace_locus(TransitionKind kind, const std::vector<double>& slices,
                            const std::function<std::optional<TransitionPoint>(double)>& locate_at,
                            double end_refine_tol, int workers);

struct DriftResult {
    double tau = 0.0;
    RampSpec ramp;
    Trajectory traj;
    std::vector<std::array<double, 2>> year_max;  // (end of year, max |h| within it)
    std::vector<std::pair<std::string, double>> event_times;
};

// Single integration with drifting c; event times are mapped from supplied
// crossing values of c through the ramp formula.
DriftResult drift_run(const ModelParams& base, const RampSpec& ramp, const HistorySegment& init,
                      double t_end, const std::vector<std::pair<std::string, double>>& event_cs = {});

// First year at which the per-year amplitude settles below the midpoint of
// the early and late levels; NaN if no collapse is present.
double collapse_time(const DriftResult& dr, int confirm_years = 15);

} // namespace toribif

#endif

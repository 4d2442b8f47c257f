#ifndef TORIBIF_STROBE_HPP
#define TORIBIF_STROBE_HPP

#include <array>
#include <string>
#include <vector>

#include "toribif/integrate.hpp"

namespace toribif {

// Headpoints (h(t), h(t - tau)) sampled at integer forcing times.
struct StroboscopicTrace {
    double t_first = 0.0;
    std::vector<std::array<double, 2>> points;
};

struct AttractorClass {
    enum class Kind { locked, quasiperiodic, diverged, undecided };
    Kind kind = Kind::undecided;
    int p = 0, q = 0;      // meaningful for locked
    double max_h = 0.0;

    std::string kind_name() const {
        switch (kind) {
            case Kind::locked: return "locked";
            case Kind::quasiperiodic: return "quasiperiodic";
            case Kind::diverged: return "diverged";
            default: return "undecided";
        }
    }
};

struct ClassifyOptions {
    double eps_lock = 1e-6;
    int q_max = 64;
    double shrink_factor = 0.97;  // gap must shrink by this much as points double
    double fill_fraction = 0.05;  // or already be below this fraction of the diameter
};

StroboscopicTrace strobe(const Trajectory& traj, double transient);

AttractorClass classify(const StroboscopicTrace& trace, const ClassifyOptions& opt = {});

// Closed-curve test used by both the attractor classifier and the manifold
// destination labels: points ordered by angle about their centroid fill a
// loop whose largest gap shrinks as samples accumulate.
bool curve_filling(const std::vector<std::array<double, 2>>& pts, const ClassifyOptions& opt);

struct SweepOptions {
    double b = 1.0, kappa = 11.0;
    double dt = 1e-3;
    double transient = 500.0;
    double window = 500.0;
    double seed_value = 0.1;   // fresh-sweep initial history level
    ClassifyOptions classify;
};

struct SweepPoint {
    double c = 0.0;
    AttractorClass cls;
};

// Monotone scan in c with the history carried from step to step; divergence
// is recorded and the sweep restarts from the default history.
std::vector<SweepPoint> sweep_column(double tau, double c_from, double c_to, int n_steps,
                                     const SweepOptions& opt = {});

struct MaxMapCell {
    double tau = 0.0, c = 0.0;
    AttractorClass cls;
};

struct MaxMap {
    enum class Direction { up, down };
    Direction direction = Direction::up;
    std::vector<double> taus, cs;
    std::vector<MaxMapCell> cells;  // row-major: tau index outer, c index inner
};

struct MaxMapGrid {
    double tau_from = 0.0, tau_to = 0.0;
    int n_tau = 1;
    double c_from = 0.0, c_to = 0.0;
    int n_c = 1;
};

MaxMap max_map(const MaxMapGrid& grid, MaxMap::Direction dir, const SweepOptions& opt = {},
               int workers = 1);

// Hann-windowed spectrum of the final window_years of h, log10 power in
// arbitrary units, frequency in cycles per year.
std::vector<std::array<double, 2>> power_spectrum(const Trajectory& traj, double window_years);

} // namespace toribif

#endif

#ifndef TORIBIF_MANIFOLD_HPP
#define TORIBIF_MANIFOLD_HPP

#include <map>

#include "toribif/floquet.hpp"
#include "toribif/strobe.hpp"

namespace toribif {

enum class Destination {
    attracting_point,
    rotational_curve,
    contractible_curve,
    saddle_neighborhood,
    escaped,
    undecided,
};

const char* destination_name(Destination d);

// Reference objects the destination labels are measured against.
struct DestinationContext {
    std::vector<std::array<double, 2>> stable_points;          // attracting headpoints, may be empty
    std::vector<std::array<double, 2>> saddle_points;          // the traced saddle's own headpoints
    std::vector<std::array<double, 2>> partner_saddle_points;  // symmetry partner
    std::array<double, 2> ring_centroid{0.0, 0.0};
    double delta = 1e-4;
    double delta_het = 5e-3;
};

struct ManifoldOptions {
    double eps_rel = 1e-4;  // seed offset relative to the orbit amplitude
    int n_seeds = 50;
    int n_iters = 100;
    double dt_target = 1e-3;
    int workers = 1;
    FloquetOptions floq;
};

struct ManifoldTrace {
    int q = 0;
    int sign = +1;
    double mu_u = 0.0;
    double eps_abs = 0.0;
    std::vector<double> seed_scales;
    std::vector<std::vector<std::array<double, 2>>> iterates;  // [seed][iter] headpoints
    std::vector<Destination> destinations;
    std::vector<HistorySegment> final_states;  // per seed, empty for escaped seeds
    double first_iter_growth = 0.0;            // linear-regime certificate, compare to mu_u
    double min_dist_partner = 1e308;           // over every recorded headpoint
};

// Seed the fundamental domain [eps, eps*mu_u) along the unstable
// eigendirection and iterate each seed under the time-q map.
ManifoldTrace trace_manifold(const PeriodicOrbit& saddle, int sign, const DestinationContext& ctx,
                             const ManifoldOptions& opt = {});

struct DestinationSummary {
    bool uniform = false;
    Destination label = Destination::undecided;  // meaningful when uniform
    std::map<Destination, int> histogram;

    bool has(Destination d) const { return histogram.count(d) > 0; }
};

DestinationSummary classify_destinations(const ManifoldTrace& trace);

// Label a single headpoint stream (exposed for the transition locators and
// for tests with synthetic data).
Destination label_tail(const std::vector<std::array<double, 2>>& iterates,
                       const DestinationContext& ctx);

} // namespace toribif

#endif

#ifndef TORIBIF_BUBBLE_HPP
#define TORIBIF_BUBBLE_HPP

#include "toribif/transitions.hpp"

namespace toribif {

// Orchestration of the two-parameter study of the folded resonance tongue:
// anchor orbits, one-parameter branches, codimension-one curves, and the
// simulation-detected transition loci, with the organising points extracted
// from the assembled geometry.

struct BubbleConfig {
    std::array<double, 2> tau_window{0.94, 0.96};
    std::array<double, 2> c_window{2.97, 3.01};
    double anchor_tau = 0.9530;
    double anchor_c = 2.9850;
    int q = 7;
    int workers = 1;
    bool verbose = true;

    // locus resolution
    int hoc_slices = 5;
    int hec_slices = 7;
    int snt_slices = 7;
    double locus_refine_tol = 1e-4;
    double end_refine_tol = 1e-3;

    // probe sizing for the transition locators
    int probe_seeds = 24;
    int probe_iters = 90;

    double dt = 1e-3;
    SolveOptions solve;
    FloquetOptions floq;
    ContinuationOptions copts;
};

struct SpecialPoints {
    std::vector<std::array<double, 2>> B;  // torus/neutral-saddle endpoints on SN
    std::vector<std::array<double, 2>> Z;  // heteroclinic endpoints on SN
    std::vector<std::array<double, 2>> K;  // folding-tori roots on NP
    std::optional<std::array<double, 2>> N;  // heteroclinic crossing
    std::optional<std::array<double, 2>> X;  // SNT crossing T
};

struct BubbleSet {
    BubbleConfig cfg;

    PeriodicOrbit stable27, saddle27;  // at underlying anchor parameters
    Branch c_branch;                   // in c at anchor_tau
    Branch tau_branch_central;         // in tau at anchor_c
    Branch tau_branch_saddle;          // 1-saddle in tau at anchor_c

    Codim1Curve sn_low, sn_high, t_curve, np_curve;

    TransitionLocus hoc, hec_plus, hec_minus, snt_up, snt_down;

    SpecialPoints points;
};

// Simulated bootstrap: carried upward sweep onto the locked orbit, then the
// collocation solve from the trajectory tail.
PeriodicOrbit bootstrap_locked_orbit(double tau, double c_from, double c_to, int steps, int q,
                                     double dt = 1e-3, const SolveOptions& so = {});

// Stage 1: anchor orbits and the one-parameter branches (SN / T / NP seeds).
void build_bubble_branches(BubbleSet& bs);
// Stage 2: trace the SN, T and NP curves across the window.
void build_bubble_curves(BubbleSet& bs);
// Stage 3: HoC / HeC / SNT loci by dedicated simulation scans.
void build_bubble_loci(BubbleSet& bs);
// Stage 4: B, Z, N, X, K estimates from the assembled geometry.
void extract_special_points(BubbleSet& bs);

BubbleSet build_bubble(const BubbleConfig& cfg);

// small plane-geometry helpers used for the organising points
double point_polyline_dist(const std::array<double, 2>& p,
                           const std::vector<std::array<double, 2>>& poly);
std::vector<std::array<double, 2>> polyline_intersections(
    const std::vector<std::array<double, 2>>& a, const std::vector<std::array<double, 2>>& b);
// first crossing of poly with the line {axis == value}; returns the other coordinate
std::optional<double> polyline_crossing(const std::vector<std::array<double, 2>>& poly, int axis,
                                        double value);

} // namespace toribif

#endif

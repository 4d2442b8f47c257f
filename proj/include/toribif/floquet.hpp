#ifndef TORIBIF_FLOQUET_HPP
#define TORIBIF_FLOQUET_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "toribif/orbit.hpp"

namespace toribif {

struct FloquetSpectrum {
    enum class Class { stable, saddle1, saddle2, higher };

    std::vector<std::complex<double>> multipliers;  // sorted by modulus, descending
    int n_unstable = 0;  // |mu| > 1 + mu_tol
    int n_critical = 0;  // | |mu| - 1 | <= mu_tol, left out of the class count
    Class cls = Class::stable;
    double mu_tol = 1e-6;

    std::string class_name() const {
        switch (cls) {
            case Class::stable: return "stable";
            case Class::saddle1: return "1-saddle";
            case Class::saddle2: return "2-saddle";
            default: return "higher";
        }
    }
};

struct FloquetOptions {
    int M = 200;             // history grid size of the monodromy discretisation
    double dt_target = 1e-3;
    double mu_tol = 1e-6;
};

// Monodromy matrix of the time-q map of the variational equation
// xi'(t) = a(t) xi(t - tau) along the orbit, on unit-pulse histories over a
// uniform grid of size M.
Eigen::MatrixXd monodromy_matrix(const PeriodicOrbit& orbit, const FloquetOptions& opt = {});

FloquetSpectrum floquet(const PeriodicOrbit& orbit, const FloquetOptions& opt = {});
FloquetSpectrum spectrum_from_matrix(const Eigen::MatrixXd& mono, double mu_tol);

// Eigenfunction of the single real unstable multiplier, smoothed by one
// variational round trip and returned on the integrator history grid with
// unit max-norm.  Throws NotApplicableError unless the orbit is a 1-saddle
// with a real leading multiplier.
HistorySegment unstable_eigenfunction(const PeriodicOrbit& orbit, double* mu_out = nullptr,
                                      const FloquetOptions& opt = {});

// Complex eigenfunction of the critical (nearest to the unit circle) nonreal
// pair; real and imaginary parts on the integrator grid plus the multiplier.
struct ComplexEigenfunction {
    HistorySegment re, im;
    std::complex<double> mu;
};
ComplexEigenfunction critical_pair_eigenfunction(const PeriodicOrbit& orbit,
                                                 const FloquetOptions& opt = {});

// Argument of the critical complex pair in (0, pi).
double rotation_angle(const FloquetSpectrum& spec, double circle_tol = 1e-4);

// Dense variational solution over [0, q] from a given initial perturbation
// history at phase 0 (used to build eigenfunctions and secondary-tongue
// guesses).
Trajectory integrate_variational(const PeriodicOrbit& orbit, const HistorySegment& xi0);

} // namespace toribif

#endif

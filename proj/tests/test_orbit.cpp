#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "toribif/bubble.hpp"
#include "toribif/floquet.hpp"
#include "toribif/orbit.hpp"

using namespace toribif;

namespace {

// Rightmost characteristic roots of xi'(t) = a xi(t - tau), an independent
// oracle for the monodromy: lambda = a exp(-lambda tau), multipliers e^lambda.
std::vector<std::complex<double>> characteristic_roots(double a, double tau, int want) {
    std::vector<std::complex<double>> roots;
    auto push_unique = [&](std::complex<double> l) {
        for (const auto& r : roots)
            if (std::abs(r - l) < 1e-6) return;
        roots.push_back(l);
    };
    for (int k = 0; k < 40; ++k) {
        for (double re : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
            std::complex<double> l(re, (2.0 * k + 1.0) * 1.5707963267948966 / tau);
            bool ok = true;
            for (int it = 0; it < 80; ++it) {
                const std::complex<double> e = std::exp(-l * tau);
                const std::complex<double> f = l - a * e;
                const std::complex<double> fp = 1.0 + a * tau * e;
                const std::complex<double> dl = f / fp;
                l -= dl;
                if (std::abs(dl) < 1e-13) break;
                if (!std::isfinite(l.real()) || std::abs(l) > 1e4) { ok = false; break; }
            }
            if (ok && std::abs(l - a * std::exp(-l * tau)) < 1e-9) push_unique(l);
        }
    }
    std::sort(roots.begin(), roots.end(),
              [](const std::complex<double>& x, const std::complex<double>& y) {
                  return x.real() > y.real();
              });
    if (static_cast<int>(roots.size()) > want) roots.resize(static_cast<size_t>(want));
    return roots;
}

PeriodicOrbit equilibrium_orbit(double tau, double kappa = 11.0) {
    PeriodicOrbit orb;
    orb.q = 1;
    orb.L = 20;
    orb.params = ModelParams{1.0, kappa, 0.0, tau};
    orb.u = Eigen::VectorXd::Constant(orb.n(), 1e-4);
    return solve_orbit(orb);
}

} // namespace

TEST_CASE("collocation solves the unforced equilibrium") {
    const PeriodicOrbit orb = equilibrium_orbit(0.9395);
    CHECK(orb.residual_norm < 1e-10);
    CHECK(std::fabs(orb.max_h()) < 1e-12);
    CHECK(orb.eval(0.37) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("monodromy eigenvalues match the characteristic roots") {
    // along h == 0 the variational coefficient is the constant -b*kappa;
    // the coarse history grid resolves the leading roots to ~1e-5 at M=400
    const PeriodicOrbit orb = equilibrium_orbit(0.9395);
    FloquetOptions fo;
    fo.M = 400;
    const FloquetSpectrum spec = floquet(orb, fo);
    const auto roots = characteristic_roots(-11.0, 0.9395, 4);
    REQUIRE(roots.size() >= 4);
    for (const auto& l : roots) {
        if (l.imag() < 0.0) continue;
        const std::complex<double> mu = std::exp(l);
        double best = 1e308;
        for (const auto& m : spec.multipliers) best = std::min(best, std::abs(m - mu));
        CHECK(best < 1e-4 * std::max(1.0, std::abs(mu)));
    }
    // conjugation symmetry of the computed spectrum
    for (const auto& m : spec.multipliers) {
        if (std::fabs(m.imag()) < 1e-10) continue;
        double best = 1e308;
        for (const auto& m2 : spec.multipliers) best = std::min(best, std::abs(m2 - std::conj(m)));
        CHECK(best < 1e-8 * std::max(1.0, std::abs(m)));
    }
}

TEST_CASE("delayed negative feedback destabilises the equilibrium") {
    // b*kappa*tau >> pi/2 puts complex pairs outside the unit circle
    const PeriodicOrbit orb = equilibrium_orbit(0.9395);
    const FloquetSpectrum spec = floquet(orb);
    CHECK(spec.n_unstable >= 2);
}

TEST_CASE("rotation_angle of synthetic critical pairs") {
    FloquetSpectrum spec;
    spec.multipliers = {std::polar(1.0, two_pi / 12.0), std::polar(1.0, -two_pi / 12.0),
                        std::complex<double>(0.5, 0.0)};
    CHECK(rotation_angle(spec, 1e-6) == doctest::Approx(two_pi / 12.0).epsilon(1e-14));
    std::swap(spec.multipliers[0], spec.multipliers[1]);
    CHECK(rotation_angle(spec, 1e-6) == doctest::Approx(two_pi / 12.0).epsilon(1e-14));
    spec.multipliers = {std::complex<double>(1.2, 0.0)};
    CHECK_THROWS_AS(rotation_angle(spec, 1e-6), NotApplicableError);
}

TEST_CASE("locked 2:7 orbit: residual certificate and consistency") {
    // carried sweep onto the locked state, then the collocation solve; the
    // simulation-consistency tolerances below need the L=40 mesh
    SolveOptions sa;
    sa.L = 40;
    const PeriodicOrbit orb = bootstrap_locked_orbit(0.9530, 2.958, 2.9850, 7, 7, 1e-3, sa);
    CHECK(orb.residual_norm < 1e-10);

    // independent residual re-check through the evaluation interface
    const CollocationBasis& B = CollocationBasis::get();
    double worst = 0.0;
    for (int j = 0; j < orb.n_intervals(); j += 3) {
        for (int i = 0; i < CollocationBasis::M; ++i) {
            const double tc = (j + B.gauss[static_cast<size_t>(i)]) * orb.interval_width();
            const double r = orb.eval_deriv(tc) - rhs(tc, orb.eval(tc - orb.params.tau), orb.params);
            worst = std::max(worst, std::fabs(r));
        }
    }
    CHECK(worst < 1e-9);

    const FloquetSpectrum spec = floquet(orb);
    CHECK(spec.cls == FloquetSpectrum::Class::stable);

    SUBCASE("integrating the orbit history stays on the orbit") {
        HistorySegment h = orb.history_at(0.0);
        double dev = 0.0;
        for (int k = 0; k < 10; ++k) {
            h = time_q_map(h, orb.q, orb.params);
            dev = std::max(dev, std::fabs(h.headpoint_h() - orb.eval(0.0)));
            dev = std::max(dev, std::fabs(h.headpoint_delayed() - orb.eval(-orb.params.tau)));
        }
        CHECK(dev < 1e-5);
    }

    SUBCASE("time_q_map fixed point") {
        HistorySegment h = orb.history_at(0.0);
        const HistorySegment h1 = time_q_map(h, orb.q, orb.params);
        CHECK(std::fabs(h1.headpoint_h() - h.headpoint_h()) < 1e-6);
        CHECK(std::fabs(h1.headpoint_delayed() - h.headpoint_delayed()) < 1e-6);
    }

    SUBCASE("symmetry image re-converges immediately and keeps the spectrum") {
        PeriodicOrbit img = orbit_symmetry_image(orb);
        SolveOptions so;
        so.max_iter = 3;
        const PeriodicOrbit img2 = solve_orbit(img, so);
        CHECK(img2.residual_norm < 1e-10);
        const FloquetSpectrum ispec = floquet(img2);
        for (size_t i = 0; i < 6; ++i)
            CHECK(std::abs(ispec.multipliers[i] - spec.multipliers[i]) < 1e-8);
        // genuinely the partner: different orbit unless the symmetry fixes it
        double diff = 0.0;
        for (double t = 0.05; t < 7.0; t += 0.35)
            diff = std::max(diff, std::fabs(img2.eval(t) - orb.eval(t)));
        CHECK(diff > 1e-3);
    }

    SUBCASE("mesh refinement leaves the leading multipliers in place") {
        PeriodicOrbit fine;
        fine.q = orb.q;
        fine.L = 80;
        fine.params = orb.params;
        fine.u.resize(fine.n());
        for (int j = 0; j < fine.n_intervals(); ++j)
            for (int k = 0; k < CollocationBasis::M; ++k)
                fine.u[fine.node_index(j, k)] = orb.eval(fine.node_time(j, k));
        SolveOptions so;
        so.L = 80;
        const PeriodicOrbit orb2 = solve_orbit(fine, so);
        const FloquetSpectrum spec2 = floquet(orb2);
        for (size_t i = 0; i < spec.multipliers.size(); ++i) {
            if (std::abs(spec.multipliers[i]) <= 0.1) break;
            CHECK(std::abs(spec2.multipliers[i] - spec.multipliers[i]) /
                      std::abs(spec.multipliers[i]) <
                  1e-3);
        }
    }

    SUBCASE("guess from a non-converged state is a precondition error downstream") {
        PeriodicOrbit raw = orb;
        raw.residual_norm = 1.0;
        CHECK_THROWS_AS(floquet(raw), PreconditionError);
    }
}

TEST_CASE("solve_orbit rejects bad inputs") {
    PeriodicOrbit orb;
    orb.q = 0;
    CHECK_THROWS_AS(solve_orbit(orb), PreconditionError);
    Trajectory tr;
    tr.t_start = 0.0;
    tr.dt = 1e-3;
    tr.h.assign(100, 0.1);
    tr.hdot.assign(100, 0.0);
    CHECK_THROWS_AS(solve_orbit_from_trajectory(tr, 7, ModelParams{}), PreconditionError);
}

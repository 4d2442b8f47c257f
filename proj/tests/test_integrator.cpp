#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "toribif/integrate.hpp"

using namespace toribif;

namespace {

HistorySegment random_history(std::mt19937& rng, double tau, double dt) {
    std::uniform_real_distribution<double> ua(0.05, 0.8), uph(0.0, 1.0), uc(-0.5, 0.5);
    HistorySegment hs = make_sinusoid_history(ua(rng), tau, dt);
    const double off = uc(rng), ph = uph(rng);
    for (size_t i = 0; i < hs.h.size(); ++i) {
        const double t = hs.t_begin() + hs.dt * static_cast<double>(i);
        hs.h[i] += off + 0.2 * std::sin(two_pi * (2.0 * t + ph));
        hs.hdot[i] += 0.4 * two_pi * std::cos(two_pi * (2.0 * t + ph));
    }
    return hs;
}

} // namespace

TEST_CASE("make_history snaps dt to an exact divisor of tau") {
    HistorySegment hs = make_constant_history(0.0, 0.9395, 1e-3);
    CHECK(hs.h.size() == 941);
    CHECK(hs.dt == doctest::Approx(0.9395 / 940).epsilon(1e-15));
    for (double v : hs.h) CHECK(v == 0.0);
    CHECK(std::fabs(hs.tau() / hs.dt - 940.0) < 1e-9);
}

TEST_CASE("sinusoid history matches the analytic pair") {
    HistorySegment hs = make_sinusoid_history(0.7, 0.9395, 1e-3, 3.0);
    for (size_t i = 0; i < hs.h.size(); ++i) {
        const double t = hs.t_begin() + hs.dt * static_cast<double>(i);
        CHECK(hs.h[i] == doctest::Approx(0.7 * std::sin(two_pi * t)).epsilon(1e-14));
        CHECK(hs.hdot[i] == doctest::Approx(two_pi * 0.7 * std::cos(two_pi * t)).epsilon(1e-14));
    }
}

TEST_CASE("tail of a zero trajectory is the zero history") {
    ModelParams p{1.0, 11.0, 0.0, 0.9395};
    HistorySegment hs = make_constant_history(0.0, p.tau, 1e-3);
    Trajectory traj = integrate(hs, 5.0, p);
    HistorySegment tail = history_from_trajectory_tail(traj);
    for (double v : tail.h) CHECK(v == 0.0);
    CHECK_THROWS_AS(tail_history(traj, traj.t_end(), traj.dt, 100000), InsufficientHistoryError);
}

TEST_CASE("zero history with c=0 stays identically zero") {
    ModelParams p{1.0, 11.0, 0.0, 0.9395};
    HistorySegment hs = make_constant_history(0.0, p.tau, 1e-3);
    Trajectory traj = integrate(hs, 20.0, p);
    for (double v : traj.h) CHECK(v == 0.0);
}

TEST_CASE("b=0 reduces to the closed-form quadrature") {
    ModelParams p{0.0, 11.0, 2.976, 0.9395};
    HistorySegment hs = make_constant_history(0.3, p.tau, 1e-3);
    Trajectory traj = integrate(hs, 10.0, p);
    double worst = 0.0;
    for (size_t i = static_cast<size_t>(traj.n_history); i < traj.h.size(); ++i) {
        const double t = traj.t_start + traj.dt * static_cast<double>(i);
        const double exact = 0.3 + p.c / two_pi * std::sin(two_pi * t);
        worst = std::max(worst, std::fabs(traj.h[i] - exact));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("self-convergence order is at least three") {
    // halving dt shrinks the error against a dt/16 reference by >= 8x
    ModelParams p{1.0, 11.0, 2.976, 0.9395};
    auto run = [&](int n_intervals) {
        HistorySegment hs = make_constant_history(0.1, p.tau, p.tau / n_intervals);
        return integrate(hs, 5.0, p);
    };
    const Trajectory ref = run(235 * 16);
    double prev_err = -1.0;
    for (int n : {235, 470, 940}) {
        const Trajectory traj = run(n);
        double err = 0.0;
        for (int k = 0; k <= 64; ++k) {  // compare over the delay interval ending at t = 5
            const double t = 5.0 - p.tau + k * p.tau / 64.0;
            err = std::max(err, std::fabs(traj.eval(t) - ref.eval(t)));
        }
        if (prev_err > 0.0) CHECK(prev_err / err >= 8.0);
        prev_err = err;
    }
}

TEST_CASE("determinism: identical inputs give bit-identical output") {
    ModelParams p{1.0, 11.0, 2.976, 0.9395};
    HistorySegment hs = make_constant_history(0.1, p.tau, 1e-3);
    Trajectory a = integrate(hs, 50.0, p);
    Trajectory b = integrate(hs, 50.0, p);
    CHECK(a.h == b.h);
    CHECK(a.hdot == b.hdot);
}

TEST_CASE("growth bound |h| <= max|hist| + (b+c)(t-t0)") {
    ModelParams p{1.0, 11.0, 3.2, 0.9395};
    std::mt19937 rng(5);
    HistorySegment hs = random_history(rng, p.tau, 1e-3);
    double h0 = 0.0;
    for (double v : hs.h) h0 = std::max(h0, std::fabs(v));
    Trajectory traj = integrate(hs, 30.0, p);
    for (size_t i = static_cast<size_t>(traj.n_history); i < traj.h.size(); ++i) {
        const double t = traj.t_start + traj.dt * static_cast<double>(i);
        CHECK(std::fabs(traj.h[i]) <= h0 + (p.b + p.c) * (t - traj.t0()) + 1e-9);
    }
}

TEST_CASE("stored nodes are reproduced exactly by the interpolant") {
    ModelParams p{1.0, 11.0, 2.976, 0.9395};
    HistorySegment hs = make_constant_history(0.1, p.tau, 1e-3);
    Trajectory traj = integrate(hs, 3.0, p);
    for (size_t i = 0; i < traj.h.size(); i += 17) {
        const double t = traj.t_start + traj.dt * static_cast<double>(i);
        CHECK(traj.eval(t) == traj.h[i]);
        CHECK(traj.eval_deriv(t) == traj.hdot[i]);
    }
}

TEST_CASE("divergence is reported with the offending time") {
    // b large and negative feedback flipped via huge c forces blow-up is not
    // available in this model (rhs is bounded), so check the guard directly
    // on a history that already exceeds the bound.
    ModelParams p{1.0, 11.0, 2.0, 0.9395};
    HistorySegment hs = make_constant_history(0.1, p.tau, 1e-3);
    hs.h.back() = 2e6;  // inconsistent marker value; integration still proceeds from it
    CHECK_THROWS_AS(integrate(hs, 2.0, p), Error);
}

TEST_CASE("time_q_map rejects q < 1 and composes exactly") {
    ModelParams p{1.0, 11.0, 2.976, 0.9395};
    HistorySegment hs = make_constant_history(0.1, p.tau, 1e-3);
    CHECK_THROWS_AS(time_q_map(hs, 0, p), PreconditionError);

    HistorySegment a = time_q_map(time_q_map(hs, 3, p), 4, p);
    HistorySegment b = time_q_map(hs, 7, p);
    CHECK(a.h == b.h);
    CHECK(a.hdot == b.hdot);
    CHECK(a.t0 == doctest::Approx(b.t0));
}

TEST_CASE("equivariance: integrate commutes with the half-period symmetry") {
    // grid chosen so dt divides both tau and 1/2; the random histories are
    // warmed through the flow first so they carry no derivative kink at the
    // junction (a kink cannot be represented by one stored hdot per node and
    // would re-enter the mirrored run as a spurious asymmetry)
    ModelParams p{1.0, 11.0, 2.976, 0.9395};
    std::mt19937 rng(99);
    const double T = 10.0;
    for (int trial = 0; trial < 10; ++trial) {
        HistorySegment raw = random_history(rng, p.tau, 5.0e-4);
        Trajectory warm = integrate(raw, raw.t0 + 3.0, p);
        HistorySegment hist = tail_history(warm, raw.t0 + 3.0, raw.dt, raw.intervals());
        hist.t0 = 0.0;
        Trajectory full = integrate(hist, hist.t0 + T + 0.5, p);
        Trajectory s_full = apply_symmetry(full);

        // the image of the history is the first delay interval of s_full
        Trajectory half = integrate(hist, hist.t0 + 0.5, p);
        Trajectory s_half = apply_symmetry(half);
        HistorySegment img;
        img.t0 = hist.t0;
        img.dt = hist.dt;
        img.h.assign(s_half.h.begin(), s_half.h.begin() + hist.h.size());
        img.hdot.assign(s_half.hdot.begin(), s_half.hdot.begin() + hist.h.size());

        Trajectory other = integrate(img, hist.t0 + T, p);
        REQUIRE(other.h.size() <= s_full.h.size());
        double worst = 0.0;
        for (size_t i = 0; i < other.h.size(); ++i)
            worst = std::max(worst, std::fabs(other.h[i] - s_full.h[i]));
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("zero-length ramp reproduces the constant-parameter run bit-exactly") {
    ModelParams p{1.0, 11.0, 2.976, 0.9395};
    HistorySegment hs = make_constant_history(0.1, p.tau, 1e-3);
    RampSpec ramp{2.976, 2.976, 0.0, 100.0};
    Trajectory a = integrate(hs, 40.0, p);
    Trajectory b = integrate(hs, 40.0, p, ramp);
    CHECK(a.h == b.h);
}

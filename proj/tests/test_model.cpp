#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "toribif/integrate.hpp"
#include "toribif/model.hpp"
#include "toribif/trajectory.hpp"

using namespace toribif;

TEST_CASE("rhs elementary values") {
    ModelParams p{1.0, 11.0, 2.976, 0.9395};
    CHECK(rhs(0.0, 0.0, p) == doctest::Approx(2.976).epsilon(1e-15));
    // tanh saturates, cos(pi/2) vanishes
    p.c = 1.7;
    CHECK(rhs(0.25, 10.0, p) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("rhs half-period sign symmetry") {
    ModelParams p{1.0, 11.0, 2.976, 0.9395};
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> ut(-5.0, 5.0), ux(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const double t = ut(rng), x = ux(rng);
        CHECK(rhs(t + 0.5, -x, p) == doctest::Approx(-rhs(t, x, p)).epsilon(1e-11));
    }
}

TEST_CASE("rhs is bounded by b + c") {
    ModelParams p{1.0, 11.0, 2.976, 0.9395};
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ut(-100.0, 100.0), ux(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i)
        CHECK(std::fabs(rhs(ut(rng), ux(rng), p)) <= p.b + p.c + 1e-14);
}

TEST_CASE("rhs_linearized values and range") {
    ModelParams p{1.0, 11.0, 0.0, 0.9395};
    CHECK(rhs_linearized(0.0, p) == doctest::Approx(-11.0).epsilon(1e-15));
    CHECK(std::fabs(rhs_linearized(10.0, p)) < 1e-12);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ux(-20.0, 20.0);
    for (int i = 0; i < 1000; ++i) {
        const double v = rhs_linearized(ux(rng), p);
        CHECK(v <= 0.0);
        CHECK(v >= -p.b * p.kappa);
    }
}

TEST_CASE("rhs_linearized against central differences") {
    // independent oracle: (rhs(t, x+d) - rhs(t, x-d)) / (2 d)
    ModelParams p{1.0, 11.0, 2.976, 0.9395};
    const double d = 1e-5;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ut(-2.0, 2.0), ux(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double t = ut(rng), x = ux(rng);
        const double fd = (rhs(t, x + d, p) - rhs(t, x - d, p)) / (2.0 * d);
        // third derivative of tanh bounds the central-difference error by
        // b*kappa^3*d^2/3 ~ 4e-8 here
        CHECK(std::fabs(rhs_linearized(x, p) - fd) < 1e-6);
    }
}

TEST_CASE("params validation") {
    ModelParams p;
    p.tau = -1.0;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
    p = ModelParams{};
    p.kappa = 0.0;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
    p = ModelParams{};
    p.b = -0.5;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
}

TEST_CASE("apply_symmetry fixed point and involution") {
    Trajectory traj;
    traj.t_start = 0.0;
    traj.dt = 0.00125;  // divides 1/2
    traj.n_history = 400;
    const size_t n = 2000;
    traj.h.resize(n);
    traj.hdot.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const double t = traj.t_start + traj.dt * static_cast<double>(i);
        traj.h[i] = std::sin(two_pi * t) + 0.3 * std::cos(2 * two_pi * t);
        traj.hdot[i] = two_pi * std::cos(two_pi * t) - 0.6 * two_pi * std::sin(2 * two_pi * t);
    }

    SUBCASE("zero trajectory is fixed") {
        std::fill(traj.h.begin(), traj.h.end(), 0.0);
        std::fill(traj.hdot.begin(), traj.hdot.end(), 0.0);
        const Trajectory s = apply_symmetry(traj);
        for (double v : s.h) CHECK(v == 0.0);
    }

    SUBCASE("applying twice restores the common domain exactly") {
        const Trajectory ss = apply_symmetry(apply_symmetry(traj));
        REQUIRE(ss.h.size() == n - 800);
        for (size_t i = 0; i < ss.h.size(); ++i) {
            CHECK(ss.h[i] == traj.h[i + 800]);
            CHECK(ss.hdot[i] == traj.hdot[i + 800]);
        }
        // same function, time labels shifted one full period back
        CHECK(ss.t_start == traj.t_start);
    }

    SUBCASE("misaligned grid is rejected") {
        traj.dt = 0.9395 / 940;  // does not divide 1/2
        CHECK_THROWS_AS(apply_symmetry(traj), AlignmentError);
    }
}

TEST_CASE("symmetry image of a solution solves the model") {
    // tau = 0.9395 with dt = tau/1879 makes the grid resolve both the delay
    // and the half-period shift.
    ModelParams p{1.0, 11.0, 2.976, 0.9395};
    HistorySegment hist = make_sinusoid_history(0.4, p.tau, 5.0e-4);
    Trajectory traj = integrate(hist, 12.5, p);
    Trajectory img = apply_symmetry(traj);
    // residual of the model on the image, past the initial history
    const int N = img.n_history;
    double worst = 0.0;
    for (size_t i = static_cast<size_t>(N); i < img.h.size(); ++i) {
        const double t = img.t_start + img.dt * static_cast<double>(i);
        const double r = img.hdot[i] - rhs(t, img.h[i - static_cast<size_t>(N)], p);
        worst = std::max(worst, std::fabs(r));
    }
    CHECK(worst < 1e-8);
}

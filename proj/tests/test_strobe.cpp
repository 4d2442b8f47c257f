#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "toribif/strobe.hpp"

using namespace toribif;

namespace {

// synthetic trace: rotation by angle on a circle of radius r
StroboscopicTrace rotation_trace(double angle, int n, double r = 1.0, double phase = 0.3) {
    StroboscopicTrace tr;
    tr.t_first = 1.0;
    for (int i = 0; i < n; ++i)
        tr.points.push_back({r * std::cos(phase + angle * i), r * std::sin(phase + angle * i)});
    return tr;
}

} // namespace

TEST_CASE("classify needs enough points") {
    ClassifyOptions opt;
    StroboscopicTrace tr = rotation_trace(0.1, 4 * opt.q_max - 1);
    CHECK_THROWS_AS(classify(tr, opt), PreconditionError);
}

TEST_CASE("constant trace locks with period one") {
    StroboscopicTrace tr;
    for (int i = 0; i < 300; ++i) tr.points.push_back({0.7, 0.4});
    const AttractorClass cls = classify(tr);
    CHECK(cls.kind == AttractorClass::Kind::locked);
    CHECK(cls.q == 1);
    CHECK(cls.p == 0);
    CHECK(cls.max_h == doctest::Approx(0.7));
}

TEST_CASE("rational rotation locks at the denominator") {
    const AttractorClass cls = classify(rotation_trace(two_pi * 5.0 / 17.0, 300));
    CHECK(cls.kind == AttractorClass::Kind::locked);
    CHECK(cls.q == 17);
    CHECK(cls.p == 5);  // five cyclic maxima of cos(2 pi 5 k / 17)
}

TEST_CASE("irrational rotation fills a closed curve") {
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    const AttractorClass cls = classify(rotation_trace(two_pi * golden, 400));
    CHECK(cls.kind == AttractorClass::Kind::quasiperiodic);
}

TEST_CASE("classification is invariant under cyclic rotation of the trace") {
    StroboscopicTrace tr = rotation_trace(two_pi * 2.0 / 7.0, 280);
    const AttractorClass a = classify(tr);
    std::rotate(tr.points.begin(), tr.points.begin() + 13, tr.points.end());
    const AttractorClass b = classify(tr);
    CHECK(a.kind == b.kind);
    CHECK(a.q == b.q);
    CHECK(a.p == b.p);
}

TEST_CASE("locked classification respects minimality of q") {
    // period 3 is also period 6; the smallest q wins
    const AttractorClass cls = classify(rotation_trace(two_pi / 3.0, 280));
    CHECK(cls.q == 3);
}

TEST_CASE("strobe picks integer times past the transient") {
    ModelParams p{1.0, 11.0, 0.0, 0.9395};
    HistorySegment hs = make_sinusoid_history(0.5, p.tau, 1e-3);
    Trajectory traj = integrate(hs, 20.0, p);
    const StroboscopicTrace tr = strobe(traj, 5.0);
    CHECK(tr.t_first == 6.0);
    CHECK(tr.points.size() == 15);
    CHECK_THROWS_AS(strobe(traj, 19.5), PreconditionError);
}

TEST_CASE("period-1 solution gives a single headpoint accumulation") {
    // with b=0 the exact solution is 1-periodic after any integer shift
    ModelParams p{0.0, 11.0, 1.5, 0.9395};
    HistorySegment hs = make_constant_history(0.2, p.tau, 1e-3);
    Trajectory traj = integrate(hs, 400.0, p);
    const StroboscopicTrace tr = strobe(traj, 60.0);
    for (size_t i = 1; i < tr.points.size(); ++i) {
        CHECK(std::fabs(tr.points[i][0] - tr.points[0][0]) < 1e-6);
        CHECK(std::fabs(tr.points[i][1] - tr.points[0][1]) < 1e-6);
    }
    ClassifyOptions co;
    co.q_max = 32;
    const AttractorClass cls = classify(tr, co);
    CHECK(cls.kind == AttractorClass::Kind::locked);
    CHECK(cls.q == 1);
}

TEST_CASE("sweep with a single step equals one integrate-and-classify") {
    SweepOptions so;
    so.transient = 80.0;
    so.window = 140.0;
    so.classify.q_max = 32;
    const double tau = 0.9395, c = 2.4;
    const auto col = sweep_column(tau, c, c, 1, so);
    REQUIRE(col.size() == 1);

    HistorySegment h = make_constant_history(so.seed_value, tau, so.dt);
    ModelParams p{so.b, so.kappa, c, tau};
    Trajectory t1 = integrate(h, h.t0 + so.transient, p);
    Trajectory t2 = integrate(history_from_trajectory_tail(t1), so.transient + so.window, p);
    const AttractorClass cls = classify(strobe(t2, 0.0), so.classify);
    CHECK(col[0].cls.kind == cls.kind);
    CHECK(col[0].cls.q == cls.q);
    CHECK(col[0].cls.max_h == doctest::Approx(t2.max_h_from(t2.t0())).epsilon(1e-12));
}

TEST_CASE("max_h never decreases as the trace grows") {
    StroboscopicTrace tr = rotation_trace(two_pi * 0.23, 600);
    ClassifyOptions co;
    co.q_max = 32;
    double prev = 0.0;
    for (int n : {150, 300, 450, 600}) {
        StroboscopicTrace head;
        head.points.assign(tr.points.begin(), tr.points.begin() + n);
        const AttractorClass cls = classify(head, co);
        CHECK(cls.max_h >= prev);
        prev = cls.max_h;
    }
}

TEST_CASE("degenerate 1x1 max map equals a single sweep step") {
    SweepOptions so;
    so.transient = 60.0;
    so.window = 130.0;
    so.classify.q_max = 32;
    MaxMapGrid grid{0.9395, 0.9395, 1, 2.4, 2.4, 1};
    const MaxMap m = max_map(grid, MaxMap::Direction::up, so);
    REQUIRE(m.cells.size() == 1);
    const auto col = sweep_column(0.9395, 2.4, 2.4, 1, so);
    CHECK(m.cells[0].cls.max_h == doctest::Approx(col[0].cls.max_h).epsilon(1e-12));
    CHECK(m.cells[0].cls.kind == col[0].cls.kind);
}

TEST_CASE("power spectrum peaks at the drive frequency") {
    Trajectory traj;
    traj.t_start = 0.0;
    traj.dt = 0.01;
    traj.n_history = 0;
    const size_t n = 60000;
    for (size_t i = 0; i < n; ++i) {
        const double t = traj.dt * static_cast<double>(i);
        traj.h.push_back(std::sin(two_pi * 0.3 * t));
        traj.hdot.push_back(two_pi * 0.3 * std::cos(two_pi * 0.3 * t));
    }
    const auto spec = power_spectrum(traj, 500.0);
    double best_f = 0.0, best_p = -1e308;
    for (const auto& row : spec)
        if (row[0] > 0.01 && row[1] > best_p) { best_p = row[1]; best_f = row[0]; }
    CHECK(std::fabs(best_f - 0.3) <= 1.0 / 500.0 + 1e-12);
    CHECK_THROWS_AS(power_spectrum(traj, 1e6), PreconditionError);
}

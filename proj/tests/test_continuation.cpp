#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "toribif/bubble.hpp"
#include "toribif/continuation.hpp"

using namespace toribif;

namespace {

const PeriodicOrbit& anchor_orbit() {
    static const PeriodicOrbit orb = bootstrap_locked_orbit(0.9530, 2.958, 2.9850, 7, 7);
    return orb;
}

} // namespace

TEST_CASE("test functions read the spectrum") {
    FloquetSpectrum s;
    s.mu_tol = 1e-6;
    s.multipliers = {{1.2, 0.0}, {0.9, 0.1}, {0.9, -0.1}, {0.82, 0.0}, {-0.4, 0.0}};
    CHECK(*event_test_value(EventKind::SN, s) == doctest::Approx(0.2));
    CHECK(*event_test_value(EventKind::PD, s) == doctest::Approx(-0.6));
    CHECK(*event_test_value(EventKind::T, s) ==
          doctest::Approx(std::hypot(0.9, 0.1) - 1.0));
    CHECK(*event_test_value(EventKind::NP, s) == doctest::Approx(1.2 * 0.82 - 1.0));
    s.multipliers = {{0.9, 0.1}, {0.9, -0.1}};
    CHECK(!event_test_value(EventKind::SN, s).has_value());
    CHECK(!event_test_value(EventKind::NP, s).has_value());
}

TEST_CASE("short branch with no sign change reports zero events") {
    ContinuationOptions co;
    co.max_points = 25;
    const Branch br = continue_branch(anchor_orbit(), ActiveParam::c, 2.9800, 2.9860, co);
    CHECK(br.events.empty());
    CHECK(br.points.size() >= 2);
    for (const auto& bp : br.points) CHECK(bp.orbit.residual_norm < 1e-10);
}

TEST_CASE("tongue crossing: folds carry certificates and the branch closes") {
    ContinuationOptions co;
    co.max_points = 400;
    const Branch br = continue_branch(anchor_orbit(), ActiveParam::c, 2.960, 3.010, co);

    int n_sn = 0;
    for (const auto& ev : br.events) {
        if (ev.kind != EventKind::SN) continue;
        ++n_sn;
        CHECK(ev.test_value < 1e-8);
        // certificate: a real multiplier sits on +1
        double best = 1e308;
        for (const auto& mu : ev.multipliers)
            if (std::fabs(mu.imag()) < 1e-6) best = std::min(best, std::fabs(mu.real() - 1.0));
        CHECK(best < 1e-6);
    }
    CHECK(n_sn >= 2);
    CHECK(br.termination == "closed_loop");

    // the parameter is non-monotone along the branch (it folds back)
    double lo = 1e308, hi = -1e308;
    for (const auto& bp : br.points) { lo = std::min(lo, bp.param); hi = std::max(hi, bp.param); }
    CHECK(br.points.front().param - lo > 1e-4);
    CHECK(hi - br.points.front().param > 1e-4);

    // both stability classes are visited
    bool saw_stable = false, saw_saddle = false;
    for (const auto& bp : br.points) {
        saw_stable |= bp.spec.cls == FloquetSpectrum::Class::stable;
        saw_saddle |= bp.spec.cls == FloquetSpectrum::Class::saddle1;
    }
    CHECK(saw_stable);
    CHECK(saw_saddle);

    SUBCASE("reverse continuation from the far end finds the same fold") {
        const BifurcationEvent* sn = nullptr;
        for (const auto& ev : br.events)
            if (ev.kind == EventKind::SN && (!sn || ev.c > sn->c)) sn = &ev;
        REQUIRE(sn);
        // restart on the saddle side just past the fold and come back
        const BranchPoint* restart = nullptr;
        for (const auto& bp : br.points)
            if (bp.spec.cls == FloquetSpectrum::Class::saddle1 &&
                (!restart || std::fabs(bp.param - sn->c) < std::fabs(restart->param - sn->c)))
                restart = &bp;
        REQUIRE(restart);
        ContinuationOptions co2;
        co2.max_points = 60;
        co2.initial_direction = +1;
        Branch back = continue_branch(restart->orbit, ActiveParam::c, 2.960, 3.010, co2);
        const BifurcationEvent* sn2 = nullptr;
        for (const auto& ev : back.events)
            if (ev.kind == EventKind::SN && (!sn2 || std::fabs(ev.c - sn->c) < std::fabs(sn2->c - sn->c)))
                sn2 = &ev;
        if (!sn2) {
            co2.initial_direction = -1;
            back = continue_branch(restart->orbit, ActiveParam::c, 2.960, 3.010, co2);
            for (const auto& ev : back.events)
                if (ev.kind == EventKind::SN &&
                    (!sn2 || std::fabs(ev.c - sn->c) < std::fabs(sn2->c - sn->c)))
                    sn2 = &ev;
        }
        REQUIRE(sn2);
        CHECK(std::fabs(sn2->c - sn->c) < 1e-6);
    }

    SUBCASE("the symmetry-image branch sees the folds at the same parameters") {
        PeriodicOrbit img = solve_orbit(orbit_symmetry_image(anchor_orbit()));
        ContinuationOptions co2;
        co2.max_points = 400;
        const Branch ibr = continue_branch(img, ActiveParam::c, 2.960, 3.010, co2);
        auto sn_params = [](const Branch& b) {
            std::vector<double> v;
            for (const auto& ev : b.events)
                if (ev.kind == EventKind::SN) v.push_back(ev.c);
            std::sort(v.begin(), v.end());
            return v;
        };
        const auto a = sn_params(br), bvals = sn_params(ibr);
        REQUIRE(a.size() >= 2);
        REQUIRE(bvals.size() >= 2);
        CHECK(std::fabs(a.front() - bvals.front()) < 1e-6);
        CHECK(std::fabs(a.back() - bvals.back()) < 1e-6);
    }
}

TEST_CASE("precondition failures are reported") {
    CHECK_THROWS_AS(continue_branch(anchor_orbit(), ActiveParam::c, 3.1, 3.2, {}),
                    PreconditionError);
    PeriodicOrbit bad = anchor_orbit();
    bad.u.setZero();
    bad.residual_norm = 1e308;
    CHECK_THROWS_AS(continue_branch(bad, ActiveParam::c, 2.9, 3.0, {}), Error);
}

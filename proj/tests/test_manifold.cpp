#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "toribif/manifold.hpp"
#include "toribif/transitions.hpp"

using namespace toribif;

namespace {

DestinationContext ring_context() {
    DestinationContext ctx;
    for (int k = 0; k < 7; ++k) {
        const double a = two_pi * k / 7.0;
        ctx.stable_points.push_back({std::cos(a), std::sin(a)});
        ctx.saddle_points.push_back({std::cos(a + 0.45), std::sin(a + 0.45)});
    }
    ctx.partner_saddle_points = ctx.saddle_points;
    ctx.ring_centroid = {0.0, 0.0};
    return ctx;
}

} // namespace

TEST_CASE("label_tail: spiral into a stable point") {
    const DestinationContext ctx = ring_context();
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < 100; ++i) {
        const double r = 0.4 * std::pow(0.93, i);
        pts.push_back({1.0 + r * std::cos(0.9 * i), r * std::sin(0.9 * i)});
    }
    CHECK(label_tail(pts, ctx) == Destination::attracting_point);
}

TEST_CASE("label_tail: converged onto a stable point") {
    const DestinationContext ctx = ring_context();
    std::vector<std::array<double, 2>> pts(80, {1.0 + 2e-5, -3e-5});
    CHECK(label_tail(pts, ctx) == Destination::attracting_point);
}

TEST_CASE("label_tail: rotational curve around the ring") {
    const DestinationContext ctx = ring_context();
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < 120; ++i) {
        const double a = 2.39996 * i;  // irrational-ish rotation fills the circle
        pts.push_back({0.55 * std::cos(a), 0.55 * std::sin(a)});
    }
    CHECK(label_tail(pts, ctx) == Destination::rotational_curve);
}

TEST_CASE("label_tail: contractible curve around one point") {
    const DestinationContext ctx = ring_context();
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < 120; ++i) {
        const double a = 2.39996 * i;
        pts.push_back({1.0 + 0.05 * std::cos(a), 0.05 * std::sin(a)});
    }
    CHECK(label_tail(pts, ctx) == Destination::contractible_curve);
}

TEST_CASE("label_tail: re-entering a saddle ball") {
    const DestinationContext ctx = ring_context();
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < 90; ++i) pts.push_back({0.2 + 0.01 * i, 0.0});
    pts[70] = {std::cos(0.45) + 1e-5, std::sin(0.45)};
    CHECK(label_tail(pts, ctx) == Destination::saddle_neighborhood);
}

TEST_CASE("classify_destinations: uniform vs mixed") {
    ManifoldTrace tr;
    tr.iterates.assign(4, std::vector<std::array<double, 2>>(60, {0.0, 0.0}));
    tr.destinations = {Destination::attracting_point, Destination::attracting_point,
                       Destination::attracting_point, Destination::attracting_point};
    const DestinationSummary u = classify_destinations(tr);
    CHECK(u.uniform);
    CHECK(u.label == Destination::attracting_point);

    tr.destinations[2] = Destination::rotational_curve;
    const DestinationSummary m = classify_destinations(tr);
    CHECK_FALSE(m.uniform);
    CHECK(m.histogram.size() == 2);

    tr.iterates.assign(4, std::vector<std::array<double, 2>>(20, {0.0, 0.0}));
    CHECK_THROWS_AS(classify_destinations(tr), PreconditionError);
}

TEST_CASE("trace_locus records gaps and refines endpoints") {
    // mock transition present only for slice values below 0.35
    auto locate_at = [](double s) -> std::optional<TransitionPoint> {
        if (s >= 0.35) return std::nullopt;
        TransitionPoint pt;
        pt.kind = TransitionKind::HeC;
        pt.tau = s;
        pt.c = 2.0 + s;
        pt.bracket_lo = 2.0 + s - 5e-5;
        pt.bracket_hi = 2.0 + s + 5e-5;
        return pt;
    };
    const std::vector<double> slices{0.1, 0.2, 0.3, 0.4, 0.5};
    const TransitionLocus locus = trace_locus(TransitionKind::HeC, slices, locate_at, 1e-3, 2);
    REQUIRE(locus.points.size() >= 4);
    CHECK(locus.gaps.size() == 2);  // 0.4 and 0.5 have no bracket
    // endpoint refinement walked towards 0.35
    CHECK(locus.slice_values.back() > 0.34);
    CHECK(locus.slice_values.back() < 0.35);
    for (size_t i = 1; i < locus.slice_values.size(); ++i)
        CHECK(locus.slice_values[i] >= locus.slice_values[i - 1]);
}

TEST_CASE("drift event times satisfy the ramp identity") {
    ModelParams p{1.0, 11.0, 2.96, 0.9395};
    RampSpec ramp{2.96, 3.01, 0.0, 100.0};
    HistorySegment h = make_constant_history(0.1, p.tau, 1e-3);
    const DriftResult dr = drift_run(p, ramp, h, 100.0, {{"A", 2.97}, {"B", 3.0}});
    REQUIRE(dr.event_times.size() == 2);
    CHECK(dr.event_times[0].second ==
          doctest::Approx(100.0 * (2.97 - 2.96) / 0.05).epsilon(1e-14));
    CHECK(dr.event_times[1].second == doctest::Approx(100.0 * (3.0 - 2.96) / 0.05).epsilon(1e-14));
    CHECK(dr.year_max.size() == 100);
    for (const auto& ym : dr.year_max) CHECK(ym[1] >= 0.0);
}

TEST_CASE("collapse_time finds a synthetic amplitude drop") {
    DriftResult dr;
    for (int y = 1; y <= 2000; ++y)
        dr.year_max.push_back({static_cast<double>(y), y < 1450 ? 2.4 + 0.05 * std::sin(0.3 * y) : 1.2});
    const double t = collapse_time(dr);
    CHECK(t == doctest::Approx(1450.0).epsilon(2e-3));

    DriftResult flat;
    for (int y = 1; y <= 2000; ++y) flat.year_max.push_back({static_cast<double>(y), 2.0});
    CHECK(std::isnan(collapse_time(flat)));
}

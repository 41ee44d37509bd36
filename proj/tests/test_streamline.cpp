#include "doctest.h"

#include "ridgeflow/eigen.hpp"
#include "ridgeflow/errors.hpp"
#include "ridgeflow/geometry.hpp"
#include "ridgeflow/grid.hpp"
#include "ridgeflow/infinity.hpp"
#include "ridgeflow/streamline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace ridgeflow;

namespace {

Polygon unit_square() {
    Polygon p;
    REQUIRE(builtin_polygon("square", p));
    return p;
}

Polygon rect_2x1() {
    Polygon p;
    REQUIRE(builtin_polygon("rectangle", p));
    return p;
}

const GroundLimit& square_limit_32() {
    static GroundLimit limit = [] {
        Polygon sq = unit_square();
        auto g = rasterize(sq, 1.0 / 32);
        LadderConfig cfg;
        cfg.p_list = {2, 4, 8};
        auto states = continuation_solve(g, cfg);
        return extract_ground_limit(states, chebyshev_set(sq));
    }();
    return limit;
}

const GroundLimit& rect_limit_32() {
    static GroundLimit limit = [] {
        Polygon rc = rect_2x1();
        auto g = rasterize(rc, 1.0 / 32);
        LadderConfig cfg;
        cfg.p_list = {2, 4, 8};
        auto states = continuation_solve(g, cfg);
        return extract_ground_limit(states, chebyshev_set(rc));
    }();
    return limit;
}

TraceConfig config_for(const Polygon& poly) {
    TraceConfig cfg;
    cfg.ridge = chebyshev_set(poly);
    return cfg;
}

// Radial cone peaked at the square's center, linear in the distance.
ScalarField cone_field(std::shared_ptr<const GridSpec> g) {
    ScalarField f = make_field(g, FieldLabel::u, 0.0, 0.0);
    Vec2 c{0.5, 0.5};
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) f.at(i, j) = 1.0 - 2.0 * dist(g->node(i, j), c);
    return f;
}

void check_trace_invariants(const Streamline& s, const Polygon& poly, const TraceConfig& cfg) {
    REQUIRE(s.points.size() >= 1);
    REQUIRE(s.points.size() == s.params.size());
    REQUIRE(s.points.size() == s.speeds.size());
    REQUIRE(s.points.size() == s.values.size());
    double bound = 2.0 * cfg.step_factor * s.h + 1e-12;
    for (size_t i = 0; i < s.points.size(); ++i) {
        CHECK(contains(poly, s.points[i], 1e-12));
        if (i > 0) {
            CHECK(s.values[i] > s.values[i - 1]);    // strict increase
            CHECK(s.params[i] > s.params[i - 1]);    // strictly advancing parameter
            CHECK(dist(s.points[i], s.points[i - 1]) <= bound);
        }
    }
    double len = 0.0;
    for (size_t i = 1; i < s.points.size(); ++i) len += dist(s.points[i], s.points[i - 1]);
    CHECK(s.arc_length == doctest::Approx(len).epsilon(1e-10));
}

Streamline polyline_as_streamline(const std::vector<Vec2>& pts, double h) {
    Streamline s;
    s.h = h;
    s.points = pts;
    double t = 0.0, v = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        if (i > 0) t += dist(pts[i], pts[i - 1]);
        v += 1.0;
        s.params.push_back(t);
        s.values.push_back(v);
        s.speeds.push_back(1.0);
    }
    return s;
}

} // namespace

TEST_CASE("trace follows a radial cone straight to the ridge") {
    Polygon sq = unit_square();
    auto g = rasterize(sq, 1.0 / 32);
    ScalarField f = cone_field(g);
    TraceConfig cfg = config_for(sq);

    Vec2 seed{0.75, 0.25};
    Streamline s = trace(f, seed, cfg);
    check_trace_invariants(s, sq, cfg);
    CHECK(s.termination == Termination::ReachedRidge);
    CHECK(s.h == doctest::Approx(1.0 / 32));
    // The path is a straight ray toward the center.
    Vec2 c{0.5, 0.5};
    for (const Vec2& p : s.points) CHECK(point_segment_distance(p, seed, c) < 2.0 / 32);
    CHECK(dist(s.points.back(), c) <= 1.0 / 32 + 1e-12);
    // Values interpolate the cone away from the apex kink, where the bilinear
    // reconstruction of the discrete cone is only O(h) accurate.
    for (size_t i = 0; i < s.points.size(); ++i) {
        double d = dist(s.points[i], c);
        if (d < 3.0 / 32) continue;
        CHECK(s.values[i] == doctest::Approx(1.0 - 2.0 * d).epsilon(5e-3));
    }
}

TEST_CASE("trace rejects bad starts") {
    Polygon sq = unit_square();
    auto g = rasterize(sq, 1.0 / 32);
    ScalarField f = cone_field(g);
    TraceConfig cfg = config_for(sq);

    CHECK_THROWS_WITH_AS(trace(f, {1.5, 0.5}, cfg), doctest::Contains("StartOutside"),
                         error);
    CHECK_THROWS_WITH_AS(trace(f, {0.5 + 0.5 / 32, 0.5}, cfg), doctest::Contains("StartOnRidge"),
                         error);
}

TEST_CASE("trace flags a domain exit as a defect") {
    Polygon sq = unit_square();
    auto g = rasterize(sq, 1.0 / 32);
    // Linear field increasing to the right with a matching boundary datum, so
    // the interpolated value keeps rising all the way to the side and the
    // streamlines push through it.
    ScalarField f = make_field(g, FieldLabel::u, 0.0, 1.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) f.at(i, j) = g->node(i, j).x;
    TraceConfig cfg = config_for(sq);

    Streamline s = trace(f, {0.6, 0.25}, cfg);
    CHECK(s.termination == Termination::LeftDomain);
    CHECK(s.left_domain_defect);
    CHECK(s.points.back().x > 0.97);
}

TEST_CASE("trace stops at the speed floor on a plateau") {
    Polygon sq = unit_square();
    auto g = rasterize(sq, 1.0 / 32);
    ScalarField f = make_field(g, FieldLabel::v, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) f.at(i, j) = std::min(g->node(i, j).x, 0.3);
    TraceConfig cfg = config_for(sq);

    Streamline s = trace(f, {0.1, 0.75}, cfg);
    CHECK(s.termination == Termination::SpeedFloor);
    CHECK(s.points.back().x > 0.25);
    CHECK(s.points.back().x < 0.45);
}

TEST_CASE("trace respects the step budget") {
    Polygon sq = unit_square();
    auto g = rasterize(sq, 1.0 / 32);
    ScalarField f = cone_field(g);
    TraceConfig cfg = config_for(sq);
    cfg.max_steps = 5;

    Streamline s = trace(f, {0.75, 0.25}, cfg);
    CHECK(s.termination == Termination::MaxSteps);
    CHECK(s.points.size() == 6);
}

TEST_CASE("square medians run straight from the side maxima to the center") {
    const GroundLimit& limit = square_limit_32();
    Polygon sq = unit_square();
    TraceConfig cfg = config_for(sq);
    const double h = 1.0 / 32;
    Vec2 mids[4] = {{0.5, 0.0}, {1.0, 0.5}, {0.5, 1.0}, {0.0, 0.5}};

    for (int k = 0; k < 4; ++k) {
        CAPTURE(k);
        MedianResult r = median(limit, sq, k, cfg);
        CHECK(!r.side_max.non_unimodal);
        CHECK(dist(r.side_max.point, mids[k]) <= 2.0 * h);
        check_trace_invariants(r.line, sq, cfg);
        CHECK(r.line.termination == Termination::ReachedRidge);
        CHECK(r.pass);
        CHECK(r.straightness <= 3.0 * h);
        CHECK(dist(r.line.points.back(), {0.5, 0.5}) <= h + 1e-12);
        CHECK(r.line.seed.kind == SeedInfo::Kind::SidePoint);
        CHECK(r.line.seed.index == k);
    }
}

TEST_CASE("attracting streamlines of the square ride the diagonals") {
    const GroundLimit& limit = square_limit_32();
    Polygon sq = unit_square();
    TraceConfig cfg = config_for(sq);
    const double h = 1.0 / 32;
    Vec2 c{0.5, 0.5};

    for (int j = 0; j < 4; ++j) {
        CAPTURE(j);
        Streamline s = attracting_streamline(limit, sq, j, cfg);
        check_trace_invariants(s, sq, cfg);
        CHECK(s.termination == Termination::ReachedRidge);
        CHECK(s.seed.kind == SeedInfo::Kind::Corner);
        CHECK(s.seed.index == j);
        CHECK(s.field_label == FieldLabel::v);
        // One-sided Hausdorff distance to the corner-to-center diagonal.
        Vec2 corner = sq.vertex(j);
        for (const Vec2& p : s.points) CHECK(point_segment_distance(p, corner, c) <= 3.0 * h);
        // Log-field speed never rises along the way down the funnel.
        SpeedReport rep = speed_profile_checks(s, {}, 0.0, s.params.back());
        CHECK(rep.v_monotone_applicable);
        CHECK(rep.v_monotone_pass);
    }
}

TEST_CASE("the rectangle corner streamline follows the bisector to the ridge end") {
    const GroundLimit& limit = rect_limit_32();
    Polygon rc = rect_2x1();
    TraceConfig cfg = config_for(rc);
    const double h = 1.0 / 32;

    Streamline s = attracting_streamline(limit, rc, 0, cfg);
    check_trace_invariants(s, rc, cfg);
    CHECK(s.termination == Termination::ReachedRidge);
    for (const Vec2& p : s.points)
        CHECK(point_segment_distance(p, {0.0, 0.0}, {0.5, 0.5}) <= 3.0 * h);
    CHECK(dist(s.points.back(), {0.5, 0.5}) <= 2.0 * h);
}

TEST_CASE("the four corner streamlines meet only near the center") {
    const GroundLimit& limit = square_limit_32();
    Polygon sq = unit_square();
    TraceConfig cfg = config_for(sq);
    const double h = 1.0 / 32;
    Vec2 c{0.5, 0.5};

    std::vector<Streamline> gammas;
    for (int j = 0; j < 4; ++j) gammas.push_back(attracting_streamline(limit, sq, j, cfg));

    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            CAPTURE(a);
            CAPTURE(b);
            JoinResult jr = join_detection(gammas[a], gammas[b], 2.0 * h);
            REQUIRE(jr.met);
            CHECK(dist(jr.point, c) <= 4.0 * h);
            CHECK(dist(gammas[a].points[jr.index_a], c) <= 4.0 * h);
            CHECK(!jr.crossing_defect);
        }
}

TEST_CASE("join detection: separated parallel curves never meet") {
    Polygon sq = unit_square();
    auto g = rasterize(sq, 1.0 / 32);
    ScalarField f = make_field(g, FieldLabel::v, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) f.at(i, j) = g->node(i, j).y;
    TraceConfig cfg = config_for(sq);

    Streamline a = trace(f, {0.25, 0.1}, cfg);
    Streamline b = trace(f, {0.75, 0.1}, cfg);
    JoinResult jr = join_detection(a, b, 2.0 / 32);
    CHECK(!jr.met);
}

TEST_CASE("join detection flags a transversal crossing and accepts a merge") {
    const double h = 1.0 / 32;
    // b: vertical segment x = 0.5.
    std::vector<Vec2> bpts;
    for (int i = 0; i <= 20; ++i) bpts.push_back({0.5, 0.05 * i});
    Streamline b = polyline_as_streamline(bpts, h);

    // a1 crosses b left to right.
    std::vector<Vec2> a1pts;
    for (int i = 0; i <= 20; ++i) a1pts.push_back({0.05 * i, 0.5});
    Streamline a1 = polyline_as_streamline(a1pts, h);
    JoinResult j1 = join_detection(a1, b, 2.0 * h);
    REQUIRE(j1.met);
    CHECK(j1.crossing_defect);
    CHECK(dist(j1.point, {0.5, 0.5}) <= 2.0 * h + 1e-12);

    // a2 bends onto b and rides it upward: a join, not a crossing.
    std::vector<Vec2> a2pts;
    for (int i = 0; i <= 10; ++i) a2pts.push_back({0.05 * i, 0.5});
    for (int i = 1; i <= 8; ++i) a2pts.push_back({0.5, 0.5 + 0.05 * i});
    Streamline a2 = polyline_as_streamline(a2pts, h);
    JoinResult j2 = join_detection(a2, b, 2.0 * h);
    REQUIRE(j2.met);
    CHECK(!j2.crossing_defect);

    // The meet parameter on a1 is where it comes within reach of b.
    CHECK(j1.param_a == doctest::Approx(a1.params[j1.index_a]));
}

TEST_CASE("side maxima sit at the side midpoints of the rectangle") {
    const GroundLimit& limit = rect_limit_32();
    Polygon rc = rect_2x1();
    const double h = 1.0 / 32;

    SideMax long_side = find_side_max(limit, rc, 0);
    CHECK(dist(long_side.point, {1.0, 0.0}) <= 2.0 * h);
    CHECK(long_side.speed > 1.0);

    SideMax short_side = find_side_max(limit, rc, 1);
    CHECK(dist(short_side.point, {2.0, 0.5}) <= 2.0 * h);

    CHECK_THROWS_WITH_AS(find_side_max(limit, rc, 7), doctest::Contains("IndexOutOfRange"),
                         error);
}

TEST_CASE("side max flags a two-humped gradient profile") {
    Polygon sq = unit_square();
    auto g = rasterize(sq, 1.0 / 32);
    ScalarField u = make_field(g, FieldLabel::u, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) {
                Vec2 p = g->node(i, j);
                double humps = std::exp(-50.0 * (p.x - 0.3) * (p.x - 0.3)) +
                               std::exp(-50.0 * (p.x - 0.7) * (p.x - 0.7));
                u.at(i, j) = p.y * (1.0 - p.y) * humps;
            }
    GroundLimit synthetic;
    synthetic.u = u;
    synthetic.v = u; // unused here
    synthetic.p_used = 8;

    SideMax sm = find_side_max(synthetic, sq, 0);
    CHECK(sm.non_unimodal);
    bool near_a_hump = dist(sm.point, {0.3, 0.0}) <= 3.0 / 32 || dist(sm.point, {0.7, 0.0}) <= 3.0 / 32;
    CHECK(near_a_hump);
}

TEST_CASE("each level is crossed exactly once along a median") {
    const GroundLimit& limit = square_limit_32();
    Polygon sq = unit_square();
    TraceConfig cfg = config_for(sq);

    MedianResult r = median(limit, sq, 0, cfg);
    LevelCrossingReport rep = level_crossing_check(r.line, {0.25, 0.5, 0.75});
    REQUIRE(rep.counts.size() == 3);
    CHECK(rep.counts[0] == 1);
    CHECK(rep.counts[1] == 1);
    CHECK(rep.counts[2] == 1);
    CHECK(rep.pass);

    // Levels outside the traced value range are allowed to go uncrossed.
    LevelCrossingReport outside = level_crossing_check(r.line, {1e-4, 0.999});
    CHECK(outside.counts[0] == 0);
    CHECK(outside.counts[1] == 0);
    CHECK(outside.pass);
}

TEST_CASE("nearby seeds stay within five percent of their initial distance") {
    const GroundLimit& limit = square_limit_32();
    Polygon sq = unit_square();
    TraceConfig cfg = config_for(sq);

    StabilityReport rep = stability_check(limit.v, {0.3, 0.1}, {0.32, 0.1}, 0.05, cfg);
    CHECK(rep.seed_distance == doctest::Approx(0.02));
    CHECK(rep.pass);
    CHECK(rep.worst_ratio <= 1.05);

    StabilityReport same = stability_check(limit.v, {0.3, 0.1}, {0.3, 0.1}, 0.05, cfg);
    CHECK(same.seed_distance == 0.0);
    CHECK(same.max_distance == 0.0);
    CHECK(same.pass);
}

TEST_CASE("arc identities hold along a square median") {
    const GroundLimit& limit = square_limit_32();
    Polygon sq = unit_square();
    TraceConfig cfg = config_for(sq);
    const double h = 1.0 / 32;

    MedianResult r = median(limit, sq, 0, cfg);
    REQUIRE(r.line.termination == Termination::ReachedRidge);
    ArcMetrics m = arc_metrics(r.line, limit, r.line.params.back(), r.line.points.back(), sq);

    // Constant speed at the domain's frequency scale.
    CHECK(m.c_est == doctest::Approx(2.0).epsilon(0.05));
    // Speed-to-value ratio at the event balances the arc length exactly.
    CHECK(m.ratio_times_S == doctest::Approx(1.0).epsilon(0.05));
    // The event sits on the ridge, so the arc spans the full inradius up to
    // the capture gap of order h.
    CHECK(m.S * cfg.ridge.lambda_inf == doctest::Approx(1.0).epsilon(0.07));
    CHECK(m.curvature_sign_changes == 0);
}

TEST_CASE("arc metrics reject events outside the traced range") {
    const GroundLimit& limit = square_limit_32();
    Polygon sq = unit_square();
    TraceConfig cfg = config_for(sq);

    MedianResult r = median(limit, sq, 0, cfg);
    CHECK_THROWS_WITH_AS(
        arc_metrics(r.line, limit, r.line.params.back() + 1.0, r.line.points.back(), sq),
        doctest::Contains("NoEvent"), error);
}

TEST_CASE("speed profile checks pass on clean arcs and flag a decaying field") {
    const GroundLimit& limit = square_limit_32();
    Polygon sq = unit_square();
    TraceConfig cfg = config_for(sq);

    MedianResult r = median(limit, sq, 0, cfg);
    SpeedReport ok = speed_profile_checks(r.line, {}, 0.0, r.line.params.back());
    CHECK(ok.u_monotone_applicable);
    CHECK(ok.u_monotone_pass);
    CHECK(ok.const_prejoin_applicable);
    // At this coarse resolution the variation sits near the threshold; the
    // verdict must be consistent with the measured number either way.
    CHECK(ok.prejoin_variation <= 0.10);
    CHECK(ok.const_prejoin_pass == (ok.prejoin_variation <= ok.tol_fraction));

    // A field whose gradient decays along its streamlines must be flagged.
    auto g = rasterize(sq, 1.0 / 32);
    ScalarField f = make_field(g, FieldLabel::u, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) f.at(i, j) = std::pow(g->node(i, j).y, 0.75);
    Streamline s = trace(f, {0.5, 0.1}, cfg);
    SpeedReport bad = speed_profile_checks(s, {}, 0.0, s.params.back());
    CHECK(bad.u_monotone_applicable);
    CHECK(!bad.u_monotone_pass);
    CHECK(bad.u_worst_drop > 0.05);
}

TEST_CASE("streamline csv output is byte deterministic") {
    const GroundLimit& limit = square_limit_32();
    Polygon sq = unit_square();
    TraceConfig cfg = config_for(sq);

    MedianResult r = median(limit, sq, 0, cfg);
    const char* p1 = "/tmp/rf_test_line_a.csv";
    const char* p2 = "/tmp/rf_test_line_b.csv";
    write_streamline_csv(r.line, p1);
    write_streamline_csv(r.line, p2);

    auto slurp = [](const char* p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::string s1 = slurp(p1), s2 = slurp(p2);
    CHECK(s1 == s2);
    CHECK(s1.substr(0, 20) == "t,x,y,speed,value\n0,");
    size_t rows = 0;
    for (char ch : s1)
        if (ch == '\n') ++rows;
    CHECK(rows == r.line.points.size() + 1);
    std::remove(p1);
    std::remove(p2);
}

#include "doctest.h"

#include "ridgeflow/geometry.hpp"
#include "ridgeflow/grid.hpp"
#include "ridgeflow/svg.hpp"

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

// Radial cone peaking at the square's center; level sets are circles.
ScalarField cone_field(double h) {
    Polygon sq = unit_square();
    auto g = rasterize(sq, h);
    ScalarField f = make_field(g, FieldLabel::u, 0.0, 0.0);
    Vec2 c{0.5, 0.5};
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) f.values[g->idx(i, j)] = 1.0 - 2.0 * dist(g->node(i, j), c);
    return f;
}

ScalarField linear_field(double h) {
    Polygon sq = unit_square();
    auto g = rasterize(sq, h);
    ScalarField f = make_field(g, FieldLabel::u, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) f.values[g->idx(i, j)] = g->node(i, j).x;
    return f;
}

} // namespace

TEST_CASE("level polyline of a radial cone is one closed loop on the circle") {
    double h = 1.0 / 32;
    ScalarField f = cone_field(h);
    auto lines = level_polylines(f, 0.5);
    REQUIRE(lines.size() == 1);
    const auto& loop = lines[0];
    REQUIRE(loop.size() > 20);
    CHECK(dist(loop.front(), loop.back()) < 1e-12);
    Vec2 c{0.5, 0.5};
    for (const Vec2& p : loop) {
        CHECK(std::abs(dist(p, c) - 0.25) < h);
    }
}

TEST_CASE("level polyline of a linear field is vertical away from the datum sides") {
    double h = 1.0 / 32;
    ScalarField f = linear_field(h);
    // Level 13.5h lies between grid columns; in the band clear of the top and
    // bottom sides (where the zero datum bends the reconstruction) the contour
    // is the exact vertical line x = 13.5h.
    auto lines = level_polylines(f, 13.5 * h);
    REQUIRE(!lines.empty());
    int banded = 0;
    for (const auto& line : lines)
        for (const Vec2& p : line)
            if (p.y > 3 * h && p.y < 1.0 - 3 * h && p.x < 1.0 - 2 * h) {
                ++banded;
                CHECK(p.x == doctest::Approx(13.5 * h).epsilon(1e-12));
            }
    CHECK(banded >= 20);
}

TEST_CASE("level near the boundary still chains across ghost cells") {
    double h = 1.0 / 32;
    ScalarField f = cone_field(h);
    // Level 0.08 has its circle at radius 0.46, within 2h of the sides where
    // cell corners fall outside; the chain must not fragment there.
    auto lines = level_polylines(f, 0.08);
    REQUIRE(!lines.empty());
    size_t longest = 0;
    for (const auto& l : lines) longest = std::max(longest, l.size());
    CHECK(lines.size() <= 2);
    CHECK(longest > 40);
}

TEST_CASE("svg rendering is byte-deterministic and well-formed") {
    double h = 1.0 / 32;
    ScalarField f = cone_field(h);
    Polygon sq = unit_square();
    HighRidge ridge = chebyshev_set(sq);

    std::vector<RenderCurve> curves;
    RenderCurve rc;
    rc.cls = CurveClass::Median;
    rc.points = {{0.5, 0.0}, {0.5, 0.25}, {0.5, 0.5}};
    curves.push_back(rc);

    std::string doc1 = render_svg(f, sq, ridge, curves);
    std::string doc2 = render_svg(f, sq, ridge, curves);
    CHECK(doc1 == doc2);
    CHECK(doc1.substr(0, 4) == "<svg");
    CHECK(doc1.find("</svg>") != std::string::npos);
    CHECK(doc1.find("path") != std::string::npos);
    // Median curve color present; attracting color absent (no such curve).
    CHECK(doc1.find("#228844") != std::string::npos);
    CHECK(doc1.find("#cc3344") == std::string::npos);

    std::string path = "test_render.svg";
    write_svg(path, doc1);
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == doc1);
    std::remove(path.c_str());
}

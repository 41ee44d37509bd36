#include "doctest.h"

#include "ridgeflow/eigen.hpp"
#include "ridgeflow/errors.hpp"
#include "ridgeflow/geometry.hpp"
#include "ridgeflow/grid.hpp"
#include "ridgeflow/infinity.hpp"

#include <cmath>
#include <random>

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

const std::vector<GroundState>& square_ladder_32() {
    static std::vector<GroundState> states = [] {
        auto g = rasterize(unit_square(), 1.0 / 32);
        LadderConfig cfg;
        cfg.p_list = {2, 4, 8};
        return continuation_solve(g, cfg);
    }();
    return states;
}

const PotentialSolution& square_potential_32() {
    static PotentialSolution sol = [] {
        Polygon sq = unit_square();
        auto g = rasterize(sq, 1.0 / 32);
        return solve_infinity_potential(g, chebyshev_set(sq));
    }();
    return sol;
}

// Exclusion points blanketing the boundary so residual checks only probe
// nodes whose stencils never touch the boundary datum.
std::vector<Vec2> boundary_blanket(const Polygon& poly, double spacing) {
    std::vector<Vec2> pts;
    for (int s = 0; s < poly.size(); ++s) {
        Vec2 a = poly.vertex(s), b = poly.vertex(s + 1);
        int n = std::max(2, static_cast<int>(std::ceil(dist(a, b) / spacing)) + 1);
        for (int k = 0; k < n; ++k)
            pts.push_back(a + (static_cast<double>(k) / (n - 1)) * (b - a));
    }
    return pts;
}

} // namespace

TEST_CASE("weighted midrange: equal arms give the plain midrange") {
    double v[4] = {0.3, 0.9, 0.1, 0.5};
    double t[4] = {1.0, 1.0, 1.0, 1.0};
    CHECK(weighted_midrange(v, t, 4) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("weighted midrange: two rays solve the length-weighted balance") {
    // (1-r)/1 + (0-r)/3 = 0  =>  r = 3/4.
    double v[2] = {1.0, 0.0};
    double t[2] = {1.0, 3.0};
    CHECK(weighted_midrange(v, t, 2) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("weighted midrange: affine samples return the node value") {
    // Pairs of opposite rays sampling an affine function with zero value at
    // the node; arms deliberately unequal.
    double v[8], t[8] = {1.0, 2.5, 0.7, 1.9, 3.0, 0.4, 1.1, 2.2};
    double sx = 0.37, sy = -0.81;
    Vec2 dirs[8] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                    {M_SQRT1_2, M_SQRT1_2}, {-M_SQRT1_2, -M_SQRT1_2},
                    {M_SQRT1_2, -M_SQRT1_2}, {-M_SQRT1_2, M_SQRT1_2}};
    for (int i = 0; i < 8; ++i) v[i] = (sx * dirs[i].x + sy * dirs[i].y) * t[i];
    CHECK(weighted_midrange(v, t, 8) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("weighted midrange is monotone in every input") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> uval(0.0, 1.0), uarm(0.2, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        double v[8], t[8];
        for (int i = 0; i < 8; ++i) {
            v[i] = uval(rng);
            t[i] = uarm(rng);
        }
        double base = weighted_midrange(v, t, 8);
        int k = trial % 8;
        double bumped[8];
        std::copy(v, v + 8, bumped);
        bumped[k] += 0.05;
        CHECK(weighted_midrange(bumped, t, 8) >= base - 1e-12);
    }
}

TEST_CASE("square potential: constraint, range, medians, convergence") {
    const PotentialSolution& sol = square_potential_32();
    const GridSpec& g = *sol.field.grid;
    CHECK(sol.converged);
    CHECK(sol.sweeps < 5000);
    CHECK(sol.stencil_radius == doctest::Approx(3.0 / 32));

    // Center node is the single high-ridge point and must be pinned at 1.
    CHECK(sol.field.at(16, 16) == 1.0);
    REQUIRE(!sol.constraint_nodes.empty());
    for (int n : sol.constraint_nodes) CHECK(sol.field.values[n] == 1.0);

    double mx = 0.0, mn = 2.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.in(i, j)) {
                mx = std::max(mx, sol.field.at(i, j));
                mn = std::min(mn, sol.field.at(i, j));
            }
    CHECK(mx == 1.0);
    CHECK(mn >= 0.0);

    // Median point: U = dist/R by symmetry, up to O(h) from the capsule.
    CHECK(interpolate(sol.field, {0.5, 0.25}) ==
          doctest::Approx(0.5).epsilon(5.0 / 32 / 0.5));

    // Dihedral symmetry of the converged fixed point.
    double worst = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i)
            if (g.in(i, j)) {
                worst = std::max(worst,
                                 std::abs(sol.field.at(i, j) - sol.field.at(j, i)));
                worst = std::max(worst, std::abs(sol.field.at(i, j) -
                                                 sol.field.at(g.nx - 1 - i, j)));
            }
    CHECK(worst < 1e-6);
}

TEST_CASE("square potential is its own midrange fixed point off the ridge") {
    const PotentialSolution& sol = square_potential_32();
    Polygon sq = unit_square();
    HighRidge ridge = chebyshev_set(sq);
    ResidualStats st = residual_infinity_laplacian(sol.field, {}, 0.0, &ridge);
    CHECK(st.pass);
    CHECK(st.sup < 1e-7);
    CHECK(st.tested > 800);
    CHECK(st.excluded > 0);
}

TEST_CASE("rectangle potential respects the segment ridge") {
    Polygon rc = rect_2x1();
    auto g = rasterize(rc, 1.0 / 16);
    HighRidge ridge = chebyshev_set(rc);
    PotentialSolution sol = solve_infinity_potential(g, ridge);
    CHECK(sol.converged);
    // Nodes along the ridge segment carry the constraint.
    CHECK(sol.field.at(16, 8) == 1.0); // (1.0, 0.5) mid-ridge
    CHECK(interpolate(sol.field, {1.0, 0.25}) == doctest::Approx(0.5).epsilon(5.0 / 16 / 0.5));
}

TEST_CASE("triangle potential pins cell corners when the lattice misses H") {
    std::vector<Vec2> verts{{0, 0}, {4, 0}, {0, 3}};
    Polygon tri = validate_polygon(verts, "tri345");
    HighRidge ridge = chebyshev_set(tri); // incenter (1,1), R = 1
    auto g = rasterize(tri, 3.0 / 32);
    PotentialSolution sol = solve_infinity_potential(g, ridge);
    REQUIRE(!sol.constraint_nodes.empty());
    for (int n : sol.constraint_nodes) {
        CHECK(sol.field.values[n] == 1.0);
        // Pinned fallback nodes hug the incenter within one cell diagonal.
        Vec2 x{g->origin.x + (n % g->nx) * g->h, g->origin.y + (n / g->nx) * g->h};
        CHECK(dist(x, ridge.a) < 1.5 * g->h);
    }
    CHECK(sol.converged);
    double mx = 0.0;
    for (double v : sol.field.values)
        if (std::isfinite(v)) mx = std::max(mx, v);
    CHECK(mx == 1.0);
}

TEST_CASE("residual of deep affine data is zero and of a cone is O(h)") {
    Polygon sq = unit_square();
    auto g = rasterize(sq, 1.0 / 32);
    auto blanket = boundary_blanket(sq, 0.5 * g->h);
    double reach = 3.0 * g->h + g->h;

    ScalarField aff = make_field(g, FieldLabel::u, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) {
                Vec2 x = g->node(i, j);
                aff.at(i, j) = 0.3 * x.x + 0.2 * x.y + 0.1;
            }
    ResidualStats sa = residual_infinity_laplacian(aff, blanket, reach);
    CHECK(sa.tested > 400);
    CHECK(sa.sup < 1e-12);

    ScalarField cone = make_field(g, FieldLabel::u, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) {
                Vec2 x = g->node(i, j);
                cone.at(i, j) = 1.0 - 2.0 * dist(x, {0.5, 0.5});
            }
    auto excl = blanket;
    excl.push_back({0.5, 0.5}); // apex is genuinely singular
    ResidualStats sc = residual_infinity_laplacian(cone, excl, reach);
    CHECK(sc.tested > 300);
    CHECK(sc.sup < 10.0 * g->h);
    CHECK(sc.sup > 0.0);
}

TEST_CASE("ground limit extraction: gap, labels, log values, u=1 on H") {
    const auto& states = square_ladder_32();
    Polygon sq = unit_square();
    HighRidge ridge = chebyshev_set(sq);
    GroundLimit lim = extract_ground_limit(states, ridge);
    CHECK(lim.p_used == 8.0);
    CHECK(lim.u.label == FieldLabel::u);
    CHECK(lim.v.label == FieldLabel::v);
    CHECK(lim.richardson_gap > 0.0);
    CHECK(lim.richardson_gap < 0.2);
    CHECK(lim.u.at(16, 16) == 1.0);
    CHECK(lim.v.at(16, 16) == 0.0);
    CHECK(lim.v.at(8, 8) == doctest::Approx(std::log(lim.u.at(8, 8))).epsilon(1e-14));

    std::vector<GroundState> one(states.begin(), states.begin() + 1);
    CHECK_THROWS_WITH_AS(extract_ground_limit(one, ridge),
                         doctest::Contains("LadderTooShort"), error);
}

TEST_CASE("sandwich: synthetic distance cone is tight at the upper bound") {
    Polygon sq = unit_square();
    auto g = rasterize(sq, 1.0 / 32);
    HighRidge ridge = chebyshev_set(sq);
    ScalarField f = make_field(g, FieldLabel::u, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) f.at(i, j) = g->bdist[g->idx(i, j)] * ridge.lambda_inf;
    SandwichReport rep = sandwich_check(f, sq, ridge);
    CHECK(rep.pass);
    // u = L*dist exactly: the upper violation sits exactly at -tol_h.
    CHECK(rep.worst_upper == doctest::Approx(-rep.tol_h).epsilon(1e-12));
    CHECK(rep.worst_lower <= 0.0);
}

TEST_CASE("sandwich holds for solved ground rungs and the potential") {
    Polygon sq = unit_square();
    HighRidge ridge = chebyshev_set(sq);
    const auto& states = square_ladder_32();
    GroundLimit lim = extract_ground_limit(states, ridge);
    SandwichReport ru = sandwich_check(lim.u, sq, ridge);
    CHECK(ru.pass);
    SandwichReport rU = sandwich_check(square_potential_32().field, sq, ridge);
    CHECK(rU.pass);
}

TEST_CASE("field comparison: self-zero, measured gap, grid mismatch") {
    const auto& states = square_ladder_32();
    SupDifferenceReport self = compare_fields(states[0].field, states[0].field);
    CHECK(self.sup == 0.0);

    Polygon sq = unit_square();
    HighRidge ridge = chebyshev_set(sq);
    GroundLimit lim = extract_ground_limit(states, ridge);
    SupDifferenceReport du = compare_fields(lim.u, square_potential_32().field);
    CHECK(du.sup > 0.0);
    CHECK(du.sup < 0.5);

    auto g16 = rasterize(sq, 1.0 / 16);
    ScalarField other = make_field(g16, FieldLabel::u, 0.0, 0.0);
    CHECK_THROWS_WITH_AS(compare_fields(states[0].field, other),
                         doctest::Contains("GridMismatch"), error);
}

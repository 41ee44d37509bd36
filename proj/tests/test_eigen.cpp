#include "doctest.h"

#include "ridgeflow/eigen.hpp"
#include "ridgeflow/errors.hpp"
#include "ridgeflow/geometry.hpp"
#include "ridgeflow/grid.hpp"

#include <cmath>
#include <memory>

using namespace ridgeflow;

namespace {

Polygon unit_square() {
    Polygon p;
    REQUIRE(builtin_polygon("square", p));
    return p;
}

std::shared_ptr<const GridSpec> square_grid(double h) {
    return rasterize(unit_square(), h);
}

} // namespace

TEST_CASE("quotient of a single-node spike matches the closed form") {
    // On a 5x5 grid over the unit square, a spike of height 1 at the center
    // node touches exactly four cells, each with |grad|^2 = 8 and midpoint
    // value 1/4, so the quotient is 8^{p/2} * 4^p = 2^{7p/2}.
    auto g = square_grid(0.25);
    ScalarField f = make_field(g, FieldLabel::u_p, 0.0, 0.0);
    f.at(2, 2) = 1.0;
    CHECK(rayleigh_quotient(f, 2.0) == doctest::Approx(128.0).epsilon(1e-12));
    CHECK(rayleigh_quotient(f, 4.0) == doctest::Approx(16384.0).epsilon(1e-12));
    CHECK(rayleigh_quotient(f, 6.0) == doctest::Approx(2097152.0).epsilon(1e-12));
}

TEST_CASE("quotient is invariant under rescaling of the field") {
    auto g = square_grid(1.0 / 16);
    ScalarField f = make_field(g, FieldLabel::u_p, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) {
                Vec2 x = g->node(i, j);
                f.at(i, j) = x.x * (1 - x.x) * x.y * (1 - x.y) * (1.3 + 0.2 * std::sin(7 * x.x));
            }
    double q0 = rayleigh_quotient(f, 6.0);
    ScalarField fs = f, fn = f;
    for (auto& v : fs.values) v *= 37.5;
    for (auto& v : fn.values) v *= -2.0;
    CHECK(rayleigh_quotient(fs, 6.0) == doctest::Approx(q0).epsilon(1e-12));
    CHECK(rayleigh_quotient(fn, 6.0) == doctest::Approx(q0).epsilon(1e-12));
}

TEST_CASE("quotient of a smooth trial field sits above the analytic minimum") {
    // Rayleigh principle: x(1-x)y(1-y) gives exactly 20 analytically, which
    // stays above 2*pi^2 = 19.739... after discretization.
    auto g = square_grid(1.0 / 32);
    ScalarField f = make_field(g, FieldLabel::u_p, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) {
                Vec2 x = g->node(i, j);
                f.at(i, j) = x.x * (1 - x.x) * x.y * (1 - x.y);
            }
    double q = rayleigh_quotient(f, 2.0);
    CHECK(q >= 2.0 * M_PI * M_PI);
    CHECK(q == doctest::Approx(20.0).epsilon(0.01));
}

TEST_CASE("quotient of the zero field reports a vanishing denominator") {
    auto g = square_grid(0.25);
    ScalarField f = make_field(g, FieldLabel::u_p, 0.0, 0.0);
    CHECK_THROWS_WITH_AS(rayleigh_quotient(f, 2.0), doctest::Contains("ZeroDenominator"),
                         error);
}

TEST_CASE("p=2 minimizer on the square recovers the analytic eigenvalue") {
    auto g = square_grid(1.0 / 32);
    ScalarField init = make_field(g, FieldLabel::u_p, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) init.at(i, j) = g->bdist[g->idx(i, j)];

    GroundState st = minimize_ground_state(g, 2.0, init);
    CHECK_FALSE(st.max_iter_exceeded);
    CHECK(st.lambda_p == doctest::Approx(2.0 * M_PI * M_PI).epsilon(0.01));

    // The minimizer never accepts an increase, so it ends at or below the
    // quotient of its (normalized) starting point.
    ScalarField init_n = init;
    double m = 0.0;
    for (double v : init_n.values)
        if (std::isfinite(v)) m = std::max(m, std::abs(v));
    for (auto& v : init_n.values) v /= m;
    CHECK(st.lambda_p <= rayleigh_quotient(init_n, 2.0) + 1e-9);

    // Sup-normalization: max value exactly 1, and positivity of the state.
    double mx = 0.0, mn = 1e300;
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) {
                mx = std::max(mx, st.field.at(i, j));
                mn = std::min(mn, st.field.at(i, j));
            }
    CHECK(mx == 1.0);
    CHECK(mn > 0.0);

    // Interior five-point cell sums of a discrete eigenfunction stay
    // nonpositive up to rounding.
    CHECK(max_cell_laplacian(st.field) < 0.01);
}

TEST_CASE("continuation ladder yields decreasing lambda_p^{1/p}") {
    auto g = square_grid(1.0 / 32);
    LadderConfig cfg;
    cfg.p_list = {2, 4, 8};
    auto states = continuation_solve(g, cfg);
    REQUIRE(states.size() == 3);
    double prev = 1e300;
    for (const auto& st : states) {
        CHECK_FALSE(st.max_iter_exceeded);
        double root = std::exp(std::log(st.lambda_p) / st.p);
        CHECK(root < prev);
        prev = root;
    }
    // First rung matches the p=2 analytic value; last root is already close
    // to the inradius reciprocal 2 from above.
    CHECK(states[0].lambda_p == doctest::Approx(2.0 * M_PI * M_PI).epsilon(0.01));
    CHECK(prev > 2.0);
    CHECK(prev < 3.2);
}

TEST_CASE("a one-rung ladder reproduces the direct minimizer exactly") {
    auto g = square_grid(1.0 / 16);
    LadderConfig cfg;
    cfg.p_list = {4};
    auto states = continuation_solve(g, cfg);
    REQUIRE(states.size() == 1);

    ScalarField init = make_field(g, FieldLabel::u_p, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) init.at(i, j) = g->bdist[g->idx(i, j)];
    GroundState direct = minimize_ground_state(g, 4.0, init, cfg);
    CHECK(states[0].lambda_p == direct.lambda_p);
    CHECK(states[0].iterations == direct.iterations);
}

TEST_CASE("ladder validation rejects malformed exponent lists") {
    auto g = square_grid(0.25);
    LadderConfig bad;
    bad.p_list = {};
    CHECK_THROWS_WITH_AS(continuation_solve(g, bad), doctest::Contains("InvalidArgument"),
                         error);
    bad.p_list = {4, 2};
    CHECK_THROWS_WITH_AS(continuation_solve(g, bad), doctest::Contains("InvalidArgument"),
                         error);
    bad.p_list = {1.5, 2};
    CHECK_THROWS_WITH_AS(continuation_solve(g, bad), doctest::Contains("InvalidArgument"),
                         error);
}

TEST_CASE("a non-finite initial field is rejected") {
    auto g = square_grid(1.0 / 16);
    ScalarField init = make_field(g, FieldLabel::u_p, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) init.at(i, j) = 1.0;
    init.at(5, 5) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(minimize_ground_state(g, 2.0, init),
                         doctest::Contains("NonFiniteEncountered"), error);
}

TEST_CASE("iteration cap sets the exceeded flag but returns a usable state") {
    auto g = square_grid(1.0 / 16);
    ScalarField init = make_field(g, FieldLabel::u_p, 0.0, 0.0);
    for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i)
            if (g->in(i, j)) init.at(i, j) = g->bdist[g->idx(i, j)];
    LadderConfig cfg;
    cfg.max_iter = 3;
    GroundState st = minimize_ground_state(g, 2.0, init, cfg);
    CHECK(st.max_iter_exceeded);
    CHECK(st.iterations == 3);
    double mx = 0.0;
    for (double v : st.field.values)
        if (std::isfinite(v)) mx = std::max(mx, v);
    CHECK(mx == 1.0);
}

TEST_CASE("upper gradient bound holds for solved rungs and flags a spike") {
    auto g = square_grid(1.0 / 32);
    LadderConfig cfg;
    cfg.p_list = {2, 8};
    auto states = continuation_solve(g, cfg);
    Polygon sq = unit_square();
    for (const auto& st : states) {
        MarginReport rep = gradient_bound_check(st, sq);
        CHECK(rep.pass);
        CHECK(rep.extreme > 0.0);
        CHECK(rep.region_nodes > 900);
    }
    // Denting a solved rung creates a slope far above the p=8 bound
    // (about 3.8 here) without changing the sup.
    GroundState spiked = states[1];
    spiked.field.at(16, 17) = -0.5;
    MarginReport rep = gradient_bound_check(spiked, sq);
    CHECK_FALSE(rep.pass);
    CHECK(rep.margin > 0.0);
}

TEST_CASE("lower gradient bound: log-slope floor away from the peak") {
    auto g = square_grid(1.0 / 32);
    LadderConfig cfg;
    cfg.p_list = {2, 4, 8};
    auto states = continuation_solve(g, cfg);
    Polygon sq = unit_square();
    MarginReport rep = lower_gradient_check(states.back(), sq, 0.5);
    CHECK(rep.pass);
    CHECK(rep.region_nodes > 0);
    CHECK(rep.extreme > rep.bound);

    // Halving the level doubles nothing, but squaring it doubles the bound.
    MarginReport rep2 = lower_gradient_check(states.back(), sq, 0.25);
    CHECK(rep2.bound == doctest::Approx(2.0 * rep.bound).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(lower_gradient_check(states.back(), sq, 1e-9),
                         doctest::Contains("EmptyRegion"), error);
    CHECK_THROWS_WITH_AS(lower_gradient_check(states.back(), sq, 2.0),
                         doctest::Contains("InvalidArgument"), error);
}

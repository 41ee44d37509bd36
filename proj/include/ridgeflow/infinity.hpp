#pragma once

#include "ridgeflow/eigen.hpp"
#include "ridgeflow/geometry.hpp"
#include "ridgeflow/grid.hpp"

#include <memory>
#include <vector>

namespace ridgeflow {

// Floor used when taking logs of the ground state: v = log(max(u, floor)).
inline constexpr double kLogFloor = 1e-12;

struct PotentialConfig {
    double radius_factor = 3.0; // stencil radius, in units of h
    double clip_radius_factor = 0.5; // ridge capsule radius, in units of h
    double tol = 1e-10;         // sup-change per sweep at convergence
    int max_sweeps = 5000;
};

struct PotentialSolution {
    ScalarField field; // label U, 1 on the ridge constraint nodes, 0 datum
    int sweeps = 0;
    double residual = 0.0; // sup-change of the final sweep
    double stencil_radius = 0.0;
    bool converged = false;
    std::vector<int> constraint_nodes; // grid node indices pinned at 1
};

// Weighted midrange of ray endpoint values: the unique r solving
//   max_i (v[i]-r)/arm[i] + min_j (v[j]-r)/arm[j] = 0.
// Equal arms reduce it to (max+min)/2. Monotone in every v[i].
double weighted_midrange(const double* values, const double* arms, int n);

// Monotone 8-ray midrange scheme for the infinity-Laplace potential:
// rays of length radius_factor*h clipped at the boundary (datum 0) and at a
// capsule of radius clip_radius_factor*h around the high ridge (datum 1);
// Gauss-Seidel sweeps in rotating orders until the sup-change drops below
// tol. Exhausting max_sweeps returns the iterate flagged, never throws.
PotentialSolution solve_infinity_potential(std::shared_ptr<const GridSpec> grid,
                                           const HighRidge& ridge,
                                           const PotentialConfig& cfg = {});

struct GroundLimit {
    ScalarField u; // top-rung field, relabeled u
    ScalarField v; // log(max(u, kLogFloor)) on interior nodes
    double p_used = 0.0;
    double richardson_gap = 0.0; // sup |u_top - u_prev| between the last rungs
};

// Requires at least two rungs (LadderTooShort otherwise).
GroundLimit extract_ground_limit(const std::vector<GroundState>& states,
                                 const HighRidge& ridge);

struct SandwichReport {
    bool pass = false;
    // Worst signed violations (positive = bound broken beyond tol_h).
    double worst_lower = 0.0;
    double worst_upper = 0.0;
    Vec2 worst_lower_at{0.0, 0.0};
    Vec2 worst_upper_at{0.0, 0.0};
    double tol_h = 0.0;
};

// Squeeze at every interior node x, with x0 the nearest high-ridge point:
//   max(0, 1 - L*|x-x0|) - tol_h <= f(x) <= L*dist(x,boundary) + tol_h,
// L = 1/R, tol_h = 10*h*L. Applies to the ground limit and to the potential.
SandwichReport sandwich_check(const ScalarField& field, const Polygon& poly,
                              const HighRidge& ridge);

struct ResidualStats {
    double sup = 0.0;
    double mean_abs = 0.0;
    int tested = 0;
    int excluded = 0;
    bool pass = false; // sup < 10*h
    Vec2 sup_at{0.0, 0.0};
};

// Deviation of the field from its own weighted-midrange stencil value at
// interior nodes farther than exclusion_radius from every exclusion point.
// Pass clip_ridge to clip rays at the ridge capsule exactly as the potential
// solver does (nodes inside the capsule are skipped then).
ResidualStats residual_infinity_laplacian(const ScalarField& field,
                                          const std::vector<Vec2>& exclusion,
                                          double exclusion_radius,
                                          const HighRidge* clip_ridge = nullptr,
                                          const PotentialConfig& cfg = {});

struct SupDifferenceReport {
    double sup = 0.0;
    Vec2 at{0.0, 0.0};
};

// Measured finding only: sup |a - b| over common interior nodes and where it
// happens. Grids must match.
SupDifferenceReport compare_fields(const ScalarField& a, const ScalarField& b);

} // namespace ridgeflow

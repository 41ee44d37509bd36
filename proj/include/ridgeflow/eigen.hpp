#pragma once

#include <memory>
#include <vector>

#include "ridgeflow/grid.hpp"

namespace ridgeflow {

// Converged p-Rayleigh minimizer on a grid, sup-normalized to max 1.
struct GroundState {
    double p = 2.0;
    ScalarField field; // label u_p
    double lambda_p = 0.0;
    int iterations = 0;
    double residual = 0.0; // relative quotient decrease over the stop window
    bool max_iter_exceeded = false;
};

struct LadderConfig {
    std::vector<double> p_list{2, 4, 8, 16, 32, 64};
    int max_iter = 20000;
    int window = 25;        // stopping window length (iterations)
    double rel_tol = 1e-10; // stop when the window's relative decrease drops below
    double grad_tol = 0.0;  // optional extra stop on sup-norm of the quotient
                            // gradient relative to lambda_p; 0 disables it
    int max_backtracks = 60;
};

// Midpoint-rule Rayleigh quotient: cell-centered Q1 gradients and midpoint
// values, cut cells weighted by their clipped area, boundary corners closed
// through the ghost rule. Evaluated in max-normalized form so p = 64 stays
// inside double range. Throws ZeroDenominator if the field vanishes.
double rayleigh_quotient(const ScalarField& field, double p);

// Projected descent: Barzilai-Borwein trial steps, halving line search that
// never accepts an increase, sup-norm renormalization after each step.
// Stops on the windowed relative decrease or flags max_iter_exceeded and
// returns the best iterate. Throws NonFiniteEncountered if the quotient or
// its gradient leaves double range.
GroundState minimize_ground_state(std::shared_ptr<const GridSpec> grid, double p,
                                  const ScalarField& init, const LadderConfig& cfg = {});

// Warm-started continuation along cfg.p_list (ascending), starting from the
// boundary-distance field. A rung that exhausts max_iter keeps its flag and
// still seeds the next rung.
std::vector<GroundState> continuation_solve(std::shared_ptr<const GridSpec> grid,
                                            const LadderConfig& cfg = {});

struct MarginReport {
    double extreme = 0.0; // max gradient (upper check) or min gradient (lower)
    double bound = 0.0;
    double margin = 0.0; // signed distance past the bound, positive = violated
    int region_nodes = 0;
    bool pass = false;
};

// max |grad u_p| over interior nodes against (lambda_p diam)^{1/(p-1)} sup u_p.
// PASS iff the excess stays within tol_h = 10 h lambda_inf.
MarginReport gradient_bound_check(const GroundState& state, const Polygon& poly);

// min |grad v_p| over the sublevel region {u_p <= c} against
// log(1/c)/(2 diam). PASS iff the deficit stays within tol_h.
// Throws EmptyRegion when no node lies below the level.
MarginReport lower_gradient_check(const GroundState& state, const Polygon& poly, double c);

// max over interior five-point stencils of the cell-integrated discrete
// Laplacian h^2 * (sum of neighbors - 4 u). The eigenfunction is
// superharmonic, so this should be nonpositive up to tol_h.
double max_cell_laplacian(const ScalarField& field);

} // namespace ridgeflow

#pragma once

#include "ridgeflow/geometry.hpp"
#include "ridgeflow/grid.hpp"
#include "ridgeflow/infinity.hpp"
#include "ridgeflow/streamline.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ridgeflow {

// ---------------------------------------------------------------------------
// Contact-set estimation and structure checks
// ---------------------------------------------------------------------------

struct ContactEstimate {
    double epsilon = 0.05;
    double lambda_inf = 0.0;
    double c0 = 0.0; // level floor of the boundary zone exclusion
    double h = 0.0;
    std::vector<Vec2> nodes;      // nodes whose steepest log-slope is near-critical
    std::vector<double> s_values; // extrapolated slope estimate per node
    double measure = 0.0;         // nodes.size() * h^2
    int tested = 0;               // nodes where the estimate was evaluated
    int skipped = 0;              // evaluations aborted (probe failed)
};

// Scans interior nodes clear of the boundary zone — the probe ball of the
// largest radius must fit inside, and the field value must exceed the level
// floor c0 (chosen with log(1/c0) > 2*diameter*lambda, below which the slope
// criterion cannot bind). Collects nodes whose extrapolated steepest
// per-radius decrement of the log field is at most lambda_inf*(1+epsilon).
ContactEstimate contact_estimate(const GroundLimit& limit, const Polygon& poly,
                                 const HighRidge& ridge, double epsilon);

// One scan thresholded at several epsilons (the slope estimate per node is
// shared, so the node sets are nested by construction).
std::vector<ContactEstimate> contact_estimate_sweep(const GroundLimit& limit,
                                                    const Polygon& poly, const HighRidge& ridge,
                                                    const std::vector<double>& eps_list);

struct CoverReport {
    double max_distance = 0.0; // one-sided Hausdorff: contact nodes -> target set
    double mean_distance = 0.0;
    int node_count = 0;
    double threshold = 0.0;
    bool pass = false;
};

// Distance from every contact node to the union of the given curves and the
// high ridge (traces stop at the capture radius; the ridge carries the
// innermost stretch of the contact set).
CoverReport contact_within_attracting(const ContactEstimate& contact,
                                      const std::vector<std::vector<Vec2>>& curves,
                                      const HighRidge& ridge, double threshold);

struct TrendReport {
    std::vector<double> eps_list;              // decreasing
    std::vector<double> h_list;                // decreasing (coarse first)
    std::vector<std::vector<double>> measure;  // [h index][eps index]
    bool eps_monotone = false; // non-increasing along each row
    bool h_monotone = false;   // non-increasing down each column, within quantum
    double quantum = 0.0;      // one coarse grid cell of slack
    bool pass = false;
};

// Rows of `table` correspond to h_list, columns to eps_list.
TrendReport area_zero_trend(const std::vector<std::vector<ContactEstimate>>& table,
                            const std::vector<double>& eps_list,
                            const std::vector<double>& h_list);

struct LevelSweepReport {
    int nodes_tested = 0;    // contact nodes farther than `threshold` from the curves
    double worst_gap = 0.0;  // max distance of marched level points to the contact set
    double threshold = 0.0;
    bool vacuous = false;    // no qualifying nodes
    bool pass = false;
};

// For each contact node farther than `threshold` from every curve, marches
// its level set toward the curves and records how far the marched points
// stray from the contact set; the level arc of a genuine contact node stays
// inside it.
LevelSweepReport level_arc_sweep_check(const GroundLimit& limit, const ContactEstimate& contact,
                                       const std::vector<std::vector<Vec2>>& curves,
                                       double threshold);

// ---------------------------------------------------------------------------
// Flux integral over closed loops
// ---------------------------------------------------------------------------

double polyline_length(const std::vector<Vec2>& pts);

// Trapezoid quadrature of |grad f|^{m-2} <grad f, n> over the closed loop
// with outward normals, each edge subdivided to about h/2. Every sample must
// keep `clearance` from the polygon boundary, the high ridge, and the avoid
// set; otherwise throws ClearanceViolated.
double gauss_integral(const ScalarField& field, const std::vector<Vec2>& loop, int m,
                      const Polygon& poly, const HighRidge& ridge,
                      const std::vector<Vec2>& avoid, double clearance);

// n random star-shaped quadrilaterals (vertex lists, not closed) whose hulls
// keep `clearance` from the boundary, the ridge, and the avoid set.
// Deterministic in seed.
std::vector<std::vector<Vec2>> random_admissible_quads(const Polygon& poly,
                                                       const HighRidge& ridge,
                                                       const std::vector<Vec2>& avoid,
                                                       double clearance, int n,
                                                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// Quadrilateral rule
// ---------------------------------------------------------------------------

struct ArcMonotone {
    bool monotone = false;         // within tol in at least one direction
    bool increasing = false;       // direction of the better fit
    double worst_violation = 0.0;  // running-extremum violation of that direction
};

// Samples |grad field| along the arc vertices and tests monotonicity against
// the running extremum, allowing tol_fraction of the max speed as slack.
ArcMonotone arc_speed_monotone(const ScalarField& field, const std::vector<Vec2>& arc,
                               double tol_fraction);

// Region bounded below by a level arc, above by a level arc (or a point),
// and on the sides by two streamline sub-arcs.
struct AdmissibleQuad {
    std::vector<Vec2> lower; // level arc at lo, from the beta crossing to eta's
    std::vector<Vec2> upper; // level arc at hi; single point when triangular
    std::vector<Vec2> beta;  // streamline sub-arc, lo crossing -> hi crossing
    std::vector<Vec2> eta;
    double lo = 0.0, hi = 0.0;
    bool triangular = false;

    std::vector<Vec2> boundary() const; // closed loop (first point repeated)
};

// Cuts the two streamlines at the level values lo < hi and extracts the level
// arcs joining the crossings (triangular when the hi crossings coincide
// within 2h). Throws QuadConstructionFailed when the crossings do not exist
// or the arcs do not close onto them within 2h.
AdmissibleQuad build_quad(const GroundLimit& limit, const Streamline& beta,
                          const Streamline& eta, double lo, double hi);

struct QuadRuleReport {
    bool precondition_ok = false; // speed monotone along the lower arc
    double lower_max = 0.0;
    double upper_max = 0.0;
    bool bound_pass = false; // upper max <= lower max * (1 + tol)
    int interior_meets = 0;  // pairwise joins strictly inside the region
    bool no_cross_pass = false;
    bool upper_monotone_pass = false; // speed monotone along the upper arc
    bool triangular = false;
    double tol_fraction = 0.05;
    bool pass = false;
};

// Builds the region and verifies: (i) the max speed on the upper arc does not
// exceed the max on the lower arc beyond tol; (ii) streamlines seeded on the
// lower arc register no mutual joins farther than 2h inside the region; (iii)
// the speed is monotone along the upper arc.
QuadRuleReport quadrilateral_rule_check(const GroundLimit& limit, const Streamline& beta,
                                        const Streamline& eta, double lo, double hi,
                                        const Polygon& poly, const HighRidge& ridge);

// ---------------------------------------------------------------------------
// Capture by the contact set
// ---------------------------------------------------------------------------

struct CaptureReport {
    bool entered = false;      // trace came within h of a contact node
    double entry_param = 0.0;
    double max_excursion = 0.0; // max distance to the contact set after entry
    double threshold = 0.0;     // 2h
    bool pass = true;
};

CaptureReport capture_check(const Streamline& s, const std::vector<Vec2>& contact_nodes,
                            double h);

// ---------------------------------------------------------------------------
// Report plumbing and the potential counterpart suite
// ---------------------------------------------------------------------------

enum class CheckStatus { Pass, Fail, Info };
const char* status_name(CheckStatus s);

struct CheckResult {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    CheckStatus status = CheckStatus::Info;
    std::string note;
};

struct VerificationReport {
    std::string polygon_name;
    double h = 0.0;
    double p_top = 0.0;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;

    bool all_pass() const;               // no Fail entries
    int exit_code() const;               // 0 clean, 1 when any Fail
    const CheckResult* find(const std::string& name) const;
};

// Mirrors the structural checks on the potential: fictitious corner traces,
// medians, convexity of level loops, plus informational speed and crease
// diagnostics that have no exact counterpart criterion.
std::vector<CheckResult> potential_counterpart_suite(const PotentialSolution& potential,
                                                     const Polygon& poly,
                                                     const HighRidge& ridge);

} // namespace ridgeflow

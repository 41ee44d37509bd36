#pragma once

#include "ridgeflow/geometry.hpp"
#include "ridgeflow/grid.hpp"
#include "ridgeflow/infinity.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ridgeflow {

enum class Termination { ReachedRidge, JoinedCurve, SpeedFloor, MaxSteps, LeftDomain };
const char* termination_name(Termination t);

struct SeedInfo {
    enum class Kind { Corner, SidePoint, Interior } kind = Kind::Interior;
    int index = -1; // corner or side index when applicable
    Vec2 start{0.0, 0.0};
};

struct Streamline {
    std::vector<Vec2> points;
    std::vector<double> params;
    std::vector<double> speeds; // |grad field| at points
    std::vector<double> values; // field value at points (strictly increasing)
    FieldLabel field_label = FieldLabel::u;
    SeedInfo seed;
    Termination termination = Termination::MaxSteps;
    bool left_domain_defect = false;
    int joined_with = -1;      // assigned by the suite after join detection
    Vec2 join_point{0.0, 0.0}; // assigned together with joined_with
    double arc_length = 0.0;
    double h = 0.0; // grid spacing of the traced field

    double value_at_end() const { return values.empty() ? 0.0 : values.back(); }
};

struct TraceConfig {
    HighRidge ridge;
    double step_factor = 0.5;          // target spatial step, units of h
    double speed_floor_factor = 1e-3;  // floor = factor * lambda_inf
    double ridge_capture_factor = 1.0; // ReachedRidge within factor*h of H
    int max_steps = 100000;
    double max_param = std::numeric_limits<double>::infinity();
};

// Integrate dx/dt = grad(field) from start with adaptive RK4 (target spatial
// step = step_factor*h, halved until the step stays inside, increases the
// field value, and respects the spacing bound). Throws StartOutside /
// StartOnRidge; domain exit terminates with LeftDomain and a defect flag.
Streamline trace(const ScalarField& field, Vec2 start, const TraceConfig& cfg);

// Fictitious streamline from corner j: seeds at 3h along the interior
// bisector and traces the log-field v the whole way to the high ridge.
Streamline attracting_streamline(const GroundLimit& limit, const Polygon& poly, int j,
                                 const TraceConfig& cfg);

struct SideMax {
    Vec2 point{0.0, 0.0}; // on the side
    int side = -1;
    double speed = 0.0;    // |grad u| at the inward sample of the argmax
    bool non_unimodal = false;
    std::vector<double> profile; // sampled |grad u| along the side
};

// Argmax of |grad u| sampled h inward along side k with stride h/2; flags a
// profile that is not increase-then-decrease within tolerance.
SideMax find_side_max(const GroundLimit& limit, const Polygon& poly, int k);

struct MedianResult {
    Streamline line;
    SideMax side_max;
    double straightness = 0.0; // max deviation from the seed-event chord
    bool pass = false;         // straightness <= 3h
};

// Streamline of u from the side maximum M_k (seeded h inward); straightness
// is measured up to the first ridge capture / end of trace.
MedianResult median(const GroundLimit& limit, const Polygon& poly, int k,
                    const TraceConfig& cfg);

struct JoinResult {
    bool met = false;
    Vec2 point{0.0, 0.0}; // closest point on b at the first approach
    double param_a = 0.0;
    double param_b = 0.0;
    int index_a = -1; // point index on a at the first approach
    bool crossing_defect = false;
};

// First parameter along a where the two polylines come within tol; after the
// meet, a transversal side change of a across b is flagged as a crossing.
JoinResult join_detection(const Streamline& a, const Streamline& b, double tol);

struct SpeedReport {
    // (i) u-speed non-decreasing off the contact region (5% of max speed).
    bool u_monotone_applicable = false;
    bool u_monotone_pass = true;
    double u_worst_drop = 0.0;
    // (ii) v-speed non-increasing along the trace (5% of max speed).
    bool v_monotone_applicable = false;
    bool v_monotone_pass = true;
    double v_worst_rise = 0.0;
    // (iii) relative speed variation before the first event <= 5%.
    bool const_prejoin_applicable = false;
    bool const_prejoin_pass = true;
    double prejoin_variation = 0.0;
    double tol_fraction = 0.05;
};

// contact_nodes/contact_radius delimit the estimated contact region; pass
// event_param = parameter of the first join/capture when known (needed for
// verdict iii). Points within 2h of the event are excluded from speed
// statistics: the discrete gradient smears across the crease there.
SpeedReport speed_profile_checks(const Streamline& s, const std::vector<Vec2>& contact_nodes,
                                 double contact_radius,
                                 std::optional<double> event_param = std::nullopt);

struct LevelCrossingReport {
    std::vector<double> levels;
    std::vector<int> counts;
    bool pass = false; // each count == 1, or 0 outside the traced value range
};

LevelCrossingReport level_crossing_check(const Streamline& s,
                                         const std::vector<double>& levels);

struct StabilityReport {
    double seed_distance = 0.0;
    double max_distance = 0.0;
    double worst_ratio = 0.0; // max over matched t of dist/seed_distance
    bool pass = false;        // worst_ratio <= 1.05
};

// Traces the v-field from both seeds up to parameter T and compares positions
// at matched parameters.
StabilityReport stability_check(const ScalarField& field, Vec2 x0, Vec2 y0, double T,
                                const TraceConfig& cfg);

struct ArcMetrics {
    double S = 0.0;          // boundary stub + polyline length up to the event
    double c_est = 0.0;      // median pre-event speed (the arc's constant speed)
    double ratio = 0.0;      // c_est / u(event): the discrete |grad u|/u at y
    double ratio_times_S = 0.0;
    int curvature_sign_changes = 0;
};

// S includes the straight stub from the nearest boundary point to the seed.
// The event is given by its parameter along s and its location y. Throws
// NoEvent when the parameter does not lie inside the traced range.
ArcMetrics arc_metrics(const Streamline& s, const GroundLimit& limit, double event_param,
                       Vec2 event_point, const Polygon& poly);

// CSV rows "t,x,y,speed,value" with 17 significant digits, no timestamps.
void write_streamline_csv(const Streamline& s, const std::string& path);

} // namespace ridgeflow

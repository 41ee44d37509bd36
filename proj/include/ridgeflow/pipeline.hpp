#pragma once

#include "ridgeflow/analysis.hpp"
#include "ridgeflow/eigen.hpp"
#include "ridgeflow/geometry.hpp"
#include "ridgeflow/grid.hpp"
#include "ridgeflow/infinity.hpp"
#include "ridgeflow/streamline.hpp"
#include "ridgeflow/svg.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ridgeflow {

// Everything a full laboratory run needs. Defaults match the desk scale used
// by the acceptance suite except for h (callers choose the resolution).
struct RunConfig {
    std::string polygon_path; // JSON file; see load_polygon for the schema
    double h = 1.0 / 128;
    LadderConfig ladder;

    // Contact estimation: epsilon is the headline threshold; epsilon_list
    // (descending) feeds the measure trend together with a second, coarser
    // grid at trend_h_factor * h solved with trend_ladder.
    double epsilon = 0.05;
    std::vector<double> epsilon_list{0.10, 0.05, 0.025};
    double trend_h_factor = 2.0;
    LadderConfig trend_ladder;

    // Streamline suite: one trace per (side, fraction) pair, seeded h inward
    // of the side point, traced once on u (speed/arc laws) and once on the
    // log-field (capture law).
    std::vector<double> side_fractions{0.15, 0.30, 0.45, 0.55, 0.70};

    // Analysis knobs.
    int random_quads = 20;      // flux loops per polygon
    int constructed_quads = 5;  // streamline/level-arc quads, last one triangular
    std::vector<int> flux_orders{2, 4, 8};
    double lower_gradient_c = 0.5;
    double lower_gradient_min_p = 32.0;
    int concavity_pairs = 10000;
    double concavity_min_p = 32.0;
    double qualify_radius_factor = 2.0; // arc-law events must land within
                                        // factor*h of the contact estimate
    std::uint64_t seed = 12345;

    // Artifacts: empty out_dir writes nothing.
    std::string out_dir;
    RenderOptions render;
};

struct PolygonInput {
    Polygon poly;
    double lambda2_reference = 0.0; // analytic reference when known, else 0
};

// Reads {"name": str, "vertices": [[x,y], ...], "lambda2_reference": num?}
// and validates the polygon. Throws ParseError / geometry errors.
PolygonInput load_polygon(const std::string& path);

// Full run state, retained so callers can inspect any intermediate.
struct PipelineResult {
    VerificationReport report;
    std::vector<std::string> artifacts; // files written, in write order

    std::shared_ptr<const GridSpec> grid;
    HighRidge ridge;
    std::vector<GroundState> ladder;
    GroundLimit limit;
    PotentialSolution potential;
    std::vector<Streamline> attracting; // one per corner, log-field traces
    std::vector<MedianResult> medians;  // one per side
    std::vector<Streamline> generic_u;  // side-seeded u traces
    std::vector<Streamline> generic_v;  // same seeds on the log-field
    ContactEstimate contact;            // at cfg.epsilon on the main grid
    std::string svg_u;
    std::string svg_potential;
};

// Orchestrates geometry -> grid -> ladder -> limits -> potential ->
// streamlines -> analysis -> report (+ artifacts when out_dir is set).
// Deterministic for a fixed config. Any module error is rethrown with a
// stage-qualified message; artifacts written before the failure remain.
PipelineResult run_pipeline(const PolygonInput& input, const RunConfig& cfg);

// Convenience: load_polygon(cfg.polygon_path) then run.
PipelineResult run_pipeline(const RunConfig& cfg);

// Deterministic JSON document for the run: effective config, polygon and
// ridge data, ladder table, every check, artifact list, exit code.
std::string report_json(const PipelineResult& result, const RunConfig& cfg);

} // namespace ridgeflow

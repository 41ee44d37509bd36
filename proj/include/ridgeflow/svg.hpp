#pragma once

#include "ridgeflow/geometry.hpp"
#include "ridgeflow/grid.hpp"

#include <string>
#include <vector>

namespace ridgeflow {

// Level-set polylines {x : field = level} chained from marching-squares
// segments with linear edge interpolation. Cells whose outside corners have a
// ghost reconstruction participate, so contours meet the boundary cleanly.
// Polylines are emitted in deterministic cell order; closed loops repeat
// their first point at the end.
std::vector<std::vector<Vec2>> level_polylines(const ScalarField& field, double level);

enum class CurveClass { Attracting, Median, Generic };

struct RenderCurve {
    std::vector<Vec2> points;
    CurveClass cls = CurveClass::Generic;
};

struct RenderOptions {
    std::vector<double> levels = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    double width = 640.0; // pixel width; height follows the aspect ratio
    double margin = 20.0;
    double level_stroke = 1.0;
    double curve_stroke = 1.6;
};

// Deterministic standalone SVG: polygon outline, level curves of the field,
// streamline polylines colored by class, and the high ridge marked. All
// coordinates use fixed %.4f formatting; no timestamps or generated ids, so
// equal inputs produce byte-identical documents.
std::string render_svg(const ScalarField& field, const Polygon& poly, const HighRidge& ridge,
                       const std::vector<RenderCurve>& curves, const RenderOptions& opts = {});

void write_svg(const std::string& path, const std::string& document);

} // namespace ridgeflow

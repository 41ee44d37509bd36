#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ridgeflow/geometry.hpp"

namespace ridgeflow {

// Node-centered uniform grid over the polygon's bounding box. Nodes strictly
// inside the polygon carry field values; for each inside node the distance to
// the boundary along each axis direction is stored (a "cut") whenever the
// axis neighbor is not inside, so one-sided differences and ghost values can
// use the exact boundary location.
struct GridSpec {
    Polygon poly;
    Vec2 origin;
    double h = 0.0;
    int nx = 0;
    int ny = 0;
    std::vector<std::uint8_t> inside; // nx*ny node mask
    // Per node, distance to the boundary along +x, -x, +y, -y, each in (0, h]
    // when the respective neighbor is missing, h otherwise.
    std::vector<std::array<double, 4>> cut;
    std::vector<double> bdist; // boundary distance at each inside node
    int interior_count = 0;

    int idx(int i, int j) const { return j * nx + i; }
    Vec2 node(int i, int j) const { return {origin.x + i * h, origin.y + j * h}; }
    bool in(int i, int j) const {
        return i >= 0 && i < nx && j >= 0 && j < ny && inside[idx(i, j)] != 0;
    }
};

enum class FieldLabel { u_p, u, v, U };

const char* field_label_name(FieldLabel label);
FieldLabel field_label_from_name(const std::string& name);

// Scalar samples on the inside nodes of a grid; NaN on outside nodes.
// boundary_value is the constant trace used for ghost extension across the
// boundary (0 for u-type fields, 1 is handled separately by the ridge
// constraint, and v-type fields carry the log floor).
struct ScalarField {
    std::shared_ptr<const GridSpec> grid;
    // Dense nx*ny array indexed by GridSpec::idx. Slots outside the interior
    // node set are NaN on purpose so accidental reads surface immediately;
    // iterate with grid->inside[id] (or at(i,j) on interior nodes) only.
    std::vector<double> values;
    double boundary_value = 0.0;
    FieldLabel label = FieldLabel::u_p;

    double at(int i, int j) const { return values[grid->idx(i, j)]; }
    double& at(int i, int j) { return values[grid->idx(i, j)]; }
};

// Builds the grid with spacing h aligned to the bounding box of the polygon.
// Throws ResolutionTooCoarse when the node coverage is too thin to carry a
// field (fewer than 16 grid nodes across the bounding box).
std::shared_ptr<const GridSpec> rasterize(const Polygon& poly, double h);

// Allocates a field on the grid: inside nodes get fill_inside, outside NaN.
ScalarField make_field(std::shared_ptr<const GridSpec> grid, FieldLabel label,
                       double fill_inside = 0.0, double boundary_value = 0.0);

// Linear reconstruction of the ghost value at the outside corner (gi, gj) of
// a cell whose other corners include (ci, gj) and (gi, cj):
//   ghost = w1*f[n1] + w2*f[n2] + wb*boundary_value
// Missing partners get weight 0; with no inside partner, wb = 1.
struct GhostWeights {
    int n1 = -1, n2 = -1;
    double w1 = 0.0, w2 = 0.0, wb = 1.0;
};
GhostWeights ghost_weights(const GridSpec& g, int gi, int gj, int ci, int cj);

// Bilinear interpolation with ghost extension through the boundary datum.
// Throws OutsideDomain for points strictly outside the polygon.
double interpolate(const ScalarField& field, Vec2 x);

// The same bilinear reconstruction as interpolate(), precomputed as a linear
// form: value = cval + sum_k w[k] * values[idx[k]]. Ghost corners contribute
// their partner nodes plus boundary_value weight folded into cval.
struct InterpStencil {
    int n = 0;
    int idx[8] = {0};
    double w[8] = {0.0};
    double cval = 0.0;
};
InterpStencil interpolation_stencil(const GridSpec& g, Vec2 x, double boundary_value);

// Gradient at an arbitrary inside point: bilinear blend of node gradients.
// Node gradients use central differences, falling back to one-sided
// non-uniform differences through the boundary cut where a neighbor is
// missing (v-type fields use interior one-sided differences instead, since
// their boundary trace is a log floor, not a meaningful datum).
Vec2 gradient(const ScalarField& field, Vec2 x);

// Gradient at a grid node (same stencils as gradient()).
Vec2 node_gradient(const ScalarField& field, int i, int j);

// max over samples on the circle of radius r of (f(x) - f(y))/r, i.e. the
// steepest per-radius decrement of the field. k equispaced samples, k >= 64.
// Throws BallNotContained when the closed ball does not fit in the polygon.
double ring_decrement(const ScalarField& field, Vec2 x, double r, int k = 256);

// Extrapolates ring_decrement to radius zero with a linear least-squares fit
// over the given radii (descending). Checks that the decrement sequence is
// non-increasing as r decreases, up to a tolerance of 1e-3 relative to the
// value scale; throws NonMonotoneSequence otherwise.
double s_operator(const ScalarField& field, Vec2 x, const std::vector<double>& radii);

struct ConcavityStats {
    int pairs_tested = 0;
    int violations = 0;
    double worst_deficit = 0.0; // max of midpoint shortfall before tolerance
};

// Samples random node pairs whose lattice midpoint is itself a node (so the
// test sees the discrete field, not the interpolator) and counts midpoint
// concavity violations beyond tol. Deterministic for a fixed seed.
ConcavityStats midpoint_concavity_violations(const ScalarField& field, int n_pairs, double tol,
                                             std::uint64_t seed);

// Plain-text field dump: header "nx ny h ox oy label", then ny rows of nx
// values with 17 significant digits; outside nodes print as nan.
void write_field(const ScalarField& field, const std::string& path);

struct FieldDump {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    Vec2 origin;
    FieldLabel label = FieldLabel::u_p;
    std::vector<double> values;
};

FieldDump read_field_dump(const std::string& path);

// Reattaches dumped values to a freshly rasterized grid, checking that the
// grid shape matches and the NaN pattern agrees with the inside mask.
// Throws GridMismatch on disagreement.
ScalarField attach_dump(std::shared_ptr<const GridSpec> grid, const FieldDump& dump,
                        double boundary_value);

} // namespace ridgeflow

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ridgeflow/errors.hpp"

namespace ridgeflow {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

inline Vec2 normalized(Vec2 a) {
    double n = norm(a);
    if (n == 0.0) fail(errc::invalid_argument, "cannot normalize zero vector");
    return a / n;
}

// Strictly convex polygon with vertices stored counterclockwise.
// Construct through validate_polygon so the invariants hold.
struct Polygon {
    std::vector<Vec2> vertices;
    std::string name;

    int size() const { return static_cast<int>(vertices.size()); }
    Vec2 vertex(int j) const { return vertices[wrap(j)]; }
    // Directed edge from vertex j to vertex j+1.
    Vec2 edge(int j) const { return vertex(j + 1) - vertex(j); }
    // Unit normal of side j pointing into the polygon.
    Vec2 inward_normal(int j) const { return normalized(perp(edge(j))); }

    int wrap(int j) const {
        int n = size();
        int m = j % n;
        return m < 0 ? m + n : m;
    }
};

// Chebyshev set of a convex polygon: the points at maximal distance R from
// the boundary. Always a point or a segment; a == b encodes a point.
// lambda_inf = 1/R is the natural frequency scale of the domain.
struct HighRidge {
    Vec2 a;
    Vec2 b;
    double R = 0.0;
    double lambda_inf = 0.0;

    bool is_point(double tol = 1e-12) const { return dist(a, b) <= tol; }
    double length() const { return dist(a, b); }
};

// Checks vertex count, duplicate vertices, orientation (reversing clockwise
// input), and strict convexity. Throws TooFewVertices, DegenerateEdge or
// NonConvex.
Polygon validate_polygon(std::vector<Vec2> vertices, std::string name = "");

// Minimum over sides of the signed distance to the side's supporting line,
// positive inside. For convex polygons this equals the distance to the
// boundary for interior points and is negative outside.
double signed_inset(const Polygon& poly, Vec2 x);

// True if x lies in the closed polygon (tolerance tol on the signed inset).
bool contains(const Polygon& poly, Vec2 x, double tol = 1e-12);

// Distance from x to the boundary (minimum over sides of the distance to the
// closed side segment). Throws OutsideDomain if x is strictly outside.
double boundary_distance(const Polygon& poly, Vec2 x);

// Nearest point of the boundary to x (x may be anywhere).
Vec2 closest_boundary_point(const Polygon& poly, Vec2 x);

// Chebyshev set, computed exactly by enumerating side triples (circumscribed
// ball centers) and anti-parallel side pairs (ridge segment carriers).
HighRidge chebyshev_set(const Polygon& poly);

// Unit inward bisector direction at corner j. Throws IndexOutOfRange.
Vec2 corner_bisector(const Polygon& poly, int j);

// Largest pairwise vertex distance (equals the set diameter for polygons).
double diameter(const Polygon& poly);

double area(const Polygon& poly);
double perimeter(const Polygon& poly);

// Distance from p to the closed segment [a, b], and the nearest point.
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b);

// Distance along the ray x + t*dir (dir unit) to the boundary, for x inside.
// Returns the smallest t >= 0 at which the ray leaves the polygon.
double ray_exit_distance(const Polygon& poly, Vec2 x, Vec2 dir);

// Smallest t >= 0 with dist(x + t*dir, segment [a,b]) <= rho, or +inf if the
// ray misses the rho-neighborhood. dir must be a unit vector.
double capsule_entry_distance(Vec2 x, Vec2 dir, Vec2 a, Vec2 b, double rho);

// Reads {"name": ..., "vertices": [[x, y], ...]} and validates.
// Throws ParseError on malformed input.
Polygon load_polygon_json(const std::string& path);

// Built-in test domains: "square" (unit square) and "rectangle" ([0,2]x[0,1]).
// Returns false if the name is unknown.
bool builtin_polygon(const std::string& name, Polygon& out);

} // namespace ridgeflow

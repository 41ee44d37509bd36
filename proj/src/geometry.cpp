#include "ridgeflow/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace ridgeflow {

namespace {

constexpr double kDuplicateTol = 1e-12;
const double kInf = std::numeric_limits<double>::infinity();

double signed_area2(const std::vector<Vec2>& v) {
    double s = 0.0;
    int n = static_cast<int>(v.size());
    for (int i = 0; i < n; ++i) s += cross(v[i], v[(i + 1) % n]);
    return s;
}

} // namespace

Polygon validate_polygon(std::vector<Vec2> vertices, std::string name) {
    int n = static_cast<int>(vertices.size());
    if (n < 3)
        fail(errc::too_few_vertices, "polygon needs at least 3 vertices, got " + std::to_string(n));
    for (int i = 0; i < n; ++i) {
        if (dist(vertices[i], vertices[(i + 1) % n]) <= kDuplicateTol)
            fail(errc::degenerate_edge, "vertices " + std::to_string(i) + " and " +
                                            std::to_string((i + 1) % n) + " coincide");
    }
    if (signed_area2(vertices) < 0.0)
        std::reverse(vertices.begin(), vertices.end());
    for (int i = 0; i < n; ++i) {
        Vec2 e0 = vertices[(i + 1) % n] - vertices[i];
        Vec2 e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
        double c = cross(e0, e1);
        // Strict convexity: collinear triples count as failures.
        if (c <= 1e-14 * norm(e0) * norm(e1))
            fail(errc::non_convex, "turn at vertex " + std::to_string((i + 1) % n) +
                                       " is not strictly convex");
    }
    Polygon poly;
    poly.vertices = std::move(vertices);
    poly.name = std::move(name);
    return poly;
}

double signed_inset(const Polygon& poly, Vec2 x) {
    double m = kInf;
    int n = poly.size();
    for (int i = 0; i < n; ++i)
        m = std::min(m, dot(x - poly.vertex(i), poly.inward_normal(i)));
    return m;
}

bool contains(const Polygon& poly, Vec2 x, double tol) {
    return signed_inset(poly, x) >= -tol;
}

double boundary_distance(const Polygon& poly, Vec2 x) {
    double scale = std::max(1.0, diameter(poly));
    if (signed_inset(poly, x) < -1e-12 * scale)
        fail(errc::outside_domain, "point lies outside the polygon");
    double m = kInf;
    int n = poly.size();
    for (int i = 0; i < n; ++i)
        m = std::min(m, point_segment_distance(x, poly.vertex(i), poly.vertex(i + 1)));
    return m;
}

Vec2 closest_boundary_point(const Polygon& poly, Vec2 x) {
    double best = kInf;
    Vec2 bp = poly.vertex(0);
    int n = poly.size();
    for (int i = 0; i < n; ++i) {
        Vec2 q = closest_point_on_segment(x, poly.vertex(i), poly.vertex(i + 1));
        double d = dist(x, q);
        if (d < best) {
            best = d;
            bp = q;
        }
    }
    return bp;
}

HighRidge chebyshev_set(const Polygon& poly) {
    int n = poly.size();
    double diam = diameter(poly);
    double tol_opt = 1e-9 * std::max(1.0, diam);

    std::vector<Vec2> anchors(n);
    std::vector<Vec2> normals(n);
    for (int i = 0; i < n; ++i) {
        anchors[i] = poly.vertex(i);
        normals[i] = poly.inward_normal(i);
    }
    auto inset = [&](Vec2 x) {
        double m = kInf;
        for (int i = 0; i < n; ++i) m = std::min(m, dot(x - anchors[i], normals[i]));
        return m;
    };

    // Triple candidates: centers equidistant from three side lines.
    double R = -kInf;
    std::vector<std::pair<Vec2, double>> cands;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) {
                Vec2 r1 = normals[i] - normals[j];
                Vec2 r2 = normals[j] - normals[k];
                double det = cross(r1, r2);
                if (std::abs(det) < 1e-14) continue;
                double b1 = dot(normals[i], anchors[i]) - dot(normals[j], anchors[j]);
                double b2 = dot(normals[j], anchors[j]) - dot(normals[k], anchors[k]);
                Vec2 x{(b1 * r2.y - b2 * r1.y) / det, (r1.x * b2 - r2.x * b1) / det};
                double val = inset(x);
                cands.push_back({x, val});
                R = std::max(R, val);
            }
        }
    }

    std::vector<Vec2> optima;
    for (const auto& [x, val] : cands)
        if (val >= R - tol_opt) optima.push_back(x);

    // Pair candidates: for anti-parallel sides whose mid-distance attains R,
    // clip the midline against the remaining sides at level R. The clipped
    // endpoints coincide with triple candidates; enumerating them directly
    // makes the ridge segment explicit.
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (dot(normals[i], normals[j]) > -1.0 + 1e-9) continue;
            double gap = -(dot(normals[i], anchors[i]) + dot(normals[j], anchors[j]));
            if (std::abs(0.5 * gap - R) > tol_opt) continue;
            Vec2 u = perp(normals[i]);
            Vec2 x0 = anchors[i] + 0.5 * gap * normals[i];
            double tlo = -kInf, thi = kInf;
            bool feasible = true;
            for (int m = 0; m < n; ++m) {
                if (m == i || m == j) continue;
                double a = dot(u, normals[m]);
                double b = R - dot(x0 - anchors[m], normals[m]);
                if (std::abs(a) < 1e-14) {
                    if (b > tol_opt) feasible = false;
                    continue;
                }
                if (a > 0)
                    tlo = std::max(tlo, b / a);
                else
                    thi = std::min(thi, b / a);
            }
            if (feasible && tlo <= thi && std::isfinite(tlo) && std::isfinite(thi)) {
                optima.push_back(x0 + tlo * u);
                optima.push_back(x0 + thi * u);
            }
        }
    }

    if (optima.empty()) fail(errc::non_convex, "no Chebyshev candidate found");

    // The optimal set of a convex polygon is a point or a segment: take the
    // farthest pair among the (deduplicated) optimal candidates.
    Vec2 e1 = optima[0], e2 = optima[0];
    double best = 0.0;
    for (size_t a = 0; a < optima.size(); ++a) {
        for (size_t b = a; b < optima.size(); ++b) {
            double d = dist(optima[a], optima[b]);
            if (d > best) {
                best = d;
                e1 = optima[a];
                e2 = optima[b];
            }
        }
    }
    if (best <= tol_opt) e2 = e1;

    HighRidge ridge;
    ridge.a = e1;
    ridge.b = e2;
    ridge.R = R;
    ridge.lambda_inf = 1.0 / R;
    return ridge;
}

Vec2 corner_bisector(const Polygon& poly, int j) {
    if (j < 0 || j >= poly.size())
        fail(errc::index_out_of_range, "corner index " + std::to_string(j) + " out of range");
    Vec2 out = normalized(poly.edge(j));
    Vec2 back = normalized(poly.vertex(j - 1) - poly.vertex(j));
    return normalized(out + back);
}

double diameter(const Polygon& poly) {
    double best = 0.0;
    int n = poly.size();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            best = std::max(best, dist(poly.vertex(i), poly.vertex(j)));
    return best;
}

double area(const Polygon& poly) { return 0.5 * signed_area2(poly.vertices); }

double perimeter(const Polygon& poly) {
    double s = 0.0;
    for (int i = 0; i < poly.size(); ++i) s += norm(poly.edge(i));
    return s;
}

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = dot(ab, ab);
    if (len2 == 0.0) return a;
    double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    return dist(p, closest_point_on_segment(p, a, b));
}

double ray_exit_distance(const Polygon& poly, Vec2 x, Vec2 dir) {
    double t_exit = kInf;
    int n = poly.size();
    for (int i = 0; i < n; ++i) {
        Vec2 nrm = poly.inward_normal(i);
        double speed = dot(dir, nrm);
        if (speed < -1e-15) {
            double d = std::max(0.0, dot(x - poly.vertex(i), nrm));
            t_exit = std::min(t_exit, d / (-speed));
        }
    }
    return t_exit;
}

double capsule_entry_distance(Vec2 x, Vec2 dir, Vec2 a, Vec2 b, double rho) {
    if (point_segment_distance(x, a, b) <= rho) return 0.0;
    double best = kInf;

    auto circle_entry = [&](Vec2 c) {
        Vec2 w = x - c;
        double bq = dot(dir, w);
        double cq = dot(w, w) - rho * rho;
        double disc = bq * bq - cq;
        if (disc < 0.0) return;
        double t = -bq - std::sqrt(disc);
        if (t >= 0.0) best = std::min(best, t);
    };
    circle_entry(a);
    double len = dist(a, b);
    if (len > 1e-15) {
        circle_entry(b);
        Vec2 u = (b - a) / len;
        Vec2 m = perp(u);
        double md = dot(m, dir);
        if (std::abs(md) > 1e-15) {
            for (double side : {rho, -rho}) {
                double t = (side - dot(m, x - a)) / md;
                if (t < 0.0) continue;
                double s = dot(x + t * dir - a, u);
                if (s >= 0.0 && s <= len) best = std::min(best, t);
            }
        }
    }
    return best;
}

Polygon load_polygon_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(errc::parse_error, "cannot open polygon file " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        fail(errc::parse_error, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("vertices") || !j["vertices"].is_array())
        fail(errc::parse_error, "polygon file needs a \"vertices\" array");
    std::vector<Vec2> verts;
    for (const auto& item : j["vertices"]) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number())
            fail(errc::parse_error, "each vertex must be a [x, y] number pair");
        verts.push_back({item[0].get<double>(), item[1].get<double>()});
    }
    std::string name = j.value("name", std::string{});
    return validate_polygon(std::move(verts), std::move(name));
}

bool builtin_polygon(const std::string& name, Polygon& out) {
    if (name == "square") {
        out = validate_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, "square");
        return true;
    }
    if (name == "rectangle") {
        out = validate_polygon({{0, 0}, {2, 0}, {2, 1}, {0, 1}}, "rectangle");
        return true;
    }
    return false;
}

} // namespace ridgeflow

#include "ridgeflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <deque>
#include <map>
#include <vector>

namespace ridgeflow {

namespace {

// Value at a lattice corner: the field sample for inside nodes, otherwise a
// ghost reconstruction through the boundary datum. The ghost value must not
// depend on which cell asks (adjacent cells share edge crossings), so it is
// the average of the reconstructions over all diagonal partner choices that
// reach at least one inside node.
double corner_value(const ScalarField& f, int i, int j) {
    const GridSpec& g = *f.grid;
    if (g.in(i, j)) return f.at(i, j);
    double sum = 0.0;
    int cnt = 0;
    for (int dj = -1; dj <= 1; dj += 2) {
        for (int di = -1; di <= 1; di += 2) {
            int ci = i + di, cj = j + dj;
            if (ci < 0 || cj < 0 || ci >= g.nx || cj >= g.ny) continue;
            GhostWeights gw = ghost_weights(g, i, j, ci, cj);
            if (gw.n1 < 0 && gw.n2 < 0) continue;
            double v = gw.wb * f.boundary_value;
            if (gw.n1 >= 0) v += gw.w1 * f.values[gw.n1];
            if (gw.n2 >= 0) v += gw.w2 * f.values[gw.n2];
            sum += v;
            ++cnt;
        }
    }
    return cnt ? sum / cnt : f.boundary_value;
}

struct Seg {
    Vec2 a, b;
};

using Key = std::pair<long long, long long>;

Key quantize(Vec2 p, double h) {
    double s = 1.0 / (1e-7 * h);
    return {static_cast<long long>(std::llround(p.x * s)),
            static_cast<long long>(std::llround(p.y * s))};
}

} // namespace

std::vector<std::vector<Vec2>> level_polylines(const ScalarField& field, double level) {
    const GridSpec& g = *field.grid;
    const double h = g.h;
    std::vector<Seg> segs;

    std::vector<double> corner(static_cast<size_t>(g.nx) * g.ny);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            corner[static_cast<size_t>(j) * g.nx + i] = corner_value(field, i, j);
    auto cv = [&](int i, int j) { return corner[static_cast<size_t>(j) * g.nx + i]; };

    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            bool any_inside = g.in(i, j) || g.in(i + 1, j) || g.in(i, j + 1) || g.in(i + 1, j + 1);
            if (!any_inside) continue;
            double v00 = cv(i, j);
            double v10 = cv(i + 1, j);
            double v11 = cv(i + 1, j + 1);
            double v01 = cv(i, j + 1);
            int m = (v00 >= level ? 1 : 0) | (v10 >= level ? 2 : 0) | (v11 >= level ? 4 : 0) |
                    (v01 >= level ? 8 : 0);
            if (m == 0 || m == 15) continue;

            Vec2 base = g.node(i, j);
            auto edge_point = [&](int e) -> Vec2 {
                switch (e) {
                    case 0: return {base.x + h * (level - v00) / (v10 - v00), base.y};
                    case 1: return {base.x + h, base.y + h * (level - v10) / (v11 - v10)};
                    case 2: return {base.x + h * (level - v01) / (v11 - v01), base.y + h};
                    default: return {base.x, base.y + h * (level - v00) / (v01 - v00)};
                }
            };
            auto emit = [&](int e1, int e2) {
                Seg s{edge_point(e1), edge_point(e2)};
                if (dist(s.a, s.b) > 1e-15) segs.push_back(s);
            };
            switch (m) {
                case 1: case 14: emit(3, 0); break;
                case 2: case 13: emit(0, 1); break;
                case 3: case 12: emit(3, 1); break;
                case 4: case 11: emit(1, 2); break;
                case 6: case 9:  emit(0, 2); break;
                case 7: case 8:  emit(3, 2); break;
                case 5: {
                    double center = 0.25 * (v00 + v10 + v11 + v01);
                    if (center >= level) { emit(0, 1); emit(2, 3); }
                    else { emit(3, 0); emit(1, 2); }
                    break;
                }
                case 10: {
                    double center = 0.25 * (v00 + v10 + v11 + v01);
                    if (center >= level) { emit(3, 0); emit(1, 2); }
                    else { emit(0, 1); emit(2, 3); }
                    break;
                }
                default: break;
            }
        }
    }

    // Chain segments into polylines; always extend with the lowest-index
    // unused segment so the outcome is deterministic.
    std::map<Key, std::vector<int>> at_point;
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        at_point[quantize(segs[s].a, h)].push_back(s);
        at_point[quantize(segs[s].b, h)].push_back(s);
    }
    std::vector<char> used(segs.size(), 0);
    std::vector<std::vector<Vec2>> lines;

    auto next_at = [&](Key k) -> int {
        auto it = at_point.find(k);
        if (it == at_point.end()) return -1;
        for (int s : it->second)
            if (!used[s]) return s;
        return -1;
    };

    for (int s0 = 0; s0 < static_cast<int>(segs.size()); ++s0) {
        if (used[s0]) continue;
        used[s0] = 1;
        std::deque<Vec2> line{segs[s0].a, segs[s0].b};
        bool closed = false;
        for (int dir = 0; dir < 2 && !closed; ++dir) {
            while (true) {
                Vec2 tip = dir == 0 ? line.back() : line.front();
                Key tk = quantize(tip, h);
                if (line.size() > 2 && tk == quantize(dir == 0 ? line.front() : line.back(), h)) {
                    closed = true;
                    break;
                }
                int s = next_at(tk);
                if (s < 0) break;
                used[s] = 1;
                Vec2 other = quantize(segs[s].a, h) == tk ? segs[s].b : segs[s].a;
                if (dir == 0) line.push_back(other);
                else line.push_front(other);
            }
        }
        std::vector<Vec2> out(line.begin(), line.end());
        if (closed && dist(out.front(), out.back()) > 1e-15) out.push_back(out.front());
        lines.push_back(std::move(out));
    }
    return lines;
}

namespace {

void append_fmt(std::string& doc, const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    doc += buf;
}

const char* class_color(CurveClass c) {
    switch (c) {
        case CurveClass::Attracting: return "#cc3344";
        case CurveClass::Median: return "#228844";
        case CurveClass::Generic: return "#777788";
    }
    return "#000000";
}

} // namespace

std::string render_svg(const ScalarField& field, const Polygon& poly, const HighRidge& ridge,
                       const std::vector<RenderCurve>& curves, const RenderOptions& opts) {
    double bx0 = poly.vertices[0].x, bx1 = bx0, by0 = poly.vertices[0].y, by1 = by0;
    for (const Vec2& v : poly.vertices) {
        bx0 = std::min(bx0, v.x);
        bx1 = std::max(bx1, v.x);
        by0 = std::min(by0, v.y);
        by1 = std::max(by1, v.y);
    }
    double scale = (opts.width - 2.0 * opts.margin) / (bx1 - bx0);
    double height = (by1 - by0) * scale + 2.0 * opts.margin;
    auto px = [&](Vec2 p) -> Vec2 {
        return {opts.margin + (p.x - bx0) * scale, opts.margin + (by1 - p.y) * scale};
    };

    std::string doc;
    append_fmt(doc,
               "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
               "viewBox=\"0 0 %.0f %.0f\">\n",
               opts.width, height, opts.width, height);
    append_fmt(doc, "<rect width=\"%.0f\" height=\"%.0f\" fill=\"#ffffff\"/>\n", opts.width,
               height);

    auto path_from = [&](const std::vector<Vec2>& pts, const char* color, double w, bool close) {
        if (pts.size() < 2) return;
        doc += "<path d=\"";
        for (size_t i = 0; i < pts.size(); ++i) {
            Vec2 q = px(pts[i]);
            append_fmt(doc, "%s%.4f %.4f", i == 0 ? "M" : " L", q.x, q.y);
        }
        if (close) doc += " Z";
        append_fmt(doc, "\" fill=\"none\" stroke=\"%s\" stroke-width=\"%.2f\"/>\n", color, w);
    };

    // Level curves, ascending level, emission order within a level.
    std::vector<double> levels = opts.levels;
    std::sort(levels.begin(), levels.end());
    for (double c : levels)
        for (const auto& line : level_polylines(field, c))
            path_from(line, "#4477cc", opts.level_stroke, false);

    // Domain outline above the levels.
    path_from(poly.vertices, "#000000", 1.5, true);

    for (const RenderCurve& rc : curves)
        path_from(rc.points, class_color(rc.cls), opts.curve_stroke, false);

    if (ridge.is_point()) {
        Vec2 q = px(ridge.a);
        append_fmt(doc, "<circle cx=\"%.4f\" cy=\"%.4f\" r=\"3.00\" fill=\"#e69f00\"/>\n", q.x,
                   q.y);
    } else {
        Vec2 qa = px(ridge.a), qb = px(ridge.b);
        append_fmt(doc,
                   "<line x1=\"%.4f\" y1=\"%.4f\" x2=\"%.4f\" y2=\"%.4f\" stroke=\"#e69f00\" "
                   "stroke-width=\"3.00\"/>\n",
                   qa.x, qa.y, qb.x, qb.y);
    }
    doc += "</svg>\n";
    return doc;
}

void write_svg(const std::string& path, const std::string& document) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) fail(errc::parse_error, "cannot open svg for writing: " + path);
    std::fwrite(document.data(), 1, document.size(), f);
    std::fclose(f);
}

} // namespace ridgeflow

#include "ridgeflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace ridgeflow {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Ghost values extrapolate linearly through the boundary datum. The cut
// distance is floored at h/20 so a sliver cut cannot amplify noise.
constexpr double kMinCutRatio = 0.05;

const std::array<Vec2, 4> kAxisDir = {Vec2{1, 0}, Vec2{-1, 0}, Vec2{0, 1}, Vec2{0, -1}};

double ghost_value(const ScalarField& f, int gi, int gj, int ci, int cj) {
    GhostWeights gw = ghost_weights(*f.grid, gi, gj, ci, cj);
    double v = gw.wb * f.boundary_value;
    if (gw.n1 >= 0) v += gw.w1 * f.values[gw.n1];
    if (gw.n2 >= 0) v += gw.w2 * f.values[gw.n2];
    return v;
}

struct CellLocation {
    int i0, j0;
    double tx, ty;
};

CellLocation locate_cell(const GridSpec& g, Vec2 x) {
    double fx = (x.x - g.origin.x) / g.h;
    double fy = (x.y - g.origin.y) / g.h;
    int i0 = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
    int j0 = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
    double tx = std::clamp(fx - i0, 0.0, 1.0);
    double ty = std::clamp(fy - j0, 0.0, 1.0);
    return {i0, j0, tx, ty};
}

void check_inside(const Polygon& poly, Vec2 x, const char* what) {
    double scale = std::max(1.0, diameter(poly));
    if (signed_inset(poly, x) < -1e-12 * scale)
        fail(errc::outside_domain, std::string(what) + " point lies outside the polygon");
}

// Derivative at the center of three samples at offsets -a and +b.
double nonuniform_central(double fm, double f0, double fp, double a, double b) {
    return (a * a * fp - b * b * fm + (b * b - a * a) * f0) / (a * b * (a + b));
}

void format_value(char* buf, size_t n, double v) {
    if (std::isnan(v))
        std::snprintf(buf, n, "nan");
    else
        std::snprintf(buf, n, "%.17g", v);
}

} // namespace

GhostWeights ghost_weights(const GridSpec& g, int gi, int gj, int ci, int cj) {
    GhostWeights gw;
    int cnt = 0;
    double b = 0.0;
    if (g.in(ci, gj)) {
        int dir = gi > ci ? 0 : 1;
        double d = std::max(g.cut[g.idx(ci, gj)][dir], kMinCutRatio * g.h);
        gw.n1 = g.idx(ci, gj);
        gw.w1 = 1.0 - g.h / d;
        b += g.h / d;
        ++cnt;
    }
    if (g.in(gi, cj)) {
        int dir = gj > cj ? 2 : 3;
        double d = std::max(g.cut[g.idx(gi, cj)][dir], kMinCutRatio * g.h);
        gw.n2 = g.idx(gi, cj);
        gw.w2 = 1.0 - g.h / d;
        b += g.h / d;
        ++cnt;
    }
    if (cnt == 0) return gw;
    gw.w1 /= cnt;
    gw.w2 /= cnt;
    gw.wb = b / cnt;
    return gw;
}

const char* field_label_name(FieldLabel label) {
    switch (label) {
    case FieldLabel::u_p: return "u_p";
    case FieldLabel::u:   return "u";
    case FieldLabel::v:   return "v";
    case FieldLabel::U:   return "U";
    }
    return "u_p";
}

FieldLabel field_label_from_name(const std::string& name) {
    if (name == "u_p") return FieldLabel::u_p;
    if (name == "u") return FieldLabel::u;
    if (name == "v") return FieldLabel::v;
    if (name == "U") return FieldLabel::U;
    fail(errc::parse_error, "unknown field label " + name);
}

std::shared_ptr<const GridSpec> rasterize(const Polygon& poly, double h) {
    if (h <= 0.0) fail(errc::invalid_argument, "grid spacing must be positive");
    double xmin = poly.vertices[0].x, xmax = xmin;
    double ymin = poly.vertices[0].y, ymax = ymin;
    for (const Vec2& v : poly.vertices) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    auto grid = std::make_shared<GridSpec>();
    grid->poly = poly;
    grid->origin = {xmin, ymin};
    grid->h = h;
    grid->nx = static_cast<int>(std::floor((xmax - xmin) / h + 1e-9)) + 1;
    grid->ny = static_cast<int>(std::floor((ymax - ymin) / h + 1e-9)) + 1;
    if (grid->nx < 2 || grid->ny < 2 || grid->nx * grid->ny < 16)
        fail(errc::resolution_too_coarse,
             "grid has only " + std::to_string(grid->nx * grid->ny) + " nodes, need at least 16");

    int total = grid->nx * grid->ny;
    grid->inside.assign(total, 0);
    grid->cut.assign(total, {h, h, h, h});
    grid->bdist.assign(total, 0.0);
    double scale = std::max(1.0, diameter(poly));
    for (int j = 0; j < grid->ny; ++j) {
        for (int i = 0; i < grid->nx; ++i) {
            Vec2 p = grid->node(i, j);
            if (signed_inset(poly, p) > 1e-12 * scale) {
                grid->inside[grid->idx(i, j)] = 1;
                ++grid->interior_count;
            }
        }
    }
    if (grid->interior_count == 0)
        fail(errc::resolution_too_coarse, "no grid node falls inside the polygon");

    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int j = 0; j < grid->ny; ++j) {
        for (int i = 0; i < grid->nx; ++i) {
            int id = grid->idx(i, j);
            if (!grid->inside[id]) continue;
            Vec2 p = grid->node(i, j);
            grid->bdist[id] = boundary_distance(poly, p);
            for (int d = 0; d < 4; ++d) {
                if (grid->in(i + di[d], j + dj[d])) continue;
                double t = ray_exit_distance(poly, p, kAxisDir[d]);
                grid->cut[id][d] = std::clamp(t, 1e-300, h);
            }
        }
    }
    return grid;
}

ScalarField make_field(std::shared_ptr<const GridSpec> grid, FieldLabel label, double fill_inside,
                       double boundary_value) {
    ScalarField f;
    f.grid = std::move(grid);
    f.label = label;
    f.boundary_value = boundary_value;
    int total = f.grid->nx * f.grid->ny;
    f.values.assign(total, kNaN);
    for (int id = 0; id < total; ++id)
        if (f.grid->inside[id]) f.values[id] = fill_inside;
    return f;
}

double interpolate(const ScalarField& field, Vec2 x) {
    const GridSpec& g = *field.grid;
    check_inside(g.poly, x, "interpolation");
    auto [i0, j0, tx, ty] = locate_cell(g, x);
    double c[2][2];
    for (int dj = 0; dj < 2; ++dj) {
        for (int di = 0; di < 2; ++di) {
            int i = i0 + di, j = j0 + dj;
            c[dj][di] = g.in(i, j) ? field.at(i, j)
                                   : ghost_value(field, i, j, i0 + 1 - di, j0 + 1 - dj);
        }
    }
    double lo = c[0][0] * (1 - tx) + c[0][1] * tx;
    double hi = c[1][0] * (1 - tx) + c[1][1] * tx;
    return lo * (1 - ty) + hi * ty;
}

InterpStencil interpolation_stencil(const GridSpec& g, Vec2 x, double boundary_value) {
    check_inside(g.poly, x, "interpolation");
    auto [i0, j0, tx, ty] = locate_cell(g, x);
    InterpStencil st;
    auto add = [&](int node, double w) {
        if (w == 0.0) return;
        for (int k = 0; k < st.n; ++k)
            if (st.idx[k] == node) {
                st.w[k] += w;
                return;
            }
        st.idx[st.n] = node;
        st.w[st.n] = w;
        ++st.n;
    };
    const double wc[2][2] = {{(1 - tx) * (1 - ty), tx * (1 - ty)},
                             {(1 - tx) * ty, tx * ty}};
    for (int dj = 0; dj < 2; ++dj) {
        for (int di = 0; di < 2; ++di) {
            double W = wc[dj][di];
            if (W == 0.0) continue;
            int i = i0 + di, j = j0 + dj;
            if (g.in(i, j)) {
                add(g.idx(i, j), W);
                continue;
            }
            GhostWeights gw = ghost_weights(g, i, j, i0 + 1 - di, j0 + 1 - dj);
            if (gw.n1 >= 0) add(gw.n1, W * gw.w1);
            if (gw.n2 >= 0) add(gw.n2, W * gw.w2);
            st.cval += W * gw.wb * boundary_value;
        }
    }
    return st;
}

Vec2 node_gradient(const ScalarField& field, int i, int j) {
    const GridSpec& g = *field.grid;
    if (!g.in(i, j)) fail(errc::outside_domain, "node gradient requested at a non-interior node");
    const auto& cuts = g.cut[g.idx(i, j)];
    double f0 = field.at(i, j);
    bool interior_one_sided = field.label == FieldLabel::v;

    auto axis_derivative = [&](int dplus, int dminus, bool plus_in, bool minus_in, double fplus,
                               double fminus, double fplus2, double fminus2, bool plus2_in,
                               bool minus2_in) {
        double h = g.h;
        if (plus_in && minus_in) return (fplus - fminus) / (2.0 * h);
        if (interior_one_sided) {
            // The boundary trace of a log field is a floor, not data: use
            // interior one-sided differences (second order when possible).
            if (plus_in) {
                if (plus2_in) return (-3.0 * f0 + 4.0 * fplus - fplus2) / (2.0 * h);
                return (fplus - f0) / h;
            }
            if (minus_in) {
                if (minus2_in) return (3.0 * f0 - 4.0 * fminus + fminus2) / (2.0 * h);
                return (f0 - fminus) / h;
            }
            return 0.0;
        }
        double bval = field.boundary_value;
        if (plus_in) {
            double d = cuts[dminus];
            return nonuniform_central(bval, f0, fplus, d, h);
        }
        if (minus_in) {
            double d = cuts[dplus];
            return nonuniform_central(fminus, f0, bval, h, d);
        }
        return nonuniform_central(bval, f0, bval, cuts[dminus], cuts[dplus]);
    };

    auto val = [&](int ii, int jj) { return g.in(ii, jj) ? field.at(ii, jj) : 0.0; };

    double gx = axis_derivative(0, 1, g.in(i + 1, j), g.in(i - 1, j), val(i + 1, j), val(i - 1, j),
                                val(i + 2, j), val(i - 2, j), g.in(i + 2, j), g.in(i - 2, j));
    double gy = axis_derivative(2, 3, g.in(i, j + 1), g.in(i, j - 1), val(i, j + 1), val(i, j - 1),
                                val(i, j + 2), val(i, j - 2), g.in(i, j + 2), g.in(i, j - 2));
    return {gx, gy};
}

Vec2 gradient(const ScalarField& field, Vec2 x) {
    const GridSpec& g = *field.grid;
    check_inside(g.poly, x, "gradient");
    auto [i0, j0, tx, ty] = locate_cell(g, x);
    double w[2][2] = {{(1 - tx) * (1 - ty), tx * (1 - ty)}, {(1 - tx) * ty, tx * ty}};
    Vec2 acc{0, 0};
    double wsum = 0.0;
    for (int dj = 0; dj < 2; ++dj) {
        for (int di = 0; di < 2; ++di) {
            if (!g.in(i0 + di, j0 + dj)) continue;
            Vec2 ng = node_gradient(field, i0 + di, j0 + dj);
            acc = acc + w[dj][di] * ng;
            wsum += w[dj][di];
        }
    }
    if (wsum > 1e-12) return acc / wsum;

    // Sliver cell with no interior corner: difference the interpolant.
    double d = 0.25 * g.h;
    auto probe = [&](Vec2 dir) {
        Vec2 p1 = x + d * dir, p0 = x - d * dir;
        bool in1 = contains(g.poly, p1), in0 = contains(g.poly, p0);
        if (in1 && in0) return (interpolate(field, p1) - interpolate(field, p0)) / (2 * d);
        if (in1) return (interpolate(field, p1) - interpolate(field, x)) / d;
        if (in0) return (interpolate(field, x) - interpolate(field, p0)) / d;
        return 0.0;
    };
    return {probe({1, 0}), probe({0, 1})};
}

double ring_decrement(const ScalarField& field, Vec2 x, double r, int k) {
    if (k < 64) fail(errc::invalid_argument, "ring_decrement needs k >= 64 samples");
    if (r <= 0.0) fail(errc::invalid_argument, "ring radius must be positive");
    double bd = boundary_distance(field.grid->poly, x);
    if (bd < r - 1e-12)
        fail(errc::ball_not_contained, "ball of radius " + std::to_string(r) +
                                           " exceeds boundary distance " + std::to_string(bd));
    double f0 = interpolate(field, x);
    double best = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < k; ++m) {
        double th = 2.0 * M_PI * m / k;
        Vec2 y{x.x + r * std::cos(th), x.y + r * std::sin(th)};
        best = std::max(best, (f0 - interpolate(field, y)) / r);
    }
    return best;
}

double s_operator(const ScalarField& field, Vec2 x, const std::vector<double>& radii) {
    if (radii.size() < 2) fail(errc::invalid_argument, "s_operator needs at least two radii");
    for (size_t i = 1; i < radii.size(); ++i)
        if (radii[i] >= radii[i - 1])
            fail(errc::invalid_argument, "s_operator radii must be strictly decreasing");

    std::vector<double> s(radii.size());
    for (size_t i = 0; i < radii.size(); ++i) s[i] = ring_decrement(field, x, radii[i]);

    for (size_t i = 1; i < s.size(); ++i) {
        double tol = 1e-3 * std::max(1.0, std::abs(s[i - 1]));
        if (s[i] > s[i - 1] + tol)
            fail(errc::non_monotone_sequence,
                 "ring decrements increase as the radius shrinks (" + std::to_string(s[i - 1]) +
                     " -> " + std::to_string(s[i]) + ")");
    }

    // Least-squares line s = a + b*r; return the r -> 0 intercept.
    double n = static_cast<double>(radii.size());
    double sr = 0, ss = 0, srr = 0, srs = 0;
    for (size_t i = 0; i < radii.size(); ++i) {
        sr += radii[i];
        ss += s[i];
        srr += radii[i] * radii[i];
        srs += radii[i] * s[i];
    }
    double det = n * srr - sr * sr;
    if (std::abs(det) < 1e-30) fail(errc::invalid_argument, "degenerate radii for the fit");
    return (ss * srr - sr * srs) / det;
}

ConcavityStats midpoint_concavity_violations(const ScalarField& field, int n_pairs, double tol,
                                             std::uint64_t seed) {
    const GridSpec& g = *field.grid;
    std::vector<std::pair<int, int>> nodes;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.in(i, j)) nodes.push_back({i, j});

    ConcavityStats stats;
    if (nodes.size() < 3) return stats;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, nodes.size() - 1);

    long attempts = 0;
    long max_attempts = 200L * n_pairs;
    while (stats.pairs_tested < n_pairs && attempts < max_attempts) {
        ++attempts;
        auto [ia, ja] = nodes[pick(rng)];
        auto [ib, jb] = nodes[pick(rng)];
        if (ia == ib && ja == jb) continue;
        if ((ia + ib) % 2 != 0 || (ja + jb) % 2 != 0) continue;
        int im = (ia + ib) / 2, jm = (ja + jb) / 2;
        if (!g.in(im, jm)) continue;
        ++stats.pairs_tested;
        double mid = 0.5 * (field.at(ia, ja) + field.at(ib, jb));
        double deficit = mid - field.at(im, jm);
        stats.worst_deficit = std::max(stats.worst_deficit, deficit);
        if (deficit > tol) ++stats.violations;
    }
    return stats;
}

void write_field(const ScalarField& field, const std::string& path) {
    const GridSpec& g = *field.grid;
    std::ofstream out(path);
    if (!out) fail(errc::parse_error, "cannot open " + path + " for writing");
    char buf[64];
    out << g.nx << ' ' << g.ny << ' ';
    format_value(buf, sizeof buf, g.h);
    out << buf << ' ';
    format_value(buf, sizeof buf, g.origin.x);
    out << buf << ' ';
    format_value(buf, sizeof buf, g.origin.y);
    out << buf << ' ' << field_label_name(field.label) << '\n';
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            format_value(buf, sizeof buf, field.values[g.idx(i, j)]);
            out << buf << (i + 1 == g.nx ? '\n' : ' ');
        }
    }
}

FieldDump read_field_dump(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::parse_error, "cannot open " + path);
    FieldDump dump;
    std::string label;
    if (!(in >> dump.nx >> dump.ny >> dump.h >> dump.origin.x >> dump.origin.y >> label))
        fail(errc::parse_error, "malformed field dump header in " + path);
    dump.label = field_label_from_name(label);
    if (dump.nx <= 0 || dump.ny <= 0)
        fail(errc::parse_error, "non-positive grid shape in " + path);
    dump.values.reserve(static_cast<size_t>(dump.nx) * dump.ny);
    std::string tok;
    for (long need = static_cast<long>(dump.nx) * dump.ny; need > 0; --need) {
        if (!(in >> tok)) fail(errc::parse_error, "field dump " + path + " ends early");
        dump.values.push_back(std::strtod(tok.c_str(), nullptr));
    }
    return dump;
}

ScalarField attach_dump(std::shared_ptr<const GridSpec> grid, const FieldDump& dump,
                        double boundary_value) {
    const GridSpec& g = *grid;
    if (g.nx != dump.nx || g.ny != dump.ny || std::abs(g.h - dump.h) > 1e-12 ||
        std::abs(g.origin.x - dump.origin.x) > 1e-12 ||
        std::abs(g.origin.y - dump.origin.y) > 1e-12)
        fail(errc::grid_mismatch, "dump header does not match the rasterized grid");
    for (int id = 0; id < g.nx * g.ny; ++id) {
        bool finite = std::isfinite(dump.values[id]);
        if (finite != (g.inside[id] != 0))
            fail(errc::grid_mismatch, "dump NaN pattern disagrees with the grid inside mask");
    }
    ScalarField f;
    f.grid = std::move(grid);
    f.values = dump.values;
    f.label = dump.label;
    f.boundary_value = boundary_value;
    return f;
}

} // namespace ridgeflow

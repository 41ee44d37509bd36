#include "ridgeflow/analysis.hpp"

#include "ridgeflow/errors.hpp"
#include "ridgeflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace ridgeflow {

namespace {

// ---- polyline utilities (arc-length parameterized) ----

std::vector<double> cumulative(const std::vector<Vec2>& pts) {
    std::vector<double> cum(pts.size(), 0.0);
    for (size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + dist(pts[i - 1], pts[i]);
    return cum;
}

struct PLHit {
    double d = std::numeric_limits<double>::infinity();
    Vec2 point{0.0, 0.0};
    int seg = 0;
    double param = 0.0; // arc length at the hit
};

PLHit closest_on(const std::vector<Vec2>& pts, const std::vector<double>& cum, Vec2 p) {
    PLHit best;
    if (pts.size() == 1) {
        best.d = dist(p, pts[0]);
        best.point = pts[0];
        return best;
    }
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        Vec2 q = closest_point_on_segment(p, pts[i], pts[i + 1]);
        double d = dist(p, q);
        if (d < best.d) {
            best.d = d;
            best.point = q;
            best.seg = static_cast<int>(i);
            best.param = cum[i] + dist(pts[i], q);
        }
    }
    return best;
}

Vec2 point_at_param(const std::vector<Vec2>& pts, const std::vector<double>& cum, double t) {
    if (pts.size() == 1) return pts[0];
    t = std::clamp(t, 0.0, cum.back());
    auto it = std::upper_bound(cum.begin(), cum.end(), t);
    int i = std::clamp(static_cast<int>(it - cum.begin()) - 1, 0,
                       static_cast<int>(pts.size()) - 2);
    double seg = cum[i + 1] - cum[i];
    double f = seg > 0.0 ? (t - cum[i]) / seg : 0.0;
    return pts[i] + f * (pts[i + 1] - pts[i]);
}

double dist_to_curves(const std::vector<std::vector<Vec2>>& curves,
                      const std::vector<std::vector<double>>& cums, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < curves.size(); ++c)
        best = std::min(best, closest_on(curves[c], cums[c], p).d);
    return best;
}

double dist_to_ridge(const HighRidge& ridge, Vec2 p) {
    return ridge.is_point() ? dist(p, ridge.a) : point_segment_distance(p, ridge.a, ridge.b);
}

double dist_to_points(const std::vector<Vec2>& pts, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& q : pts) best = std::min(best, dist(p, q));
    return best;
}

} // namespace

// ---------------------------------------------------------------------------
// Contact-set estimation
// ---------------------------------------------------------------------------

std::vector<ContactEstimate> contact_estimate_sweep(const GroundLimit& limit,
                                                    const Polygon& poly, const HighRidge& ridge,
                                                    const std::vector<double>& eps_list) {
    if (eps_list.empty()) fail(errc::invalid_argument, "need at least one epsilon");
    const GridSpec& g = *limit.u.grid;
    // Level floor of the boundary zone: below c0 the slope criterion cannot
    // bind, since log(1/c0) exceeds 2*diameter*lambda.
    const double c0 = std::exp(-2.2 * diameter(poly) * ridge.lambda_inf);
    const std::vector<double> radii = {4.0 * g.h, 3.0 * g.h, 2.0 * g.h};

    std::vector<ContactEstimate> out(eps_list.size());
    for (size_t e = 0; e < eps_list.size(); ++e) {
        out[e].epsilon = eps_list[e];
        out[e].lambda_inf = ridge.lambda_inf;
        out[e].h = g.h;
        out[e].c0 = c0;
    }

    int tested = 0, skipped = 0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (!g.in(i, j)) continue;
            int n = g.idx(i, j);
            if (g.bdist[n] <= radii[0] + 1e-12) continue; // probe ball must fit
            if (limit.u.values[n] <= c0) continue;        // boundary zone level floor
            ++tested;
            double s = 0.0;
            try {
                s = s_operator(limit.v, g.node(i, j), radii);
            } catch (const error&) {
                ++skipped;
                continue;
            }
            for (size_t e = 0; e < eps_list.size(); ++e) {
                if (s <= ridge.lambda_inf * (1.0 + eps_list[e])) {
                    out[e].nodes.push_back(g.node(i, j));
                    out[e].s_values.push_back(s);
                }
            }
        }
    }
    for (ContactEstimate& ce : out) {
        ce.tested = tested;
        ce.skipped = skipped;
        ce.measure = static_cast<double>(ce.nodes.size()) * g.h * g.h;
    }
    return out;
}

ContactEstimate contact_estimate(const GroundLimit& limit, const Polygon& poly,
                                 const HighRidge& ridge, double epsilon) {
    return contact_estimate_sweep(limit, poly, ridge, {epsilon}).front();
}

CoverReport contact_within_attracting(const ContactEstimate& contact,
                                      const std::vector<std::vector<Vec2>>& curves,
                                      const HighRidge& ridge, double threshold) {
    CoverReport r;
    r.threshold = threshold;
    r.node_count = static_cast<int>(contact.nodes.size());
    std::vector<std::vector<double>> cums;
    cums.reserve(curves.size());
    for (const auto& c : curves) cums.push_back(cumulative(c));

    double sum = 0.0;
    for (const Vec2& p : contact.nodes) {
        double d = std::min(dist_to_curves(curves, cums, p), dist_to_ridge(ridge, p));
        r.max_distance = std::max(r.max_distance, d);
        sum += d;
    }
    if (r.node_count > 0) r.mean_distance = sum / r.node_count;
    r.pass = r.max_distance <= threshold;
    return r;
}

TrendReport area_zero_trend(const std::vector<std::vector<ContactEstimate>>& table,
                            const std::vector<double>& eps_list,
                            const std::vector<double>& h_list) {
    TrendReport r;
    r.eps_list = eps_list;
    r.h_list = h_list;
    if (table.size() != h_list.size()) fail(errc::grid_mismatch, "trend table rows != h_list");
    for (const auto& row : table)
        if (row.size() != eps_list.size()) fail(errc::grid_mismatch, "trend table cols != eps_list");

    r.measure.resize(table.size());
    for (size_t ih = 0; ih < table.size(); ++ih)
        for (const ContactEstimate& ce : table[ih]) r.measure[ih].push_back(ce.measure);

    r.eps_monotone = true;
    for (const auto& row : r.measure)
        for (size_t c = 0; c + 1 < row.size(); ++c)
            if (row[c + 1] > row[c] + 1e-15) r.eps_monotone = false;

    r.quantum = h_list.empty() ? 0.0 : h_list.front() * h_list.front();
    r.h_monotone = true;
    for (size_t ih = 0; ih + 1 < r.measure.size(); ++ih) {
        double q = h_list[ih] * h_list[ih]; // one cell of the coarser grid
        for (size_t c = 0; c < eps_list.size(); ++c)
            if (r.measure[ih + 1][c] > r.measure[ih][c] + q) r.h_monotone = false;
    }
    r.pass = r.eps_monotone && r.h_monotone;
    return r;
}

LevelSweepReport level_arc_sweep_check(const GroundLimit& limit, const ContactEstimate& contact,
                                       const std::vector<std::vector<Vec2>>& curves,
                                       double threshold) {
    LevelSweepReport r;
    r.threshold = threshold;
    const double h = limit.u.grid->h;
    const Polygon& poly = limit.u.grid->poly;
    std::vector<std::vector<double>> cums;
    for (const auto& c : curves) cums.push_back(cumulative(c));

    std::vector<Vec2> off_nodes;
    for (const Vec2& z : contact.nodes)
        if (dist_to_curves(curves, cums, z) > threshold) off_nodes.push_back(z);
    r.nodes_tested = static_cast<int>(off_nodes.size());
    if (off_nodes.empty()) {
        r.vacuous = true;
        r.pass = true;
        return r;
    }

    const int max_steps = static_cast<int>(std::ceil(8.0 * diameter(poly) / h));
    for (const Vec2& z : off_nodes) {
        double target = interpolate(limit.u, z);
        Vec2 x = z;
        double sign = 0.0;
        for (int step = 0; step < max_steps; ++step) {
            Vec2 gr = gradient(limit.u, x);
            double gn = norm(gr);
            if (gn < 1e-12) break;
            Vec2 t = perp(gr) / gn;
            if (sign == 0.0) {
                // Pick the direction that approaches the curves.
                Vec2 fwd = x + (0.5 * h) * t, bwd = x - (0.5 * h) * t;
                sign = dist_to_curves(curves, cums, fwd) <= dist_to_curves(curves, cums, bwd)
                           ? 1.0
                           : -1.0;
            }
            Vec2 x2 = x + (sign * 0.5 * h) * t;
            for (int it = 0; it < 2; ++it) { // reproject onto the level
                if (!contains(poly, x2, 0.0)) break;
                Vec2 g2 = gradient(limit.u, x2);
                double n2 = dot(g2, g2);
                if (n2 < 1e-18) break;
                x2 = x2 + ((target - interpolate(limit.u, x2)) / n2) * g2;
            }
            if (!contains(poly, x2, 0.0) || boundary_distance(poly, x2) < 2.0 * h) break;
            x = x2;
            r.worst_gap = std::max(r.worst_gap, dist_to_points(contact.nodes, x));
            if (dist_to_curves(curves, cums, x) <= threshold) break;
        }
    }
    r.pass = r.worst_gap <= threshold;
    return r;
}

// ---------------------------------------------------------------------------
// Flux integral
// ---------------------------------------------------------------------------

double polyline_length(const std::vector<Vec2>& pts) {
    double L = 0.0;
    for (size_t i = 1; i < pts.size(); ++i) L += dist(pts[i - 1], pts[i]);
    return L;
}

double gauss_integral(const ScalarField& field, const std::vector<Vec2>& loop, int m,
                      const Polygon& poly, const HighRidge& ridge,
                      const std::vector<Vec2>& avoid, double clearance) {
    if (m < 2) fail(errc::invalid_argument, "flux exponent must be >= 2");
    std::vector<Vec2> pts = loop;
    if (pts.size() >= 2 && dist(pts.front(), pts.back()) < 1e-12) pts.pop_back();
    if (pts.size() < 3) fail(errc::invalid_argument, "closed loop needs at least 3 vertices");

    double area2 = 0.0;
    for (size_t i = 0; i < pts.size(); ++i)
        area2 += cross(pts[i], pts[(i + 1) % pts.size()]);
    if (area2 < 0.0) std::reverse(pts.begin(), pts.end());

    const double h = field.grid->h;
    auto check_clear = [&](Vec2 p) {
        if (!contains(poly, p, 0.0) || boundary_distance(poly, p) < clearance)
            fail(errc::clearance_violated, "loop sample too close to the boundary");
        if (dist_to_ridge(ridge, p) < clearance)
            fail(errc::clearance_violated, "loop sample too close to the high ridge");
        if (!avoid.empty() && dist_to_points(avoid, p) < clearance)
            fail(errc::clearance_violated, "loop sample too close to the avoided set");
    };

    double total = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        Vec2 a = pts[i], b = pts[(i + 1) % pts.size()];
        double len = dist(a, b);
        if (len < 1e-15) continue;
        Vec2 t = (b - a) / len;
        Vec2 n_out{t.y, -t.x}; // outward for counterclockwise orientation
        int K = std::max(1, static_cast<int>(std::ceil(len / (0.5 * h))));
        double ds = len / K;
        for (int k = 0; k <= K; ++k) {
            Vec2 x = a + (k * ds) * t;
            check_clear(x);
            Vec2 gr = gradient(field, x);
            double w = std::pow(dot(gr, gr), 0.5 * (m - 2));
            double integrand = w * dot(gr, n_out);
            total += (k == 0 || k == K ? 0.5 : 1.0) * integrand * ds;
        }
    }
    return total;
}

std::vector<std::vector<Vec2>> random_admissible_quads(const Polygon& poly,
                                                       const HighRidge& ridge,
                                                       const std::vector<Vec2>& avoid,
                                                       double clearance, int n,
                                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double x0 = poly.vertices[0].x, x1 = x0, y0 = poly.vertices[0].y, y1 = y0;
    for (const Vec2& v : poly.vertices) {
        x0 = std::min(x0, v.x);
        x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y);
        y1 = std::max(y1, v.y);
    }
    const double diam = diameter(poly);
    std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
    std::uniform_real_distribution<double> usize(0.03, 0.10), uang(0.0, 6.283185307179586);
    std::uniform_real_distribution<double> ujit(-0.25, 0.25), urad(0.6, 1.0);

    std::vector<std::vector<Vec2>> out;
    int guard = 0;
    while (static_cast<int>(out.size()) < n && ++guard < 200000) {
        Vec2 c{ux(rng), uy(rng)};
        double r_out = usize(rng) * diam;
        if (!contains(poly, c, 0.0)) continue;
        if (boundary_distance(poly, c) < r_out + clearance) continue;
        if (dist_to_ridge(ridge, c) < r_out + clearance) continue;
        if (!avoid.empty() && dist_to_points(avoid, c) < r_out + clearance) continue;
        double th0 = uang(rng);
        std::vector<Vec2> quad;
        for (int k = 0; k < 4; ++k) {
            double th = th0 + k * 1.5707963267948966 + ujit(rng);
            double rr = urad(rng) * r_out;
            quad.push_back(c + Vec2{rr * std::cos(th), rr * std::sin(th)});
        }
        out.push_back(std::move(quad));
    }
    if (static_cast<int>(out.size()) < n)
        fail(errc::empty_region, "could not place the requested admissible quadrilaterals");
    return out;
}

// ---------------------------------------------------------------------------
// Quadrilateral rule
// ---------------------------------------------------------------------------

ArcMonotone arc_speed_monotone(const ScalarField& field, const std::vector<Vec2>& arc,
                               double tol_fraction) {
    ArcMonotone r;
    if (arc.size() < 2) {
        r.monotone = true;
        r.increasing = true;
        return r;
    }
    std::vector<double> sp;
    sp.reserve(arc.size());
    double max_sp = 0.0;
    for (const Vec2& p : arc) {
        double s = norm(gradient(field, p));
        sp.push_back(s);
        max_sp = std::max(max_sp, s);
    }
    double viol_inc = 0.0, run_max = -std::numeric_limits<double>::infinity();
    double viol_dec = 0.0, run_min = std::numeric_limits<double>::infinity();
    for (double s : sp) {
        if (std::isfinite(run_max)) viol_inc = std::max(viol_inc, run_max - s);
        run_max = std::max(run_max, s);
        if (std::isfinite(run_min)) viol_dec = std::max(viol_dec, s - run_min);
        run_min = std::min(run_min, s);
    }
    r.increasing = viol_inc <= viol_dec;
    r.worst_violation = std::min(viol_inc, viol_dec);
    r.monotone = r.worst_violation <= tol_fraction * max_sp;
    return r;
}

namespace {

struct Crossing {
    int index = 0;
    double frac = 0.0;
    Vec2 point{0.0, 0.0};
    double param = 0.0;
};

double value_as_u(const Streamline& s, int i) {
    return s.field_label == FieldLabel::v ? std::exp(s.values[i]) : s.values[i];
}

bool level_crossing(const Streamline& s, double lvl, Crossing& out) {
    int n = static_cast<int>(s.points.size());
    if (n == 0) return false;
    if (value_as_u(s, 0) > lvl || value_as_u(s, n - 1) < lvl) return false;
    for (int i = 0; i + 1 < n; ++i) {
        double a = value_as_u(s, i), b = value_as_u(s, i + 1);
        if (a <= lvl && lvl <= b) {
            double t = b > a ? (lvl - a) / (b - a) : 0.0;
            out.index = i;
            out.frac = t;
            out.point = s.points[i] + t * (s.points[i + 1] - s.points[i]);
            out.param = s.params[i] + t * (s.params[i + 1] - s.params[i]);
            return true;
        }
    }
    return false;
}

std::vector<Vec2> streamline_sub_arc(const Streamline& s, const Crossing& a, const Crossing& b) {
    std::vector<Vec2> out{a.point};
    for (int i = a.index + 1; i <= b.index; ++i)
        if (dist(out.back(), s.points[i]) > 1e-12) out.push_back(s.points[i]);
    if (dist(out.back(), b.point) > 1e-12) out.push_back(b.point);
    if (out.size() < 2) out.push_back(b.point);
    return out;
}

// Extracts the arc of the level set joining pb to pe, resampled at ~h/2.
std::vector<Vec2> level_arc_between(const ScalarField& u, double lvl, Vec2 pb, Vec2 pe,
                                    double h) {
    auto loops = level_polylines(u, lvl);
    if (loops.empty()) fail(errc::quad_construction_failed, "level set is empty");
    int best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    PLHit A, B;
    std::vector<double> best_cum;
    for (size_t c = 0; c < loops.size(); ++c) {
        std::vector<double> cum = cumulative(loops[c]);
        PLHit a = closest_on(loops[c], cum, pb);
        PLHit b = closest_on(loops[c], cum, pe);
        if (a.d + b.d < best_score) {
            best_score = a.d + b.d;
            best = static_cast<int>(c);
            A = a;
            B = b;
            best_cum = std::move(cum);
        }
    }
    if (A.d > 2.0 * h || B.d > 2.0 * h)
        fail(errc::quad_construction_failed, "level arc does not close onto the crossings");
    const std::vector<Vec2>& loop = loops[best];
    const double L = best_cum.back();
    bool closed = loop.size() > 2 && dist(loop.front(), loop.back()) < 1e-12;

    double start = A.param, length = 0.0, dir = 1.0;
    if (closed) {
        double fwd = B.param - A.param;
        if (fwd < 0.0) fwd += L;
        if (fwd <= L - fwd) {
            length = fwd;
        } else {
            length = L - fwd;
            dir = -1.0;
        }
    } else {
        length = std::abs(B.param - A.param);
        dir = B.param >= A.param ? 1.0 : -1.0;
    }
    int K = std::max(2, static_cast<int>(std::ceil(length / (0.5 * h))));
    std::vector<Vec2> arc;
    arc.reserve(K + 1);
    for (int k = 0; k <= K; ++k) {
        double t = start + dir * (length * k / K);
        if (closed) {
            t = std::fmod(t, L);
            if (t < 0.0) t += L;
        }
        arc.push_back(point_at_param(loop, best_cum, t));
    }
    arc.front() = pb;
    arc.back() = pe;
    return arc;
}

Streamline truncate_at_value(const Streamline& s, double lvl) {
    Crossing c;
    if (!level_crossing(s, lvl, c)) return s;
    Streamline t = s;
    int keep = c.index + 1;
    t.points.assign(s.points.begin(), s.points.begin() + keep);
    t.params.assign(s.params.begin(), s.params.begin() + keep);
    t.speeds.assign(s.speeds.begin(), s.speeds.begin() + keep);
    t.values.assign(s.values.begin(), s.values.begin() + keep);
    if (dist(t.points.back(), c.point) > 1e-12) {
        t.points.push_back(c.point);
        t.params.push_back(c.param);
        double f = c.frac;
        t.speeds.push_back(s.speeds[c.index] + f * (s.speeds[c.index + 1] - s.speeds[c.index]));
        t.values.push_back(s.values[c.index] + f * (s.values[c.index + 1] - s.values[c.index]));
    }
    t.arc_length = polyline_length(t.points);
    return t;
}

} // namespace

std::vector<Vec2> AdmissibleQuad::boundary() const {
    std::vector<Vec2> out = lower; // b .. e
    auto append = [&out](Vec2 p) {
        if (out.empty() || dist(out.back(), p) > 1e-12) out.push_back(p);
    };
    for (const Vec2& p : eta) append(p); // e .. e'
    if (triangular) {
        for (const Vec2& p : upper) append(p); // apex
    } else {
        for (auto it = upper.rbegin(); it != upper.rend(); ++it) append(*it); // e' .. b'
    }
    for (auto it = beta.rbegin(); it != beta.rend(); ++it) append(*it); // b' .. b
    if (dist(out.front(), out.back()) > 1e-12) out.push_back(out.front());
    return out;
}

AdmissibleQuad build_quad(const GroundLimit& limit, const Streamline& beta,
                          const Streamline& eta, double lo, double hi) {
    if (!(lo < hi)) fail(errc::invalid_argument, "levels must satisfy lo < hi");
    const double h = limit.u.grid->h;
    Crossing b_lo, b_hi, e_lo, e_hi;
    if (!level_crossing(beta, lo, b_lo) || !level_crossing(beta, hi, b_hi) ||
        !level_crossing(eta, lo, e_lo) || !level_crossing(eta, hi, e_hi))
        fail(errc::quad_construction_failed, "streamline does not cross both levels");

    AdmissibleQuad q;
    q.lo = lo;
    q.hi = hi;
    q.beta = streamline_sub_arc(beta, b_lo, b_hi);
    q.eta = streamline_sub_arc(eta, e_lo, e_hi);
    q.lower = level_arc_between(limit.u, lo, b_lo.point, e_lo.point, h);
    q.triangular = dist(b_hi.point, e_hi.point) <= 2.0 * h;
    if (q.triangular)
        q.upper = {0.5 * (b_hi.point + e_hi.point)};
    else
        q.upper = level_arc_between(limit.u, hi, b_hi.point, e_hi.point, h);
    return q;
}

QuadRuleReport quadrilateral_rule_check(const GroundLimit& limit, const Streamline& beta,
                                        const Streamline& eta, double lo, double hi,
                                        const Polygon& poly, const HighRidge& ridge) {
    (void)poly;
    QuadRuleReport r;
    AdmissibleQuad q = build_quad(limit, beta, eta, lo, hi);
    r.triangular = q.triangular;
    const double h = limit.u.grid->h;

    r.precondition_ok = arc_speed_monotone(limit.u, q.lower, r.tol_fraction).monotone;

    auto max_speed_on = [&](const std::vector<Vec2>& arc) {
        double m = 0.0;
        for (const Vec2& p : arc) m = std::max(m, norm(gradient(limit.u, p)));
        return m;
    };
    r.lower_max = max_speed_on(q.lower);
    r.upper_max = max_speed_on(q.upper);
    r.bound_pass = r.upper_max <= r.lower_max * (1.0 + r.tol_fraction);

    // Streamlines seeded on the interior of the lower arc, truncated at hi.
    std::vector<double> cum = cumulative(q.lower);
    TraceConfig cfg;
    cfg.ridge = ridge;
    std::vector<Streamline> traces;
    for (double f : {0.15, 0.3, 0.5, 0.7, 0.85}) {
        Vec2 seed = point_at_param(q.lower, cum, f * cum.back());
        traces.push_back(truncate_at_value(trace(limit.u, seed, cfg), hi));
    }
    std::vector<Vec2> bnd = q.boundary();
    std::vector<double> bnd_cum = cumulative(bnd);
    for (size_t i = 0; i < traces.size(); ++i)
        for (size_t j = i + 1; j < traces.size(); ++j) {
            JoinResult jr = join_detection(traces[i], traces[j], 0.5 * h);
            if (!jr.met) continue;
            if (closest_on(bnd, bnd_cum, jr.point).d > 2.0 * h) ++r.interior_meets;
        }
    r.no_cross_pass = r.interior_meets == 0;
    r.upper_monotone_pass =
        q.triangular || arc_speed_monotone(limit.u, q.upper, r.tol_fraction).monotone;
    r.pass = r.precondition_ok && r.bound_pass && r.no_cross_pass && r.upper_monotone_pass;
    return r;
}

// ---------------------------------------------------------------------------
// Capture by the contact set
// ---------------------------------------------------------------------------

CaptureReport capture_check(const Streamline& s, const std::vector<Vec2>& contact_nodes,
                            double h) {
    CaptureReport r;
    r.threshold = 2.0 * h;
    if (contact_nodes.empty() || s.points.empty()) return r;
    int entry = -1;
    for (size_t i = 0; i < s.points.size(); ++i) {
        if (dist_to_points(contact_nodes, s.points[i]) <= h) {
            entry = static_cast<int>(i);
            break;
        }
    }
    if (entry < 0) return r;
    r.entered = true;
    r.entry_param = s.params[entry];
    for (size_t i = entry; i < s.points.size(); ++i)
        r.max_excursion = std::max(r.max_excursion, dist_to_points(contact_nodes, s.points[i]));
    r.pass = r.max_excursion <= r.threshold;
    return r;
}

// ---------------------------------------------------------------------------
// Report plumbing
// ---------------------------------------------------------------------------

const char* status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "PASS";
        case CheckStatus::Fail: return "FAIL";
        case CheckStatus::Info: return "INFO";
    }
    return "?";
}

bool VerificationReport::all_pass() const {
    for (const CheckResult& c : checks)
        if (c.status == CheckStatus::Fail) return false;
    return true;
}

int VerificationReport::exit_code() const { return all_pass() ? 0 : 1; }

const CheckResult* VerificationReport::find(const std::string& name) const {
    for (const CheckResult& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Potential counterpart suite
// ---------------------------------------------------------------------------

namespace {

double shoelace_area(const std::vector<Vec2>& loop) {
    double a2 = 0.0;
    for (size_t i = 0; i + 1 < loop.size(); ++i) a2 += cross(loop[i], loop[i + 1]);
    return 0.5 * std::abs(a2);
}

double hull_area(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    if (pts.size() < 3) return 0.0;
    std::vector<Vec2> hull(2 * pts.size());
    size_t k = 0;
    for (size_t i = 0; i < pts.size(); ++i) { // lower hull
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (size_t i = pts.size() - 1, t = k + 1; i-- > 0;) { // upper hull
        while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k);
    hull.push_back(hull.front());
    return shoelace_area(hull);
}

} // namespace

std::vector<CheckResult> potential_counterpart_suite(const PotentialSolution& potential,
                                                     const Polygon& poly,
                                                     const HighRidge& ridge) {
    const GridSpec& g = *potential.field.grid;
    const double h = g.h;

    GroundLimit pl;
    pl.u = potential.field;
    pl.v = make_field(potential.field.grid, FieldLabel::v, 0.0, 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.in(i, j)) continue;
            int n = g.idx(i, j);
            pl.v.values[n] = std::log(std::max(potential.field.values[n], kLogFloor));
        }

    TraceConfig cfg;
    cfg.ridge = ridge;
    // The potential peaks conically (the slope does not decay toward the
    // ridge), so traces stall on the crease wobble a couple of cells out;
    // widen the capture radius accordingly.
    cfg.ridge_capture_factor = 3.0;
    std::vector<CheckResult> out;

    // Fictitious corner traces must reach the high ridge.
    int reached = 0, v_monotone = 0;
    for (int j = 0; j < poly.size(); ++j) {
        Streamline s = attracting_streamline(pl, poly, j, cfg);
        if (s.termination == Termination::ReachedRidge) ++reached;
        SpeedReport sp = speed_profile_checks(s, {}, 0.0, std::nullopt);
        if (sp.v_monotone_pass) ++v_monotone;
    }
    out.push_back({"potential_attracting_termination", static_cast<double>(reached),
                   static_cast<double>(poly.size()),
                   reached == poly.size() ? CheckStatus::Pass : CheckStatus::Fail,
                   "corner traces of the potential reaching the high ridge"});

    // Medians stay straight.
    double worst_straight = 0.0;
    bool med_ok = true;
    for (int k = 0; k < poly.size(); ++k) {
        MedianResult mr = median(pl, poly, k, cfg);
        worst_straight = std::max(worst_straight, mr.straightness);
        med_ok = med_ok && mr.pass;
    }
    out.push_back({"potential_median_straightness", worst_straight, 3.0 * h,
                   med_ok ? CheckStatus::Pass : CheckStatus::Fail,
                   "max sagitta of side-max traces of the potential"});

    // Level loops stay convex (hull area within 1% of the loop area).
    double worst_deficit = 0.0;
    for (double c : {0.25, 0.5, 0.75}) {
        auto loops = level_polylines(pl.u, c);
        const std::vector<Vec2>* big = nullptr;
        double big_len = 0.0;
        for (const auto& l : loops) {
            double len = polyline_length(l);
            if (len > big_len) {
                big_len = len;
                big = &l;
            }
        }
        if (!big || big->size() < 4 || dist(big->front(), big->back()) > 1e-12) continue;
        double la = shoelace_area(*big), ha = hull_area(*big);
        if (ha > 0.0) worst_deficit = std::max(worst_deficit, 1.0 - la / ha);
    }
    out.push_back({"potential_level_convexity", worst_deficit, 0.01,
                   worst_deficit <= 0.01 ? CheckStatus::Pass : CheckStatus::Fail,
                   "worst hull-area deficit of the level loops"});

    // No exact speed criterion transfers to the potential: informational.
    out.push_back({"potential_speed_monotone", static_cast<double>(v_monotone),
                   static_cast<double>(poly.size()), CheckStatus::Info,
                   "corner traces with a non-increasing log-slope profile"});

    // Crease proxy: nodes where the ring probe sees a much steeper drop than
    // the central gradient (the probe straddles a gradient jump).
    int crease = 0, probe_tested = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.in(i, j)) continue;
            int n = g.idx(i, j);
            if (g.bdist[n] <= 2.0 * h + 1e-12) continue;
            if (dist_to_ridge(ridge, g.node(i, j)) < 4.0 * h) continue;
            ++probe_tested;
            double ring = 0.0;
            try {
                ring = ring_decrement(potential.field, g.node(i, j), 2.0 * h);
            } catch (const error&) {
                continue;
            }
            double grad = norm(node_gradient(potential.field, i, j));
            if (ring - grad > 0.15 * ridge.lambda_inf) ++crease;
        }
    out.push_back({"potential_contact_proxy", static_cast<double>(crease),
                   static_cast<double>(probe_tested), CheckStatus::Info,
                   "nodes flagged by the probe-vs-gradient gap"});

    return out;
}

} // namespace ridgeflow

#include "ridgeflow/streamline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace ridgeflow {

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::ReachedRidge: return "ReachedRidge";
        case Termination::JoinedCurve: return "JoinedCurve";
        case Termination::SpeedFloor: return "SpeedFloor";
        case Termination::MaxSteps: return "MaxSteps";
        case Termination::LeftDomain: return "LeftDomain";
    }
    return "Unknown";
}

namespace {

// Gradient sampler that reports domain exit instead of throwing.
bool grad_at(const ScalarField& f, Vec2 q, Vec2& g) {
    if (!contains(f.grid->poly, q, 0.0)) return false;
    g = gradient(f, q);
    return std::isfinite(g.x) && std::isfinite(g.y);
}

// Why an RK4 trial step could not be accepted.
enum class Block { None, Exit, Spacing, Value };

struct PolylineHit {
    double d = std::numeric_limits<double>::infinity();
    Vec2 point{0.0, 0.0};
    int seg = -1;
    double frac = 0.0;
};

PolylineHit closest_on_polyline(const std::vector<Vec2>& pts, Vec2 p) {
    PolylineHit best;
    if (pts.size() == 1) {
        best.d = dist(p, pts[0]);
        best.point = pts[0];
        best.seg = 0;
        best.frac = 0.0;
        return best;
    }
    for (int i = 0; i + 1 < static_cast<int>(pts.size()); ++i) {
        Vec2 a = pts[i], b = pts[i + 1];
        double d = point_segment_distance(p, a, b);
        if (d < best.d) {
            best.d = d;
            best.point = closest_point_on_segment(p, a, b);
            best.seg = i;
            Vec2 ab = b - a;
            double den = dot(ab, ab);
            best.frac = den > 0.0 ? std::clamp(dot(p - a, ab) / den, 0.0, 1.0) : 0.0;
        }
    }
    return best;
}

double param_at_hit(const Streamline& s, const PolylineHit& hit) {
    if (hit.seg < 0 || s.params.empty()) return 0.0;
    if (hit.seg + 1 >= static_cast<int>(s.params.size())) return s.params.back();
    double t0 = s.params[hit.seg], t1 = s.params[hit.seg + 1];
    return t0 + hit.frac * (t1 - t0);
}

std::vector<double> cumulative_length(const std::vector<Vec2>& pts) {
    std::vector<double> acc(pts.size(), 0.0);
    for (size_t i = 1; i < pts.size(); ++i) acc[i] = acc[i - 1] + dist(pts[i - 1], pts[i]);
    return acc;
}

// Position along the polyline at parameter t (clamped to the traced range).
Vec2 position_at_param(const Streamline& s, double t) {
    if (s.points.empty()) fail(errc::no_event, "empty streamline has no positions");
    if (t <= s.params.front()) return s.points.front();
    if (t >= s.params.back()) return s.points.back();
    auto it = std::upper_bound(s.params.begin(), s.params.end(), t);
    int i = static_cast<int>(it - s.params.begin()) - 1;
    double t0 = s.params[i], t1 = s.params[i + 1];
    double w = (t1 > t0) ? (t - t0) / (t1 - t0) : 0.0;
    return s.points[i] + w * (s.points[i + 1] - s.points[i]);
}

double median_of(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    size_t m = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + m, xs.end());
    double hi = xs[m];
    if (xs.size() % 2 == 1) return hi;
    std::nth_element(xs.begin(), xs.begin() + m - 1, xs.begin() + m);
    return 0.5 * (xs[m - 1] + hi);
}

} // namespace

Streamline trace(const ScalarField& field, Vec2 start, const TraceConfig& cfg) {
    const GridSpec& g = *field.grid;
    const Polygon& poly = g.poly;
    const double h = g.h;
    const double capture = cfg.ridge_capture_factor * h;
    const double floor_speed = cfg.speed_floor_factor * cfg.ridge.lambda_inf;
    const double target = cfg.step_factor * h;
    const double spacing_bound = 2.0 * target;

    if (!contains(poly, start, 0.0)) fail(errc::start_outside, "trace start lies outside the domain");
    if (point_segment_distance(start, cfg.ridge.a, cfg.ridge.b) <= capture)
        fail(errc::start_on_ridge, "trace start lies in the capture neighborhood of the high ridge");

    Streamline s;
    s.field_label = field.label;
    s.h = h;
    s.seed.start = start;

    Vec2 x = start;
    Vec2 gr{0.0, 0.0};
    if (!grad_at(field, x, gr))
        fail(errc::non_finite_encountered, "gradient at the trace start is not finite");
    double t = 0.0;
    double val = interpolate(field, x);
    double speed = norm(gr);
    if (!std::isfinite(val)) fail(errc::non_finite_encountered, "field value at the trace start is not finite");

    auto push = [&](Vec2 p, double tp, double sp, double vp) {
        s.points.push_back(p);
        s.params.push_back(tp);
        s.speeds.push_back(sp);
        s.values.push_back(vp);
    };
    push(x, t, speed, val);

    s.termination = Termination::MaxSteps;
    int stall_run = 0;
    Block stall_block = Block::None;
    for (int step = 0; step < cfg.max_steps; ++step) {
        if (speed < floor_speed) {
            s.termination = Termination::SpeedFloor;
            break;
        }
        double dt = target / speed;
        bool capped = false;
        if (t + dt >= cfg.max_param) {
            dt = cfg.max_param - t;
            capped = true;
            if (dt <= 0.0) break; // parameter budget exhausted
        }

        auto attempt = [&](double dtau, Vec2& ox, double& oval, Vec2& ogr, double& osp) -> Block {
            Vec2 k2, k3, k4;
            if (!grad_at(field, x + (0.5 * dtau) * gr, k2)) return Block::Exit;
            if (!grad_at(field, x + (0.5 * dtau) * k2, k3)) return Block::Exit;
            if (!grad_at(field, x + dtau * k3, k4)) return Block::Exit;
            Vec2 cand = x + (dtau / 6.0) * (gr + 2.0 * k2 + 2.0 * k3 + k4);
            if (!contains(poly, cand, 0.0)) return Block::Exit;
            if (dist(cand, x) > spacing_bound) return Block::Spacing;
            double vc = interpolate(field, cand);
            if (!std::isfinite(vc) || !(vc > val)) return Block::Value;
            Vec2 gc;
            if (!grad_at(field, cand, gc)) return Block::Exit;
            ox = cand;
            oval = vc;
            ogr = gc;
            osp = norm(gc);
            return Block::None;
        };

        bool accepted = false;
        Block last_block = Block::None;
        Vec2 xn, grn;
        double valn = 0.0, speedn = 0.0;
        int halvings = 0;
        for (; halvings < 40; ++halvings) {
            Block b = attempt(dt, xn, valn, grn, speedn);
            if (b == Block::None) {
                accepted = true;
                break;
            }
            last_block = b;
            dt *= 0.5;
            capped = false;
        }
        if (!accepted) {
            if (last_block == Block::Exit) {
                s.termination = Termination::LeftDomain;
                s.left_domain_defect = true;
            } else {
                s.termination = Termination::SpeedFloor;
            }
            break;
        }
        // A step that only survives extreme shrinking is pinned against an
        // obstruction; three in a row means no real progress will follow.
        if (halvings >= 12 && !capped) {
            ++stall_run;
            stall_block = last_block;
        } else {
            stall_run = 0;
        }

        x = xn;
        t += dt;
        val = valn;
        gr = grn;
        speed = speedn;
        push(x, t, speed, val);

        if (point_segment_distance(x, cfg.ridge.a, cfg.ridge.b) <= capture) {
            s.termination = Termination::ReachedRidge;
            break;
        }
        if (capped) break; // parameter cap reached exactly
        if (stall_run >= 3) {
            if (stall_block == Block::Exit) {
                s.termination = Termination::LeftDomain;
                s.left_domain_defect = true;
            } else {
                s.termination = Termination::SpeedFloor;
            }
            break;
        }
    }

    for (size_t i = 1; i < s.points.size(); ++i) s.arc_length += dist(s.points[i - 1], s.points[i]);
    return s;
}

Streamline attracting_streamline(const GroundLimit& limit, const Polygon& poly, int j,
                                 const TraceConfig& cfg) {
    if (j < 0 || j >= poly.size()) fail(errc::index_out_of_range, "corner index out of range");
    const double h = limit.v.grid->h;
    Vec2 seed = poly.vertex(j) + (3.0 * h) * corner_bisector(poly, j);
    if (!contains(poly, seed, 0.0))
        fail(errc::seed_outside, "corner seed lies outside the domain");
    Streamline s = trace(limit.v, seed, cfg);
    s.seed.kind = SeedInfo::Kind::Corner;
    s.seed.index = j;
    return s;
}

SideMax find_side_max(const GroundLimit& limit, const Polygon& poly, int k) {
    if (k < 0 || k >= poly.size()) fail(errc::index_out_of_range, "side index out of range");
    const double h = limit.u.grid->h;
    Vec2 A = poly.vertex(k), B = poly.vertex(k + 1);
    double L = dist(A, B);
    Vec2 tang = (B - A) / L;
    Vec2 nrm = poly.inward_normal(k);

    SideMax out;
    out.side = k;
    double best = -1.0;
    for (double sl = h; sl <= L - h + 1e-12; sl += 0.5 * h) {
        Vec2 on_side = A + sl * tang;
        Vec2 sample = on_side + h * nrm;
        if (!contains(poly, sample, 0.0)) continue; // clipped off near sharp corners
        double sp = norm(gradient(limit.u, sample));
        out.profile.push_back(sp);
        if (sp > best) {
            best = sp;
            out.point = on_side;
            out.speed = sp;
        }
    }
    if (out.profile.empty()) fail(errc::empty_region, "no admissible samples along the side");

    // Increase-then-decrease within a small tolerance of the profile scale.
    int arg = static_cast<int>(std::max_element(out.profile.begin(), out.profile.end()) -
                               out.profile.begin());
    double tol = 1e-2 * best;
    for (int i = 0; i + 1 < static_cast<int>(out.profile.size()); ++i) {
        double step = out.profile[i + 1] - out.profile[i];
        if (i < arg && step < -tol) out.non_unimodal = true;
        if (i >= arg && step > tol) out.non_unimodal = true;
    }
    return out;
}

MedianResult median(const GroundLimit& limit, const Polygon& poly, int k, const TraceConfig& cfg) {
    MedianResult r;
    r.side_max = find_side_max(limit, poly, k);
    const double h = limit.u.grid->h;
    Vec2 seed = r.side_max.point + h * poly.inward_normal(k);
    r.line = trace(limit.u, seed, cfg);
    r.line.seed.kind = SeedInfo::Kind::SidePoint;
    r.line.seed.index = k;
    Vec2 a = r.line.points.front(), b = r.line.points.back();
    for (const Vec2& p : r.line.points)
        r.straightness = std::max(r.straightness, point_segment_distance(p, a, b));
    r.pass = r.straightness <= 3.0 * h;
    return r;
}

JoinResult join_detection(const Streamline& a, const Streamline& b, double tol) {
    JoinResult r;
    if (a.points.empty() || b.points.empty()) return r;
    int ia0 = -1;
    PolylineHit meet;
    for (int ia = 0; ia < static_cast<int>(a.points.size()); ++ia) {
        PolylineHit hit = closest_on_polyline(b.points, a.points[ia]);
        if (hit.d <= tol) {
            ia0 = ia;
            meet = hit;
            break;
        }
    }
    if (ia0 < 0) return r;
    r.met = true;
    r.index_a = ia0;
    r.point = meet.point;
    r.param_a = a.params[ia0];
    r.param_b = param_at_hit(b, meet);

    // Transversal crossing: a clear side of b before the meet and a clear
    // opposite side after it. Separations inside tol carry no sign.
    if (b.points.size() < 2) return r;
    auto side_of = [&](Vec2 p) -> int {
        PolylineHit hit = closest_on_polyline(b.points, p);
        if (hit.d <= tol) return 0;
        Vec2 tb = b.points[hit.seg + 1] - b.points[hit.seg];
        double c = cross(tb, p - hit.point);
        return c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
    };
    int before = 0, after = 0;
    for (int i = ia0 - 1; i >= 0 && before == 0; --i) before = side_of(a.points[i]);
    for (int i = ia0 + 1; i < static_cast<int>(a.points.size()) && after == 0; ++i)
        after = side_of(a.points[i]);
    r.crossing_defect = (before != 0 && after != 0 && before != after);
    return r;
}

SpeedReport speed_profile_checks(const Streamline& s, const std::vector<Vec2>& contact_nodes,
                                 double contact_radius, std::optional<double> event_param) {
    SpeedReport r;
    if (s.points.size() < 2) return r;
    const double h = s.h;

    auto in_contact = [&](Vec2 p) {
        for (const Vec2& c : contact_nodes)
            if (dist(p, c) <= contact_radius) return true;
        return false;
    };

    std::vector<double> acc = cumulative_length(s.points);
    double event_len = acc.back();
    int n_event = static_cast<int>(s.points.size());
    if (event_param) {
        Vec2 y = position_at_param(s, *event_param);
        // Arc length up to the event parameter.
        auto it = std::upper_bound(s.params.begin(), s.params.end(), *event_param);
        int i = static_cast<int>(it - s.params.begin()) - 1;
        i = std::clamp(i, 0, static_cast<int>(s.params.size()) - 1);
        event_len = acc[i] + dist(s.points[i], y);
        n_event = i + 1;
    }
    // Points in the 2h zone around the event see the crease-smeared gradient.
    auto clear_of_event = [&](int i) { return event_len - acc[i] > 2.0 * h; };

    double max_speed = 0.0;
    for (int i = 0; i < n_event; ++i) max_speed = std::max(max_speed, s.speeds[i]);
    double tol = r.tol_fraction * max_speed;

    // Monotonicity is measured against the running extremum: a slow drift is
    // as much a violation as a single large step.
    if (s.field_label == FieldLabel::u || s.field_label == FieldLabel::u_p ||
        s.field_label == FieldLabel::U) {
        r.u_monotone_applicable = true;
        double run_max = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_event; ++i) {
            if (!clear_of_event(i)) break;
            if (in_contact(s.points[i])) continue;
            if (std::isfinite(run_max)) r.u_worst_drop = std::max(r.u_worst_drop, run_max - s.speeds[i]);
            run_max = std::max(run_max, s.speeds[i]);
        }
        r.u_monotone_pass = r.u_worst_drop <= tol;
    }
    if (s.field_label == FieldLabel::v) {
        r.v_monotone_applicable = true;
        double run_min = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_event; ++i) {
            if (!clear_of_event(i)) break;
            if (std::isfinite(run_min)) r.v_worst_rise = std::max(r.v_worst_rise, s.speeds[i] - run_min);
            run_min = std::min(run_min, s.speeds[i]);
        }
        r.v_monotone_pass = r.v_worst_rise <= tol;
    }
    if (event_param) {
        double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
        for (int i = 0; i < n_event; ++i) {
            if (!clear_of_event(i)) break;
            mn = std::min(mn, s.speeds[i]);
            mx = std::max(mx, s.speeds[i]);
        }
        if (mx > 0.0 && std::isfinite(mn)) {
            r.const_prejoin_applicable = true;
            r.prejoin_variation = (mx - mn) / mx;
            r.const_prejoin_pass = r.prejoin_variation <= r.tol_fraction;
        }
    }
    return r;
}

LevelCrossingReport level_crossing_check(const Streamline& s, const std::vector<double>& levels) {
    LevelCrossingReport r;
    r.levels = levels;
    r.pass = true;
    for (double c : levels) {
        int count = 0;
        for (size_t i = 0; i + 1 < s.values.size(); ++i) {
            bool up = s.values[i] < c && c <= s.values[i + 1];
            bool down = s.values[i] >= c && c > s.values[i + 1];
            if (up || down) ++count;
        }
        r.counts.push_back(count);
        bool outside = s.values.empty() || c <= s.values.front() || c > s.values.back();
        if (!(count == 1 || (count == 0 && outside))) r.pass = false;
    }
    return r;
}

StabilityReport stability_check(const ScalarField& field, Vec2 x0, Vec2 y0, double T,
                                const TraceConfig& cfg) {
    TraceConfig capped = cfg;
    capped.max_param = T;
    Streamline a = trace(field, x0, capped);
    Streamline b = trace(field, y0, capped);

    StabilityReport r;
    r.seed_distance = dist(x0, y0);
    double Tc = std::min(a.params.back(), b.params.back());
    const int K = 256;
    for (int k = 0; k <= K; ++k) {
        double t = Tc * k / K;
        r.max_distance = std::max(r.max_distance, dist(position_at_param(a, t), position_at_param(b, t)));
    }
    if (r.seed_distance == 0.0) {
        r.worst_ratio = r.max_distance == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        r.pass = r.max_distance == 0.0;
    } else {
        r.worst_ratio = r.max_distance / r.seed_distance;
        r.pass = r.worst_ratio <= 1.05;
    }
    return r;
}

ArcMetrics arc_metrics(const Streamline& s, const GroundLimit& limit, double event_param,
                       Vec2 event_point, const Polygon& poly) {
    if (s.points.empty()) fail(errc::no_event, "empty streamline");
    const double tiny = 1e-12 * (1.0 + std::abs(s.params.back()));
    if (event_param < s.params.front() - tiny || event_param > s.params.back() + tiny)
        fail(errc::no_event, "event parameter outside the traced range");
    const double h = s.h;

    ArcMetrics m;
    std::vector<double> acc = cumulative_length(s.points);

    // Arc length from the seed to the event parameter.
    auto it = std::upper_bound(s.params.begin(), s.params.end(), event_param);
    int ie = static_cast<int>(it - s.params.begin()) - 1;
    ie = std::clamp(ie, 0, static_cast<int>(s.params.size()) - 1);
    double event_len = acc[ie] + dist(s.points[ie], position_at_param(s, event_param));

    // Straight stub from the true boundary to the seed.
    Vec2 seed = s.points.front();
    double stub = dist(seed, closest_boundary_point(poly, seed));
    m.S = stub + event_len;

    // Constant speed of the arc: median speed clear of the 2h event zone,
    // where the discrete gradient smears across the crease.
    std::vector<double> speeds;
    for (int i = 0; i <= ie; ++i)
        if (event_len - acc[i] > 2.0 * h) speeds.push_back(s.speeds[i]);
    if (speeds.empty())
        for (int i = 0; i <= ie; ++i) speeds.push_back(s.speeds[i]);
    m.c_est = median_of(speeds);

    double u_at_y = interpolate(limit.u, event_point);
    if (!(u_at_y > 0.0)) fail(errc::zero_denominator, "field vanishes at the event point");
    m.ratio = m.c_est / u_at_y;
    m.ratio_times_S = m.ratio * m.S;

    // Turn-angle sign changes above the noise threshold h/S.
    double thresh = (m.S > 0.0) ? h / m.S : 0.0;
    int prev_sign = 0;
    Vec2 prev_dir{0.0, 0.0};
    bool have_dir = false;
    for (int i = 0; i < ie; ++i) {
        Vec2 d = s.points[i + 1] - s.points[i];
        double len = norm(d);
        if (len <= 1e-14) continue;
        d = d / len;
        if (have_dir) {
            double turn = std::atan2(cross(prev_dir, d), dot(prev_dir, d));
            if (std::abs(turn) >= thresh) {
                int sign = turn > 0.0 ? 1 : -1;
                if (prev_sign != 0 && sign != prev_sign) ++m.curvature_sign_changes;
                prev_sign = sign;
            }
        }
        prev_dir = d;
        have_dir = true;
    }
    return m;
}

void write_streamline_csv(const Streamline& s, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) fail(errc::parse_error, "cannot open streamline csv for writing: " + path);
    std::fprintf(f, "t,x,y,speed,value\n");
    for (size_t i = 0; i < s.points.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.params[i], s.points[i].x,
                     s.points[i].y, s.speeds[i], s.values[i]);
    std::fclose(f);
}

} // namespace ridgeflow

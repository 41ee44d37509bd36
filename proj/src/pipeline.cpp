#include "ridgeflow/pipeline.hpp"

#include "ridgeflow/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ridgeflow {
namespace {

using ordered_json = nlohmann::ordered_json;

// error::error already prefixes the code name; strip it before re-wrapping so
// a stage-qualified rethrow reads "Code: stage: message", not twice the code.
std::string strip_code_prefix(errc c, const std::string& what) {
    std::string prefix = std::string(errc_name(c)) + ": ";
    if (what.rfind(prefix, 0) == 0) return what.substr(prefix.size());
    return what;
}

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const error& e) {
        throw error(e.code, std::string(name) + ": " + strip_code_prefix(e.code, e.what()));
    }
}

std::string fmt(const char* spec, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

CheckResult make_check(std::string name, double value, double threshold, CheckStatus status,
                       std::string note) {
    CheckResult c;
    c.name = std::move(name);
    c.value = value;
    c.threshold = threshold;
    c.status = status;
    c.note = std::move(note);
    return c;
}

CheckStatus pass_fail(bool ok) { return ok ? CheckStatus::Pass : CheckStatus::Fail; }

double dist_to_ridge(const HighRidge& ridge, Vec2 x) {
    return ridge.is_point() ? dist(x, ridge.a) : point_segment_distance(x, ridge.a, ridge.b);
}

double dist_to_nodes(const std::vector<Vec2>& nodes, Vec2 x) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& n : nodes) best = std::min(best, dist(x, n));
    return best;
}

std::vector<std::vector<Vec2>> curve_points(const std::vector<Streamline>& lines) {
    std::vector<std::vector<Vec2>> out;
    out.reserve(lines.size());
    for (const Streamline& s : lines) out.push_back(s.points);
    return out;
}

double dist_to_polyline(const std::vector<Vec2>& pts, Vec2 x) {
    if (pts.size() < 2) return pts.empty() ? std::numeric_limits<double>::infinity()
                                           : dist(x, pts.front());
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < pts.size(); ++i)
        best = std::min(best, point_segment_distance(x, pts[i], pts[i + 1]));
    return best;
}

// First event along a u-trace: the earliest join with any attracting curve,
// else the endpoint when the trace was captured by the ridge.
struct EventInfo {
    bool found = false;
    double param = 0.0;
    Vec2 point{0.0, 0.0};
    int joined_with = -1; // attracting index, -1 for a ridge capture
};

EventInfo first_event(const Streamline& s, const std::vector<Streamline>& attracting,
                      double tol) {
    EventInfo ev;
    for (size_t j = 0; j < attracting.size(); ++j) {
        JoinResult jr = join_detection(s, attracting[j], tol);
        if (!jr.met) continue;
        // join_detection fires at the first approach within tol, up to tol
        // before the actual meeting. Slide forward while the separation still
        // shrinks, stopping once it is genuinely sub-cell: a transversal meet
        // refines to the crossing, an asymptotic merge to the merge start
        // (without the floor the slide would ride the merged section, where
        // the separation keeps creeping down toward the shared endpoint).
        const double floor = 0.25 * s.h;
        int idx = jr.index_a;
        double d = dist_to_polyline(attracting[j].points, s.points[idx]);
        while (d > floor && idx + 1 < static_cast<int>(s.points.size())) {
            double d2 = dist_to_polyline(attracting[j].points, s.points[idx + 1]);
            if (d2 >= d) break;
            d = d2;
            ++idx;
        }
        if (!ev.found || s.params[idx] < ev.param) {
            ev.found = true;
            ev.param = s.params[idx];
            ev.point = s.points[idx];
            ev.joined_with = static_cast<int>(j);
        }
    }
    if (!ev.found && s.termination == Termination::ReachedRidge && !s.points.empty()) {
        ev.found = true;
        ev.param = s.params.back();
        ev.point = s.points.back();
    }
    return ev;
}

// Log-field of a primal (u-type) field, mirroring the ground-limit
// construction: v = log(max(f, kLogFloor)) on interior nodes.
ScalarField log_field(const ScalarField& f) {
    ScalarField v = make_field(f.grid, FieldLabel::v, 0.0, 0.0);
    const GridSpec& g = *f.grid;
    for (int id = 0; id < g.nx * g.ny; ++id)
        if (g.inside[id]) v.values[id] = std::log(std::max(f.values[id], kLogFloor));
    return v;
}

} // namespace

PolygonInput load_polygon(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::parse_error, "cli: cannot open polygon file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(errc::parse_error, "cli: polygon file '" + path + "': " + e.what());
    }
    if (!j.is_object() || !j.contains("vertices") || !j["vertices"].is_array())
        fail(errc::parse_error, "cli: polygon file '" + path + "' needs a \"vertices\" array");
    std::vector<Vec2> verts;
    for (const auto& row : j["vertices"]) {
        if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
            fail(errc::parse_error,
                 "cli: polygon file '" + path + "': each vertex must be a [x, y] pair");
        verts.push_back({row[0].get<double>(), row[1].get<double>()});
    }
    std::string name = std::filesystem::path(path).stem().string();
    if (j.contains("name") && j["name"].is_string()) name = j["name"].get<std::string>();
    PolygonInput input;
    input.poly = stage("geometry", [&] { return validate_polygon(verts, name); });
    if (j.contains("lambda2_reference") && j["lambda2_reference"].is_number())
        input.lambda2_reference = j["lambda2_reference"].get<double>();
    return input;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
    return run_pipeline(load_polygon(cfg.polygon_path), cfg);
}

PipelineResult run_pipeline(const PolygonInput& input, const RunConfig& cfg) {
    if (!(cfg.h > 0.0)) fail(errc::invalid_argument, "cli: h must be positive");
    if (!(cfg.epsilon > 0.0)) fail(errc::invalid_argument, "cli: epsilon must be positive");
    if (cfg.ladder.p_list.empty()) fail(errc::invalid_argument, "cli: empty p ladder");

    PipelineResult r;
    const Polygon& poly = input.poly;
    const double h = cfg.h;
    const double tol_fraction = 0.05;

    r.ridge = stage("geometry", [&] { return chebyshev_set(poly); });
    const double lambda_inf = r.ridge.lambda_inf;
    r.grid = stage("fields", [&] { return rasterize(poly, h); });
    r.ladder = stage("eigensolver", [&] { return continuation_solve(r.grid, cfg.ladder); });
    r.limit = stage("infinity", [&] { return extract_ground_limit(r.ladder, r.ridge); });
    r.potential = stage("infinity", [&] { return solve_infinity_potential(r.grid, r.ridge); });

    const bool writing = !cfg.out_dir.empty();
    if (writing) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.out_dir, ec);
        if (ec)
            fail(errc::parse_error,
                 "cli: cannot create output directory '" + cfg.out_dir + "': " + ec.message());
    }
    auto emit = [&](const std::string& name, auto&& writer) {
        if (!writing) return;
        std::string path = cfg.out_dir + "/" + name;
        writer(path);
        r.artifacts.push_back(path);
    };

    emit("u.field.txt", [&](const std::string& p) { write_field(r.limit.u, p); });
    emit("v.field.txt", [&](const std::string& p) { write_field(r.limit.v, p); });
    emit("potential.field.txt", [&](const std::string& p) { write_field(r.potential.field, p); });

    // ------------------------------------------------------------------ traces
    TraceConfig tc;
    tc.ridge = r.ridge;
    const int n_sides = poly.size();

    stage("streamlines", [&] {
        for (int j = 0; j < n_sides; ++j)
            r.attracting.push_back(attracting_streamline(r.limit, poly, j, tc));
        for (int k = 0; k < n_sides; ++k) r.medians.push_back(median(r.limit, poly, k, tc));
        for (int k = 0; k < n_sides; ++k) {
            Vec2 a = poly.vertex(k);
            Vec2 inward = poly.inward_normal(k);
            for (double f : cfg.side_fractions) {
                Vec2 seed = a + f * poly.edge(k) + h * inward;
                r.generic_u.push_back(trace(r.limit.u, seed, tc));
                r.generic_v.push_back(trace(r.limit.v, seed, tc));
            }
        }
        return 0;
    });
    for (size_t j = 0; j < r.attracting.size(); ++j)
        emit("attracting_" + std::to_string(j) + ".csv",
             [&](const std::string& p) { write_streamline_csv(r.attracting[j], p); });
    for (size_t k = 0; k < r.medians.size(); ++k)
        emit("median_" + std::to_string(k) + ".csv",
             [&](const std::string& p) { write_streamline_csv(r.medians[k].line, p); });

    // Events on the u-traces: earliest join with an attracting curve, else the
    // ridge capture point; recorded on the streamline for the report/CSV side.
    std::vector<EventInfo> events(r.generic_u.size());
    for (size_t i = 0; i < r.generic_u.size(); ++i) {
        events[i] = first_event(r.generic_u[i], r.attracting, 2.0 * h);
        if (events[i].found && events[i].joined_with >= 0) {
            r.generic_u[i].joined_with = events[i].joined_with;
            r.generic_u[i].join_point = events[i].point;
        }
    }

    // --------------------------------------------------------------- contact
    std::vector<double> eps_list = cfg.epsilon_list;
    if (std::find(eps_list.begin(), eps_list.end(), cfg.epsilon) == eps_list.end())
        eps_list.push_back(cfg.epsilon);
    std::sort(eps_list.begin(), eps_list.end(), std::greater<>());
    eps_list.erase(std::unique(eps_list.begin(), eps_list.end()), eps_list.end());

    std::vector<ContactEstimate> sweep_fine = stage(
        "analysis", [&] { return contact_estimate_sweep(r.limit, poly, r.ridge, eps_list); });
    {
        size_t best = 0;
        for (size_t i = 1; i < sweep_fine.size(); ++i)
            if (std::fabs(sweep_fine[i].epsilon - cfg.epsilon) <
                std::fabs(sweep_fine[best].epsilon - cfg.epsilon))
                best = i;
        r.contact = sweep_fine[best];
    }

    // Coarse companion run for the measure trend.
    const double h_coarse = cfg.trend_h_factor * h;
    TrendReport trend = stage("analysis", [&] {
        auto grid_c = rasterize(poly, h_coarse);
        auto ladder_c = continuation_solve(grid_c, cfg.trend_ladder);
        GroundLimit limit_c = extract_ground_limit(ladder_c, r.ridge);
        auto sweep_c = contact_estimate_sweep(limit_c, poly, r.ridge, eps_list);
        return area_zero_trend({sweep_c, sweep_fine}, eps_list, {h_coarse, h});
    });

    // ---------------------------------------------------------------- checks
    VerificationReport rep;
    rep.polygon_name = poly.name;
    rep.h = h;
    rep.p_top = r.limit.p_used;
    rep.seed = cfg.seed;

    { // eigenvalue oracle at p = 2
        double lam2 = r.ladder.front().lambda_p;
        if (input.lambda2_reference > 0.0) {
            double rel = std::fabs(lam2 - input.lambda2_reference) / input.lambda2_reference;
            rep.checks.push_back(make_check(
                "lambda2_vs_analytic", rel, 0.01, pass_fail(rel <= 0.01),
                "lambda_2 = " + fmt("%.8e", lam2) + " vs " + fmt("%.8e", input.lambda2_reference)));
        } else {
            rep.checks.push_back(make_check("lambda2_vs_analytic", lam2, 0.0, CheckStatus::Info,
                                            "no analytic reference for this polygon"));
        }
    }
    { // ladder root against the reciprocal inradius
        std::string roots;
        bool decreasing = true;
        double prev = std::numeric_limits<double>::infinity();
        for (const GroundState& st : r.ladder) {
            double root = std::pow(st.lambda_p, 1.0 / st.p);
            roots += (roots.empty() ? "" : ", ") + fmt("%.6f", root);
            if (root > prev + 1e-12) decreasing = false;
            prev = root;
        }
        const GroundState& top = r.ladder.back();
        double root_top = std::pow(top.lambda_p, 1.0 / top.p);
        double rel = std::fabs(root_top - lambda_inf) / lambda_inf;
        rep.checks.push_back(make_check(
            "lambda_p_root_limit", rel, 0.10, pass_fail(rel <= 0.10),
            "roots [" + roots + "] vs 1/R = " + fmt("%.6f", lambda_inf) +
                (decreasing ? ", monotone decreasing" : ", NOT monotone")));
    }
    { // gradient upper bound at every rung
        double worst = -std::numeric_limits<double>::infinity();
        bool ok = true;
        for (const GroundState& st : r.ladder) {
            MarginReport m = gradient_bound_check(st, poly);
            worst = std::max(worst, m.margin);
            ok = ok && m.pass;
        }
        rep.checks.push_back(make_check("gradient_upper_bound", worst, 0.0, pass_fail(ok),
                                        "worst signed excess over " +
                                            std::to_string(r.ladder.size()) + " rungs"));
    }
    { // gradient lower bound on deep rungs
        double worst = -std::numeric_limits<double>::infinity();
        bool ok = true;
        int used = 0;
        std::string note;
        for (const GroundState& st : r.ladder) {
            if (st.p < cfg.lower_gradient_min_p) continue;
            try {
                MarginReport m = lower_gradient_check(st, poly, cfg.lower_gradient_c);
                worst = std::max(worst, m.margin);
                ok = ok && m.pass;
                ++used;
            } catch (const error& e) {
                ok = false;
                note = e.what();
            }
        }
        if (used == 0 && note.empty()) {
            rep.checks.push_back(make_check(
                "gradient_lower_bound", 0.0, 0.0, CheckStatus::Info,
                "no ladder rung at p >= " + fmt("%.0f", cfg.lower_gradient_min_p)));
        } else {
            if (note.empty())
                note = "worst signed deficit at c = " + fmt("%.2f", cfg.lower_gradient_c) +
                       " over " + std::to_string(used) + " rungs";
            rep.checks.push_back(
                make_check("gradient_lower_bound", worst, 0.0, pass_fail(ok), note));
        }
    }
    { // midpoint log-concavity of the deep rungs
        int violations = 0, tested = 0, rungs = 0;
        double worst = 0.0;
        for (const GroundState& st : r.ladder) {
            if (st.p < cfg.concavity_min_p) continue;
            ScalarField vp = log_field(st.field);
            ConcavityStats cs =
                midpoint_concavity_violations(vp, cfg.concavity_pairs, 5.0 * h, cfg.seed);
            violations += cs.violations;
            tested += cs.pairs_tested;
            worst = std::max(worst, cs.worst_deficit);
            ++rungs;
        }
        std::string note = std::to_string(tested) + " pairs across " + std::to_string(rungs) +
                           " rungs, worst deficit " + fmt("%.3e", worst);
        if (rungs == 0) {
            ScalarField vp = log_field(r.ladder.back().field);
            ConcavityStats cs =
                midpoint_concavity_violations(vp, cfg.concavity_pairs, 5.0 * h, cfg.seed);
            violations = cs.violations;
            note = "only the top rung p = " + fmt("%.0f", r.ladder.back().p) + " available; " +
                   std::to_string(cs.pairs_tested) + " pairs";
        }
        rep.checks.push_back(make_check("log_concavity", violations, 0.0,
                                        pass_fail(violations == 0), note));
    }
    { // cone / distance sandwich on both limit objects
        SandwichReport su = sandwich_check(r.limit.u, poly, r.ridge);
        SandwichReport sU = sandwich_check(r.potential.field, poly, r.ridge);
        double worst = std::max(std::max(su.worst_lower, su.worst_upper),
                                std::max(sU.worst_lower, sU.worst_upper));
        rep.checks.push_back(make_check(
            "sandwich_bounds", worst, 0.0, pass_fail(su.pass && sU.pass),
            "worst signed violation beyond tol = " + fmt("%.4f", su.tol_h) +
                " (ground state and potential)"));
    }

    std::vector<std::vector<Vec2>> attracting_pts = curve_points(r.attracting);
    { // contact nodes covered by the attracting system
        CoverReport cover =
            contact_within_attracting(r.contact, attracting_pts, r.ridge, 7.0 * h);
        rep.checks.push_back(make_check(
            "contact_within_attracting", cover.max_distance, cover.threshold, pass_fail(cover.pass),
            std::to_string(cover.node_count) + " contact nodes at eps = " +
                fmt("%.3f", r.contact.epsilon) + ", mean distance " +
                fmt("%.4f", cover.mean_distance)));
    }
    { // attracting curves stay near their corner-to-end chords
        double worst = 0.0;
        for (size_t j = 0; j < r.attracting.size(); ++j) {
            Vec2 a = poly.vertex(static_cast<int>(j));
            const Streamline& s = r.attracting[j];
            if (s.points.empty()) continue;
            Vec2 b = s.points.back();
            for (const Vec2& p : s.points)
                worst = std::max(worst, point_segment_distance(p, a, b));
        }
        rep.checks.push_back(make_check("attracting_straightness", worst, 3.0 * h,
                                        pass_fail(worst <= 3.0 * h),
                                        "max deviation from corner-to-capture chords"));
    }
    { // medians are straight
        double worst = 0.0;
        bool ok = true;
        for (const MedianResult& m : r.medians) {
            worst = std::max(worst, m.straightness);
            ok = ok && m.pass;
        }
        rep.checks.push_back(make_check("median_straightness", worst, 3.0 * h, pass_fail(ok),
                                        std::to_string(r.medians.size()) + " medians"));
    }

    // Arc identities on u-traces whose first event lands in the estimated
    // contact region (contact nodes or the high ridge, within the qualify
    // radius): arc length * lambda_inf = 1 and c/u(event) * arc length = 1.
    {
        const double qr = cfg.qualify_radius_factor * h;
        auto qualifies = [&](Vec2 y) {
            return dist_to_nodes(r.contact.nodes, y) <= qr || dist_to_ridge(r.ridge, y) <= qr;
        };
        int qualified = 0, identity_fail = 0, curvature_fail = 0;
        double worst = 0.0;
        auto consider = [&](const Streamline& s, const EventInfo& ev) {
            if (!ev.found || !qualifies(ev.point)) return;
            ArcMetrics m = arc_metrics(s, r.limit, ev.param, ev.point, poly);
            ++qualified;
            double d1 = std::fabs(m.S * lambda_inf - 1.0);
            double d2 = std::fabs(m.ratio_times_S - 1.0);
            worst = std::max(worst, std::max(d1, d2));
            if (d1 > tol_fraction || d2 > tol_fraction) ++identity_fail;
            if (m.curvature_sign_changes != 0) ++curvature_fail;
        };
        for (const MedianResult& m : r.medians) {
            EventInfo ev = first_event(m.line, r.attracting, 2.0 * h);
            consider(m.line, ev);
        }
        for (size_t i = 0; i < r.generic_u.size(); ++i) consider(r.generic_u[i], events[i]);
        bool ok = qualified >= 10 && identity_fail == 0 && curvature_fail == 0;
        rep.checks.push_back(make_check(
            "arc_length_law", worst, tol_fraction, pass_fail(ok),
            std::to_string(qualified) + " qualifying arcs, " + std::to_string(identity_fail) +
                " identity failures, " + std::to_string(curvature_fail) + " curvature flips"));
    }
    { // speed laws across the trace suite
        bool ok = true;
        double worst_rel = 0.0;
        int checked = 0;
        for (size_t i = 0; i < r.generic_u.size(); ++i) {
            std::optional<double> ev;
            if (events[i].found) ev = events[i].param;
            SpeedReport sp = speed_profile_checks(r.generic_u[i], r.contact.nodes,
                                                  cfg.qualify_radius_factor * h, ev);
            if (sp.u_monotone_applicable) ok = ok && sp.u_monotone_pass;
            if (sp.const_prejoin_applicable) {
                ok = ok && sp.const_prejoin_pass;
                worst_rel = std::max(worst_rel, sp.prejoin_variation);
            }
            ++checked;
        }
        for (const Streamline* s : [&] {
                 std::vector<const Streamline*> v;
                 for (const Streamline& a : r.attracting) v.push_back(&a);
                 for (const Streamline& g : r.generic_v) v.push_back(&g);
                 return v;
             }()) {
            SpeedReport sp = speed_profile_checks(*s, r.contact.nodes,
                                                  cfg.qualify_radius_factor * h, std::nullopt);
            if (sp.v_monotone_applicable) ok = ok && sp.v_monotone_pass;
            ++checked;
        }
        rep.checks.push_back(make_check(
            "speed_monotonicity", worst_rel, tol_fraction, pass_fail(ok),
            std::to_string(checked) + " traces; worst pre-event speed variation"));
    }
    { // capture: once a log-field trace reaches the contact set it stays
        bool ok = true;
        int entered = 0;
        double worst = 0.0;
        auto fold = [&](const Streamline& s) {
            CaptureReport c = capture_check(s, r.contact.nodes, h);
            if (c.entered) {
                ++entered;
                worst = std::max(worst, c.max_excursion);
            }
            ok = ok && c.pass;
        };
        for (const Streamline& s : r.attracting) fold(s);
        for (const Streamline& s : r.generic_v) fold(s);
        rep.checks.push_back(make_check("contact_capture", worst, 2.0 * h, pass_fail(ok),
                                        std::to_string(entered) + " of " +
                                            std::to_string(r.attracting.size() +
                                                           r.generic_v.size()) +
                                            " traces entered the contact region"));
    }
    { // flux integrals over random admissible loops
        try {
            auto loops = random_admissible_quads(poly, r.ridge, r.contact.nodes, 2.0 * h,
                                                 cfg.random_quads, cfg.seed);
            double worst_excess = -std::numeric_limits<double>::infinity();
            for (const auto& loop : loops) {
                double len = polyline_length(loop) + dist(loop.back(), loop.front());
                for (int m : cfg.flux_orders) {
                    double flux =
                        gauss_integral(r.limit.u, loop, m, poly, r.ridge, r.contact.nodes, 2.0 * h);
                    double tol = 10.0 * h * len * std::pow(lambda_inf, m - 1);
                    worst_excess = std::max(worst_excess, flux - tol);
                }
            }
            rep.checks.push_back(make_check(
                "gauss_flux", worst_excess, 0.0, pass_fail(worst_excess <= 0.0),
                std::to_string(loops.size()) + " loops x orders {2,4,8}; worst flux minus its bound"));
        } catch (const error& e) {
            rep.checks.push_back(make_check("gauss_flux", 0.0, 0.0, CheckStatus::Fail, e.what()));
        }
    }
    { // constructed quadrilaterals: interior no-meet and speed domination
        static const double level_pairs[][2] = {
            {0.30, 0.70}, {0.35, 0.75}, {0.25, 0.65}, {0.40, 0.80}};
        int built = 0, passed = 0, triangular = 0;
        double worst_ratio = 0.0;
        std::string first_failure;
        for (int q = 0; q < cfg.constructed_quads; ++q) {
            int k = q % n_sides;
            const Streamline& beta = r.medians[k].line;
            const Streamline& eta = r.attracting[k];
            double lo, hi;
            if (q == cfg.constructed_quads - 1) {
                // Degenerate case: pick the upper level at the value the median
                // holds two cells from the ridge, so the two upper crossings
                // collapse within the 2h merge distance at any resolution.
                lo = 0.30;
                hi = 0.0;
                for (size_t i = 0; i < beta.points.size(); ++i)
                    if (dist_to_ridge(r.ridge, beta.points[i]) <= 2.0 * h) {
                        hi = beta.values[i];
                        break;
                    }
                if (hi <= lo) hi = 0.9;
            } else {
                lo = level_pairs[q % 4][0];
                hi = level_pairs[q % 4][1];
            }
            try {
                QuadRuleReport qr = quadrilateral_rule_check(r.limit, beta, eta, lo, hi, poly,
                                                             r.ridge);
                ++built;
                if (qr.pass) ++passed;
                if (qr.triangular) ++triangular;
                if (qr.lower_max > 0.0)
                    worst_ratio = std::max(worst_ratio, qr.upper_max / qr.lower_max - 1.0);
                if (!qr.pass && first_failure.empty())
                    first_failure = "quad " + std::to_string(q) + " failed (precondition " +
                                    (qr.precondition_ok ? "ok" : "violated") + ", meets " +
                                    std::to_string(qr.interior_meets) + ")";
            } catch (const error& e) {
                if (first_failure.empty())
                    first_failure = "quad " + std::to_string(q) + ": " + e.what();
            }
        }
        bool ok = built == cfg.constructed_quads && passed == built && triangular >= 1;
        std::string note = std::to_string(passed) + "/" + std::to_string(cfg.constructed_quads) +
                           " quads pass, " + std::to_string(triangular) + " triangular";
        if (!first_failure.empty()) note += "; " + first_failure;
        rep.checks.push_back(
            make_check("quadrilateral_rule", worst_ratio, tol_fraction, pass_fail(ok), note));
    }
    { // contact measure trend over epsilon and resolution
        std::string table;
        for (size_t ih = 0; ih < trend.h_list.size(); ++ih) {
            table += (ih ? " | " : "") + fmt("h=%.5f:", trend.h_list[ih]);
            for (double m : trend.measure[ih]) table += " " + fmt("%.5f", m);
        }
        rep.checks.push_back(make_check(
            "area_zero_trend", trend.measure.back().back(), trend.quantum, pass_fail(trend.pass),
            table + (trend.eps_monotone ? "" : "; eps trend broken") +
                (trend.h_monotone ? "" : "; h trend broken")));
    }
    { // potential counterpart suite
        std::vector<CheckResult> suite = potential_counterpart_suite(r.potential, poly, r.ridge);
        bool ok = true;
        for (const CheckResult& c : suite)
            if (c.status == CheckStatus::Fail) ok = false;
        rep.checks.push_back(make_check("potential_counterpart", ok ? 1.0 : 0.0, 1.0,
                                        pass_fail(ok),
                                        std::to_string(suite.size()) + " structural checks"));
        for (CheckResult& c : suite) rep.checks.push_back(std::move(c));
    }

    // ------------------------------------------------------------------- SVG
    {
        std::vector<RenderCurve> curves;
        for (const Streamline& s : r.attracting)
            curves.push_back({s.points, CurveClass::Attracting});
        for (const MedianResult& m : r.medians)
            curves.push_back({m.line.points, CurveClass::Median});
        for (const Streamline& s : r.generic_u) curves.push_back({s.points, CurveClass::Generic});
        r.svg_u = render_svg(r.limit.u, poly, r.ridge, curves, cfg.render);
        std::string again = render_svg(r.limit.u, poly, r.ridge, curves, cfg.render);

        // The potential peaks conically, so its traces ride the lattice crease
        // near the center; the wider capture radius ends them cleanly there.
        TraceConfig tcU = tc;
        tcU.ridge_capture_factor = 3.0;
        ScalarField logU = log_field(r.potential.field);
        std::vector<RenderCurve> curvesU;
        for (int j = 0; j < n_sides; ++j) {
            Vec2 start = poly.vertex(j) + 3.0 * h * corner_bisector(poly, j);
            curvesU.push_back({trace(logU, start, tcU).points, CurveClass::Attracting});
        }
        for (int k = 0; k < n_sides; ++k) {
            Vec2 a = poly.vertex(k);
            Vec2 inward = poly.inward_normal(k);
            for (double f : cfg.side_fractions) {
                Vec2 seed = a + f * poly.edge(k) + h * inward;
                curvesU.push_back({trace(r.potential.field, seed, tcU).points,
                                   CurveClass::Generic});
            }
        }
        r.svg_potential = render_svg(r.potential.field, poly, r.ridge, curvesU, cfg.render);
        std::string againU = render_svg(r.potential.field, poly, r.ridge, curvesU, cfg.render);

        bool deterministic = (r.svg_u == again) && (r.svg_potential == againU);
        bool well_formed = r.svg_u.find("<svg") != std::string::npos &&
                           r.svg_potential.find("<svg") != std::string::npos;
        emit("figure_u.svg", [&](const std::string& p) { write_svg(p, r.svg_u); });
        emit("figure_potential.svg",
             [&](const std::string& p) { write_svg(p, r.svg_potential); });
        rep.checks.push_back(make_check(
            "figure_svg", static_cast<double>(r.svg_u.size()), 0.0,
            pass_fail(deterministic && well_formed),
            deterministic ? "two renders byte-identical" : "renders differ between calls"));
    }

    // ------------------------------------------------------ informational rows
    rep.checks.push_back(make_check("richardson_gap", r.limit.richardson_gap, 0.0,
                                    CheckStatus::Info,
                                    "sup gap between the top two ladder rungs"));
    {
        SupDifferenceReport d = compare_fields(r.limit.u, r.potential.field);
        rep.checks.push_back(make_check(
            "compare_u_U", d.sup, 0.0, CheckStatus::Info,
            "sup |u - U| at (" + fmt("%.4f", d.at.x) + ", " + fmt("%.4f", d.at.y) + ")"));
    }
    {
        LevelSweepReport ls = level_arc_sweep_check(r.limit, r.contact, attracting_pts, 4.0 * h);
        rep.checks.push_back(make_check(
            "level_arc_sweep", ls.worst_gap, ls.threshold, CheckStatus::Info,
            ls.vacuous ? "vacuous: every contact node is already near the curves"
                       : std::to_string(ls.nodes_tested) + " off-curve nodes swept"));
    }

    r.report = std::move(rep);

    if (writing) {
        r.artifacts.push_back(cfg.out_dir + "/report.json");
        std::string doc = report_json(r, cfg);
        std::ofstream out(cfg.out_dir + "/report.json", std::ios::binary);
        if (!out) fail(errc::parse_error, "cli: cannot write report.json");
        out << doc;
    }
    return r;
}

std::string report_json(const PipelineResult& result, const RunConfig& cfg) {
    ordered_json j;
    j["schema"] = "ridgeflow-report/1";

    ordered_json jc;
    jc["polygon_path"] = cfg.polygon_path;
    jc["h"] = cfg.h;
    jc["p_list"] = cfg.ladder.p_list;
    jc["max_iter"] = cfg.ladder.max_iter;
    jc["rel_tol"] = cfg.ladder.rel_tol;
    jc["epsilon"] = cfg.epsilon;
    jc["epsilon_list"] = cfg.epsilon_list;
    jc["trend_h_factor"] = cfg.trend_h_factor;
    jc["trend_p_list"] = cfg.trend_ladder.p_list;
    jc["side_fractions"] = cfg.side_fractions;
    jc["random_quads"] = cfg.random_quads;
    jc["constructed_quads"] = cfg.constructed_quads;
    jc["flux_orders"] = cfg.flux_orders;
    jc["lower_gradient_c"] = cfg.lower_gradient_c;
    jc["lower_gradient_min_p"] = cfg.lower_gradient_min_p;
    jc["concavity_pairs"] = cfg.concavity_pairs;
    jc["concavity_min_p"] = cfg.concavity_min_p;
    jc["qualify_radius_factor"] = cfg.qualify_radius_factor;
    jc["seed"] = cfg.seed;
    jc["out_dir"] = cfg.out_dir;
    jc["levels"] = cfg.render.levels;
    j["config"] = std::move(jc);

    ordered_json jp;
    jp["name"] = result.report.polygon_name;
    // Grid geometry travels through the result, so reuse its polygon data.
    const Polygon& poly = result.grid->poly;
    ordered_json verts = ordered_json::array();
    for (const Vec2& v : poly.vertices) verts.push_back({v.x, v.y});
    jp["vertices"] = std::move(verts);
    jp["R"] = result.ridge.R;
    jp["lambda_inf"] = result.ridge.lambda_inf;
    jp["ridge"] = {{result.ridge.a.x, result.ridge.a.y}, {result.ridge.b.x, result.ridge.b.y}};
    jp["diameter"] = diameter(poly);
    jp["area"] = area(poly);
    j["polygon"] = std::move(jp);

    ordered_json jl = ordered_json::array();
    for (const GroundState& st : result.ladder) {
        ordered_json row;
        row["p"] = st.p;
        row["lambda_p"] = st.lambda_p;
        row["root"] = std::pow(st.lambda_p, 1.0 / st.p);
        row["iterations"] = st.iterations;
        row["residual"] = st.residual;
        row["capped"] = st.max_iter_exceeded;
        jl.push_back(std::move(row));
    }
    j["ladder"] = std::move(jl);
    j["richardson_gap"] = result.limit.richardson_gap;

    ordered_json jpot;
    jpot["sweeps"] = result.potential.sweeps;
    jpot["residual"] = result.potential.residual;
    jpot["converged"] = result.potential.converged;
    jpot["constraint_nodes"] = result.potential.constraint_nodes.size();
    j["potential"] = std::move(jpot);

    ordered_json jk = ordered_json::array();
    for (const CheckResult& c : result.report.checks) {
        ordered_json row;
        row["name"] = c.name;
        row["status"] = status_name(c.status);
        row["value"] = c.value;
        row["threshold"] = c.threshold;
        row["note"] = c.note;
        jk.push_back(std::move(row));
    }
    j["checks"] = std::move(jk);
    j["artifacts"] = result.artifacts;
    j["exit_code"] = result.report.exit_code();
    return j.dump(2) + "\n";
}

} // namespace ridgeflow

#include "ridgeflow/infinity.hpp"

#include "ridgeflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ridgeflow {

namespace {

const Vec2 kDirs[8] = {{1.0, 0.0},
                       {M_SQRT1_2, M_SQRT1_2},
                       {0.0, 1.0},
                       {-M_SQRT1_2, M_SQRT1_2},
                       {-1.0, 0.0},
                       {-M_SQRT1_2, -M_SQRT1_2},
                       {0.0, -1.0},
                       {M_SQRT1_2, -M_SQRT1_2}};

// One clipped stencil ray: endpoint value = st.cval + sum w[k]*U[idx[k]].
// Datum rays carry the datum in cval with st.n == 0.
struct Ray {
    double arm = 0.0;
    InterpStencil st;
};

struct NodeRays {
    int node = 0;
    int i = 0, j = 0;
    Ray ray[8];
};

Ray clip_ray(const GridSpec& g, Vec2 x, Vec2 dir, double rad, const HighRidge* ridge,
             double rho, double boundary_value) {
    Ray r;
    double t_out = ray_exit_distance(g.poly, x, dir);
    double t_ridge = std::numeric_limits<double>::infinity();
    if (ridge != nullptr)
        t_ridge = capsule_entry_distance(x, dir, ridge->a, ridge->b, rho);
    if (t_ridge <= std::min(rad, t_out)) {
        r.arm = std::max(t_ridge, 1e-14 * g.h);
        r.st.cval = 1.0;
        return r;
    }
    if (t_out < rad) {
        r.arm = std::max(t_out, 1e-14 * g.h);
        r.st.cval = boundary_value;
        return r;
    }
    r.arm = rad;
    r.st = interpolation_stencil(g, x + rad * dir, boundary_value);
    return r;
}

double ray_value(const Ray& r, const std::vector<double>& values) {
    double v = r.st.cval;
    for (int k = 0; k < r.st.n; ++k) v += r.st.w[k] * values[r.st.idx[k]];
    return v;
}

} // namespace

double weighted_midrange(const double* v, const double* t, int n) {
    double lo = v[0], hi = v[0];
    for (int i = 1; i < n; ++i) {
        lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
    }
    if (lo == hi) return lo;
    // Root of f(r) = max_i (v[i]-r)/t[i] + min_j (v[j]-r)/t[j], strictly
    // decreasing and piecewise linear in r, bracketed by [lo, hi]. Newton on
    // the active pair with a bisection safeguard terminates exactly.
    double r = 0.5 * (lo + hi);
    double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    for (int iter = 0; iter < 64; ++iter) {
        double smax = -std::numeric_limits<double>::infinity();
        double smin = std::numeric_limits<double>::infinity();
        double tmax = 1.0, tmin = 1.0;
        for (int i = 0; i < n; ++i) {
            double s = (v[i] - r) / t[i];
            if (s > smax) {
                smax = s;
                tmax = t[i];
            }
            if (s < smin) {
                smin = s;
                tmin = t[i];
            }
        }
        double f = smax + smin;
        if (f > 0.0)
            lo = r;
        else
            hi = r;
        if (hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() * scale || f == 0.0)
            break;
        double rn = r + f / (1.0 / tmax + 1.0 / tmin);
        r = (rn > lo && rn < hi) ? rn : 0.5 * (lo + hi);
    }
    return r;
}

PotentialSolution solve_infinity_potential(std::shared_ptr<const GridSpec> grid,
                                           const HighRidge& ridge,
                                           const PotentialConfig& cfg) {
    const GridSpec& g = *grid;
    const double h = g.h;
    const double rad = cfg.radius_factor * h;
    const double rho = cfg.clip_radius_factor * h;

    PotentialSolution sol;
    sol.stencil_radius = rad;
    sol.field = make_field(grid, FieldLabel::U, 0.0, 0.0);

    // Ridge constraint nodes: everything within the clip capsule; if the
    // lattice misses the capsule entirely, pin the corners of the cells the
    // ridge passes through instead.
    std::vector<uint8_t> pinned(static_cast<size_t>(g.nx) * g.ny, 0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.in(i, j)) continue;
            if (point_segment_distance(g.node(i, j), ridge.a, ridge.b) <= rho + 1e-12 * h)
                pinned[g.idx(i, j)] = 1;
        }
    bool any_pinned = false;
    for (uint8_t p : pinned) any_pinned = any_pinned || (p != 0);
    if (!any_pinned) {
        int nsamp = ridge.is_point() ? 1
                                     : static_cast<int>(std::ceil(ridge.length() / (0.25 * h))) + 1;
        for (int s = 0; s < nsamp; ++s) {
            double tpar = nsamp == 1 ? 0.0 : static_cast<double>(s) / (nsamp - 1);
            Vec2 q = ridge.a + tpar * (ridge.b - ridge.a);
            int ci = static_cast<int>(std::floor((q.x - g.origin.x) / h));
            int cj = static_cast<int>(std::floor((q.y - g.origin.y) / h));
            for (int dj = 0; dj < 2; ++dj)
                for (int di = 0; di < 2; ++di)
                    if (g.in(ci + di, cj + dj)) pinned[g.idx(ci + di, cj + dj)] = 1;
        }
    }

    // Initial guess: the rescaled distance function, exact on the datum sets.
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.in(i, j)) continue;
            int n = g.idx(i, j);
            sol.field.values[n] =
                pinned[n] ? 1.0 : std::min(1.0, g.bdist[n] * ridge.lambda_inf);
            if (pinned[n]) sol.constraint_nodes.push_back(n);
        }

    // Precompute the clipped stencil of every free node once; the geometry
    // never changes across sweeps.
    std::vector<NodeRays> work;
    work.reserve(static_cast<size_t>(g.interior_count));
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.in(i, j) || pinned[g.idx(i, j)]) continue;
            NodeRays nr;
            nr.node = g.idx(i, j);
            nr.i = i;
            nr.j = j;
            Vec2 x = g.node(i, j);
            for (int d = 0; d < 8; ++d)
                nr.ray[d] = clip_ray(g, x, kDirs[d], rad, &ridge, rho, 0.0);
            work.push_back(nr);
        }

    // Four Gauss-Seidel sweep orders, rotated to move information along all
    // characteristic directions: row-major, reverse row-major, column-major,
    // reverse column-major.
    std::vector<int> col_order(work.size());
    for (size_t k = 0; k < work.size(); ++k) col_order[k] = static_cast<int>(k);
    std::sort(col_order.begin(), col_order.end(), [&](int a, int b) {
        if (work[a].i != work[b].i) return work[a].i < work[b].i;
        return work[a].j < work[b].j;
    });

    double vbuf[8], abuf[8];
    auto update_node = [&](const NodeRays& nr) {
        for (int d = 0; d < 8; ++d) {
            vbuf[d] = ray_value(nr.ray[d], sol.field.values);
            abuf[d] = nr.ray[d].arm;
        }
        double r = weighted_midrange(vbuf, abuf, 8);
        double change = std::abs(r - sol.field.values[nr.node]);
        sol.field.values[nr.node] = r;
        return change;
    };

    double sup_change = std::numeric_limits<double>::infinity();
    int sweep = 0;
    for (sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        sup_change = 0.0;
        switch ((sweep - 1) % 4) {
        case 0:
            for (size_t k = 0; k < work.size(); ++k)
                sup_change = std::max(sup_change, update_node(work[k]));
            break;
        case 1:
            for (size_t k = work.size(); k-- > 0;)
                sup_change = std::max(sup_change, update_node(work[k]));
            break;
        case 2:
            for (size_t k = 0; k < work.size(); ++k)
                sup_change = std::max(sup_change, update_node(work[col_order[k]]));
            break;
        default:
            for (size_t k = work.size(); k-- > 0;)
                sup_change = std::max(sup_change, update_node(work[col_order[k]]));
            break;
        }
        if (!std::isfinite(sup_change))
            fail(errc::non_finite_encountered, "potential sweep left double range");
        if (sup_change < cfg.tol) break;
    }
    sol.sweeps = std::min(sweep, cfg.max_sweeps);
    sol.residual = sup_change;
    sol.converged = sup_change < cfg.tol;
    return sol;
}

GroundLimit extract_ground_limit(const std::vector<GroundState>& states,
                                 const HighRidge& ridge) {
    (void)ridge; // geometry is implicit in the fields; kept for call symmetry
    if (states.size() < 2)
        fail(errc::ladder_too_short, "need at least two rungs to extract the limit");
    const GroundState& top = states.back();
    const GroundState& prev = states[states.size() - 2];
    if (top.field.grid != prev.field.grid)
        fail(errc::grid_mismatch, "ladder rungs live on different grids");

    GroundLimit lim;
    lim.p_used = top.p;
    lim.u = top.field;
    lim.u.label = FieldLabel::u;
    lim.v = make_field(top.field.grid, FieldLabel::v, 0.0, 0.0);

    const GridSpec& g = *top.field.grid;
    double gap = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.in(i, j)) continue;
            int n = g.idx(i, j);
            gap = std::max(gap, std::abs(top.field.values[n] - prev.field.values[n]));
            lim.v.values[n] = std::log(std::max(lim.u.values[n], kLogFloor));
        }
    lim.richardson_gap = gap;
    return lim;
}

SandwichReport sandwich_check(const ScalarField& field, const Polygon& poly,
                              const HighRidge& ridge) {
    const GridSpec& g = *field.grid;
    (void)poly; // boundary distances are cached on the grid
    SandwichReport rep;
    rep.tol_h = 10.0 * g.h * ridge.lambda_inf;
    rep.worst_lower = -std::numeric_limits<double>::infinity();
    rep.worst_upper = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.in(i, j)) continue;
            Vec2 x = g.node(i, j);
            double val = field.at(i, j);
            double cone = std::max(
                0.0, 1.0 - ridge.lambda_inf * point_segment_distance(x, ridge.a, ridge.b));
            double upper = ridge.lambda_inf * g.bdist[g.idx(i, j)];
            double lo_viol = (cone - rep.tol_h) - val;
            double up_viol = val - (upper + rep.tol_h);
            if (lo_viol > rep.worst_lower) {
                rep.worst_lower = lo_viol;
                rep.worst_lower_at = x;
            }
            if (up_viol > rep.worst_upper) {
                rep.worst_upper = up_viol;
                rep.worst_upper_at = x;
            }
        }
    rep.pass = rep.worst_lower <= 0.0 && rep.worst_upper <= 0.0;
    return rep;
}

ResidualStats residual_infinity_laplacian(const ScalarField& field,
                                          const std::vector<Vec2>& exclusion,
                                          double exclusion_radius,
                                          const HighRidge* clip_ridge,
                                          const PotentialConfig& cfg) {
    const GridSpec& g = *field.grid;
    const double h = g.h;
    const double rad = cfg.radius_factor * h;
    const double rho = cfg.clip_radius_factor * h;

    ResidualStats stats;
    double abs_sum = 0.0;
    double vbuf[8], abuf[8];
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (!g.in(i, j)) continue;
            Vec2 x = g.node(i, j);
            if (clip_ridge != nullptr &&
                point_segment_distance(x, clip_ridge->a, clip_ridge->b) <= rho + 1e-12 * h) {
                ++stats.excluded; // constraint region, not a fixed point
                continue;
            }
            bool skip = false;
            for (const Vec2& e : exclusion)
                if (dist(x, e) <= exclusion_radius) {
                    skip = true;
                    break;
                }
            if (skip) {
                ++stats.excluded;
                continue;
            }
            for (int d = 0; d < 8; ++d) {
                Ray r = clip_ray(g, x, kDirs[d], rad, clip_ridge, rho, field.boundary_value);
                vbuf[d] = ray_value(r, field.values);
                abuf[d] = r.arm;
            }
            double dev = std::abs(field.at(i, j) - weighted_midrange(vbuf, abuf, 8));
            ++stats.tested;
            abs_sum += dev;
            if (dev > stats.sup) {
                stats.sup = dev;
                stats.sup_at = x;
            }
        }
    }
    stats.mean_abs = stats.tested > 0 ? abs_sum / stats.tested : 0.0;
    stats.pass = stats.sup < 10.0 * h;
    return stats;
}

SupDifferenceReport compare_fields(const ScalarField& a, const ScalarField& b) {
    const GridSpec& ga = *a.grid;
    const GridSpec& gb = *b.grid;
    if (ga.nx != gb.nx || ga.ny != gb.ny || ga.h != gb.h || dist(ga.origin, gb.origin) > 1e-12)
        fail(errc::grid_mismatch, "fields live on different grids");
    SupDifferenceReport rep;
    for (int j = 0; j < ga.ny; ++j)
        for (int i = 0; i < ga.nx; ++i) {
            if (!ga.in(i, j) || !gb.in(i, j)) continue;
            double d = std::abs(a.at(i, j) - b.at(i, j));
            if (d > rep.sup) {
                rep.sup = d;
                rep.at = ga.node(i, j);
            }
        }
    return rep;
}

} // namespace ridgeflow

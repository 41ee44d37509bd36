#include "ridgeflow/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace ridgeflow {

namespace {

// One corner of a quadrature cell: inside corners reference one dof with
// weight 1; ghost corners blend up to two dofs plus the boundary datum.
struct Corner {
    int dof[2] = {-1, -1};
    double w[2] = {0.0, 0.0};
    double wb = 0.0;
};

struct QuadCell {
    Corner corner[4]; // order (0,0), (1,0), (0,1), (1,1)
    double area = 0.0;
};

struct QuadMesh {
    std::vector<QuadCell> cells;
    std::vector<int> dof_node; // dof -> grid node index
    double h = 0.0;
};

// Cell-corner signs of the Q1 cell-centered derivative stencils.
constexpr double kSx[4] = {-1.0, 1.0, -1.0, 1.0};
constexpr double kSy[4] = {-1.0, -1.0, 1.0, 1.0};

double clipped_cell_area(const Polygon& poly, Vec2 lo, double h) {
    std::vector<Vec2> cur{{lo.x, lo.y}, {lo.x + h, lo.y}, {lo.x + h, lo.y + h}, {lo.x, lo.y + h}};
    std::vector<Vec2> next;
    for (int s = 0; s < poly.size() && !cur.empty(); ++s) {
        Vec2 a0 = poly.vertex(s);
        Vec2 nrm = poly.inward_normal(s);
        next.clear();
        int m = static_cast<int>(cur.size());
        for (int i = 0; i < m; ++i) {
            Vec2 p = cur[i], q = cur[(i + 1) % m];
            double dp = dot(p - a0, nrm), dq = dot(q - a0, nrm);
            if (dp >= 0.0) next.push_back(p);
            if ((dp >= 0.0) != (dq >= 0.0)) next.push_back(p + (dp / (dp - dq)) * (q - p));
        }
        cur = next;
    }
    if (cur.size() < 3) return 0.0;
    double area2 = 0.0;
    for (size_t i = 0; i < cur.size(); ++i) area2 += cross(cur[i], cur[(i + 1) % cur.size()]);
    return 0.5 * area2;
}

QuadMesh build_mesh(const GridSpec& g, std::vector<int>& node_dof) {
    QuadMesh mesh;
    mesh.h = g.h;
    node_dof.assign(g.nx * g.ny, -1);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.in(i, j)) {
                node_dof[g.idx(i, j)] = static_cast<int>(mesh.dof_node.size());
                mesh.dof_node.push_back(g.idx(i, j));
            }
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const int ci[4] = {i, i + 1, i, i + 1};
            const int cj[4] = {j, j, j + 1, j + 1};
            bool any = false;
            for (int k = 0; k < 4; ++k) any = any || g.in(ci[k], cj[k]);
            if (!any) continue;
            double a = clipped_cell_area(g.poly, g.node(i, j), g.h);
            if (a <= 1e-14 * g.h * g.h) continue;
            QuadCell cell;
            cell.area = a;
            for (int k = 0; k < 4; ++k) {
                Corner cr;
                if (g.in(ci[k], cj[k])) {
                    cr.dof[0] = node_dof[g.idx(ci[k], cj[k])];
                    cr.w[0] = 1.0;
                    cr.wb = 0.0;
                } else {
                    GhostWeights gw =
                        ghost_weights(g, ci[k], cj[k], i + 1 - (k % 2), j + 1 - (k / 2));
                    if (gw.n1 >= 0) {
                        cr.dof[0] = node_dof[gw.n1];
                        cr.w[0] = gw.w1;
                    }
                    if (gw.n2 >= 0) {
                        cr.dof[1] = node_dof[gw.n2];
                        cr.w[1] = gw.w2;
                    }
                    cr.wb = gw.wb;
                }
                cell.corner[k] = cr;
            }
            mesh.cells.push_back(cell);
        }
    }
    return mesh;
}

// x^n by repeated squaring; the default exponent ladder is all even integers,
// which makes this the hot path instead of std::pow.
inline double ipow(double x, int n) {
    double r = 1.0;
    while (n > 0) {
        if (n & 1) r *= x;
        x *= x;
        n >>= 1;
    }
    return r;
}

struct PowP {
    double p;
    bool even_int;
    int pi;
    explicit PowP(double p_)
        : p(p_), even_int(p_ == std::floor(p_) && p_ < 1e9 &&
                          (static_cast<long long>(p_) % 2 == 0)),
          pi(even_int ? static_cast<int>(p_) : 0) {}
    double half(double x) const { return even_int ? ipow(x, pi / 2) : std::pow(x, 0.5 * p); }
    double half_m1(double x) const {
        return even_int ? ipow(x, pi / 2 - 1) : std::pow(x, 0.5 * (p - 2.0));
    }
    double full(double x) const { return even_int ? ipow(x, pi) : std::pow(x, p); }
    double full_m1(double x) const {
        return even_int ? ipow(x, pi - 1) : std::pow(x, p - 1.0);
    }
};

struct EvalScratch {
    std::vector<double> cell_gxm; // cached (gx, gy, mid) per cell
    std::vector<double> gN, gD;
    // Value-pass results, kept so a gradient pass over the same field can
    // skip the value recomputation entirely.
    double max_g2 = 0.0, max_m = 0.0, Ns = 0.0, Ds = 0.0, log_lam = 0.0;
};

// Quotient value at x; fills scr with the per-cell data the gradient pass
// needs. All reductions run in fixed cell order.
double eval_value(const QuadMesh& mesh, const std::vector<double>& x, double p, double bval,
                  EvalScratch& scr) {
    const double h = mesh.h;
    const PowP pw(p);
    const size_t nc = mesh.cells.size();
    scr.cell_gxm.resize(3 * nc);
    double max_g2 = 0.0, max_m = 0.0;

    for (size_t c = 0; c < nc; ++c) {
        const QuadCell& cell = mesh.cells[c];
        double v[4];
        for (int k = 0; k < 4; ++k) {
            const Corner& cr = cell.corner[k];
            double val = cr.wb * bval;
            if (cr.dof[0] >= 0) val += cr.w[0] * x[cr.dof[0]];
            if (cr.dof[1] >= 0) val += cr.w[1] * x[cr.dof[1]];
            v[k] = val;
        }
        double gx = ((v[1] + v[3]) - (v[0] + v[2])) / (2.0 * h);
        double gy = ((v[2] + v[3]) - (v[0] + v[1])) / (2.0 * h);
        double mid = 0.25 * (v[0] + v[1] + v[2] + v[3]);
        scr.cell_gxm[3 * c] = gx;
        scr.cell_gxm[3 * c + 1] = gy;
        scr.cell_gxm[3 * c + 2] = mid;
        max_g2 = std::max(max_g2, gx * gx + gy * gy);
        max_m = std::max(max_m, std::abs(mid));
    }
    if (!(max_m > 0.0))
        fail(errc::zero_denominator, "field vanishes: Rayleigh quotient undefined");
    scr.max_g2 = max_g2;
    scr.max_m = max_m;
    if (!(max_g2 > 0.0)) return 0.0;

    double Mg = std::sqrt(max_g2);
    double Ns = 0.0, Ds = 0.0;
    for (size_t c = 0; c < nc; ++c) {
        const QuadCell& cell = mesh.cells[c];
        double gx = scr.cell_gxm[3 * c];
        double gy = scr.cell_gxm[3 * c + 1];
        double mid = scr.cell_gxm[3 * c + 2];
        double g2s = (gx * gx + gy * gy) / max_g2;
        double ams = std::abs(mid / max_m);
        Ns += cell.area * pw.half(g2s);
        Ds += cell.area * pw.full(ams);
    }
    if (!(Ds > 0.0))
        fail(errc::zero_denominator, "field vanishes on all cell midpoints");

    double log_lam = p * (std::log(Mg) - std::log(max_m)) + std::log(Ns) - std::log(Ds);
    double lam = std::exp(log_lam);
    if (!std::isfinite(lam))
        fail(errc::non_finite_encountered, "Rayleigh quotient left double range");
    scr.Ns = Ns;
    scr.Ds = Ds;
    scr.log_lam = log_lam;
    return lam;
}

// d(lambda)/d(dof) for the field whose value pass filled scr. Reuses the
// cached per-cell gradients and midpoints, so it costs one cell sweep.
void eval_grad_cached(const QuadMesh& mesh, double p, EvalScratch& scr,
                      std::vector<double>& grad) {
    const double h = mesh.h;
    const PowP pw(p);
    const size_t nc = mesh.cells.size();
    const double max_g2 = scr.max_g2, max_m = scr.max_m;
    if (!(max_g2 > 0.0)) {
        std::fill(grad.begin(), grad.end(), 0.0);
        return;
    }
    double Mg = std::sqrt(max_g2);
    scr.gN.assign(grad.size(), 0.0);
    scr.gD.assign(grad.size(), 0.0);

    for (size_t c = 0; c < nc; ++c) {
        const QuadCell& cell = mesh.cells[c];
        double gx = scr.cell_gxm[3 * c];
        double gy = scr.cell_gxm[3 * c + 1];
        double mid = scr.cell_gxm[3 * c + 2];
        double g2s = (gx * gx + gy * gy) / max_g2;
        double ms = mid / max_m;
        double ams = std::abs(ms);

        double tN = cell.area * p * pw.half_m1(g2s);
        double tD = cell.area * p * pw.full_m1(ams) *
                    (ms > 0 ? 1.0 : (ms < 0 ? -1.0 : 0.0)) * 0.25;
        double gxs = gx / Mg, gys = gy / Mg;
        for (int k = 0; k < 4; ++k) {
            double cN = tN * (gxs * kSx[k] + gys * kSy[k]) / (2.0 * h);
            const Corner& cr = cell.corner[k];
            for (int s = 0; s < 2; ++s) {
                if (cr.dof[s] < 0) continue;
                scr.gN[cr.dof[s]] += cr.w[s] * cN;
                scr.gD[cr.dof[s]] += cr.w[s] * tD;
            }
        }
    }

    double logD = p * std::log(max_m) + std::log(scr.Ds);
    double fN = std::exp((p - 1.0) * std::log(Mg) - logD);
    double fD = std::exp(scr.log_lam + (p - 1.0) * std::log(max_m) - logD);
    for (size_t i = 0; i < grad.size(); ++i) {
        grad[i] = fN * scr.gN[i] - fD * scr.gD[i];
        if (!std::isfinite(grad[i]))
            fail(errc::non_finite_encountered, "quotient gradient left double range");
    }
}

double eval_quotient(const QuadMesh& mesh, const std::vector<double>& x, double p, double bval,
                     std::vector<double>* grad, EvalScratch& scr) {
    double lam = eval_value(mesh, x, p, bval, scr);
    if (grad) {
        grad->resize(x.size());
        eval_grad_cached(mesh, p, scr, *grad);
    }
    return lam;
}

std::vector<double> compact(const ScalarField& f, const std::vector<int>& node_dof, int ndof) {
    std::vector<double> x(ndof, 0.0);
    for (size_t n = 0; n < node_dof.size(); ++n) {
        if (node_dof[n] < 0) continue;
        double v = f.values[n];
        if (!std::isfinite(v))
            fail(errc::non_finite_encountered, "initial field has non-finite interior values");
        x[node_dof[n]] = v;
    }
    return x;
}

} // namespace

double rayleigh_quotient(const ScalarField& field, double p) {
    if (p < 2.0) fail(errc::invalid_argument, "exponent p must be at least 2");
    std::vector<int> node_dof;
    QuadMesh mesh = build_mesh(*field.grid, node_dof);
    std::vector<double> x = compact(field, node_dof, static_cast<int>(mesh.dof_node.size()));
    EvalScratch scr;
    return eval_quotient(mesh, x, p, field.boundary_value, nullptr, scr);
}

GroundState minimize_ground_state(std::shared_ptr<const GridSpec> grid, double p,
                                  const ScalarField& init, const LadderConfig& cfg) {
    if (p < 2.0) fail(errc::invalid_argument, "exponent p must be at least 2");
    const GridSpec& g = *grid;
    std::vector<int> node_dof;
    QuadMesh mesh = build_mesh(g, node_dof);
    int nd = static_cast<int>(mesh.dof_node.size());

    std::vector<double> x = compact(init, node_dof, nd);
    // Projection onto the admissible cone: nonnegative values, sup exactly 1.
    // Returns false when clamping annihilates the field (step way too long).
    auto project = [&](std::vector<double>& v) {
        double m = 0.0;
        for (double& e : v) {
            e = std::max(e, 0.0);
            m = std::max(m, e);
        }
        if (m == 0.0) return false;
        for (double& e : v) e /= m;
        return true;
    };
    if (!project(x))
        fail(errc::zero_denominator, "initial field is nonpositive everywhere");

    std::vector<double> grad(nd), xprev(nd), gprev(nd), trial(nd);
    EvalScratch scr;
    const double bval = 0.0; // homogeneous Dirichlet data for the eigenproblem

    double lam = eval_quotient(mesh, x, p, bval, &grad, scr);
    double gmax = 0.0;
    for (double v : grad) gmax = std::max(gmax, std::abs(v));
    double alpha = gmax > 0.0 ? 0.01 / gmax : 1.0;

    std::deque<double> hist{lam};
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    bool exhausted = true;

    for (it = 1; it <= cfg.max_iter; ++it) {
        // Backtracking line search on projected steps: never accept an increase.
        bool accepted = false;
        double lam_trial = lam;
        for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
            for (int i = 0; i < nd; ++i) trial[i] = x[i] - alpha * grad[i];
            if (!project(trial)) {
                alpha *= 0.5;
                continue;
            }
            lam_trial = eval_value(mesh, trial, p, bval, scr);
            if (lam_trial <= lam) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            exhausted = false; // stalled at a stationary point
            break;
        }

        xprev.swap(x);
        gprev.swap(grad);
        x = trial;
        // The accepted trial's value pass is still in scr; reuse it for the
        // gradient instead of re-evaluating the quotient from scratch.
        lam = lam_trial;
        grad.resize(nd);
        eval_grad_cached(mesh, p, scr, grad);

        // Barzilai-Borwein trial step for the next iteration, capped at a
        // fixed multiple of the step that just passed the line search: at
        // large p the curvature estimate routinely overshoots by orders of
        // magnitude and every iteration would pay dozens of halvings.
        double ss = 0.0, sy = 0.0;
        for (int i = 0; i < nd; ++i) {
            double s = x[i] - xprev[i];
            double y = grad[i] - gprev[i];
            ss += s * s;
            sy += s * y;
        }
        double bb = sy > 1e-300 ? std::clamp(ss / sy, 1e-14, 1e8) : alpha * 4.0;
        alpha = std::min(bb, alpha * 32.0);

        hist.push_back(lam);
        if (static_cast<int>(hist.size()) > cfg.window + 1) hist.pop_front();
        residual = (hist.front() - lam) / std::max(lam, 1e-300);
        if (static_cast<int>(hist.size()) == cfg.window + 1 && residual < cfg.rel_tol) {
            exhausted = false;
            break;
        }
        if (cfg.grad_tol > 0.0) {
            double gm = 0.0;
            for (double v : grad) gm = std::max(gm, std::abs(v));
            if (gm <= cfg.grad_tol * lam) {
                exhausted = false;
                break;
            }
        }
    }

    GroundState state;
    state.p = p;
    state.iterations = std::min(it, cfg.max_iter);
    state.max_iter_exceeded = exhausted;
    state.lambda_p = lam;
    state.residual = residual;
    state.field = make_field(grid, FieldLabel::u_p, 0.0, 0.0);
    for (int n = 0; n < static_cast<int>(node_dof.size()); ++n)
        if (node_dof[n] >= 0) state.field.values[n] = x[node_dof[n]];
    return state;
}

std::vector<GroundState> continuation_solve(std::shared_ptr<const GridSpec> grid,
                                            const LadderConfig& cfg) {
    if (cfg.p_list.empty()) fail(errc::invalid_argument, "empty exponent ladder");
    for (size_t i = 0; i < cfg.p_list.size(); ++i) {
        if (cfg.p_list[i] < 2.0) fail(errc::invalid_argument, "ladder exponents must be >= 2");
        if (i > 0 && cfg.p_list[i] <= cfg.p_list[i - 1])
            fail(errc::invalid_argument, "ladder exponents must increase");
    }
    ScalarField init = make_field(grid, FieldLabel::u_p, 0.0, 0.0);
    for (int j = 0; j < grid->ny; ++j)
        for (int i = 0; i < grid->nx; ++i)
            if (grid->in(i, j)) init.at(i, j) = grid->bdist[grid->idx(i, j)];

    std::vector<GroundState> states;
    for (double p : cfg.p_list) {
        states.push_back(minimize_ground_state(grid, p, init, cfg));
        init = states.back().field;
    }
    return states;
}

MarginReport gradient_bound_check(const GroundState& state, const Polygon& poly) {
    const GridSpec& g = *state.field.grid;
    HighRidge ridge = chebyshev_set(poly);
    double tol_h = 10.0 * g.h * ridge.lambda_inf;

    double sup = 0.0;
    for (double v : state.field.values)
        if (std::isfinite(v)) sup = std::max(sup, std::abs(v));
    double bound =
        std::exp(std::log(state.lambda_p * diameter(poly)) / (state.p - 1.0)) * sup;

    MarginReport rep;
    rep.bound = bound;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (!g.in(i, j)) continue;
            rep.extreme = std::max(rep.extreme, norm(node_gradient(state.field, i, j)));
            ++rep.region_nodes;
        }
    }
    rep.margin = rep.extreme - bound;
    rep.pass = rep.margin <= tol_h;
    return rep;
}

MarginReport lower_gradient_check(const GroundState& state, const Polygon& poly, double c) {
    if (!(c > 0.0 && c < 1.0)) fail(errc::invalid_argument, "level c must lie in (0,1)");
    const GridSpec& g = *state.field.grid;
    HighRidge ridge = chebyshev_set(poly);
    double tol_h = 10.0 * g.h * ridge.lambda_inf;
    double bound = std::log(1.0 / c) / (2.0 * diameter(poly));

    MarginReport rep;
    rep.bound = bound;
    rep.extreme = std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (!g.in(i, j)) continue;
            double u = state.field.at(i, j);
            if (u > c) continue;
            // |grad v| = |grad u| / u for v = log u.
            double gv = norm(node_gradient(state.field, i, j)) / std::max(u, 1e-300);
            rep.extreme = std::min(rep.extreme, gv);
            ++rep.region_nodes;
        }
    }
    if (rep.region_nodes == 0)
        fail(errc::empty_region, "no interior node lies below level " + std::to_string(c));
    rep.margin = bound - rep.extreme;
    rep.pass = rep.margin <= tol_h;
    return rep;
}

double max_cell_laplacian(const ScalarField& field) {
    const GridSpec& g = *field.grid;
    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (!g.in(i, j) || !g.in(i + 1, j) || !g.in(i - 1, j) || !g.in(i, j + 1) ||
                !g.in(i, j - 1))
                continue;
            double lap = field.at(i + 1, j) + field.at(i - 1, j) + field.at(i, j + 1) +
                         field.at(i, j - 1) - 4.0 * field.at(i, j);
            worst = std::max(worst, lap);
        }
    }
    return worst;
}

} // namespace ridgeflow

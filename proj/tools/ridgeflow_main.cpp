// Command-line front end: solve ladders, extract limits, trace streamlines,
// run the verification pipeline, and render figures for a convex polygon.

#include "ridgeflow/pipeline.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

namespace {

using namespace ridgeflow;

struct CommonArgs {
    std::string polygon_path;
    double h = 1.0 / 128;
    std::vector<double> p_ladder{2, 4, 8, 16, 32, 64};
    double epsilon = 0.05;
    std::string out_dir = "out";
    std::vector<double> levels{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::uint64_t seed = 12345;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    // --h is a data option here, so help lives on --help alone.
    cmd->set_help_flag("--help", "Print this help message and exit");
    cmd->add_option("--polygon", a.polygon_path, "Polygon JSON file")
        ->required()
        ->envname("RIDGEFLOW_POLYGON");
    cmd->add_option("--h", a.h, "Grid spacing")->envname("RIDGEFLOW_H");
    cmd->add_option("--p-ladder", a.p_ladder, "Comma-separated exponent ladder")
        ->delimiter(',')
        ->envname("RIDGEFLOW_P_LADDER");
    cmd->add_option("--epsilon", a.epsilon, "Contact-set slope tolerance")
        ->envname("RIDGEFLOW_EPSILON");
    cmd->add_option("--out", a.out_dir, "Output directory")->envname("RIDGEFLOW_OUT");
    cmd->add_option("--levels", a.levels, "Comma-separated contour levels")
        ->delimiter(',')
        ->envname("RIDGEFLOW_LEVELS");
    cmd->add_option("--seed", a.seed, "Random seed for sampled checks")
        ->envname("RIDGEFLOW_SEED");
}

RunConfig to_config(const CommonArgs& a) {
    RunConfig cfg;
    cfg.polygon_path = a.polygon_path;
    cfg.h = a.h;
    cfg.ladder.p_list = a.p_ladder;
    cfg.trend_ladder.p_list = a.p_ladder;
    cfg.epsilon = a.epsilon;
    cfg.out_dir = a.out_dir;
    cfg.render.levels = a.levels;
    cfg.seed = a.seed;
    return cfg;
}

void print_ladder(const PipelineResult& r) {
    std::printf("  %-6s %-16s %-10s %-6s %-10s\n", "p", "lambda_p", "root", "iters", "residual");
    for (const GroundState& st : r.ladder)
        std::printf("  %-6.0f %-16.8e %-10.6f %-6d %-10.3e%s\n", st.p, st.lambda_p,
                    std::pow(st.lambda_p, 1.0 / st.p), st.iterations, st.residual,
                    st.max_iter_exceeded ? "  (capped)" : "");
    std::printf("  1/R = %.6f, richardson gap %.3e\n", r.ridge.lambda_inf,
                r.limit.richardson_gap);
}

void print_checks(const PipelineResult& r) {
    for (const CheckResult& c : r.report.checks)
        std::printf("  [%-4s] %-28s value %.6g  threshold %.6g  %s\n", status_name(c.status),
                    c.name.c_str(), c.value, c.threshold, c.note.c_str());
    std::printf("%s: %s (h = %g, p_top = %g, exit %d)\n", r.report.polygon_name.c_str(),
                r.report.all_pass() ? "ALL CHECKS PASS" : "CHECK FAILURES", r.report.h,
                r.report.p_top, r.report.exit_code());
}

int run(const std::string& mode, const CommonArgs& args) {
    RunConfig cfg = to_config(args);
    if (mode != "verify" && mode != "all") {
        // These modes do not need the sampled check suite; keep the run light
        // by shrinking the expensive knobs while leaving artifacts intact.
        cfg.random_quads = 1;
        cfg.concavity_pairs = 100;
        cfg.trend_ladder.p_list = {2, 4};
    }
    PipelineResult r = run_pipeline(cfg);
    std::printf("polygon %s: R = %.6f, lambda_inf = %.6f\n", r.report.polygon_name.c_str(),
                r.ridge.R, r.ridge.lambda_inf);
    if (mode == "solve" || mode == "verify" || mode == "all") print_ladder(r);
    if (mode == "potential")
        std::printf("  potential: %d sweeps, residual %.3e, %s\n", r.potential.sweeps,
                    r.potential.residual, r.potential.converged ? "converged" : "NOT converged");
    if (mode == "trace")
        std::printf("  traces: %zu attracting, %zu medians, %zu generic\n", r.attracting.size(),
                    r.medians.size(), r.generic_u.size());
    if (mode == "verify" || mode == "all") print_checks(r);
    for (const std::string& a : r.artifacts) std::printf("  wrote %s\n", a.c_str());
    if (mode == "verify" || mode == "all") return r.report.exit_code();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational ground-state laboratory for convex polygons"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    const char* modes[] = {"solve", "potential", "trace", "verify", "render", "all"};
    const char* blurbs[] = {
        "Solve the exponent ladder and extract the limit fields",
        "Solve the ridge-pinned potential problem",
        "Trace attracting streamlines, medians, and a generic suite",
        "Run the full verification pipeline and report PASS/FAIL",
        "Render the level-curve/streamline figures",
        "Run everything: solve, trace, verify, render",
    };
    CommonArgs args[6];
    for (int i = 0; i < 6; ++i) add_common(app.add_subcommand(modes[i], blurbs[i]), args[i]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (int i = 0; i < 6; ++i)
            if (app.get_subcommand(modes[i])->parsed()) return run(modes[i], args[i]);
    } catch (const ridgeflow::error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}

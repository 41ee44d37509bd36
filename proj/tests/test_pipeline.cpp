#include "ridgeflow/pipeline.hpp"

#include "ridgeflow/errors.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using namespace ridgeflow;

namespace {

std::filesystem::path temp_dir(const std::string& leaf) {
    auto dir = std::filesystem::temp_directory_path() / ("ridgeflow_pipe_" + leaf);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_square_json(const std::filesystem::path& dir) {
    auto path = dir / "square.json";
    std::ofstream out(path);
    out << R"({"name":"sq","vertices":[[0,0],[1,0],[1,1],[0,1]],)"
        << R"("lambda2_reference":19.739208802178716})";
    return path.string();
}

RunConfig fast_config() {
    // Coarse calibration: shallow ladders resolve the near-critical slope
    // band at coarse spacing, so p stops at 8 when h = 1/32.
    RunConfig cfg;
    cfg.h = 1.0 / 32;
    cfg.ladder.p_list = {2, 4, 8};
    cfg.trend_ladder.p_list = {2, 4, 8};
    cfg.random_quads = 5;
    cfg.concavity_pairs = 500;
    return cfg;
}

} // namespace

TEST_CASE("polygon files parse with name and reference data") {
    auto dir = temp_dir("load");
    std::string path = write_square_json(dir);
    PolygonInput input = load_polygon(path);
    CHECK(input.poly.name == "sq");
    CHECK(input.poly.size() == 4);
    CHECK(input.lambda2_reference == doctest::Approx(19.7392088));

    SUBCASE("name defaults to the file stem") {
        auto anon = dir / "box.json";
        std::ofstream(anon) << R"({"vertices":[[0,0],[1,0],[1,1],[0,1]]})";
        CHECK(load_polygon(anon.string()).poly.name == "box");
    }
    SUBCASE("missing file") {
        CHECK_THROWS_WITH_AS(load_polygon((dir / "no.json").string()),
                             doctest::Contains("cannot open"), error);
    }
    SUBCASE("malformed json") {
        auto bad = dir / "bad.json";
        std::ofstream(bad) << "{not json";
        CHECK_THROWS_AS(load_polygon(bad.string()), error);
    }
    SUBCASE("vertices must be pairs") {
        auto bad = dir / "pairs.json";
        std::ofstream(bad) << R"({"vertices":[[0,0],[1,0],[1]]})";
        CHECK_THROWS_WITH_AS(load_polygon(bad.string()), doctest::Contains("pair"), error);
    }
    SUBCASE("geometry errors carry the stage") {
        auto bad = dir / "twov.json";
        std::ofstream(bad) << R"({"vertices":[[0,0],[1,0]]})";
        CHECK_THROWS_WITH_AS(load_polygon(bad.string()), doctest::Contains("geometry:"), error);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("pipeline runs end to end and reports deterministically") {
    auto dir = temp_dir("run");
    RunConfig cfg = fast_config();
    cfg.polygon_path = write_square_json(dir);
    cfg.out_dir = (dir / "out").string();

    PipelineResult r = run_pipeline(cfg);

    CHECK(r.report.polygon_name == "sq");
    CHECK(r.report.p_top == 8.0);
    CHECK(r.attracting.size() == 4);
    CHECK(r.medians.size() == 4);
    CHECK(r.generic_u.size() == r.generic_v.size());
    CHECK(r.report.find("lambda2_vs_analytic") != nullptr);
    CHECK(r.report.find("lambda2_vs_analytic")->status == CheckStatus::Pass);
    CHECK(r.report.find("figure_svg") != nullptr);
    CHECK(r.report.find("figure_svg")->status == CheckStatus::Pass);

    SUBCASE("every artifact referenced in the report exists on disk") {
        CHECK(!r.artifacts.empty());
        for (const std::string& a : r.artifacts) CHECK(std::filesystem::exists(a));
    }
    SUBCASE("same config gives a byte-identical report and figures") {
        std::string first = report_json(r, cfg);
        PipelineResult again = run_pipeline(cfg);
        CHECK(report_json(again, cfg) == first);
        CHECK(again.svg_u == r.svg_u);
        CHECK(again.svg_potential == r.svg_potential);
    }
    SUBCASE("report echoes the effective configuration") {
        std::string doc = report_json(r, cfg);
        CHECK(doc.find("\"schema\": \"ridgeflow-report/1\"") != std::string::npos);
        CHECK(doc.find("\"h\": 0.03125") != std::string::npos);
        CHECK(doc.find("\"exit_code\"") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("pipeline validates its configuration") {
    RunConfig cfg = fast_config();
    PolygonInput input;
    input.poly = validate_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, "sq");

    SUBCASE("nonpositive spacing") {
        cfg.h = 0.0;
        CHECK_THROWS_WITH_AS(run_pipeline(input, cfg), doctest::Contains("h must be"), error);
    }
    SUBCASE("nonpositive epsilon") {
        cfg.epsilon = -1.0;
        CHECK_THROWS_WITH_AS(run_pipeline(input, cfg), doctest::Contains("epsilon"), error);
    }
    SUBCASE("empty ladder") {
        cfg.ladder.p_list.clear();
        CHECK_THROWS_WITH_AS(run_pipeline(input, cfg), doctest::Contains("ladder"), error);
    }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "slagflow/errors.hpp"
#include "slagflow/flow.hpp"
#include "slagflow/geometry.hpp"
#include "slagflow/io.hpp"

using namespace slagflow;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    const auto dir = fs::temp_directory_path() / "slagflow_io_tests";
    fs::create_directories(dir);
    const auto path = (dir / name).string();
    std::ofstream(path) << text;
    return path;
}

const char* kGoodConfig = R"({
  "dimension": 3,
  "polynomial": {"roots": [[-1, 0], [1, 0]], "leading": [1, 0]},
  "initial_curve": {"type": "segment", "from": 0, "to": 1, "bump": 0.2, "n_points": 50},
  "numerics": {"c_safety": 0.25, "tau_max": 1.5},
  "output": {"dir": "out", "snapshot_every": 10, "record_every": 2}
})";

}  // namespace

TEST_CASE("a full config round-trips into typed fields") {
    const auto cfg = load_config(write_temp("good.json", kGoodConfig));
    CHECK(cfg.dimension == 3);
    REQUIRE(cfg.poly.has_value());
    CHECK(cfg.poly->degree() == 2);
    REQUIRE(cfg.initial_curve.has_value());
    CHECK(cfg.initial_curve->size() == 50);
    CHECK(*cfg.initial_curve->left_root == 0);
    CHECK(*cfg.initial_curve->right_root == 1);
    CHECK(cfg.numerics.c_safety == 0.25);
    CHECK(cfg.numerics.tau_max == 1.5);
    CHECK(cfg.numerics.snapshot_every == 10);
    CHECK(cfg.numerics.record_every == 2);
    CHECK(cfg.output.dir == "out");
    // the bump is applied on the normal with a sin profile: midpoint offset 0.2
    const auto& pts = cfg.initial_curve->points;
    CHECK(std::abs(pts[25].imag()) > 0.19);
    CHECK(std::abs(pts.front() - Complex(-1, 0)) < 1e-14);
    CHECK(std::abs(pts.back() - Complex(1, 0)) < 1e-14);
}

TEST_CASE("syntax errors carry line numbers") {
    const auto path = write_temp("bad_syntax.json",
                                 "{\n \"dimension\": 3,\n \"oops\" \n}");
    try {
        load_config(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        // the parser stops on line 3 or at the brace on line 4
        CHECK((msg.find("line 3") != std::string::npos ||
               msg.find("line 4") != std::string::npos));
    }
}

TEST_CASE("semantic errors carry the offending line") {
    const auto path = write_temp("bad_dim.json",
                                 "{\n \"dimension\": 1,\n \"polynomial\": {\"coeffs\": [[0,0],[1,0]]}\n}");
    try {
        load_config(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("dimension") != std::string::npos);
    }
    const auto degenerate = write_temp(
        "bad_roots.json",
        "{\n \"dimension\": 2,\n \"polynomial\": {\"roots\": [[1,0],[1,0]], \"leading\": [1,0]}\n}");
    CHECK_THROWS_AS(load_config(degenerate), ConfigError);
}

TEST_CASE("arc and points initial curves") {
    const auto arc_path = write_temp("arc.json", R"({
  "dimension": 2,
  "polynomial": {"roots": [[-1, 0], [1, 0]], "leading": [1, 0]},
  "initial_curve": {"type": "arc", "from": 0, "to": 1, "bulge": 0.3, "n_points": 101}
})");
    const auto cfg = load_config(arc_path);
    REQUIRE(cfg.initial_curve.has_value());
    const auto& pts = cfg.initial_curve->points;
    // sagitta: the midpoint sits at distance ~bulge from the chord
    CHECK(std::abs(pts[50].imag()) == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(std::abs(pts.front() - Complex(-1, 0)) < 1e-12);
    CHECK(std::abs(pts.back() - Complex(1, 0)) < 1e-12);

    const auto pts_path = write_temp("pts.json", R"({
  "dimension": 2,
  "polynomial": {"roots": [[-1, 0], [1, 0]], "leading": [1, 0]},
  "initial_curve": {"type": "points",
    "data": [[-1, 0], [-0.5, 0.2], [0, 0.3], [0.5, 0.2], [1, 0]]}
})");
    const auto cfg2 = load_config(pts_path);
    REQUIRE(cfg2.initial_curve.has_value());
    // endpoints snap to the matching roots
    CHECK(*cfg2.initial_curve->left_root == 0);
    CHECK(*cfg2.initial_curve->right_root == 1);
}

TEST_CASE("report json round-trips byte-identically") {
    const auto cfg = load_config(write_temp("good2.json", kGoodConfig));
    NumericsConfig num = cfg.numerics;
    num.tau_max = 0.01;
    num.n_points = 50;
    const auto result = run(*cfg.initial_curve, *cfg.poly, cfg.dimension, num);
    Config echo = cfg;
    echo.numerics = num;
    const auto j = flow_report_json(result, *cfg.poly, cfg.dimension, echo);
    const std::string once = j.dump(2) + "\n";
    const auto reparsed = Json::parse(once);
    CHECK(reparsed.dump(2) + "\n" == once);
}

TEST_CASE("timeseries header is frozen") {
    FlowRecord r{0.0, 1.0, -1.0, 2.0, 0.5, 3.0, 1e-5, 0.0, 0.1};
    const auto csv = timeseries_csv({r});
    CHECK(csv.rfind("tau,sup_theta,inf_theta,weighted_volume,min_root_dist,"
                    "max_curvature_dc,dt,theta_bar,l2_phase_var\n", 0) == 0);
    // one data row
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("svg snapshots are deterministic and well-formed") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {1, 0}}, 1.0);
    std::vector<Complex> curve;
    for (int k = 0; k < 50; ++k)
        curve.push_back(Complex(-1.0 + 2.0 * k / 49.0, 0.2 * std::sin(kPi * k / 49.0)));
    const auto a = svg_snapshot(curve, p, {curve});
    const auto b = svg_snapshot(curve, p, {curve});
    CHECK(a == b);
    CHECK(a.find("<svg") != std::string::npos);
    CHECK(a.find("</svg>") != std::string::npos);
    // both roots drawn
    CHECK(std::count(a.begin(), a.end(), '\n') > 3);
}

TEST_CASE("final curve json carries points and grading") {
    MarkedCurve c;
    c.points = {{0, 0}, {0.5, 0.1}, {1, 0}};
    c.grading_offset = -1;
    const auto j = final_curve_json(c);
    CHECK(j["points"].size() == 3);
    CHECK(j["grading_offset"] == -1);
}

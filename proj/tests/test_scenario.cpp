#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "geoconnect/report.hpp"
#include "geoconnect/scenario.hpp"

using geoconnect::DiscretePath;
using geoconnect::Vec;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = std::string("/tmp/") + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("shipped scenarios load and validate", "[scenario]") {
  for (const char* name : {"cos3-wall", "slit-plane", "flat-lightlike", "stationary-flat",
                           "gpw-oscillator", "rotating-stationary"}) {
    const std::string file = std::string(SCENARIO_DIR "/") + name + ".scn";
    CHECK_NOTHROW(geoconnect::load_scenario(file));
  }
  const auto wall = geoconnect::load_scenario(SCENARIO_DIR "/cos3-wall.scn");
  REQUIRE(wall.model.has_value());
  CHECK(wall.model->dimension() == 3);
  CHECK(wall.config.k_max == 10);
  CHECK(wall.endpoints.xq[0] == Catch::Approx(3 * M_PI / 2));
}

TEST_CASE("scenario errors are collected together", "[scenario]") {
  const std::string bad = write_temp("bad.scn", R"json({
    "kind": "split",
    "dimension": 0,
    "beta": "0",
    "config": {"nodes": 4, "tol_grad": -1}
  })json");
  try {
    geoconnect::load_scenario(bad);
    FAIL("expected an error");
  } catch (const geoconnect::Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dimension") != std::string::npos);
    CHECK(msg.find("delta") != std::string::npos);
    CHECK(msg.find("nodes") != std::string::npos);
    CHECK(msg.find("tol_grad") != std::string::npos);
    CHECK(msg.find("endpoints") != std::string::npos);
  }
}

TEST_CASE("endpoint inside an excluded region is rejected", "[scenario]") {
  const std::string bad = write_temp("bad2.scn", R"json({
    "kind": "split",
    "dimension": 2,
    "delta": "vec(1, 0)",
    "beta": "0",
    "excluded": [{"lo": [-1.0, 0.0], "hi": [1.0, 0.0]}],
    "endpoints": {"p": {"x": [0.0, 0.0], "t": 0}, "q": {"x": [0.0, 1.0], "t": 0}}
  })json");
  CHECK_THROWS_AS(geoconnect::load_scenario(bad), geoconnect::Error);
}

TEST_CASE("path tables round-trip at full precision", "[scenario]") {
  DiscretePath p;
  p.nodes = {Vec{0.0, 0.1}, Vec{0.3333333333333333, -0.7}, Vec{1.0, 2.0 / 3.0}};
  p.t_nodes = {0.0, 0.12345678901234567, 1.0};
  geoconnect::write_path_table("/tmp/path_rt.csv", p);
  const DiscretePath q = geoconnect::read_path_table("/tmp/path_rt.csv");
  REQUIRE(q.nodes.size() == p.nodes.size());
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    REQUIRE(q.nodes[i] == p.nodes[i]);  // bit-exact through 17 digits
    REQUIRE(q.t_nodes[i] == p.t_nodes[i]);
  }
  // gnuplot layout round-trips too
  geoconnect::write_path_table("/tmp/path_rt.dat", p, geoconnect::EmitLayout::gnuplot);
  const DiscretePath r = geoconnect::read_path_table("/tmp/path_rt.dat");
  REQUIRE(r.nodes[1] == p.nodes[1]);
}

TEST_CASE("identical runs produce identical tables", "[scenario]") {
  auto sc = geoconnect::load_scenario(SCENARIO_DIR "/flat-lightlike.scn");
  const geoconnect::SpacetimeModel model(*sc.model);
  const auto a = geoconnect::connect(model, sc.endpoints, sc.config);
  const auto b = geoconnect::connect(model, sc.endpoints, sc.config);
  geoconnect::write_sweep_table("/tmp/sweep_a.csv", a.diag.rows);
  geoconnect::write_sweep_table("/tmp/sweep_b.csv", b.diag.rows);
  std::ifstream fa("/tmp/sweep_a.csv"), fb("/tmp/sweep_b.csv");
  const std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  REQUIRE(sa == sb);
  REQUIRE_FALSE(sa.empty());
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "geoconnect/connect.hpp"
#include "test_util.hpp"

using geoconnect::ConnectConfig;
using geoconnect::ConnectVerdict;
using geoconnect::DiscretePath;
using geoconnect::EndpointPair;
using geoconnect::MetricModel;
using geoconnect::SignClass;
using geoconnect::SpacetimeModel;
using geoconnect::Vec;

TEST_CASE("minimization keeps an optimal path and repairs a perturbed one", "[connect]") {
  const SpacetimeModel stat(MetricModel::stationary_flat(2));
  const EndpointPair ep{Vec{0.0, 0.0}, Vec{3.0, 4.0}, 0.0, 2.0};
  const DiscretePath straight = geoconnect::straight_path(ep.xp, ep.xq, 32);
  ConnectConfig config;

  const auto keep = geoconnect::minimize_reduced_action(stat, ep, straight, config);
  CHECK(keep.converged);
  CHECK(geoconnect::sup_node_distance(keep.path, straight) <= 1e-10);

  DiscretePath zig = straight;
  for (int i = 1; i < 32; ++i)
    zig.nodes[static_cast<std::size_t>(i)][1] += (i % 2) ? 0.8 : -0.6;
  const auto fixed = geoconnect::minimize_reduced_action(stat, ep, zig, config);
  CHECK(fixed.converged);
  CHECK(geoconnect::sup_node_distance(fixed.path, straight) <= 1e-6);
  // optimizer trace is monotone nonincreasing
  for (std::size_t i = 1; i < fixed.trace.size(); ++i)
    REQUIRE(fixed.trace[i] <= fixed.trace[i - 1] + 1e-12);
}

TEST_CASE("stationary flat connection", "[connect]") {
  const SpacetimeModel stat(MetricModel::stationary_flat(2));
  const EndpointPair ep{Vec{0.0, 0.0}, Vec{3.0, 4.0}, 0.0, 2.0};
  const auto verdict = geoconnect::connect(stat, ep);
  REQUIRE(verdict.tag == ConnectVerdict::Tag::geodesic);
  CHECK(verdict.diag.rows[0].jn == Catch::Approx(10.5).margin(1e-8));
  CHECK(verdict.solution.energy_drift <= 1e-7);
  CHECK(verdict.solution.killing_drift <= 1e-7);
  CHECK(verdict.sign_class != SignClass::sign_change);
  // straight line: endpoint of the solution matches q
  CHECK(geoconnect::norm2(geoconnect::vdiff(verdict.solution.x.back(), ep.xq)) <= 1e-8);
}

TEST_CASE("lightlike flat connection via the limit scheme", "[connect]") {
  const SpacetimeModel light(MetricModel::flat(2, "vec(1, 0)", "0"));
  const EndpointPair ep{Vec{0.0, 0.0}, Vec{3.0, 4.0}, 0.0, 2.0};
  const auto verdict = geoconnect::connect(light, ep);
  REQUIRE(verdict.tag == ConnectVerdict::Tag::geodesic);
  CHECK(verdict.sign_class == SignClass::constant_positive);
  CHECK(verdict.solution.killing == Catch::Approx(3.0).margin(1e-8));

  // straight-line oracle: sup node deviation of the candidate
  const DiscretePath straight = geoconnect::straight_path(ep.xp, ep.xq, 64);
  CHECK(geoconnect::sup_node_distance(verdict.candidate, straight) <= 1e-6);

  // the reduced value at the final n matches the closed form 18.5 - 2/n
  const auto& last = verdict.diag.rows.back();
  CHECK(last.jn == Catch::Approx(18.5 - 2.0 / static_cast<double>(last.n)).margin(1e-8));
  CHECK(verdict.solution.energy_drift <= 1e-7);
  CHECK(verdict.solution.killing_drift <= 1e-7);
}

TEST_CASE("time-gap normalization swaps and reparametrizes", "[connect]") {
  const SpacetimeModel light(MetricModel::flat(2, "vec(1, 0)", "0"));
  const EndpointPair ep{Vec{0.0, 0.0}, Vec{3.0, 4.0}, 2.0, 0.0};  // dt < 0
  const auto verdict = geoconnect::connect(light, ep);
  REQUIRE(verdict.tag == ConnectVerdict::Tag::geodesic);
  CHECK(verdict.diag.endpoints_swapped);
  // solution runs from p to q in the caller's order
  CHECK(geoconnect::norm2(geoconnect::vdiff(verdict.solution.x.front(), ep.xp)) <= 1e-8);
  CHECK(geoconnect::norm2(geoconnect::vdiff(verdict.solution.x.back(), ep.xq)) <= 1e-8);
  CHECK(verdict.solution.t.front() == Catch::Approx(2.0).margin(1e-8));
  CHECK(verdict.sign_class == SignClass::constant_positive);
}

TEST_CASE("wall model is certifiably obstructed", "[connect]") {
  const SpacetimeModel wall(MetricModel::cos3_wall());
  const EndpointPair ep{Vec{0.0, 0.0, 0.0}, Vec{3 * M_PI / 2, 0.0, 0.0}, 0.0, 0.0};
  ConnectConfig config;
  config.k_max = 6;  // keep the unit test snappy; the acceptance runs k=10
  config.grid = 512;
  const auto verdict = geoconnect::connect(wall, ep, config);
  REQUIRE(verdict.tag == ConnectVerdict::Tag::obstructed);
  CHECK(verdict.certificate.obstructed());
  CHECK(verdict.certificate.refinement_stable);
  // the pairing keeps changing sign at every n of the sweep
  for (const auto& row : verdict.diag.rows) {
    CHECK(row.w_min < 0.0);
    CHECK(row.w_max > 0.0);
  }
}

TEST_CASE("slit model is certifiably obstructed", "[connect]") {
  const SpacetimeModel slit(MetricModel::slit_plane());
  const EndpointPair ep{Vec{0.0, -1.0}, Vec{0.0, 1.0}, 0.0, 0.0};
  ConnectConfig config;
  config.k_max = 5;
  config.grid = 512;
  const auto verdict = geoconnect::connect(slit, ep, config);
  REQUIRE(verdict.tag == ConnectVerdict::Tag::obstructed);
  CHECK(verdict.certificate.obstructed());
}

TEST_CASE("sign classification of explicit curves", "[connect]") {
  // delta == 0 and beta == 0: the pairing vanishes identically
  const SpacetimeModel degenerate(MetricModel::make(2, {}, "vec(0, 0)", "0"));
  DiscretePath p = geoconnect::straight_path(Vec{0.0, 0.0}, Vec{1.0, 1.0}, 32);
  p.t_nodes = geoconnect::affine_time(0.0, 5.0, 32);
  for (int i = 1; i < 32; ++i) p.t_nodes[static_cast<std::size_t>(i)] += 0.3 * ((i % 3) - 1);
  CHECK(geoconnect::classify_killing_sign(degenerate, p) == SignClass::identically_zero);

  // straight path through the wall: the pairing flips sign
  const SpacetimeModel wall(MetricModel::cos3_wall());
  DiscretePath through =
      geoconnect::straight_path(Vec{0.0, 0.0, 0.0}, Vec{3 * M_PI / 2, 0.0, 0.0}, 64);
  through.t_nodes = geoconnect::affine_time(0.0, 0.0, 64);
  CHECK(geoconnect::classify_killing_sign(wall, through) == SignClass::sign_change);
}

TEST_CASE("determinism of the pipeline", "[connect]") {
  const SpacetimeModel light(MetricModel::flat(2, "vec(1, 0)", "0"));
  const EndpointPair ep{Vec{0.0, 0.0}, Vec{2.0, 1.0}, 0.0, 1.0};
  ConnectConfig config;
  config.seed = 42;
  const auto a = geoconnect::connect(light, ep, config);
  const auto b = geoconnect::connect(light, ep, config);
  REQUIRE(a.tag == b.tag);
  REQUIRE(a.candidate.nodes.size() == b.candidate.nodes.size());
  for (std::size_t i = 0; i < a.candidate.nodes.size(); ++i)
    REQUIRE(geoconnect::norm2(geoconnect::vdiff(a.candidate.nodes[i], b.candidate.nodes[i])) <=
            1e-12);
}

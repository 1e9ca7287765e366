#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "geoconnect/gpw.hpp"
#include "test_util.hpp"

using geoconnect::GpwModel;
using geoconnect::GpwPoint;
using geoconnect::GpwVerdict;
using geoconnect::MetricModel;
using geoconnect::SignClass;
using geoconnect::Vec;
using testutil::uniform;

namespace {

GpwModel oscillator() {
  return GpwModel(MetricModel::make(2, {}, "vec(0, 0)", "0"), "-(x1^2 + x2^2)");
}

// closed-form boundary solution of xdd = -w^2 x
Vec oscillator_solution(const Vec& xp, const Vec& xq, double w, double s) {
  Vec out(2);
  const double sw = std::sin(w), cw = std::cos(w);
  for (int k = 0; k < 2; ++k) {
    const double b = (xq[static_cast<std::size_t>(k)] - xp[static_cast<std::size_t>(k)] * cw) / sw;
    out[static_cast<std::size_t>(k)] =
        xp[static_cast<std::size_t>(k)] * std::cos(w * s) + b * std::sin(w * s);
  }
  return out;
}

}  // namespace

TEST_CASE("product-metric inner product", "[gpw]") {
  const auto model = oscillator();
  const Vec x{1.0, 0.0};
  // the v-translation is lightlike
  CHECK(model.inner(x, 0.0, Vec{0.0, 0.0}, 0.0, 1.0, Vec{0.0, 0.0}, 0.0, 1.0) == 0.0);
  // a pure u-vector has norm H
  CHECK(model.inner(x, 0.0, Vec{0.0, 0.0}, 1.0, 0.0, Vec{0.0, 0.0}, 1.0, 0.0) == -1.0);
  // spatial vectors see the base metric
  CHECK(model.inner(x, 0.0, Vec{3.0, 4.0}, 0.0, 0.0, Vec{3.0, 4.0}, 0.0, 0.0) == 25.0);
}

TEST_CASE("witness curve pairing is exactly the u-gap", "[gpw]") {
  const auto model = oscillator();
  const auto xpath = geoconnect::straight_path(Vec{1.0, 0.0}, Vec{0.0, 1.0}, 64);

  const auto plus = geoconnect::witness_curve(model, {{1.0, 0.0}, 0.0, 0.0},
                                              {{0.0, 1.0}, 2.0, 5.0}, xpath);
  CHECK(plus.du == 2.0);
  CHECK(geoconnect::gpw_classify(plus) == SignClass::constant_positive);

  const auto zero = geoconnect::witness_curve(model, {{1.0, 0.0}, 1.0, 0.0},
                                              {{0.0, 1.0}, 1.0, 3.0}, xpath);
  CHECK(zero.du == 0.0);
  CHECK(geoconnect::gpw_classify(zero) == SignClass::identically_zero);

  const auto minus = geoconnect::witness_curve(model, {{1.0, 0.0}, 0.5, 0.0},
                                               {{0.0, 1.0}, -0.5, 0.0}, xpath);
  CHECK(minus.du == -1.0);
  CHECK(geoconnect::gpw_classify(minus) == SignClass::constant_negative);
}

TEST_CASE("oscillator connection matches the closed form", "[gpw]") {
  const auto model = oscillator();
  const GpwPoint p{{1.0, 0.0}, 0.0, 0.0};
  const GpwPoint q{{0.0, 1.0}, 1.0, 0.0};
  const auto verdict = geoconnect::gpw_connect(model, p, q);
  REQUIRE(verdict.tag == GpwVerdict::Tag::geodesic);
  CHECK(verdict.endpoint_error <= 1e-7);
  for (std::size_t k = 0; k < verdict.path.x.size(); k += 50) {
    const Vec ref = oscillator_solution(p.x, q.x, 1.0, verdict.path.s[k]);
    REQUIRE(geoconnect::norm2(geoconnect::vdiff(verdict.path.x[k], ref)) <= 1e-7);
  }
  // u is affine with slope du, machine exact by construction
  for (std::size_t k = 0; k < verdict.path.u.size(); ++k)
    REQUIRE(verdict.path.u[k] == p.u + verdict.path.du * verdict.path.s[k]);
  CHECK(verdict.energy_drift <= 1e-9);
  // both endpoints of v are pinned
  CHECK(verdict.path.v.front() == Catch::Approx(p.v).margin(1e-12));
  CHECK(verdict.path.v.back() == Catch::Approx(q.v).margin(1e-10));
  // full-metric residual consistency of the reduced solution
  CHECK(verdict.residual <= 1e-4);
}

TEST_CASE("zero u-gap gives a plain base geodesic", "[gpw]") {
  const GpwModel model(MetricModel::make(2, {}, "vec(0, 0)", "0"), "exp(x1) * sin(u)");
  const GpwPoint p{{0.0, 0.0}, 1.0, 0.0};
  const GpwPoint q{{2.0, 1.0}, 1.0, 3.0};
  const auto verdict = geoconnect::gpw_connect(model, p, q);
  REQUIRE(verdict.tag == GpwVerdict::Tag::geodesic);
  // straight x, affine v
  for (std::size_t k = 0; k < verdict.path.x.size(); ++k) {
    const double s = verdict.path.s[k];
    REQUIRE(std::fabs(verdict.path.x[k][0] - 2.0 * s) <= 1e-10);
    REQUIRE(std::fabs(verdict.path.v[k] - 3.0 * s) <= 1e-10);
  }
}

TEST_CASE("constant profile keeps everything affine", "[gpw]") {
  // H == c is excluded by the model class but useful as a degenerate probe
  const GpwModel model(MetricModel::make(2, {}, "vec(0, 0)", "0"), "0*x1 - 1");
  const GpwPoint p{{0.0, 0.0}, 0.0, 0.0};
  const GpwPoint q{{1.0, 2.0}, 2.0, 1.0};
  const auto verdict = geoconnect::gpw_connect(model, p, q);
  REQUIRE(verdict.tag == GpwVerdict::Tag::geodesic);
  CHECK(verdict.residual <= 1e-9);
  CHECK(verdict.energy_drift <= 1e-12);
}

TEST_CASE("curved base manifold", "[gpw]") {
  // non-flat M exercises the covariant term of the reduced equation and
  // the base-metric derivatives of the full-metric residual
  const GpwModel model(
      MetricModel::make(2, {"1 + x2^2/4", "0", "0", "1 + x1^2/9"}, "vec(0, 0)", "0"),
      "-(x1^2 + x2^2)/2");
  const GpwPoint p{{0.5, -0.2}, 0.0, 0.0};
  const GpwPoint q{{-0.3, 0.4}, 1.2, 0.7};
  const auto verdict = geoconnect::gpw_connect(model, p, q);
  REQUIRE(verdict.tag == GpwVerdict::Tag::geodesic);
  CHECK(verdict.endpoint_error <= 1e-8);
  CHECK(verdict.energy_drift <= 1e-9);
  CHECK(verdict.residual <= 1e-4);
  CHECK(verdict.path.v.back() == Catch::Approx(q.v).margin(1e-9));
}

TEST_CASE("resonant profile is reported inconclusive", "[gpw]") {
  const auto model = oscillator();
  const GpwPoint p{{1.0, 0.0}, 0.0, 0.0};
  const GpwPoint q{{0.0, 1.0}, M_PI, 0.0};  // du = pi: the endpoint map degenerates
  const auto verdict = geoconnect::gpw_connect(model, p, q);
  REQUIRE(verdict.tag == GpwVerdict::Tag::inconclusive);
  CHECK((verdict.jacobian_condition > 1e6 || !verdict.note.empty()));
}

TEST_CASE("random oscillator endpoints away from resonance", "[gpw]") {
  const auto model = oscillator();
  auto g = testutil::rng(77);
  int done = 0;
  while (done < 10) {
    const double du = uniform(g, 0.3, 2.9);
    if (std::fabs(du - M_PI) < 0.1) continue;
    const GpwPoint p{testutil::random_point(g, 2, -1.0, 1.0), uniform(g, -1.0, 1.0),
                     uniform(g, -1.0, 1.0)};
    const GpwPoint q{testutil::random_point(g, 2, -1.0, 1.0), 0.0, uniform(g, -1.0, 1.0)};
    GpwPoint q2 = q;
    q2.u = p.u + du;
    const auto verdict = geoconnect::gpw_connect(model, p, q2);
    REQUIRE(verdict.tag == GpwVerdict::Tag::geodesic);
    REQUIRE(verdict.endpoint_error <= 1e-7);
    for (std::size_t k = 0; k < verdict.path.x.size(); k += 100) {
      const Vec ref = oscillator_solution(p.x, q2.x, std::fabs(du), verdict.path.s[k]);
      REQUIRE(geoconnect::norm2(geoconnect::vdiff(verdict.path.x[k], ref)) <= 1e-7);
    }
    ++done;
  }
}

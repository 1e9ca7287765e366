#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "geoconnect/fieldlang.hpp"
#include "test_util.hpp"

using geoconnect::FieldError;
using geoconnect::FieldExpr;
using testutil::uniform;

TEST_CASE("scalar parse and eval", "[fieldlang]") {
  const auto e = FieldExpr::parse("-cos(x1)^3", 3);
  REQUIRE(e.arity() == 1);
  CHECK(e.eval(std::vector<double>{0.0, 0.5, -2.0}) == Catch::Approx(-1.0).margin(1e-15));
  CHECK(e.eval(std::vector<double>{M_PI, 0.0, 0.0}) == Catch::Approx(1.0).margin(1e-15));
  CHECK(e.eval(std::vector<double>{M_PI / 2, 0.0, 0.0}) == Catch::Approx(0.0).margin(1e-15));

  const auto zero = FieldExpr::parse("0", 1);
  CHECK(zero.eval(std::vector<double>{3.7}) == 0.0);
  CHECK(zero.derivative(std::vector<double>{3.7}, 0) == 0.0);
}

TEST_CASE("piecewise field of the cos^3 wall model", "[fieldlang]") {
  const auto d1 = FieldExpr::parse("piecewise(x1 < pi, -cos(x1)^3, 1)", 3);
  CHECK(d1.eval(std::vector<double>{3 * M_PI / 2, 0.0, 0.0}) == 1.0);
  CHECK(d1.eval(std::vector<double>{0.0, 0.0, 0.0}) == Catch::Approx(-1.0).margin(1e-15));
  // C^1 seam at x1 = pi: both one-sided derivatives vanish, so the
  // derivative is defined there.
  CHECK(d1.derivative(std::vector<double>{M_PI, 0.0, 0.0}, 0) == Catch::Approx(0.0).margin(1e-12));

  const auto seams = d1.seams();
  REQUIRE(seams.size() == 1);
  CHECK(seams[0].axis == 0);
  CHECK(seams[0].value == Catch::Approx(M_PI));
}

TEST_CASE("derivative matches the frozen closed form and the FD oracle", "[fieldlang]") {
  const auto e = FieldExpr::parse("-cos(x1)^3", 1);
  const double x = M_PI / 4;
  const double expected = 3.0 * std::sqrt(2.0) / 4.0;  // 3 cos^2 sin at pi/4
  const double got = e.derivative(std::vector<double>{x}, 0);
  CHECK(got == Catch::Approx(expected).epsilon(1e-12));
  const double fd = testutil::central_fd(
      [&](double t) { return e.eval(std::vector<double>{t}); }, x, 1e-6);
  CHECK(got == Catch::Approx(fd).epsilon(1e-8));
}

TEST_CASE("seam rules", "[fieldlang]") {
  // Value on a seam takes the first branch even when the branches disagree.
  const auto jump = FieldExpr::parse("piecewise(x1 < 0, 1, 2)", 1);
  CHECK(jump.eval(std::vector<double>{0.0}) == 1.0);
  CHECK(jump.eval(std::vector<double>{-1.0}) == 1.0);
  CHECK(jump.eval(std::vector<double>{1.0}) == 2.0);
  // Derivative on a mismatched seam is an error.
  const auto kink = FieldExpr::parse("piecewise(x1 < 0, 0, x1)", 1);
  CHECK_THROWS_AS(kink.derivative(std::vector<double>{0.0}, 0), FieldError);
  CHECK(kink.derivative(std::vector<double>{1.0}, 0) == 1.0);
}

TEST_CASE("parse errors carry byte offsets", "[fieldlang]") {
  CHECK_THROWS_AS(FieldExpr::parse("sin(x1", 2), FieldError);
  CHECK_THROWS_AS(FieldExpr::parse("x9", 2), FieldError);
  CHECK_THROWS_AS(FieldExpr::parse("foo(x1)", 2), FieldError);
  CHECK_THROWS_AS(FieldExpr::parse("1 + vec(x1, x2)", 2), FieldError);
  CHECK_THROWS_AS(FieldExpr::parse("vec(x1)", 2), FieldError);  // arity mismatch
  try {
    FieldExpr::parse("1 + + 2", 1);
    FAIL("expected a FieldError");
  } catch (const FieldError& err) {
    CHECK(err.offset() == 4);
  }
}

TEST_CASE("domain guards", "[fieldlang]") {
  const auto div = FieldExpr::parse("1/x1", 1);
  CHECK_THROWS_AS(div.eval(std::vector<double>{0.0}), FieldError);
  const auto root = FieldExpr::parse("sqrt(x1)", 1);
  CHECK_THROWS_AS(root.eval(std::vector<double>{-1.0}), FieldError);
  CHECK(root.eval(std::vector<double>{4.0}) == 2.0);
}

TEST_CASE("vector expressions", "[fieldlang]") {
  const auto delta = FieldExpr::parse("vec(piecewise(x1 < pi, -cos(x1)^3, 1), 0, 0)", 3);
  REQUIRE(delta.arity() == 3);
  const auto v = delta.eval_vector(std::vector<double>{3 * M_PI / 2, 1.0, -1.0});
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 0.0);
  CHECK(v[2] == 0.0);
  const auto dv = delta.derivative_vector(std::vector<double>{1.0, 0.0, 0.0}, 0);
  CHECK(dv[0] == Catch::Approx(3 * std::cos(1.0) * std::cos(1.0) * std::sin(1.0)));
  CHECK(dv[1] == 0.0);
}

TEST_CASE("u variable and second derivatives", "[fieldlang]") {
  const auto h = FieldExpr::parse("-(x1^2 + x2^2) * sin(u)", 2);
  REQUIRE(h.uses_u());
  CHECK(h.eval(std::vector<double>{1.0, 2.0}, M_PI / 2) == Catch::Approx(-5.0));
  CHECK(h.derivative(std::vector<double>{1.0, 2.0}, 0, M_PI / 2) == Catch::Approx(-2.0));
  // d/du at u: -(x1^2+x2^2) cos(u)
  CHECK(h.derivative(std::vector<double>{1.0, 2.0}, 2, 0.3) ==
        Catch::Approx(-5.0 * std::cos(0.3)));
  CHECK(h.second_derivative(std::vector<double>{1.0, 2.0}, 0, 0, M_PI / 2) == Catch::Approx(-2.0));
  CHECK(h.second_derivative(std::vector<double>{1.0, 2.0}, 0, 1, M_PI / 2) ==
        Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("derivative agrees with central differences at random points", "[fieldlang]") {
  const char* sources[] = {
      "-cos(x1)^3",
      "sin(x1) * cos(x2) + x1 * x2",
      "exp(x1 / 4) - x2^2 / (1 + x1^2)",
      "sqrt(1 + x1^2 + x2^2)",
      "piecewise(x1 < pi, -cos(x1)^3, 1) * (1 + x2^2)",
      "abs(1 + x1^2)",
      "2^x2 + x1^0.5",
  };
  auto g = testutil::rng(7001);
  for (const char* src : sources) {
    const auto e = FieldExpr::parse(src, 2);
    int checked = 0;
    while (checked < 100) {
      std::vector<double> p{uniform(g, 0.1, 3.0), uniform(g, 0.1, 3.0)};
      if (std::fabs(p[0] - M_PI) < 1e-3) continue;  // keep clear of the seam
      for (int dir = 0; dir < 2; ++dir) {
        const double exact = e.derivative(p, dir);
        auto slice = [&](double t) {
          auto q = p;
          q[static_cast<std::size_t>(dir)] = t;
          return e.eval(q);
        };
        const double fd = testutil::central_fd(slice, p[static_cast<std::size_t>(dir)], 1e-5);
        REQUIRE(std::fabs(exact - fd) / (1.0 + std::fabs(exact)) <= 1e-6);
      }
      ++checked;
    }
  }
}

TEST_CASE("pretty print round-trips", "[fieldlang]") {
  const char* sources[] = {
      "-cos(x1)^3",
      "piecewise(x1 < pi, -cos(x1)^3, 1)",
      "sin(x1)*cos(x2)+x1*x2/(1+x1^2)",
      "vec(-x2, x1)",
      "2^x1 - x2^3 + pi",
  };
  auto g = testutil::rng(7002);
  for (const char* src : sources) {
    const auto a = FieldExpr::parse(src, 2);
    const auto b = FieldExpr::parse(a.pretty(), 2);
    REQUIRE(a.arity() == b.arity());
    for (int i = 0; i < 100; ++i) {
      std::vector<double> p{uniform(g, -2.0, 2.0), uniform(g, -2.0, 2.0)};
      if (a.arity() == 1) {
        REQUIRE(a.eval(p) == b.eval(p));
      } else {
        REQUIRE(a.eval_vector(p) == b.eval_vector(p));
      }
    }
  }
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "eventpi/spline.hpp"
#include "eventpi/survival.hpp"

using namespace eventpi;

TEST_CASE("degenerate spline basis is (1, log t)", "[spline]") {
  RestrictedCubicSpline sp({-1.0, 2.0});  // boundaries only, no internal knots
  const auto b = sp.basis(0.7);
  REQUIRE(b.size() == 2);
  CHECK(b[0] == 1.0);
  CHECK(b[1] == 0.7);
  CHECK(sp.dim() == 2);
}

TEST_CASE("basis dimension is internal knots + 2", "[spline]") {
  RestrictedCubicSpline sp({-2.0, -0.5, 0.3, 1.0, 2.5});
  CHECK(sp.dim() == 5);
  CHECK(sp.internal_count() == 3);
  CHECK(spline_basis({-2.0, -0.5, 0.3, 1.0, 2.5}, 0.0).size() == 5);
}

TEST_CASE("knots must be strictly increasing", "[spline]") {
  CHECK_THROWS(RestrictedCubicSpline({0.0, 0.0, 1.0}));
  CHECK_THROWS(RestrictedCubicSpline({1.0, 0.5}));
  CHECK_THROWS(RestrictedCubicSpline({0.5}));
}

namespace {

double second_deriv(const RestrictedCubicSpline& sp,
                    const std::vector<double>& coef, double x) {
  const double h = 1e-4;
  return (sp.eval(x + h, coef) - 2.0 * sp.eval(x, coef) +
          sp.eval(x - h, coef)) /
         (h * h);
}

}  // namespace

TEST_CASE("natural constraint: curvature vanishes beyond boundary knots",
          "[spline]") {
  RestrictedCubicSpline sp({-1.5, -0.2, 0.4, 1.8});
  const std::vector<double> coef = {0.3, 1.2, 0.4, -0.25};
  // Just outside each boundary the function must already be linear.
  for (double x : {-1.6, -3.0, 1.9, 4.0}) {
    CHECK(std::abs(second_deriv(sp, coef, x)) < 1e-6);
  }
  // Strictly between internal knots it is genuinely cubic.
  CHECK(std::abs(second_deriv(sp, coef, 0.1)) > 1e-3);
}

TEST_CASE("value and first two derivatives continuous at internal knots",
          "[spline]") {
  RestrictedCubicSpline sp({-1.0, 0.25, 1.0});
  const std::vector<double> coef = {0.1, 0.9, 0.35};
  const double k = 0.25, eps = 1e-6;

  const auto probe = [&](double x) {
    return std::array<double, 3>{sp.eval(x, coef), sp.eval_deriv(x, coef),
                                 second_deriv(sp, coef, x)};
  };
  const auto below = probe(k - eps);
  const auto above = probe(k + eps);
  CHECK(std::abs(below[0] - above[0]) < 1e-8);
  CHECK(std::abs(below[1] - above[1]) < 1e-6);
  CHECK(std::abs(below[2] - above[2]) < 1e-2);
}

TEST_CASE("analytic derivative matches finite differences", "[spline]") {
  RestrictedCubicSpline sp({-2.0, -0.3, 0.8, 2.2});
  const std::vector<double> coef = {0.05, 1.1, 0.2, -0.12};
  const double h = 1e-6;
  for (double x : {-2.5, -1.0, 0.0, 0.5, 1.5, 3.0}) {
    const double fd = (sp.eval(x + h, coef) - sp.eval(x - h, coef)) / (2.0 * h);
    CHECK(sp.eval_deriv(x, coef) == Catch::Approx(fd).margin(1e-6));
  }
}

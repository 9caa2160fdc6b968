#include <cmath>
#include <vector>

#include "doctest.h"
#include "idci/errors.hpp"
#include "idci/optimizer.hpp"
#include "idci/value_function.hpp"
#include "support/bm_oracle.hpp"

using namespace idci;

namespace {

const LevyModel kBm = BrownianDrift{1.0, 0.36};
const Costs kCosts{0.05, 0.1, 1.05};

const ScaleSet& bm_set() {
  static const ScaleSet s(kBm, 0.05);
  return s;
}

const Strategy& best() {
  static const Strategy s = optimize(bm_set(), kCosts).strategy;
  return s;
}

}  // namespace

TEST_CASE("V = f - phi g and the closed-form oracle") {
  const BmClosedForm cf(1.0, 0.36, 0.05);
  for (const Strategy s : {best(), Strategy{0.5, 3.0, false}, Strategy{0.0, 0.1, false}}) {
    for (double x = 0.0; x <= 8.0; x += 0.1) {
      const auto r = value_function(bm_set(), kCosts, s, x);
      CHECK(std::abs(r.value - (r.dividends_part - kCosts.phi * r.injections_part)) <= 1e-10);
      CHECK(r.value == doctest::Approx(cf.value(kCosts.c, kCosts.phi, s.z1, s.z2, x)).epsilon(1e-10));
      CHECK(r.injections_part >= 0.0);
      CHECK(r.branch == (x < s.z2 ? Branch::kBelowTrigger : Branch::kAboveTrigger));
    }
  }
}

TEST_CASE("dividend component") {
  const Strategy s{0.3, 1.7, false};
  const double d = bm_set().z(s.z2) - bm_set().z(s.z1);
  const double net = s.z2 - s.z1 - kCosts.c;
  CHECK(expected_dividends_f(bm_set(), kCosts, s, 0.0) == doctest::Approx(net / d).epsilon(1e-14));
  CHECK(expected_dividends_f(bm_set(), kCosts, s, s.z1) ==
        doctest::Approx(bm_set().z(s.z1) * net / d).epsilon(1e-14));
  CHECK_THROWS_AS(expected_dividends_f(bm_set(), kCosts, s, -0.1), DomainError);
  CHECK_THROWS_AS(expected_injections_g(bm_set(), kCosts, s, -0.1), DomainError);
  CHECK_THROWS_AS(expected_dividends_f(bm_set(), kCosts, Strategy{1.0, 1.05, false}, 0.5),
                  DomainError);
}

TEST_CASE("injection component is continuous at z2 and constant above") {
  const Strategy s{0.3, 1.7, false};
  const double left = expected_injections_g(bm_set(), kCosts, s, s.z2);
  const double right = expected_injections_g(bm_set(), kCosts, s, std::nextafter(s.z2, 10.0));
  CHECK(std::abs(left - right) <= 1e-10);
  CHECK(expected_injections_g(bm_set(), kCosts, s, 5.0) == right);
  CHECK(expected_injections_g(bm_set(), kCosts, s, s.z1) == doctest::Approx(right).epsilon(1e-12));
}

TEST_CASE("unit slope above the trigger and slope phi below 0") {
  const auto v = [&](double x) { return value_function(bm_set(), kCosts, best(), x).value; };
  CHECK(v(5.0) - v(3.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(v(-1.0) == doctest::Approx(v(0.0) - kCosts.phi).epsilon(1e-12));
  CHECK(value_function(bm_set(), kCosts, best(), -1.0).branch == Branch::kNegative);
}

TEST_CASE("z1-free form agrees at the maximizer and is rejected elsewhere") {
  REQUIRE(best().maximizer);
  const double t = foc_target(bm_set(), kCosts, best().z2);
  const double off = 1.0 / 0.05;
  for (double x = 0.0; x < 3 * best().z2; x += 0.05) {
    const auto r = value_function(bm_set(), kCosts, best(), x);
    const double alt = x < best().z2
                           ? kCosts.phi * (bm_set().zbar(x) + off) + bm_set().z(x) * t
                           : x - best().z2 + kCosts.phi * (bm_set().zbar(best().z2) + off) +
                                 bm_set().z(best().z2) * t;
    CHECK(std::abs(r.value - alt) <= 1e-8);
  }
  CHECK_THROWS_AS(value_function(bm_set(), kCosts, Strategy{0.5, 3.0, true}, 1.0),
                  InconsistencyError);
}

TEST_CASE("display with xi in the denominator differs from the z1-free form") {
  // The display divides by xi instead of multiplying Z by it; it cannot be the
  // value function (its value at 0 is off by an order of magnitude).
  const BmClosedForm cf(1.0, 0.36, 0.05);
  const double x_star = xi(bm_set(), kCosts, best().z1, best().z2);
  const auto display = [&](double x) {
    return 2 * cf.delta * (cf.alpha * std::exp(-cf.beta * x) - cf.beta * std::exp(-cf.alpha * x)) /
               x_star +
           kCosts.phi * 0.1296 / (4 * 0.05 * cf.delta) *
               (cf.alpha * cf.alpha * std::exp(-cf.beta * x) - cf.beta * cf.beta * std::exp(-cf.alpha * x));
  };
  const double v0 = value_function(bm_set(), kCosts, best(), 0.0).value;
  CHECK(std::abs(display(0.0) - v0) > 1.0);
}

TEST_CASE("variational properties at the maximizer") {
  const ValueFunction v(bm_set(), kCosts, best());
  const double top = 3 * best().z2;
  std::vector<double> grid;
  for (double x = 0.0; x <= top; x += 0.01) grid.push_back(x);
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    CHECK((v(grid[i + 1]) - v(grid[i])) / (grid[i + 1] - grid[i]) <= kCosts.phi + 1e-6);
  }
  for (size_t i = 0; i < grid.size(); i += 3) {
    for (size_t j = 0; j < grid.size(); j += 3) {
      if (grid[i] >= grid[j] + kCosts.c) {
        CHECK(v(grid[i]) - v(grid[j]) >= grid[i] - grid[j] - kCosts.c - 1e-8);
      }
    }
  }
}

TEST_CASE("ValueFunction derivatives") {
  const ValueFunction v(bm_set(), kCosts, best());
  for (double x = 0.05; x < 6.0; x += 0.17) {
    if (std::abs(x - best().z2) < 1e-3) continue;
    const double h = 1e-5;
    CHECK(v.derivative(x) == doctest::Approx((v(x + h) - v(x - h)) / (2 * h)).epsilon(1e-7));
    CHECK(v.second_derivative(x) ==
          doctest::Approx((v.derivative(x + h) - v.derivative(x - h)) / (2 * h)).epsilon(1e-6));
  }
  CHECK(v.derivative(-1.0) == kCosts.phi);
  CHECK(v.second_derivative(-1.0) == 0.0);
  // C^1 at the trigger for a maximizer.
  CHECK(v.derivative(std::nextafter(best().z2, 0.0)) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(v(0.0) == doctest::Approx(value_function(bm_set(), kCosts, best(), 0.0).value).epsilon(1e-13));
}

TEST_CASE("barrier value") {
  const double x = 3.0;
  const double left = barrier_value(bm_set(), kCosts, x, std::nextafter(x, 0.0));
  CHECK(std::abs(left - barrier_value(bm_set(), kCosts, x, x)) <= 1e-10);
  CHECK(barrier_value(bm_set(), kCosts, x, -0.5) ==
        doctest::Approx(barrier_value(bm_set(), kCosts, x, 0.0) - 0.5 * kCosts.phi).epsilon(1e-13));
  CHECK(barrier_value(bm_set(), kCosts, x, 4.0) - barrier_value(bm_set(), kCosts, x, 3.5) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(barrier_value(bm_set(), kCosts, 0.0, 1.0), DomainError);
  // At the optimal trigger the barrier value coincides with V.
  for (double y = -1.0; y < 5.0; y += 0.25) {
    CHECK(barrier_value(bm_set(), kCosts, best().z2, y) ==
          doctest::Approx(value_function(bm_set(), kCosts, best(), y).value).epsilon(1e-9));
  }
}

TEST_CASE("threshold a0") {
  const auto a0 = h_threshold(bm_set(), kCosts);
  REQUIRE(a0.has_value());
  CHECK(std::abs(kCosts.phi * bm_set().h_func(*a0) - 1.0) <= 1e-10);
  CHECK(best().z2 >= *a0);
  for (double x = best().z2; x <= best().z2 + 20.0; x += 0.01) {
    CHECK(bm_set().g_func(kCosts.phi, x) >= 0.0);
  }
  // Exp-jump: H(0+) = lambda/(lambda + q), so phi H(0+) <= 1 for large q.
  const ScaleSet ej(ExpJumpCL{2.0, 1.0, 1.0}, 0.5);
  CHECK_FALSE(h_threshold(ej, Costs{0.5, 0.1, 1.05}).has_value());
  const ScaleSet ej2(ExpJumpCL{2.0, 1.0, 1.0}, 0.01);
  const auto b0 = h_threshold(ej2, Costs{0.01, 0.1, 1.05});
  REQUIRE(b0.has_value());
  CHECK(std::abs(1.05 * ej2.h_func(*b0) - 1.0) <= 1e-10);
}

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "idci/errors.hpp"
#include "idci/scale_functions.hpp"
#include "support/bm_oracle.hpp"

using namespace idci;

namespace {

const LevyModel kBm = BrownianDrift{1.0, 0.36};
constexpr double kQ = 0.05;

double simpson(const auto& f, double a, double b, int n = 4000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// RK4 on the delay equation W'(x) = k (W(x) - W(x - alpha)), W(0) = 1/beta,
// W = 0 below 0, which the fixed-jump 0-scale function solves (it is harmonic
// for the generator away from 0). Independent of the lattice sum.
std::vector<double> fixed_jump_dde(const FixedJumpCL& m, double h, double x_end) {
  const double k = m.lambda / m.beta;
  const int lag = static_cast<int>(std::lround(m.alpha_jump / h));
  const int n = static_cast<int>(std::lround(x_end / h));
  // Grid of half steps so the delayed value is available at RK4 midpoints.
  std::vector<double> w(2 * n + 1, 0.0);
  w[0] = 1.0 / m.beta;
  // W jumps at 0, so the value at a step's right end is the left limit.
  auto delayed = [&](int half_idx, bool left_limit = false) {
    const int d = half_idx - 2 * lag;
    return d > 0 || (d == 0 && !left_limit) ? w[d] : 0.0;
  };
  for (int i = 0; i < n; ++i) {
    const int j = 2 * i;
    const double y = w[j];
    const double k1 = k * (y - delayed(j));
    const double k2 = k * (y + 0.5 * h * k1 - delayed(j + 1));
    const double k3 = k * (y + 0.5 * h * k2 - delayed(j + 1));
    const double k4 = k * (y + h * k3 - delayed(j + 2, true));
    w[j + 2] = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    // Midpoint by cubic Hermite interpolation from the slopes at both ends.
    const double f0 = k1;
    const double f1 = k * (w[j + 2] - delayed(j + 2, true));
    w[j + 1] = 0.5 * (y + w[j + 2]) + h / 8.0 * (f0 - f1);
  }
  return w;
}

std::vector<ScaleSet> smooth_sets() {
  return {ScaleSet(kBm, kQ), ScaleSet(BrownianDrift{-0.3, 1.1}, 0.2),
          ScaleSet(ExpJumpCL{2.0, 1.0, 1.0}, 0.05), ScaleSet(ExpJumpCL{1.5, 2.0, 1.0}, 0.3)};
}

}  // namespace

TEST_CASE("w vanishes on the negative half-line and at 0 for Brownian motion") {
  const ScaleSet s(kBm, kQ);
  CHECK(s.w(0.0) == 0.0);
  CHECK(s.w(-1.0) == 0.0);
  CHECK(s.z(0.0) == 1.0);
  CHECK(s.zbar(0.0) == 0.0);
  CHECK(s.z(-2.0) == 1.0);
  CHECK(s.zbar(-2.0) == -2.0);
  CHECK(s.nonsmooth_points().empty());
  const ScaleSet e(ExpJumpCL{2.0, 1.0, 1.0}, 0.05);
  CHECK(e.w(-1.0) == 0.0);
  CHECK(e.w(0.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("Brownian closed forms") {
  const ScaleSet s(kBm, kQ);
  const BmClosedForm cf(1.0, 0.36, kQ);
  for (double x = 0.0; x <= 10.0; x += 0.37) {
    CHECK(s.w(x) == doctest::Approx(cf.w(x)).epsilon(1e-12));
    CHECK(s.z(x) == doctest::Approx(cf.z(x)).epsilon(1e-12));
    CHECK(std::abs(s.zbar(x) - cf.zbar(x)) <= 1e-9 * (1 + std::abs(cf.zbar(x))));
  }
  CHECK(s.phi_q() == doctest::Approx(-cf.beta).epsilon(1e-13));
}

TEST_CASE("w_prime matches central differences") {
  for (const auto& s : smooth_sets()) {
    for (double x = 0.05; x < 8.0; x += 0.31) {
      const double h = 1e-6;
      const double fd = (s.w(x + h) - s.w(x - h)) / (2 * h);
      CHECK(s.w_prime(x) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  const ScaleSet s(kBm, kQ);
  CHECK(s.w_prime(1e-9) == doctest::Approx(2.0 / 0.1296).epsilon(1e-6));
  CHECK(s.w_prime_at_zero() == doctest::Approx(2.0 / 0.1296).epsilon(1e-12));
  CHECK_THROWS_AS(s.w_prime(0.0), DomainError);
  CHECK_THROWS_AS(s.w_prime(-1.0), DomainError);
}

TEST_CASE("exp-jump scale function starts at 1/beta with slope (lambda+q)/beta^2") {
  const ExpJumpCL m{2.0, 1.0, 1.0};
  const ScaleSet s(m, 0.05);
  CHECK(s.w(0.0) == doctest::Approx(1.0 / m.beta).epsilon(1e-13));
  CHECK(s.w_prime_at_zero() == doctest::Approx((m.lambda + 0.05) / (m.beta * m.beta)).epsilon(1e-12));
}

TEST_CASE("w strictly increasing and Z = 1 + q int W") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 12.0);
  for (const auto& s : smooth_sets()) {
    for (int i = 0; i < 100; ++i) {
      double a = u(rng), b = u(rng);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      CHECK(s.w(b) > s.w(a));
    }
    for (double x : {0.3, 1.0, 2.5, 6.0}) {
      const double integral = simpson([&](double t) { return s.w(t); }, 0.0, x);
      CHECK(std::abs(s.z(x) - (1.0 + s.q() * integral)) <= 1e-8);
      const double zi = simpson([&](double t) { return s.z(t); }, 0.0, x);
      CHECK(std::abs(s.zbar(x) - zi) <= 1e-8);
    }
  }
}

TEST_CASE("W(x) Wbar(z2) >= W(z2) Wbar(x) for x <= z2") {
  for (const auto& s : smooth_sets()) {
    for (double z2 = 0.2; z2 < 6.0; z2 += 0.4) {
      for (double x = 0.0; x <= z2; x += z2 / 20.0) {
        CHECK(s.w(x) * s.wbar(z2) >= s.w(z2) * s.wbar(x) - 1e-12 * s.w(z2) * s.wbar(z2));
      }
    }
  }
}

TEST_CASE("W/W' tends to 1/Phi_q") {
  const ScaleSet s(kBm, kQ);
  CHECK(s.w(100.0) / s.w_prime(100.0) == doctest::Approx(1.0 / s.phi_q()).epsilon(1e-4));
}

TEST_CASE("exit-time transform") {
  const ScaleSet s(kBm, kQ);
  CHECK(s.exit_time_laplace(2.0, 2.0) == 1.0);
  CHECK(s.exit_time_laplace(0.0, 2.0) == doctest::Approx(1.0 / s.z(2.0)).epsilon(1e-15));
  CHECK(s.exit_time_laplace(0.0, 2.0) < 1.0);
  CHECK_THROWS_AS(s.exit_time_laplace(3.0, 2.0), DomainError);
  CHECK_THROWS_AS(s.exit_time_laplace(-0.1, 2.0), DomainError);
}

TEST_CASE("reflected passage transform") {
  const ScaleSet s(kBm, kQ);
  CHECK(s.reflected_passage_laplace(50.0) < 1e-6);
  CHECK(s.reflected_passage_laplace(1e-4) > 0.99);
  CHECK_THROWS_AS(s.reflected_passage_laplace(0.0), DomainError);
  for (const auto& set : smooth_sets()) {
    double prev = 1.0;
    for (double x = 0.01; x < 30.0; x += 0.05) {
      const double v = set.reflected_passage_laplace(x);
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      CHECK(v < prev);
      CHECK(set.h_func(x) == v);
      prev = v;
    }
  }
}

TEST_CASE("G relates to the derivative of -(1 - phi Z)/(q W)") {
  const double phi = 1.05;
  for (const auto& s : smooth_sets()) {
    const auto quot = [&](double x) { return -(1.0 - phi * s.z(x)) / (s.q() * s.w(x)); };
    for (double x = 0.2; x < 6.0; x += 0.45) {
      const double h = 1e-5;
      const double fd = (quot(x + h) - quot(x - h)) / (2 * h);
      const double w = s.w(x);
      CHECK(s.g_func(phi, x) / (s.q() * w * w) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("G is nonnegative beyond the optimal trigger level") {
  const ScaleSet s(kBm, kQ);
  for (double x = 2.12950; x <= 22.1295; x += 0.01) CHECK(s.g_func(1.05, x) >= 0.0);
}

TEST_CASE("Laplace identity for the closed forms") {
  for (const auto& s : smooth_sets()) {
    for (double d : {0.5, 1.0, 2.0}) {
      CHECK(s.laplace_identity_check(s.phi_q() + d) < 1e-8);
    }
  }
  const ScaleSet s(kBm, kQ);
  CHECK_THROWS_AS(s.laplace_identity_check(s.phi_q()), DomainError);
}

TEST_CASE("fixed-jump lattice sum") {
  const FixedJumpCL m{2.0, 1.0, 1.0};
  CHECK_THROWS_AS(ScaleSet(m, 0.05), UnsupportedError);

  const ScaleSet s(m, 0.0);
  REQUIRE(s.nonsmooth_points().size() == 100);
  CHECK(s.nonsmooth_points()[0] == 1.0);
  CHECK(s.is_nonsmooth(3.0));
  CHECK_FALSE(s.is_nonsmooth(2.5));
  CHECK(s.w(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.w(-0.5) == 0.0);

  SUBCASE("matches the delay-equation oracle") {
    const double h = 1e-3;
    const auto w = fixed_jump_dde(m, h, 6.0);
    for (double x : {0.5, 1.0, 1.5, 2.0, 3.7, 5.0, 6.0}) {
      const int idx = static_cast<int>(std::lround(2 * x / h));
      CHECK(s.w(x) == doctest::Approx(w[idx]).epsilon(1e-9));
    }
  }
  SUBCASE("Laplace identity adjudicates the summation index") {
    CHECK(s.laplace_identity_check(1.0) < 1e-8);
    CHECK(s.laplace_identity_check(2.5) < 1e-8);
    const ScaleSet from_one(m, 0.0, ScaleOptions{FixedJumpSeries::kFromOne, 100.0});
    CHECK(from_one.w(0.5) == 0.0);
    CHECK(from_one.laplace_identity_check(1.0) > 0.1);
  }
  SUBCASE("increasing towards 1/psi'(0+), stable at large x") {
    double prev = 0.0;
    for (double x = 0.0; x <= 25.0; x += 0.25) {
      const double v = s.w(x);
      CHECK(v > prev);
      prev = v;
    }
    CHECK(s.w(60.0) == doctest::Approx(1.0 / psi_prime_at_zero(m)).epsilon(1e-12));
    CHECK(s.w(100.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("right derivative") {
    for (double x : {0.3, 0.999, 1.0, 1.5, 2.0, 4.2}) {
      const double h = 1e-7;
      const double fd = (s.w(x + 2 * h) - s.w(x + h)) / h;
      CHECK(s.w_prime(x) == doctest::Approx(fd).epsilon(1e-5));
    }
    CHECK(s.w_prime_at_zero() == doctest::Approx(m.lambda / (m.beta * m.beta)).epsilon(1e-14));
  }
  SUBCASE("integrals at q = 0") {
    CHECK(s.z(3.0) == 1.0);
    CHECK(s.zbar(3.0) == 3.0);
    const double integral = simpson([&](double t) { return s.w(t); }, 0.0, 1.0) +
                            simpson([&](double t) { return s.w(t); }, 1.0, 2.5);
    CHECK(s.wbar(2.5) == doctest::Approx(integral).epsilon(1e-10));
  }
}

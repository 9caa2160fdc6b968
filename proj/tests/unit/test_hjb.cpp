#include <cmath>

#include "doctest.h"
#include "idci/errors.hpp"
#include "idci/hjb.hpp"
#include "idci/optimizer.hpp"
#include "idci/value_function.hpp"

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

TEST_CASE("e^{Phi x} is q-harmonic for every model") {
  const double q = 0.05;
  for (const LevyModel& m : {LevyModel{BrownianDrift{1.0, 0.36}}, LevyModel{FixedJumpCL{2.0, 1.0, 0.5}},
                             LevyModel{ExpJumpCL{2.0, 1.0, 1.0}}}) {
    const double r = phi_q(m, q);
    TestFunction f;
    f.f = [r](double x) { return std::exp(r * x); };
    f.d1 = [r](double x) { return r * std::exp(r * x); };
    f.d2 = [r](double x) { return r * r * std::exp(r * x); };
    for (double x : {0.3, 1.0, 2.5}) {
      CHECK(std::abs(generator_apply(m, f, x) - q * f.f(x)) <= 1e-8 * f.f(x));
    }
  }
}

TEST_CASE("generator on constants and the identity") {
  for (const LevyModel& m : {LevyModel{BrownianDrift{1.0, 0.36}}, LevyModel{FixedJumpCL{2.0, 1.0, 0.5}},
                             LevyModel{ExpJumpCL{2.0, 1.0, 1.0}}}) {
    TestFunction one;
    one.f = [](double) { return 1.0; };
    TestFunction id;
    id.f = [](double x) { return x; };
    id.d1 = [](double) { return 1.0; };
    id.d2 = [](double) { return 0.0; };
    TestFunction id_affine = id;
    id_affine.slope_below_zero = 1.0;
    for (double x : {-0.5, 0.2, 1.7}) {
      CHECK(std::abs(generator_apply(m, one, x)) <= 1e-9);
      CHECK(generator_apply(m, id, x) == doctest::Approx(psi_prime_at_zero(m)).epsilon(1e-8));
      CHECK(generator_apply(m, id_affine, x) == doctest::Approx(psi_prime_at_zero(m)).epsilon(1e-8));
    }
  }
  TestFunction empty;
  CHECK_THROWS_AS(generator_apply(kBm, empty, 1.0), DomainError);
}

TEST_CASE("Z is q-harmonic on the positive half-line") {
  const ScaleSet ej(ExpJumpCL{2.0, 1.0, 1.0}, 0.05);
  for (const ScaleSet* set : {&bm_set(), &ej}) {
    TestFunction z;
    z.f = [set](double x) { return set->z(x); };
    z.d1 = [set](double x) { return x < 0.0 ? 0.0 : set->q() * set->w(x); };
    z.d2 = [set](double x) { return x <= 0.0 ? 0.0 : set->q() * set->w_prime(x); };
    z.slope_below_zero = 0.0;
    z.kinks = {0.0};
    for (double x = 0.1; x < 4.0; x += 0.3) {
      CHECK(std::abs(generator_apply(set->model(), z, x) - set->q() * set->z(x)) <=
            1e-7 * set->z(x));
    }
  }
}

TEST_CASE("barrier value is q-harmonic below the barrier") {
  const double b = 3.0;
  const ValueFunction v = ValueFunction::barrier(bm_set(), kCosts, b);
  TestFunction f;
  f.f = [&v](double x) { return v(x); };
  for (double x = 0.05; x < b; x += 0.25) {
    CHECK(std::abs(generator_apply(kBm, f, x) - 0.05 * v(x)) <= 1e-5 * std::abs(v(x)));
  }
}

TEST_CASE("HJB holds at the optimal strategy") {
  const auto rep = check_hjb(bm_set(), kCosts, best());
  CHECK(rep.pass);
  CHECK(rep.violations.empty());
  CHECK(rep.worst_above < 0.0);
  CHECK(rep.residual_below <= 1e-5 * rep.max_abs_value);
  CHECK(rep.grid.back() <= 3 * best().z2 + 1e-9);
}

TEST_CASE("HJB fails for a trigger above the optimum") {
  const Strategy off{best().z1, best().z2 + 0.5, false};
  const auto rep = check_hjb(bm_set(), kCosts, off);
  CHECK_FALSE(rep.pass);
  CHECK(rep.transaction_violations > 0);
  const ValueFunction v(bm_set(), kCosts, off);
  CHECK(v.derivative(std::nextafter(off.z2, 0.0)) > 1.0);
}

TEST_CASE("HJB at the exp-jump optimum") {
  const ScaleSet ej(ExpJumpCL{2.0, 1.0, 1.0}, 0.05);
  const auto r = optimize(ej, kCosts);
  GridSpec spec;
  spec.step = 0.05;
  const auto rep = check_hjb(ej, kCosts, r.strategy, spec);
  CHECK(rep.residual_below <= 1e-5 * rep.max_abs_value);
  CHECK(rep.slope_violations == 0);
  CHECK(rep.transaction_violations == 0);
}

TEST_CASE("h is non-decreasing") {
  CHECK(check_h_monotone(bm_set(), kCosts, best(), best().z2 + 1.0));
  CHECK_THROWS_AS(check_h_monotone(bm_set(), kCosts, best(), best().z2 - 1.0), DomainError);
}

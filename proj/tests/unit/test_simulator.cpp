#include <cmath>
#include <random>

#include "doctest.h"
#include "idci/errors.hpp"
#include "idci/scale_functions.hpp"
#include "idci/simulator.hpp"
#include "idci/value_function.hpp"

using namespace idci;

namespace {

const LevyModel kBm = BrownianDrift{1.0, 0.36};
const Costs kCosts{0.05, 0.1, 1.05};
const Strategy kBest{0.02682, 2.12950, false};

bool within(double est, double se, double exact, double k = 3.0) {
  return std::abs(est - exact) <= k * se;
}

// Survival probability of the unreflected fixed-jump process from x, by simulation.
std::pair<double, double> survival(const FixedJumpCL& m, double x, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> wait(m.lambda);
  int alive = 0;
  for (int i = 0; i < n; ++i) {
    double u = x;
    while (u >= 0.0 && u < 40.0) u += m.beta * wait(rng) - m.alpha_jump;
    alive += u >= 0.0;
  }
  const double p = static_cast<double>(alive) / n;
  return {p, std::sqrt(p * (1 - p) / n)};
}

}  // namespace

TEST_CASE("zero-volatility sawtooth") {
  const LevyModel m = BrownianDrift{1.0, 1e-8};
  const Strategy s{0.5, 1.5, false};
  SimConfig cfg;
  cfg.horizon = 50.0;
  const auto [div, inj] = simulate_path(m, kCosts, s, s.z1, cfg, 7);
  const double period = (s.z2 - s.z1) / 1.0;
  double expect = 0.0;
  for (int n = 1; n * period < cfg.horizon; ++n) {
    expect += (s.z2 - s.z1 - kCosts.c) * std::exp(-kCosts.q * n * period);
  }
  CHECK(div == doctest::Approx(expect).epsilon(1e-4));
  CHECK(inj == 0.0);
}

TEST_CASE("immediate payment above the trigger") {
  SimConfig cfg;
  cfg.horizon = 1e-9;
  const LevyModel ej = ExpJumpCL{2.0, 1.0, 1.0};
  const Strategy s{0.3, 1.2, false};
  for (double x0 : {1.2, 3.0}) {
    const auto [div, inj] = simulate_path(ej, kCosts, s, x0, cfg, 3);
    CHECK(div == doctest::Approx(x0 - s.z1 - kCosts.c).epsilon(1e-12));
    CHECK(inj == 0.0);
  }
  const auto [div, inj] = simulate_path(kBm, kCosts, s, 3.0, cfg, 3);
  CHECK(div == doctest::Approx(3.0 - s.z1 - kCosts.c).epsilon(1e-8));
}

TEST_CASE("estimates are reproducible and independent of the thread count") {
  SimConfig cfg;
  cfg.n_paths = 300;
  cfg.horizon = 20.0;
  const auto a = estimate_value(kBm, kCosts, kBest, 1.0, cfg);
  cfg.threads = 3;
  const auto b = estimate_value(kBm, kCosts, kBest, 1.0, cfg);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.dividends_mean == b.dividends_mean);
  CHECK(a.injections_mean == b.injections_mean);
  cfg.seed += 1;
  const auto c = estimate_value(kBm, kCosts, kBest, 1.0, cfg);
  CHECK(c.mean != a.mean);
  CHECK(std::abs(a.mean - (a.dividends_mean - kCosts.phi * a.injections_mean)) <= 1e-12);
  CHECK(a.n_paths == 300);
  CHECK(a.truncation_bound > 0.0);
  CHECK_FALSE(a.discretization_note.empty());
  CHECK(path_seed(1, 0) != path_seed(1, 1));
  CHECK(path_seed(1, 0) != path_seed(2, 0));
}

TEST_CASE("Brownian value and components") {
  const ScaleSet set(kBm, kCosts.q);
  SimConfig cfg;
  cfg.n_paths = 4000;
  for (double x0 : {0.0, 2.5}) {
    const auto e = estimate_value(kBm, kCosts, kBest, x0, cfg);
    const auto r = value_function(set, kCosts, kBest, x0);
    CHECK(within(e.mean, e.std_error, r.value));
    CHECK(within(e.dividends_mean, e.dividends_stderr, r.dividends_part));
    CHECK(within(e.injections_mean, e.injections_stderr, r.injections_part));
  }
}

TEST_CASE("exp-jump value and components") {
  const LevyModel ej = ExpJumpCL{2.0, 1.0, 1.0};
  const ScaleSet set(ej, kCosts.q);
  const Strategy s{0.4, 2.0, false};
  SimConfig cfg;
  cfg.n_paths = 20000;
  for (double x0 : {0.0, 1.0, 3.0}) {
    const auto e = estimate_value(ej, kCosts, s, x0, cfg);
    const auto r = value_function(set, kCosts, s, x0);
    CHECK(within(e.mean, e.std_error, r.value));
    CHECK(within(e.dividends_mean, e.dividends_stderr, r.dividends_part));
    CHECK(within(e.injections_mean, e.injections_stderr, r.injections_part));
  }
}

TEST_CASE("fixed-jump paths run without a scale function") {
  const LevyModel fj = FixedJumpCL{2.0, 1.0, 0.5};
  SimConfig cfg;
  cfg.n_paths = 500;
  const auto e = estimate_value(fj, kCosts, Strategy{0.2, 1.5, false}, 0.5, cfg);
  CHECK(std::isfinite(e.mean));
  CHECK(e.injections_mean > 0.0);
  CHECK(e.truncation_bound > 0.0);
}

TEST_CASE("two-sided exit Laplace transform") {
  SimConfig cfg;
  cfg.n_paths = 20000;
  const ScaleSet set(kBm, kCosts.q);
  CHECK(estimate_exit_laplace(kBm, kCosts.q, cfg, 2.0, 2.0).mean == 1.0);
  const auto a = estimate_exit_laplace(kBm, kCosts.q, cfg, 1.0, 2.0);
  CHECK(within(a.mean, a.std_error, set.z(1.0) / set.z(2.0)));
  const auto b = estimate_exit_laplace(kBm, kCosts.q, cfg, 0.0, 2.0);
  CHECK(within(b.mean, b.std_error, 1.0 / set.z(2.0)));
  CHECK(set.exit_time_laplace(1.0, 2.0) == doctest::Approx(set.z(1.0) / set.z(2.0)).epsilon(1e-12));

  const LevyModel ej = ExpJumpCL{2.0, 1.0, 1.0};
  const ScaleSet es(ej, 0.1);
  const auto c = estimate_exit_laplace(ej, 0.1, cfg, 0.5, 3.0);
  CHECK(within(c.mean, c.std_error, es.z(0.5) / es.z(3.0)));
}

TEST_CASE("fixed-jump survival probability is psi'(0+) W(x)") {
  const FixedJumpCL m{2.0, 1.0, 0.5};
  const ScaleSet from_zero(m, 0.0);
  ScaleOptions one;
  one.fixed_jump_series = FixedJumpSeries::kFromOne;
  const ScaleSet from_one(m, 0.0, one);
  const double slope = psi_prime_at_zero(m);
  for (double x : {0.2, 0.7, 1.6}) {
    const auto [p, se] = survival(m, x, 20000, 41);
    CHECK(within(p, se, slope * from_zero.w(x)));
  }
  const auto [p, se] = survival(m, 0.2, 20000, 43);
  CHECK_FALSE(within(p, se, slope * from_one.w(0.2)));
}

TEST_CASE("naive stepping") {
  SimConfig cfg;
  cfg.bridge_correction = false;
  cfg.dt = 1e-2;
  cfg.horizon = 20.0;
  cfg.n_paths = 200;
  const auto e = estimate_value(kBm, kCosts, kBest, 1.0, cfg);
  CHECK(std::abs(e.mean - (e.dividends_mean - kCosts.phi * e.injections_mean)) <= 1e-12);
  CHECK(e.injections_mean > 0.0);
  CHECK(e.discretization_note.find("euler") != std::string::npos);
}

TEST_CASE("input validation") {
  SimConfig cfg;
  cfg.n_paths = 10;
  CHECK_THROWS_AS(estimate_value(kBm, kCosts, kBest, -1.0, cfg), DomainError);
  CHECK_THROWS_AS(estimate_exit_laplace(kBm, 0.05, cfg, 3.0, 2.0), DomainError);
  CHECK_THROWS_AS(estimate_value(kBm, kCosts, Strategy{1.0, 1.05, false}, 1.0, cfg), DomainError);
  cfg.n_paths = 0;
  CHECK_THROWS_AS(estimate_value(kBm, kCosts, kBest, 1.0, cfg), DomainError);
  cfg.n_paths = 10;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(simulate_path(kBm, kCosts, kBest, 1.0, cfg, 1), DomainError);
}

#include "idci/levy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "idci/errors.hpp"

namespace idci {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be finite");
  }
}

constexpr double kRootResidualTol = 1e-12;

}  // namespace

void validate(const LevyModel& model) {
  std::visit(
      overloaded{
          [](const BrownianDrift& m) {
            require_finite(m.mu, "mu");
            require_finite(m.sigma, "sigma");
            if (!(m.sigma > 0.0)) throw DomainError("sigma must be > 0");
          },
          [](const FixedJumpCL& m) {
            require_finite(m.beta, "beta");
            require_finite(m.lambda, "lambda");
            require_finite(m.alpha_jump, "alpha_jump");
            if (!(m.beta > 0.0)) throw DomainError("beta must be > 0");
            if (!(m.lambda > 0.0)) throw DomainError("lambda must be > 0");
            if (!(m.alpha_jump > 0.0)) throw DomainError("alpha_jump must be > 0");
            if (!(m.beta - m.lambda * m.alpha_jump > 0.0)) {
              throw DomainError("fixed-jump model requires beta - lambda*alpha_jump > 0");
            }
          },
          [](const ExpJumpCL& m) {
            require_finite(m.beta, "beta");
            require_finite(m.lambda, "lambda");
            require_finite(m.eta, "eta");
            if (!(m.beta > 0.0)) throw DomainError("beta must be > 0");
            if (!(m.lambda > 0.0)) throw DomainError("lambda must be > 0");
            if (!(m.eta > 0.0)) throw DomainError("eta must be > 0");
          },
      },
      model);
}

void validate(const Costs& costs) {
  require_finite(costs.q, "q");
  require_finite(costs.c, "c");
  require_finite(costs.phi, "phi");
  if (!(costs.q > 0.0)) throw DomainError("q must be > 0");
  if (!(costs.c > 0.0)) throw DomainError("c must be > 0");
  if (!(costs.phi > 1.0)) throw DomainError("phi must be > 1");
}

std::string variant_name(const LevyModel& model) {
  return std::visit(overloaded{
                        [](const BrownianDrift&) { return std::string("brownian"); },
                        [](const FixedJumpCL&) { return std::string("fixed_jump"); },
                        [](const ExpJumpCL&) { return std::string("exp_jump"); },
                    },
                    model);
}

double laplace_exponent(const LevyModel& model, double theta) {
  if (!(theta >= 0.0)) throw DomainError("laplace_exponent: theta must be >= 0");
  return std::visit(
      overloaded{
          [theta](const BrownianDrift& m) {
            return m.mu * theta + 0.5 * m.sigma * m.sigma * theta * theta;
          },
          [theta](const FixedJumpCL& m) {
            return m.beta * theta + m.lambda * std::expm1(-theta * m.alpha_jump);
          },
          [theta](const ExpJumpCL& m) {
            return m.beta * theta - m.lambda * theta / (m.eta + theta);
          },
      },
      model);
}

double laplace_exponent_derivative(const LevyModel& model, double theta) {
  if (!(theta >= 0.0)) throw DomainError("laplace_exponent_derivative: theta must be >= 0");
  return std::visit(
      overloaded{
          [theta](const BrownianDrift& m) { return m.mu + m.sigma * m.sigma * theta; },
          [theta](const FixedJumpCL& m) {
            return m.beta - m.lambda * m.alpha_jump * std::exp(-theta * m.alpha_jump);
          },
          [theta](const ExpJumpCL& m) {
            const double d = m.eta + theta;
            return m.beta - m.lambda * m.eta / (d * d);
          },
      },
      model);
}

double psi_prime_at_zero(const LevyModel& model) {
  return std::visit(overloaded{
                        [](const BrownianDrift& m) { return m.mu; },
                        [](const FixedJumpCL& m) { return m.beta - m.lambda * m.alpha_jump; },
                        [](const ExpJumpCL& m) { return m.beta - m.lambda / m.eta; },
                    },
                    model);
}

double phi_q(const LevyModel& model, double q) {
  if (!(q > 0.0)) throw DomainError("phi_q: q must be > 0");
  return largest_root(model, q);
}

double largest_root(const LevyModel& model, double q) {
  if (!(q >= 0.0) || !std::isfinite(q)) throw DomainError("largest_root: q must be >= 0");
  validate(model);

  if (const auto* bm = std::get_if<BrownianDrift>(&model)) {
    const double s2 = bm->sigma * bm->sigma;
    return (-bm->mu + std::sqrt(bm->mu * bm->mu + 2.0 * q * s2)) / s2;
  }

  // psi is convex with psi(0) = 0. When q = 0 and psi'(0+) >= 0 the largest
  // root is 0 itself.
  if (q == 0.0 && psi_prime_at_zero(model) >= 0.0) return 0.0;

  // Lower end: the minimiser of psi when psi'(0+) < 0, else 0; psi <= q there.
  double lo = 0.0;
  if (psi_prime_at_zero(model) < 0.0) {
    double a = 0.0;
    double b = 1.0;
    while (laplace_exponent_derivative(model, b) < 0.0) {
      b *= 2.0;
      if (b > 1e12) throw NumericalError("largest_root: cannot locate minimum of psi");
    }
    for (int i = 0; i < 200 && b - a > 1e-15 * (1.0 + b); ++i) {
      const double m = 0.5 * (a + b);
      (laplace_exponent_derivative(model, m) < 0.0 ? a : b) = m;
    }
    lo = b;
  }
  double hi = std::max(1.0, 2.0 * lo);
  while (laplace_exponent(model, hi) <= q) {
    hi *= 2.0;
    if (hi > 1e12) {
      std::ostringstream os;
      os << "largest_root: bracket failure, psi(" << hi << ") <= q = " << q;
      throw NumericalError(os.str());
    }
  }

  // Bisection down to a narrow bracket, then Newton polish kept inside it.
  for (int i = 0; i < 80 && hi - lo > 1e-6 * (1.0 + hi); ++i) {
    const double m = 0.5 * (lo + hi);
    (laplace_exponent(model, m) - q > 0.0 ? hi : lo) = m;
  }
  double theta = hi;
  for (int i = 0; i < 60; ++i) {
    const double r = laplace_exponent(model, theta) - q;
    if (std::abs(r) <= kRootResidualTol) return theta;
    const double d = laplace_exponent_derivative(model, theta);
    double next = theta - r / d;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    (laplace_exponent(model, next) - q > 0.0 ? hi : lo) = next;
    theta = next;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  const double r = laplace_exponent(model, theta) - q;
  if (std::abs(r) > 1e-10) {
    std::ostringstream os;
    os << "largest_root: no convergence in [" << lo << ", " << hi << "], residual " << r;
    throw NumericalError(os.str());
  }
  return theta;
}

}  // namespace idci

#include "idci/brownian_closed_form.hpp"

#include <cmath>

#include "idci/errors.hpp"

namespace idci {

BrownianConstants brownian_constants(const LevyModel& model, double q) {
  const auto* bm = std::get_if<BrownianDrift>(&model);
  if (bm == nullptr) throw UnsupportedError("explicit forms require the Brownian model");
  validate(model);
  if (!(q > 0.0)) throw DomainError("explicit forms require q > 0");
  BrownianConstants k{};
  k.mu = bm->mu;
  k.sigma = bm->sigma;
  k.q = q;
  const double s2 = bm->sigma * bm->sigma;
  k.delta = std::sqrt(bm->mu * bm->mu + 2.0 * q * s2) / s2;
  k.w = bm->mu / s2;
  k.alpha = k.w + k.delta;
  k.beta = k.w - k.delta;
  return k;
}

double zeta_brownian(const BrownianConstants& k, double z1, double z2) {
  return k.alpha * (std::exp(-k.beta * z2) - std::exp(-k.beta * z1)) -
         k.beta * (std::exp(-k.alpha * z2) - std::exp(-k.alpha * z1));
}

namespace {

void require_feasible(const Costs& costs, double z1, double z2) {
  if (!(z1 >= 0.0) || !(z2 >= z1 + costs.c)) {
    throw DomainError("explicit xi: requires 0 <= z1 and z1 + c <= z2");
  }
}

}  // namespace

double xi_brownian(const LevyModel& model, const Costs& costs, double z1, double z2) {
  validate(costs);
  require_feasible(costs, z1, z2);
  const auto k = brownian_constants(model, costs.q);
  const double zeta = zeta_brownian(k, z1, z2);
  const double ex = std::exp(-k.beta * z2) - std::exp(-k.beta * z1) - std::exp(-k.alpha * z2) +
                    std::exp(-k.alpha * z1);
  return 2.0 * k.delta * (z2 - z1 - costs.c) / zeta - costs.phi * k.mu / costs.q -
         costs.phi * ex / zeta;
}

std::pair<double, double> xi_grad_brownian(const LevyModel& model, const Costs& costs,
                                           double z1, double z2) {
  const double xi = xi_brownian(model, costs, z1, z2);
  const auto k = brownian_constants(model, costs.q);
  const double phi = costs.phi;
  const double zeta = zeta_brownian(k, z1, z2);
  const double eb1 = std::exp(-k.beta * z1), ea1 = std::exp(-k.alpha * z1);
  const double eb2 = std::exp(-k.beta * z2), ea2 = std::exp(-k.alpha * z2);
  const double dzeta1 = k.alpha * k.beta * (eb1 - ea1);
  const double dzeta2 = k.alpha * k.beta * (ea2 - eb2);
  const double shifted = xi + phi * k.mu / costs.q;
  const double d1 = -(2.0 * k.delta + phi * (k.beta * eb1 - k.alpha * ea1)) / zeta -
                    shifted / zeta * dzeta1;
  const double d2 = (2.0 * k.delta + phi * (k.beta * eb2 - k.alpha * ea2)) / zeta -
                    shifted / zeta * dzeta2;
  return {d1, d2};
}

double dxi_dz1_at_zero_brownian(const LevyModel& model, const Costs& costs, double z2) {
  validate(costs);
  const auto k = brownian_constants(model, costs.q);
  return 2.0 * k.delta * (costs.phi - 1.0) /
         (k.alpha * std::expm1(-k.beta * z2) - k.beta * std::expm1(-k.alpha * z2));
}

std::pair<double, double> xi_hessian_at_critical_brownian(const LevyModel& model,
                                                          const Costs& costs, double z1,
                                                          double z2) {
  validate(costs);
  require_feasible(costs, z1, z2);
  const auto k = brownian_constants(model, costs.q);
  const double phi = costs.phi;
  const double a = k.alpha, b = k.beta;
  const double zeta = zeta_brownian(k, z1, z2);
  const double eb1 = std::exp(-b * z1), ea1 = std::exp(-a * z1);
  const double eb2 = std::exp(-b * z2), ea2 = std::exp(-a * z2);
  const double d11 = (phi * (b * b * eb1 - a * a * ea1) +
                      (2.0 * k.delta + phi * (b * eb1 - a * ea1)) / (eb1 - ea1) *
                          (a * ea1 - b * eb1)) /
                     zeta;
  const double d22 = (phi * (a * a * ea2 - b * b * eb2) -
                      (2.0 * k.delta + phi * (b * eb2 - a * ea2)) / (ea2 - eb2) *
                          (b * eb2 - a * ea2)) /
                     zeta;
  return {d11, d22};
}

std::pair<double, double> foc_system_brownian(const LevyModel& model, const Costs& costs,
                                              double z1, double z2) {
  validate(costs);
  const auto k = brownian_constants(model, costs.q);
  const double phi = costs.phi;
  const double a = k.alpha, b = k.beta;
  const double r1 = std::exp(-a * z2) - std::exp(-a * z1) - std::exp(-b * z2) +
                    std::exp(-b * z1) +
                    phi * (std::exp(-b * z2 - a * z1) - std::exp(-a * z2 - b * z1));
  const double r2 = a * b * (z2 - z1 - costs.c) * (std::exp(-b * z1) - std::exp(-a * z1)) +
                    zeta_brownian(k, z1, z2) +
                    2.0 * k.delta * phi * std::exp(-2.0 * k.mu / (k.sigma * k.sigma) * z1) -
                    a * phi * std::exp(-a * z1 - b * z2) + b * phi * std::exp(-a * z2 - b * z1);
  return {r1, r2};
}

std::optional<std::pair<double, double>> solve_foc_brownian(const LevyModel& model,
                                                            const Costs& costs, double z1,
                                                            double z2, double tol) {
  const auto feasible = [&](double u, double v) { return u >= 0.0 && v > u + costs.c; };
  const auto norm = [](std::pair<double, double> r) {
    return std::max(std::abs(r.first), std::abs(r.second));
  };
  if (!feasible(z1, z2)) return std::nullopt;
  auto r = foc_system_brownian(model, costs, z1, z2);
  for (int it = 0; it < 100; ++it) {
    if (norm(r) <= tol) return std::make_pair(z1, z2);
    const double h1 = 1e-7 * (1.0 + std::abs(z1));
    const double h2 = 1e-7 * (1.0 + std::abs(z2));
    const auto p1 = foc_system_brownian(model, costs, z1 + h1, z2);
    const auto m1 = foc_system_brownian(model, costs, z1 - h1, z2);
    const auto p2 = foc_system_brownian(model, costs, z1, z2 + h2);
    const auto m2 = foc_system_brownian(model, costs, z1, z2 - h2);
    const double j11 = (p1.first - m1.first) / (2 * h1);
    const double j21 = (p1.second - m1.second) / (2 * h1);
    const double j12 = (p2.first - m2.first) / (2 * h2);
    const double j22 = (p2.second - m2.second) / (2 * h2);
    const double det = j11 * j22 - j12 * j21;
    if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
    const double s1 = -(j22 * r.first - j12 * r.second) / det;
    const double s2 = -(-j21 * r.first + j11 * r.second) / det;
    // Damped step: halve until the residual decreases and the point stays feasible.
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const double u = z1 + t * s1, v = z2 + t * s2;
      if (!feasible(u, v)) continue;
      const auto rn = foc_system_brownian(model, costs, u, v);
      if (norm(rn) < norm(r) || norm(rn) <= tol) {
        z1 = u;
        z2 = v;
        r = rn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (norm(r) <= std::max(tol, 1e-11)) return std::make_pair(z1, z2);
  return std::nullopt;
}

}  // namespace idci

#pragma once

#include <optional>
#include <utility>

#include "idci/levy_model.hpp"

namespace idci {

/// Constants of the explicit drifted-Brownian formulas:
/// delta = sqrt(mu^2 + 2 q sigma^2)/sigma^2, w = mu/sigma^2,
/// alpha = w + delta, beta = w - delta.
struct BrownianConstants {
  double mu;
  double sigma;
  double q;
  double delta;
  double w;
  double alpha;
  double beta;
};

/// Throws UnsupportedError unless the model is BrownianDrift.
BrownianConstants brownian_constants(const LevyModel& model, double q);

/// zeta(z1, z2) = alpha (e^{-beta z2} - e^{-beta z1}) - beta (e^{-alpha z2} - e^{-alpha z1}).
double zeta_brownian(const BrownianConstants& k, double z1, double z2);

/// Explicit xi for drifted Brownian motion (independent of ScaleSet).
double xi_brownian(const LevyModel& model, const Costs& costs, double z1, double z2);

/// Explicit partial derivatives (d/dz1, d/dz2) of xi_brownian.
std::pair<double, double> xi_grad_brownian(const LevyModel& model, const Costs& costs,
                                           double z1, double z2);

/// d xi / d z1 on the line z1 = 0: 2 delta (phi - 1) / (alpha (e^{-beta z2} - 1) - beta (e^{-alpha z2} - 1)).
double dxi_dz1_at_zero_brownian(const LevyModel& model, const Costs& costs, double z2);

/// Second partials (d11, d22) in the simplified form valid at a critical point
/// of xi (both first-order conditions substituted).
std::pair<double, double> xi_hessian_at_critical_brownian(const LevyModel& model,
                                                          const Costs& costs, double z1,
                                                          double z2);

/// Residuals (r1, r2) of the two first-order equations with xi eliminated.
std::pair<double, double> foc_system_brownian(const LevyModel& model, const Costs& costs,
                                              double z1, double z2);

/// 2-D Newton on foc_system_brownian from (z1, z2). Returns the root when the
/// iteration stays feasible and the residuals drop below tol, else nullopt.
std::optional<std::pair<double, double>> solve_foc_brownian(const LevyModel& model,
                                                            const Costs& costs, double z1,
                                                            double z2, double tol = 1e-13);

}  // namespace idci

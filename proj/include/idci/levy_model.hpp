#pragma once

#include <string>
#include <variant>

namespace idci {

/// X(t) = mu t + sigma B(t).
struct BrownianDrift {
  double mu = 0.0;
  double sigma = 1.0;
};

/// Cramer-Lundberg process with premium rate beta and claims of fixed size
/// alpha_jump arriving at Poisson rate lambda.
struct FixedJumpCL {
  double beta = 1.0;
  double lambda = 1.0;
  double alpha_jump = 1.0;
};

/// Cramer-Lundberg process with Exp(eta) claims.
struct ExpJumpCL {
  double beta = 1.0;
  double lambda = 1.0;
  double eta = 1.0;
};

using LevyModel = std::variant<BrownianDrift, FixedJumpCL, ExpJumpCL>;

/// Control-problem constants: discount rate, fixed cost per dividend lump and
/// price per unit of injected capital.
struct Costs {
  double q = 0.05;
  double c = 0.1;
  double phi = 1.05;
};

/// Throws DomainError unless the model parameters satisfy their invariants.
void validate(const LevyModel& model);
void validate(const Costs& costs);

/// Short tag used in reports and configuration files ("brownian", "fixed_jump",
/// "exp_jump").
std::string variant_name(const LevyModel& model);

/// psi(theta) = log E[exp(theta X(1))], theta >= 0.
double laplace_exponent(const LevyModel& model, double theta);

/// psi'(theta) for theta >= 0 (right derivative at 0).
double laplace_exponent_derivative(const LevyModel& model, double theta);

/// psi'(0+), the mean drift of the process.
double psi_prime_at_zero(const LevyModel& model);

/// Largest root of psi(theta) = q, for q > 0.
double phi_q(const LevyModel& model, double q);

/// Same as phi_q but also accepts q = 0 (the scale-function machinery needs
/// Phi_0 for the 0-scale function of the fixed-jump model).
double largest_root(const LevyModel& model, double q);

}  // namespace idci

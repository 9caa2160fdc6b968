#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "idci/levy_model.hpp"
#include "idci/scale_functions.hpp"

namespace idci {

/// Impulse pair: pay down to z1 whenever the reserve reaches z2.
struct Strategy {
  double z1 = 0.0;
  double z2 = 0.0;
  /// Set by optimize() once the first-order identity has been certified.
  bool maximizer = false;
};

/// Throws DomainError unless 0 <= z1 and z1 + c <= z2.
void validate(const Strategy& s, const Costs& costs);

/// xi(z1, z2) = (z2 - z1 - c)/(Z(z2) - Z(z1)) - phi (Zbar(z2) - Zbar(z1))/(Z(z2) - Z(z1)).
double xi(const ScaleSet& set, const Costs& costs, double z1, double z2);

struct XiGradient {
  double dz1;
  double dz2;
};

/// Analytic partial derivatives of xi.
XiGradient xi_grad(const ScaleSet& set, const Costs& costs, double z1, double z2);

/// (1 - phi Z(x)) / (q W(x)); equals xi at any maximizer with x = z2.
double foc_target(const ScaleSet& set, const Costs& costs, double x);

/// |d/dz2[(Z(z2)-Z(z1))^2/(q W(z2)) dxi/dz2] - (Z(z2)-Z(z1)) W'(z2)/W(z2)^2 (-1/q + phi/q H(z2))|,
/// with the left side by Richardson-extrapolated central differences.
/// nullopt when z2 is a nonsmooth point of W.
std::optional<double> xi_curvature_identity(const ScaleSet& set, const Costs& costs, double z1,
                                            double z2, double fd_step = 1e-5);

enum class HessianCheck { kNegativeDefinite, kIndefinite, kNotEvaluated };

std::string to_string(HessianCheck h);

struct GridStats {
  int bound_doublings = 0;
  int grid_points = 0;
  int simplex_iterations = 0;
  int newton_iterations = 0;
  /// True when the maximizer lies on z1 = 0 and only z2 was polished.
  bool on_z1_boundary = false;
};

struct OptimizeReport {
  Strategy strategy;
  double xi_value = 0.0;
  /// Analytic gradient of xi at the returned point.
  std::pair<double, double> foc_residuals{0.0, 0.0};
  /// |xi - (1 - phi Z(z2))/(q W(z2))| at the returned point.
  double identity_residual = 0.0;
  HessianCheck hessian_check = HessianCheck::kNotEvaluated;
  /// Finite-difference Hessian entries (d11, d12, d22).
  double hessian[3] = {0.0, 0.0, 0.0};
  double search_bound_z0 = 0.0;
  GridStats grid_stats;
  /// Grid cells whose xi is within 1e-8 of the grid maximum, ordered by z2.
  std::vector<Strategy> grid_candidates;
};

struct OptimizeOptions {
  int grid_n = 200;
  /// Worker threads for the grid stage; results do not depend on this.
  int threads = 1;
  double simplex_ftol = 1e-10;
  double identity_tol = 1e-6;
};

/// Maximizes xi over the feasible triangle: bound search, coarse grid,
/// Nelder-Mead on -xi, Newton polish on the analytic gradient, certification.
/// Throws NonConvergenceError when the first-order identity fails and
/// InconsistencyError when the maximum sits on z2 = z1 + c.
OptimizeReport optimize(const ScaleSet& set, const Costs& costs,
                        const OptimizeOptions& options = {});

}  // namespace idci

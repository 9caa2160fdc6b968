#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "idci/levy_model.hpp"
#include "idci/optimizer.hpp"
#include "idci/scale_functions.hpp"

namespace idci {

/// A function handed to the generator. Derivatives are optional; missing ones
/// are taken by central differences.
struct TestFunction {
  std::function<double(double)> f;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  /// When set, f is affine with this slope on (-inf, 0]; the jump integral's
  /// tail beyond the current level is then added in closed form.
  std::optional<double> slope_below_zero;
  /// Points where f is only piecewise smooth; the jump integral is split there.
  std::vector<double> kinks;
};

/// (A f)(x): mu f' + sigma^2/2 f'' for BrownianDrift, beta f' + lambda (f(x - alpha) - f(x))
/// for FixedJumpCL, beta f' + lambda int_0^inf (f(x - y) - f(x)) eta e^{-eta y} dy for ExpJumpCL.
double generator_apply(const LevyModel& model, const TestFunction& f, double x,
                       double fd_step = 1e-5);

struct GridSpec {
  double x_min = 0.01;
  /// Upper end of the grid; 0 means 3 z2.
  double x_max = 0.0;
  double step = 0.01;
  double fd_step = 1e-5;
  /// Equality band tolerance, relative to max |V| on the grid.
  double tol_eq = 1e-5;
  double tol_ineq = 1e-7;
  double slope_tol = 1e-6;
  double transaction_tol = 1e-8;
};

struct Violation {
  /// "equality", "inequality", "slope" or "transaction".
  std::string kind;
  double x = 0.0;
  /// Second point of a transaction pair, else equal to x.
  double y = 0.0;
  /// Offending amount (residual, excess slope or shortfall).
  double amount = 0.0;
};

struct HjbReport {
  std::vector<double> grid;
  /// max |(A - q)V| over grid points in (0, z2) outside the excluded bands.
  double residual_below = 0.0;
  /// max (A - q)V over grid points in (z2, x_max].
  double worst_above = -std::numeric_limits<double>::infinity();
  double max_abs_value = 0.0;
  int slope_violations = 0;
  int transaction_violations = 0;
  /// Grid points skipped near z2 and near nonsmooth points of W.
  std::vector<double> excluded;
  std::vector<Violation> violations;
  bool pass = false;
};

/// Numerical check of the HJB conditions for the value of strategy s.
HjbReport check_hjb(const ScaleSet& set, const Costs& costs, const Strategy& s,
                    const GridSpec& spec = {});

/// h(z) = V(z) - V_{x_above}(z) is non-decreasing on a grid of (-2, x_above]
/// (1e-9 slack) and h(x_above) >= -1e-9.
bool check_h_monotone(const ScaleSet& set, const Costs& costs, const Strategy& s,
                      double x_above);

}  // namespace idci

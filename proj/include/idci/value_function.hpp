#pragma once

#include <optional>
#include <string>

#include "idci/levy_model.hpp"
#include "idci/optimizer.hpp"
#include "idci/scale_functions.hpp"

namespace idci {

enum class Branch { kNegative, kBelowTrigger, kAboveTrigger };

std::string to_string(Branch b);

struct ValueReport {
  double x = 0.0;
  double value = 0.0;
  double dividends_part = 0.0;
  double injections_part = 0.0;
  Strategy strategy;
  Branch branch = Branch::kBelowTrigger;
};

/// Expected discounted lump-sum dividends f(x), x >= 0.
double expected_dividends_f(const ScaleSet& set, const Costs& costs, const Strategy& s, double x);

/// Expected discounted capital injections g(x), x >= 0.
double expected_injections_g(const ScaleSet& set, const Costs& costs, const Strategy& s,
                             double x);

/// V(x) = f(x) - phi g(x); for x < 0 the linear extension V(0) + phi x.
/// For a strategy flagged as maximizer the z1-free form is evaluated too and
/// must agree within 1e-8 (InconsistencyError otherwise).
ValueReport value_function(const ScaleSet& set, const Costs& costs, const Strategy& s, double x);

/// Value of the strategy as a function with analytic derivatives:
/// V(x) = Z(x) K + phi (Zbar(x) + psi'(0+)/q) on [0, z2), unit slope above z2,
/// slope phi below 0. K is xi(z1, z2), or (1 - phi Z(z2))/(q W(z2)) for the
/// barrier strategy.
class ValueFunction {
 public:
  ValueFunction(const ScaleSet& set, const Costs& costs, const Strategy& s);
  /// Barrier strategy at level x: dividends are paid continuously above x.
  static ValueFunction barrier(const ScaleSet& set, const Costs& costs, double x);

  double operator()(double x) const;
  /// Right derivative.
  double derivative(double x) const;
  /// Right second derivative (0 above the trigger and below 0).
  double second_derivative(double x) const;

  double trigger() const { return z2_; }
  double coefficient() const { return k_; }

 private:
  ValueFunction(const ScaleSet& set, const Costs& costs, double z2, double k);
  ScaleSet set_;
  Costs costs_;
  double z2_;
  double k_;
  double offset_;  // psi'(0+)/q
  double v0_;
  double v_at_z2_;
};

/// Value V_x(y) of the barrier dividend and capital injection strategy at
/// level barrier_x, extended linearly with slope phi for y < 0.
double barrier_value(const ScaleSet& set, const Costs& costs, double barrier_x, double y);

/// Root a0 of phi H(x) = 1 when phi H(0+) > 1, else nullopt.
std::optional<double> h_threshold(const ScaleSet& set, const Costs& costs);

}  // namespace idci

#pragma once

#include <span>
#include <vector>

#include "idci/levy_model.hpp"

namespace idci {

/// Which lattice sum backs the 0-scale function of the fixed-jump model.
///
/// kFromZero is the certified form (it passes the Laplace identity check).
/// kFromOne starts the sum at n = 1, which makes W vanish on [0, alpha);
/// it is kept only so the discrepancy can be reproduced and reported.
enum class FixedJumpSeries { kFromZero, kFromOne };

struct ScaleOptions {
  FixedJumpSeries fixed_jump_series = FixedJumpSeries::kFromZero;
  /// Upper end of the region on which nonsmooth lattice points are listed.
  double domain_max = 100.0;
};

/// Evaluators for W^(q), W^(q)', Z^(q), Zbar^(q) and derived quantities at a
/// fixed (model, q). Immutable after construction; every member is const and
/// safe to call concurrently.
class ScaleSet {
 public:
  /// Throws UnsupportedError for the fixed-jump model with q > 0.
  ScaleSet(LevyModel model, double q, ScaleOptions options = {});

  const LevyModel& model() const { return model_; }
  double q() const { return q_; }
  double phi_q() const { return phi_q_; }
  const ScaleOptions& options() const { return options_; }

  /// Points where W lacks a classical derivative (fixed-jump lattice).
  std::span<const double> nonsmooth_points() const { return nonsmooth_; }
  bool is_nonsmooth(double x) const;

  /// W^(q)(x); zero for x < 0.
  double w(double x) const;
  /// Right derivative of W^(q) at x > 0.
  double w_prime(double x) const;
  /// Right derivative of W^(q) at 0 (W'(0+)); infinite-variation cases give a
  /// finite value here too because the models are closed-form.
  double w_prime_at_zero() const;
  /// Integral of W^(q) over [0, x].
  double wbar(double x) const;
  /// Z^(q)(x) = 1 + q Wbar(x); equals 1 for x < 0.
  double z(double x) const;
  /// Zbar^(q)(x) = int_0^x Z; equals x for x < 0.
  double zbar(double x) const;

  /// E_x[exp(-q T_b^+)] for the process reflected at 0, 0 <= x <= b.
  double exit_time_laplace(double x, double b) const;
  /// E_0[exp(-q tau_hat)] for the process reflected at its supremum, i.e.
  /// Z(z2) - q W(z2)^2 / W'(z2).
  double reflected_passage_laplace(double z2) const;
  /// H(x), same formula as reflected_passage_laplace.
  double h_func(double x) const;
  /// G(x) = phi q W(x)^2 + (1 - phi Z(x)) W'(x).
  double g_func(double phi, double x) const;

  /// |int_0^inf e^{-theta x} W(x) dx - 1/(psi(theta) - q)| for theta > Phi_q.
  double laplace_identity_check(double theta) const;

 private:
  struct ExpTerm {
    double coef;
    double rate;
  };

  enum class Kind { kExponentialSum, kLinear, kFixedJump };

  double fixed_jump_w(double x) const;
  double fixed_jump_w_prime(double x) const;

  LevyModel model_;
  double q_;
  double phi_q_;
  ScaleOptions options_;
  Kind kind_;
  std::vector<ExpTerm> terms_;
  double linear_slope_ = 0.0;
  std::vector<double> nonsmooth_;
};

}  // namespace idci

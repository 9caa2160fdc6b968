#include "idci/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "idci/errors.hpp"
#include "idci/value_function.hpp"

namespace idci {
namespace {

using boost::math::quadrature::gauss_kronrod;

double first_derivative(const TestFunction& f, double x, double h) {
  if (f.d1) return f.d1(x);
  return (f.f(x + h) - f.f(x - h)) / (2.0 * h);
}

double second_derivative(const TestFunction& f, double x, double h) {
  if (f.d2) return f.d2(x);
  const double fx = f.f(x);
  const auto d2 = [&](double s) { return (f.f(x + s) - 2.0 * fx + f.f(x - s)) / (s * s); };
  return (4.0 * d2(0.5 * h) - d2(h)) / 3.0;
}

// int_0^inf (f(x - y) - f(x)) eta e^{-eta y} dy
double exp_jump_integral(const TestFunction& f, double x, double eta) {
  const double fx = f.f(x);
  const auto integrand = [&](double y) { return (f.f(x - y) - fx) * eta * std::exp(-eta * y); };
  double err = 0.0;
  double body = 0.0;
  if (x > 0.0) {
    std::vector<double> cuts{0.0, x};
    for (double k : f.kinks) {
      const double y = x - k;
      if (y > 0.0 && y < x) cuts.push_back(y);
    }
    std::sort(cuts.begin(), cuts.end());
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] > cuts[i]) {
        body += gauss_kronrod<double, 31>::integrate(integrand, cuts[i], cuts[i + 1], 15, 1e-13,
                                                     &err);
      }
    }
  }
  const double from = std::max(x, 0.0);
  if (f.slope_below_zero) {
    // f(x - y) = f(0) + s (x - y) for y >= x.
    const double s = *f.slope_below_zero;
    if (x <= 0.0) return -s / eta;
    return body + std::exp(-eta * x) * (f.f(0.0) - fx - s / eta);
  }
  const double tail = gauss_kronrod<double, 31>::integrate(
      integrand, from, std::numeric_limits<double>::infinity(), 15, 1e-13, &err);
  return body + tail;
}

}  // namespace

double generator_apply(const LevyModel& model, const TestFunction& f, double x, double fd_step) {
  if (!f.f) throw DomainError("generator_apply: empty function");
  if (!std::isfinite(x) || !(fd_step > 0.0)) throw DomainError("generator_apply: bad arguments");
  if (const auto* bm = std::get_if<BrownianDrift>(&model)) {
    return bm->mu * first_derivative(f, x, fd_step) +
           0.5 * bm->sigma * bm->sigma * second_derivative(f, x, fd_step);
  }
  if (const auto* fj = std::get_if<FixedJumpCL>(&model)) {
    return fj->beta * first_derivative(f, x, fd_step) +
           fj->lambda * (f.f(x - fj->alpha_jump) - f.f(x));
  }
  const auto& ej = std::get<ExpJumpCL>(model);
  return ej.beta * first_derivative(f, x, fd_step) +
         ej.lambda * exp_jump_integral(f, x, ej.eta);
}

HjbReport check_hjb(const ScaleSet& set, const Costs& costs, const Strategy& s,
                    const GridSpec& spec) {
  validate(s, costs);
  if (!(spec.step > 0.0) || !(spec.x_min > 0.0)) throw DomainError("check_hjb: bad grid");
  const ValueFunction v(set, costs, s);
  const double x_max = spec.x_max > 0.0 ? spec.x_max : 3.0 * s.z2;
  const double q = set.q();

  TestFunction tf;
  tf.f = [&v](double x) { return v(x); };
  tf.d1 = [&v](double x) { return v.derivative(x); };
  tf.d2 = [&v](double x) { return v.second_derivative(x); };
  tf.slope_below_zero = costs.phi;
  tf.kinks.push_back(s.z2);
  for (double d : set.nonsmooth_points()) {
    if (d <= x_max) tf.kinks.push_back(d);
  }

  HjbReport rep;
  const int n = static_cast<int>(std::floor((x_max - spec.x_min) / spec.step + 1e-9)) + 1;
  for (int i = 0; i < n; ++i) rep.grid.push_back(spec.x_min + i * spec.step);

  // Values on {0} + grid, shared by every check below.
  std::vector<double> pts{0.0};
  pts.insert(pts.end(), rep.grid.begin(), rep.grid.end());
  std::vector<double> vals(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    vals[i] = v(pts[i]);
    rep.max_abs_value = std::max(rep.max_abs_value, std::abs(vals[i]));
  }
  const double eq_bound = spec.tol_eq * rep.max_abs_value;

  const double band = 2.0 * spec.fd_step;
  for (size_t i = 1; i < pts.size(); ++i) {
    const double x = pts[i];
    const bool near_kink = std::any_of(tf.kinks.begin(), tf.kinks.end(),
                                       [&](double k) { return std::abs(x - k) <= band; });
    if (near_kink) {
      rep.excluded.push_back(x);
      continue;
    }
    const double r = generator_apply(set.model(), tf, x, spec.fd_step) - q * vals[i];
    if (x < s.z2) {
      rep.residual_below = std::max(rep.residual_below, std::abs(r));
      if (std::abs(r) > eq_bound) rep.violations.push_back({"equality", x, x, r});
    } else {
      rep.worst_above = std::max(rep.worst_above, r);
      if (r > spec.tol_ineq) rep.violations.push_back({"inequality", x, x, r});
    }
  }

  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double slope = (vals[i + 1] - vals[i]) / (pts[i + 1] - pts[i]);
    if (slope > costs.phi + spec.slope_tol) {
      ++rep.slope_violations;
      rep.violations.push_back({"slope", pts[i], pts[i + 1], slope - costs.phi});
    }
  }

  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (pts[i] < pts[j] + costs.c - 1e-12) continue;
      const double shortfall = (pts[i] - pts[j] - costs.c) - (vals[i] - vals[j]);
      if (shortfall > spec.transaction_tol) {
        ++rep.transaction_violations;
        rep.violations.push_back({"transaction", pts[i], pts[j], shortfall});
      }
    }
  }

  const bool above_ok = rep.worst_above <= spec.tol_ineq;
  rep.pass = rep.residual_below <= eq_bound && above_ok && rep.slope_violations == 0 &&
             rep.transaction_violations == 0;
  return rep;
}

bool check_h_monotone(const ScaleSet& set, const Costs& costs, const Strategy& s,
                      double x_above) {
  validate(s, costs);
  if (!(x_above >= s.z2)) throw DomainError("check_h_monotone: x_above must be >= z2");
  const ValueFunction v(set, costs, s);
  const ValueFunction b = ValueFunction::barrier(set, costs, x_above);
  const auto h = [&](double z) { return v(z) - b(z); };
  const double step = 0.01;
  double prev = h(-2.0 + step);
  for (double z = -2.0 + 2 * step; z < x_above; z += step) {
    const double cur = h(z);
    if (cur < prev - 1e-9) return false;
    prev = cur;
  }
  const double end = h(x_above);
  return end >= prev - 1e-9 && end >= -1e-9;
}

}  // namespace idci

#include "idci/value_function.hpp"

#include <cmath>
#include <sstream>

#include "idci/errors.hpp"

namespace idci {
namespace {

void check_inputs(const ScaleSet& set, const Costs& costs, const Strategy& s) {
  validate(costs);
  if (std::abs(costs.q - set.q()) > 1e-14 * set.q()) {
    throw DomainError("costs.q must equal the discount rate of the scale set");
  }
  validate(s, costs);
}

struct Pieces {
  double z1, z2, zb1, zb2, d, off;
};

Pieces pieces(const ScaleSet& set, const Strategy& s) {
  Pieces p{};
  p.z1 = set.z(s.z1);
  p.z2 = set.z(s.z2);
  p.zb1 = set.zbar(s.z1);
  p.zb2 = set.zbar(s.z2);
  p.d = p.z2 - p.z1;
  p.off = psi_prime_at_zero(set.model()) / set.q();
  return p;
}

}  // namespace

std::string to_string(Branch b) {
  switch (b) {
    case Branch::kNegative:
      return "negative";
    case Branch::kBelowTrigger:
      return "below";
    case Branch::kAboveTrigger:
      break;
  }
  return "above";
}

double expected_dividends_f(const ScaleSet& set, const Costs& costs, const Strategy& s,
                            double x) {
  check_inputs(set, costs, s);
  if (!(x >= 0.0)) throw DomainError("expected_dividends_f: x must be >= 0");
  const auto p = pieces(set, s);
  const double net = s.z2 - s.z1 - costs.c;
  if (x < s.z2) return set.z(x) * net / p.d;
  return x - s.z2 + p.z2 * net / p.d;
}

double expected_injections_g(const ScaleSet& set, const Costs& costs, const Strategy& s,
                             double x) {
  check_inputs(set, costs, s);
  if (!(x >= 0.0)) throw DomainError("expected_injections_g: x must be >= 0");
  const auto p = pieces(set, s);
  const double cross = (p.zb1 * p.z2 - p.zb2 * p.z1) / p.d;
  if (x <= s.z2) return set.z(x) / p.z2 * (p.zb2 - cross) - set.zbar(x) - p.off;
  return -cross - p.off;
}

ValueReport value_function(const ScaleSet& set, const Costs& costs, const Strategy& s,
                           double x) {
  check_inputs(set, costs, s);
  if (!std::isfinite(x)) throw DomainError("value_function: x must be finite");
  ValueReport r;
  r.x = x;
  r.strategy = s;
  const double at = std::max(x, 0.0);
  r.dividends_part = expected_dividends_f(set, costs, s, at);
  r.injections_part = expected_injections_g(set, costs, s, at);
  if (x < 0.0) {
    // Inject -x at once, then continue from 0.
    r.branch = Branch::kNegative;
    r.injections_part -= x;
  } else {
    r.branch = x < s.z2 ? Branch::kBelowTrigger : Branch::kAboveTrigger;
  }
  r.value = r.dividends_part - costs.phi * r.injections_part;

  if (s.maximizer) {
    const auto p = pieces(set, s);
    const double t = (1.0 - costs.phi * p.z2) / (set.q() * set.w(s.z2));
    double alt = 0.0;
    if (at < s.z2) {
      alt = costs.phi * (set.zbar(at) + p.off) + set.z(at) * t;
    } else {
      alt = at - s.z2 + costs.phi * (p.zb2 + p.off) + p.z2 * t;
    }
    if (x < 0.0) alt += costs.phi * x;
    if (!(std::abs(alt - r.value) <= 1e-8 * std::max(1.0, std::abs(r.value)))) {
      std::ostringstream os;
      os.precision(15);
      os << "value_function: general form " << r.value << " and z1-free form " << alt
         << " disagree at x = " << x << " for (" << s.z1 << ", " << s.z2 << ")";
      throw InconsistencyError(os.str());
    }
  }
  return r;
}

ValueFunction::ValueFunction(const ScaleSet& set, const Costs& costs, double z2, double k)
    : set_(set), costs_(costs), z2_(z2), k_(k) {
  offset_ = psi_prime_at_zero(set_.model()) / set_.q();
  v0_ = k_ + costs_.phi * offset_;
  v_at_z2_ = set_.z(z2_) * k_ + costs_.phi * (set_.zbar(z2_) + offset_);
}

ValueFunction::ValueFunction(const ScaleSet& set, const Costs& costs, const Strategy& s)
    : ValueFunction(set, costs, s.z2, [&] {
        check_inputs(set, costs, s);
        return xi(set, costs, s.z1, s.z2);
      }()) {}

ValueFunction ValueFunction::barrier(const ScaleSet& set, const Costs& costs, double x) {
  validate(costs);
  if (!(x > 0.0)) throw DomainError("barrier value: barrier level must be > 0");
  const double k = (1.0 - costs.phi * set.z(x)) / (set.q() * set.w(x));
  return ValueFunction(set, costs, x, k);
}

double ValueFunction::operator()(double x) const {
  if (x < 0.0) return v0_ + costs_.phi * x;
  if (x < z2_) return set_.z(x) * k_ + costs_.phi * (set_.zbar(x) + offset_);
  return x - z2_ + v_at_z2_;
}

double ValueFunction::derivative(double x) const {
  if (x < 0.0) return costs_.phi;
  if (x < z2_) return set_.q() * set_.w(x) * k_ + costs_.phi * set_.z(x);
  return 1.0;
}

double ValueFunction::second_derivative(double x) const {
  if (x < 0.0 || x >= z2_) return 0.0;
  const double wp = x > 0.0 ? set_.w_prime(x) : set_.w_prime_at_zero();
  return set_.q() * (wp * k_ + costs_.phi * set_.w(x));
}

double barrier_value(const ScaleSet& set, const Costs& costs, double barrier_x, double y) {
  return ValueFunction::barrier(set, costs, barrier_x)(y);
}

std::optional<double> h_threshold(const ScaleSet& set, const Costs& costs) {
  validate(costs);
  const double w0 = set.w(0.0);
  const double h0 = 1.0 - set.q() * w0 * w0 / set.w_prime_at_zero();
  if (!(costs.phi * h0 > 1.0)) return std::nullopt;
  const auto f = [&](double x) { return costs.phi * set.h_func(x) - 1.0; };
  double lo = 0.0, hi = 1.0;
  while (f(hi) >= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw NumericalError("h_threshold: phi H(x) - 1 does not change sign");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + hi); ++i) {
    const double m = 0.5 * (lo + hi);
    (m > 0.0 && f(m) >= 0.0 ? lo : hi) = m;
  }
  const double a0 = 0.5 * (lo + hi);
  if (!(std::abs(f(a0)) <= 1e-10)) {
    std::ostringstream os;
    os << "h_threshold: bisection ended at " << a0 << " with residual " << f(a0);
    throw NumericalError(os.str());
  }
  return a0;
}

}  // namespace idci

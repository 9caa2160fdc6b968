#include "idci/scale_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "idci/errors.hpp"

namespace idci {
namespace {

using boost::math::quadrature::gauss_kronrod;

// expm1(r x) / r, the integral of e^{r s} over [0, x].
double e1(double r, double x) {
  const double rx = r * x;
  if (std::abs(rx) < 1e-3) {
    return x * (1.0 + rx / 2.0 * (1.0 + rx / 3.0 * (1.0 + rx / 4.0 * (1.0 + rx / 5.0))));
  }
  return std::expm1(rx) / r;
}

// (expm1(r x) - r x) / r^2, the integral of e1(r, .) over [0, x].
double e2(double r, double x) {
  const double rx = r * x;
  if (std::abs(rx) < 1e-3) {
    return x * x *
           (0.5 + rx / 6.0 * (1.0 + rx / 4.0 * (1.0 + rx / 5.0 * (1.0 + rx / 6.0))));
  }
  return (std::expm1(rx) - rx) / (r * r);
}

double integrate(const auto& f, double a, double b) {
  double err = 0.0;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-14, &err);
}

struct SeriesResult {
  double value;
  double max_term;
};

// Lattice sum of the fixed-jump 0-scale function (or its right derivative),
// evaluated in the floating type T. Terms alternate in sign and grow like
// e^{k x}, so the caller picks T from the size of the largest term.
template <class T>
SeriesResult fixed_jump_series(const FixedJumpCL& m, double x, int first, bool derivative) {
  using std::abs;
  using std::exp;
  const T k = T(m.lambda) / T(m.beta);
  const T inv_beta = T(1) / T(m.beta);
  const int last = static_cast<int>(std::floor(x / m.alpha_jump));
  T sum = 0;
  T max_term = 0;
  for (int n = first; n <= last; ++n) {
    const T y = T(x) - T(n) * T(m.alpha_jump);
    const T ky = k * y;
    // p_prev = (-ky)^{n-1}/(n-1)!, p = (-ky)^n/n!
    T p_prev = 0;
    T p = 1;
    for (int j = 1; j <= n; ++j) {
      p_prev = p;
      p *= -ky / T(j);
    }
    const T scale = inv_beta * exp(ky);
    T term = scale * p;
    if (derivative) term = k * (term - (n >= 1 ? scale * p_prev : T(0)));
    sum += term;
    max_term = std::max(max_term, T(abs(term)));
  }
  return {static_cast<double>(sum), static_cast<double>(max_term)};
}

double fixed_jump_eval(const FixedJumpCL& m, double x, int first, bool derivative) {
  namespace mp = boost::multiprecision;
  const auto ld = fixed_jump_series<long double>(m, x, first, derivative);
  const double target = std::max(std::abs(ld.value), 1e-300);
  constexpr double kRelTol = 1e-14;
  if (ld.max_term * std::numeric_limits<long double>::epsilon() <= kRelTol * target) {
    return ld.value;
  }
  // Digits needed: magnitude of the largest term over the tolerated error.
  const double digits = std::log10(ld.max_term / (kRelTol * target)) + 2.0;
  if (digits <= 48.0) {
    return fixed_jump_series<mp::cpp_bin_float_50>(m, x, first, derivative).value;
  }
  if (digits <= 98.0) {
    return fixed_jump_series<mp::cpp_bin_float_100>(m, x, first, derivative).value;
  }
  std::ostringstream os;
  os << "fixed-jump scale function: cancellation too severe at x = " << x;
  throw NumericalError(os.str());
}

}  // namespace

ScaleSet::ScaleSet(LevyModel model, double q, ScaleOptions options)
    : model_(std::move(model)), q_(q), options_(options) {
  validate(model_);
  if (!(q_ >= 0.0) || !std::isfinite(q_)) throw DomainError("ScaleSet: q must be >= 0");
  if (!(options_.domain_max > 0.0)) throw DomainError("ScaleSet: domain_max must be > 0");

  if (const auto* bm = std::get_if<BrownianDrift>(&model_)) {
    const double s2 = bm->sigma * bm->sigma;
    const double delta = std::sqrt(bm->mu * bm->mu + 2.0 * q_ * s2) / s2;
    const double w = bm->mu / s2;
    if (delta == 0.0) {
      kind_ = Kind::kLinear;
      linear_slope_ = 2.0 / s2;
    } else {
      kind_ = Kind::kExponentialSum;
      const double a = 1.0 / (s2 * delta);
      terms_ = {{a, delta - w}, {-a, -(w + delta)}};
    }
  } else if (const auto* ej = std::get_if<ExpJumpCL>(&model_)) {
    // psi(theta) = q  <=>  beta theta^2 + (beta eta - lambda - q) theta - q eta = 0
    const double b = ej->beta * ej->eta - ej->lambda - q_;
    const double disc = b * b + 4.0 * ej->beta * q_ * ej->eta;
    if (!(disc > 0.0)) {
      throw UnsupportedError("exp-jump scale function: repeated root of psi(theta) = q");
    }
    const double sq = std::sqrt(disc);
    // Stable quadratic roots.
    const double qq = -0.5 * (b + std::copysign(sq, b));
    double r1 = qq / ej->beta;
    double r2 = qq != 0.0 ? (-q_ * ej->eta) / qq : 0.0;
    const double rp = std::max(r1, r2);
    const double rm = std::min(r1, r2);
    kind_ = Kind::kExponentialSum;
    terms_ = {{(ej->eta + rp) / (ej->beta * (rp - rm)), rp},
              {(ej->eta + rm) / (ej->beta * (rm - rp)), rm}};
  } else {
    const auto& fj = std::get<FixedJumpCL>(model_);
    if (q_ != 0.0) {
      throw UnsupportedError(
          "unsupported: fixed-jump scale function is only available for q = 0");
    }
    kind_ = Kind::kFixedJump;
    for (int j = 1; j * fj.alpha_jump <= options_.domain_max; ++j) {
      nonsmooth_.push_back(j * fj.alpha_jump);
    }
  }
  phi_q_ = largest_root(model_, q_);
}

bool ScaleSet::is_nonsmooth(double x) const {
  if (kind_ != Kind::kFixedJump || !(x > 0.0)) return false;
  const double a = std::get<FixedJumpCL>(model_).alpha_jump;
  const double j = std::round(x / a);
  return j >= 1.0 && std::abs(x / a - j) <= 1e-12 * std::max(1.0, j);
}

double ScaleSet::fixed_jump_w(double x) const {
  const int first = options_.fixed_jump_series == FixedJumpSeries::kFromZero ? 0 : 1;
  return fixed_jump_eval(std::get<FixedJumpCL>(model_), x, first, false);
}

double ScaleSet::fixed_jump_w_prime(double x) const {
  const int first = options_.fixed_jump_series == FixedJumpSeries::kFromZero ? 0 : 1;
  return fixed_jump_eval(std::get<FixedJumpCL>(model_), x, first, true);
}

double ScaleSet::w(double x) const {
  if (!std::isfinite(x)) throw DomainError("w: x must be finite");
  if (x < 0.0) return 0.0;
  switch (kind_) {
    case Kind::kLinear:
      return linear_slope_ * x;
    case Kind::kFixedJump:
      return fixed_jump_w(x);
    case Kind::kExponentialSum:
      break;
  }
  double s = 0.0;
  for (const auto& t : terms_) s += t.coef * std::exp(t.rate * x);
  return s;
}

double ScaleSet::w_prime(double x) const {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("w_prime: x must be > 0");
  switch (kind_) {
    case Kind::kLinear:
      return linear_slope_;
    case Kind::kFixedJump:
      return fixed_jump_w_prime(x);
    case Kind::kExponentialSum:
      break;
  }
  double s = 0.0;
  for (const auto& t : terms_) s += t.coef * t.rate * std::exp(t.rate * x);
  return s;
}

double ScaleSet::w_prime_at_zero() const {
  switch (kind_) {
    case Kind::kLinear:
      return linear_slope_;
    case Kind::kFixedJump:
      return fixed_jump_w_prime(0.0);
    case Kind::kExponentialSum:
      break;
  }
  double s = 0.0;
  for (const auto& t : terms_) s += t.coef * t.rate;
  return s;
}

double ScaleSet::wbar(double x) const {
  if (!std::isfinite(x)) throw DomainError("wbar: x must be finite");
  if (x <= 0.0) return 0.0;
  switch (kind_) {
    case Kind::kLinear:
      return 0.5 * linear_slope_ * x * x;
    case Kind::kFixedJump: {
      // W is smooth between lattice points; integrate piece by piece.
      const double a = std::get<FixedJumpCL>(model_).alpha_jump;
      const auto f = [this](double s) { return w(s); };
      double s = 0.0;
      for (double lo = 0.0; lo < x; lo += a) s += integrate(f, lo, std::min(lo + a, x));
      return s;
    }
    case Kind::kExponentialSum:
      break;
  }
  double s = 0.0;
  for (const auto& t : terms_) s += t.coef * e1(t.rate, x);
  return s;
}

double ScaleSet::z(double x) const {
  if (!std::isfinite(x)) throw DomainError("z: x must be finite");
  if (x <= 0.0) return 1.0;
  if (q_ == 0.0) return 1.0;
  return 1.0 + q_ * wbar(x);
}

double ScaleSet::zbar(double x) const {
  if (!std::isfinite(x)) throw DomainError("zbar: x must be finite");
  if (x <= 0.0 || q_ == 0.0) return x;
  switch (kind_) {
    case Kind::kLinear:
      return x + q_ * linear_slope_ * x * x * x / 6.0;
    case Kind::kFixedJump:
      return x;  // unreachable: fixed-jump requires q = 0
    case Kind::kExponentialSum:
      break;
  }
  double s = 0.0;
  for (const auto& t : terms_) s += t.coef * e2(t.rate, x);
  return x + q_ * s;
}

double ScaleSet::exit_time_laplace(double x, double b) const {
  if (!(x >= 0.0) || !(x <= b) || !std::isfinite(b)) {
    throw DomainError("exit_time_laplace: requires 0 <= x <= b");
  }
  if (x == b) return 1.0;
  return z(x) / z(b);
}

double ScaleSet::reflected_passage_laplace(double z2) const {
  if (!(z2 > 0.0)) throw DomainError("reflected_passage_laplace: z2 must be > 0");
  if (kind_ == Kind::kExponentialSum && q_ > 0.0 && terms_.size() == 2) {
    // Z W' - q W^2 with the e^{2 r_+ x} terms cancelled by hand (uses
    // sum_k A_k / r_k = 1/q from the partial fraction at theta = 0):
    // q A_+ A_- e^{(r_+ + r_-) x} (r_+ - r_-)^2 / (r_+ r_-).
    const auto& p = terms_[0];
    const auto& m = terms_[1];
    const double d = p.rate - m.rate;
    const double num =
        q_ * p.coef * m.coef * std::exp((p.rate + m.rate) * z2) * d * d / (p.rate * m.rate);
    return num / w_prime(z2);
  }
  const double wv = w(z2);
  return z(z2) - q_ * wv * wv / w_prime(z2);
}

double ScaleSet::h_func(double x) const {
  if (!(x > 0.0)) throw DomainError("h_func: x must be > 0");
  return reflected_passage_laplace(x);
}

double ScaleSet::g_func(double phi, double x) const {
  if (!(x > 0.0)) throw DomainError("g_func: x must be > 0");
  const double wv = w(x);
  return phi * q_ * wv * wv + (1.0 - phi * z(x)) * w_prime(x);
}

double ScaleSet::laplace_identity_check(double theta) const {
  if (!(theta > phi_q_) || !std::isfinite(theta)) {
    throw DomainError("laplace_identity_check: theta must exceed Phi_q");
  }
  const double target = 1.0 / (laplace_exponent(model_, theta) - q_);
  const double gap = theta - phi_q_;

  // Bound W(x) <= C e^{Phi_q x} (times (1 + x) in the linear case); pick X_max
  // so the tail of the transform is far below 1e-10 of the target.
  double c_bound = 1.0;
  switch (kind_) {
    case Kind::kLinear:
      c_bound = linear_slope_;
      break;
    case Kind::kFixedJump:
      c_bound = 1.0 / psi_prime_at_zero(model_) + 1.0;
      break;
    case Kind::kExponentialSum:
      c_bound = 0.0;
      for (const auto& t : terms_) c_bound += std::abs(t.coef);
      break;
  }
  const double eps = 1e-13 * std::abs(target);
  double x_max = std::max(1.0, std::log(c_bound / (gap * eps)) / gap);
  if (kind_ == Kind::kLinear) {
    while (c_bound * std::exp(-gap * x_max) * (x_max / gap + 1.0 / (gap * gap)) > eps) {
      x_max *= 1.25;
    }
  }

  double piece = 1.0;
  if (kind_ == Kind::kFixedJump) piece = std::get<FixedJumpCL>(model_).alpha_jump;
  piece = std::min(piece, 4.0 / theta);
  const auto f = [this, theta](double s) { return std::exp(-theta * s) * w(s); };
  double sum = 0.0;
  for (double lo = 0.0; lo < x_max; lo += piece) sum += integrate(f, lo, std::min(lo + piece, x_max));
  return std::abs(sum - target);
}

}  // namespace idci

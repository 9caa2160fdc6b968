#include "idci/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "idci/errors.hpp"

namespace idci {
namespace {

void check_costs(const ScaleSet& set, const Costs& costs) {
  validate(costs);
  if (std::abs(costs.q - set.q()) > 1e-14 * set.q()) {
    throw DomainError("costs.q must equal the discount rate of the scale set");
  }
}

bool feasible(const Costs& costs, double z1, double z2) {
  return z1 >= 0.0 && z2 >= z1 + costs.c && std::isfinite(z2);
}

// Objective without the argument checks, for the inner loops.
double xi_raw(const ScaleSet& set, const Costs& costs, double z1, double z2) {
  const double d = set.z(z2) - set.z(z1);
  return (z2 - z1 - costs.c - costs.phi * (set.zbar(z2) - set.zbar(z1))) / d;
}

XiGradient grad_raw(const ScaleSet& set, const Costs& costs, double z1, double z2) {
  const double z_1 = set.z(z1), z_2 = set.z(z2);
  const double d = z_2 - z_1;
  const double x = (z2 - z1 - costs.c - costs.phi * (set.zbar(z2) - set.zbar(z1))) / d;
  const double q = set.q();
  const double dz2 = ((1.0 - costs.phi * z_2) - q * set.w(z2) * x) / d;
  const double dz1 = (q * set.w(z1) * x - (1.0 - costs.phi * z_1)) / d;
  return {dz1, dz2};
}

struct Point {
  double z1;
  double z2;
  double f;  // -xi, +inf when infeasible
};

// Nelder-Mead on -xi over the feasible triangle (infeasible points score +inf).
Point nelder_mead(const ScaleSet& set, const Costs& costs, double z1, double z2, double step,
                  double ftol, int& iterations) {
  const auto eval = [&](double a, double b) {
    if (!feasible(costs, a, b)) return std::numeric_limits<double>::infinity();
    return -xi_raw(set, costs, a, b);
  };
  std::array<Point, 3> s{Point{z1, z2, eval(z1, z2)},
                         Point{z1 + 0.5 * step, z2 + step, eval(z1 + 0.5 * step, z2 + step)},
                         Point{z1, z2 + step, eval(z1, z2 + step)}};
  iterations = 0;
  for (; iterations < 5000; ++iterations) {
    std::sort(s.begin(), s.end(), [](const Point& a, const Point& b) { return a.f < b.f; });
    const double diam = std::max({std::hypot(s[1].z1 - s[0].z1, s[1].z2 - s[0].z2),
                                  std::hypot(s[2].z1 - s[0].z1, s[2].z2 - s[0].z2)});
    if (std::isfinite(s[2].f) && s[2].f - s[0].f <= ftol && diam < 1e-7) break;
    if (diam < 1e-14) break;
    const double c1 = 0.5 * (s[0].z1 + s[1].z1), c2 = 0.5 * (s[0].z2 + s[1].z2);
    const auto at = [&](double t) {
      const double a = c1 + t * (s[2].z1 - c1), b = c2 + t * (s[2].z2 - c2);
      return Point{a, b, eval(a, b)};
    };
    const Point r = at(-1.0);
    if (r.f < s[0].f) {
      const Point e = at(-2.0);
      s[2] = e.f < r.f ? e : r;
    } else if (r.f < s[1].f) {
      s[2] = r;
    } else {
      const Point c = r.f < s[2].f ? at(-0.5) : at(0.5);
      if (c.f < std::min(r.f, s[2].f)) {
        s[2] = c;
      } else {
        for (int i = 1; i < 3; ++i) {
          s[i].z1 = s[0].z1 + 0.5 * (s[i].z1 - s[0].z1);
          s[i].z2 = s[0].z2 + 0.5 * (s[i].z2 - s[0].z2);
          s[i].f = eval(s[i].z1, s[i].z2);
        }
      }
    }
  }
  std::sort(s.begin(), s.end(), [](const Point& a, const Point& b) { return a.f < b.f; });
  return s[0];
}

// Newton on the analytic gradient with a finite-difference Jacobian.
bool newton_polish(const ScaleSet& set, const Costs& costs, double& z1, double& z2,
                   int& iterations) {
  double u = z1, v = z2;
  iterations = 0;
  for (; iterations < 50; ++iterations) {
    const auto g = grad_raw(set, costs, u, v);
    if (std::max(std::abs(g.dz1), std::abs(g.dz2)) <= 1e-13) break;
    const double h1 = 1e-6 * (1.0 + u), h2 = 1e-6 * (1.0 + v);
    if (u - h1 < 0.0) return false;
    const auto p1 = grad_raw(set, costs, u + h1, v), m1 = grad_raw(set, costs, u - h1, v);
    const auto p2 = grad_raw(set, costs, u, v + h2), m2 = grad_raw(set, costs, u, v - h2);
    const double a = (p1.dz1 - m1.dz1) / (2 * h1), b = (p2.dz1 - m2.dz1) / (2 * h2);
    const double c = (p1.dz2 - m1.dz2) / (2 * h1), d = (p2.dz2 - m2.dz2) / (2 * h2);
    const double det = a * d - b * c;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return false;
    const double s1 = -(d * g.dz1 - b * g.dz2) / det;
    const double s2 = -(-c * g.dz1 + a * g.dz2) / det;
    u += s1;
    v += s2;
    if (!feasible(costs, u, v)) return false;
    if (std::abs(s1) + std::abs(s2) <= 1e-15 * (1.0 + v)) break;
  }
  const auto g = grad_raw(set, costs, u, v);
  if (std::max(std::abs(g.dz1), std::abs(g.dz2)) > 1e-9) return false;
  z1 = u;
  z2 = v;
  return true;
}

// Newton on dxi/dz2 along z1 = 0.
bool newton_on_z2(const ScaleSet& set, const Costs& costs, double& z2, int& iterations) {
  double v = z2;
  iterations = 0;
  for (; iterations < 50; ++iterations) {
    const double g = grad_raw(set, costs, 0.0, v).dz2;
    if (std::abs(g) <= 1e-13) break;
    const double h = 1e-6 * (1.0 + v);
    const double d =
        (grad_raw(set, costs, 0.0, v + h).dz2 - grad_raw(set, costs, 0.0, v - h).dz2) / (2 * h);
    if (!(d < 0.0)) return false;
    v -= g / d;
    if (!feasible(costs, 0.0, v)) return false;
  }
  if (std::abs(grad_raw(set, costs, 0.0, v).dz2) > 1e-9) return false;
  z2 = v;
  return true;
}

}  // namespace

void validate(const Strategy& s, const Costs& costs) {
  if (!std::isfinite(s.z1) || !std::isfinite(s.z2)) throw DomainError("strategy must be finite");
  if (!(s.z1 >= 0.0)) throw DomainError("strategy requires z1 >= 0");
  if (!(s.z2 >= s.z1 + costs.c)) throw DomainError("strategy requires z1 + c <= z2");
}

double xi(const ScaleSet& set, const Costs& costs, double z1, double z2) {
  check_costs(set, costs);
  if (!feasible(costs, z1, z2)) throw DomainError("xi: requires 0 <= z1 and z1 + c <= z2");
  return xi_raw(set, costs, z1, z2);
}

XiGradient xi_grad(const ScaleSet& set, const Costs& costs, double z1, double z2) {
  check_costs(set, costs);
  if (!feasible(costs, z1, z2)) throw DomainError("xi_grad: requires 0 <= z1 and z1 + c <= z2");
  return grad_raw(set, costs, z1, z2);
}

double foc_target(const ScaleSet& set, const Costs& costs, double x) {
  check_costs(set, costs);
  if (!(x > 0.0)) throw DomainError("foc_target: x must be > 0");
  return (1.0 - costs.phi * set.z(x)) / (set.q() * set.w(x));
}

std::optional<double> xi_curvature_identity(const ScaleSet& set, const Costs& costs, double z1,
                                            double z2, double fd_step) {
  check_costs(set, costs);
  if (!feasible(costs, z1, z2) || !(z2 - fd_step >= z1 + costs.c)) {
    throw DomainError("xi_curvature_identity: requires an interior feasible point");
  }
  if (set.is_nonsmooth(z2)) return std::nullopt;
  const double q = set.q();
  const double z_1 = set.z(z1);
  // P(v) = D^2/(q W(v)) dxi/dz2 = D ((1 - phi Z(v))/(q W(v)) - xi)
  const auto p = [&](double v) {
    const double d = set.z(v) - z_1;
    return d * ((1.0 - costs.phi * set.z(v)) / (q * set.w(v)) - xi_raw(set, costs, z1, v));
  };
  const auto central = [&](double h) { return (p(z2 + h) - p(z2 - h)) / (2.0 * h); };
  const double lhs = (4.0 * central(0.5 * fd_step) - central(fd_step)) / 3.0;
  const double w2 = set.w(z2);
  const double rhs = (set.z(z2) - z_1) * set.w_prime(z2) / (w2 * w2) *
                     (-1.0 / q + costs.phi / q * set.reflected_passage_laplace(z2));
  return std::abs(lhs - rhs);
}

std::string to_string(HessianCheck h) {
  switch (h) {
    case HessianCheck::kNegativeDefinite:
      return "negative-definite";
    case HessianCheck::kIndefinite:
      return "indefinite";
    case HessianCheck::kNotEvaluated:
      break;
  }
  return "not-evaluated";
}

OptimizeReport optimize(const ScaleSet& set, const Costs& costs, const OptimizeOptions& options) {
  check_costs(set, costs);
  if (options.grid_n < 3) throw DomainError("optimize: grid_n must be >= 3");
  OptimizeReport rep;

  // (a) Search bound: dxi/dz2 must be negative beyond z0 on the probe lines.
  double z0 = std::max(10.0 * costs.c, 5.0 / set.phi_q());
  const auto bound_ok = [&](double b) {
    for (double z1 : {0.0, 0.5 * b}) {
      for (double z2 : {b, 1.5 * b, 2.0 * b}) {
        if (!(grad_raw(set, costs, z1, z2).dz2 < 0.0)) return false;
      }
    }
    return true;
  };
  while (!bound_ok(z0)) {
    z0 *= 2.0;
    if (++rep.grid_stats.bound_doublings > 40) {
      throw NonConvergenceError("optimize: no search bound where dxi/dz2 < 0");
    }
  }
  rep.search_bound_z0 = z0;

  // (b) Coarse grid on the triangle. Axis t_i = (z0 - c) i/(n-1); cells are
  // (z1, z2) = (t_i, t_j + c) with j >= i.
  const int n = options.grid_n;
  const double span = z0 - costs.c;
  std::vector<double> axis(n), z_at(n), zb_at(n), z_hi(n), zb_hi(n);
  for (int i = 0; i < n; ++i) {
    axis[i] = span * i / (n - 1);
    z_at[i] = set.z(axis[i]);
    zb_at[i] = set.zbar(axis[i]);
    z_hi[i] = set.z(axis[i] + costs.c);
    zb_hi[i] = set.zbar(axis[i] + costs.c);
  }
  std::vector<double> values(static_cast<size_t>(n) * n,
                             -std::numeric_limits<double>::infinity());
  const auto fill_row = [&](int i) {
    for (int j = i; j < n; ++j) {
      const double d = z_hi[j] - z_at[i];
      values[static_cast<size_t>(i) * n + j] =
          (axis[j] - axis[i] - costs.phi * (zb_hi[j] - zb_at[i])) / d;
    }
  };
  const int threads = std::max(1, std::min(options.threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fill_row(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (int i = t; i < n; i += threads) fill_row(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  rep.grid_stats.grid_points = n * (n + 1) / 2;

  // Deterministic max-reduction: larger xi, then smaller z2, then smaller z1.
  int bi = 0, bj = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double v = values[static_cast<size_t>(i) * n + j];
      if (v > best) {
        best = v;
        bi = i;
        bj = j;
      }
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      if (values[static_cast<size_t>(i) * n + j] >= best - 1e-8) {
        rep.grid_candidates.push_back({axis[i], axis[j] + costs.c, false});
      }
    }
  }

  // (c) Simplex refinement then Newton polish.
  const double step = span / (n - 1);
  const Point nm = nelder_mead(set, costs, axis[bi], axis[bj] + costs.c, step,
                               options.simplex_ftol, rep.grid_stats.simplex_iterations);
  double z1 = nm.z1, z2 = nm.z2;
  const bool near_axis = z1 < 1e-6;
  if (near_axis && grad_raw(set, costs, 0.0, z2).dz1 < 0.0) {
    z1 = 0.0;
    rep.grid_stats.on_z1_boundary = true;
    if (!newton_on_z2(set, costs, z2, rep.grid_stats.newton_iterations)) z2 = nm.z2;
  } else {
    double u = z1, v = z2;
    if (newton_polish(set, costs, u, v, rep.grid_stats.newton_iterations) &&
        xi_raw(set, costs, u, v) >= -nm.f - 1e-12) {
      z1 = u;
      z2 = v;
    }
  }

  // (d) Certification.
  if (z2 - z1 - costs.c <= 1e-9 * (1.0 + z2)) {
    std::ostringstream os;
    os << "optimize: maximum found on the line z2 = z1 + c at (" << z1 << ", " << z2 << ")";
    throw InconsistencyError(os.str());
  }
  rep.xi_value = xi_raw(set, costs, z1, z2);
  const auto g = grad_raw(set, costs, z1, z2);
  rep.foc_residuals = {g.dz1, g.dz2};
  rep.identity_residual = std::abs(rep.xi_value - foc_target(set, costs, z2));
  if (!(rep.identity_residual <= options.identity_tol)) {
    std::ostringstream os;
    os.precision(12);
    os << "optimize: first-order identity violated at (" << z1 << ", " << z2
       << "): |xi - (1 - phi Z(z2))/(q W(z2))| = " << rep.identity_residual
       << ", gradient = (" << g.dz1 << ", " << g.dz2 << "), simplex iterations "
       << rep.grid_stats.simplex_iterations;
    throw NonConvergenceError(os.str());
  }

  const double h = std::min(1e-3, 0.5 * z1);
  if (h > 0.0 && !rep.grid_stats.on_z1_boundary) {
    const auto f = [&](double a, double b) { return xi_raw(set, costs, a, b); };
    const double f0 = f(z1, z2);
    rep.hessian[0] = (f(z1 + h, z2) - 2 * f0 + f(z1 - h, z2)) / (h * h);
    rep.hessian[2] = (f(z1, z2 + h) - 2 * f0 + f(z1, z2 - h)) / (h * h);
    rep.hessian[1] =
        (f(z1 + h, z2 + h) - f(z1 + h, z2 - h) - f(z1 - h, z2 + h) + f(z1 - h, z2 - h)) /
        (4 * h * h);
    const double det = rep.hessian[0] * rep.hessian[2] - rep.hessian[1] * rep.hessian[1];
    rep.hessian_check = rep.hessian[0] < 0.0 && rep.hessian[2] < 0.0 && det > 0.0
                            ? HessianCheck::kNegativeDefinite
                            : HessianCheck::kIndefinite;
  }
  rep.strategy = {z1, z2, true};
  return rep;
}

}  // namespace idci

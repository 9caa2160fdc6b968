#include "idci/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "idci/errors.hpp"
#include "idci/scale_functions.hpp"
#include "idci/value_function.hpp"

namespace idci {
namespace {

using Rng = std::mt19937_64;

// Log-probabilities of bridge events. Below kLogNegligible an event is ignored;
// above the split level a segment is halved until it reaches its leaf size.
// Unsplit segments still draw their event exactly, only its time is coarse.
const double kLogNegligible = std::log(1e-13);
const double kLogSplitUp = std::log(1e-6);
const double kLogSplitDown = std::log(1e-2);
// Leaves in which capital is injected are refined down to this many dt.
constexpr double kInjectionLeaf = 64.0;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Barriers {
  double upper;
  double reset;
  bool stop_at_upper;
};

struct PathResult {
  double dividends = 0.0;  // discounted gross payments minus c
  double injections = 0.0;
  double exit = 0.0;  // e^{-q tau} when stop_at_upper and the barrier is reached
};

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericalError(std::string("simulate_path: non-finite ") + what);
  }
}

// Brownian motion with drift reflected at 0, refined by exact bridge sampling.
// Coarse steps and refinements draw from separate streams, so paths with different
// dt share their coarse skeleton.
class BrownianPath {
 public:
  BrownianPath(const BrownianDrift& m, double q, double c, const Barriers& b, const SimConfig& cfg,
               std::uint64_t seed)
      : mu_(m.mu), sigma_(m.sigma), q_(q), c_(c), b_(b), cfg_(cfg), coarse_(seed),
        rng_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  PathResult run(double x0) {
    off_ = x0;
    if (x0 >= b_.upper) {
      if (!pay(0.0, x0 - b_.reset)) return res_;
    }
    double t = 0.0;
    double xa = 0.0;
    while (t < cfg_.horizon && !stopped_) {
      const double h = std::min(step_size(b_.upper - (xa + off_)), cfg_.horizon - t);
      const double xb = xa + mu_ * h + sigma_ * std::sqrt(h) * normal_(coarse_);
      check_finite(xb, "increment");
      segment(t, h, xa, xb);
      t += h;
      xa = xb;
    }
    return res_;
  }

 private:
  // Step whose drift plus three standard deviations covers the distance to z2.
  double step_size(double d) const {
    const double a = std::max(mu_, 0.0);
    const double s3 = 3.0 * sigma_;
    const double root = a > 0.0 ? (-s3 + std::sqrt(s3 * s3 + 4.0 * a * d)) / (2.0 * a) : d / s3;
    return std::clamp(root * root, cfg_.dt, 1.0);
  }

  bool pay(double t, double gross) {
    if (b_.stop_at_upper) {
      res_.exit = std::exp(-q_ * t);
      stopped_ = true;
      return false;
    }
    res_.dividends += std::exp(-q_ * t) * (gross - c_);
    off_ -= gross;
    return true;
  }

  void inject(double t, double amount) {
    res_.injections += std::exp(-q_ * t) * amount;
    off_ += amount;
  }

  // Free-process values xa, xb at the ends of [t0, t0 + h].
  void segment(double t0, double h, double xa, double xb) {
    if (stopped_) return;
    const double ua = xa + off_;
    const double ub = xb + off_;
    const double s2h = sigma_ * sigma_ * h;
    // log P(bridge reaches z2) and log P(bridge reaches 0)
    const double up = ub >= b_.upper ? 0.0 : -2.0 * (b_.upper - ua) * (b_.upper - ub) / s2h;
    const double dn = ub <= 0.0 ? 0.0 : -2.0 * ua * ub / s2h;
    const bool split_up = up > kLogSplitUp && h > cfg_.dt;
    const bool split_dn = dn > kLogSplitDown && h > kInjectionLeaf * cfg_.dt;
    if (split_up || split_dn) {
      const double mid = 0.5 * (xa + xb) + 0.5 * sigma_ * std::sqrt(h) * normal_(rng_);
      segment(t0, 0.5 * h, xa, mid);
      segment(t0 + 0.5 * h, 0.5 * h, mid, xb);
      return;
    }
    const double tm = t0 + 0.5 * h;
    if (up > kLogNegligible && uniform_(rng_) < std::exp(up)) {
      if (!pay(tm, b_.upper - b_.reset)) return;
      if (xb + off_ < 0.0) inject(t0 + h, -(xb + off_));
      return;
    }
    if (dn > kLogNegligible) {
      // The bridge minimum is below 0 iff u < P(min < 0); then invert for it.
      const double u = 1.0 - uniform_(rng_);
      if (u < std::exp(dn)) {
        const double m = 0.5 * (xa + xb - std::sqrt((xb - xa) * (xb - xa) - 2.0 * s2h * std::log(u)));
        inject(tm, std::max(0.0, -(m + off_)));
      }
    }
  }

  double mu_, sigma_, q_, c_;
  Barriers b_;
  const SimConfig& cfg_;
  Rng coarse_;
  Rng rng_;
  boost::random::normal_distribution<double> normal_;
  boost::random::uniform_01<double> uniform_;
  double off_ = 0.0;
  bool stopped_ = false;
  PathResult res_;
};

// Euler steps of size dt: trigger checked at step ends, then clamping at 0.
PathResult brownian_naive(const BrownianDrift& m, double q, double c, const Barriers& b,
                          const SimConfig& cfg, Rng& rng, double x0) {
  std::normal_distribution<double> normal;
  PathResult res;
  double u = x0;
  const double sd = m.sigma * std::sqrt(cfg.dt);
  const auto n = static_cast<std::int64_t>(std::ceil(cfg.horizon / cfg.dt));
  for (std::int64_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) * cfg.dt;
    if (i > 0) u += m.mu * cfg.dt + sd * normal(rng);
    check_finite(u, "reserve");
    if (u >= b.upper) {
      if (b.stop_at_upper) {
        res.exit = std::exp(-q * t);
        return res;
      }
      res.dividends += std::exp(-q * t) * (u - b.reset - c);
      u = b.reset;
    }
    if (u < 0.0) {
      res.injections += std::exp(-q * t) * (-u);
      u = 0.0;
    }
  }
  return res;
}

// Compound Poisson with positive drift: exact, event by event.
template <class JumpSize>
PathResult jump_path(double beta, double lambda, JumpSize jump, double q, double c,
                     const Barriers& b, const SimConfig& cfg, Rng& rng, double x0) {
  std::exponential_distribution<double> wait(lambda);
  PathResult res;
  double u = x0;
  double t = 0.0;
  if (u >= b.upper) {
    if (b.stop_at_upper) {
      res.exit = 1.0;
      return res;
    }
    res.dividends += u - b.reset - c;
    u = b.reset;
  }
  double next_jump = wait(rng);
  while (t < cfg.horizon) {
    const double hit = t + (b.upper - u) / beta;
    if (hit <= next_jump) {
      if (hit >= cfg.horizon) break;
      if (b.stop_at_upper) {
        res.exit = std::exp(-q * hit);
        return res;
      }
      res.dividends += std::exp(-q * hit) * (b.upper - b.reset - c);
      u = b.reset;
      t = hit;
      continue;
    }
    if (next_jump >= cfg.horizon) break;
    u += beta * (next_jump - t) - jump(rng);
    t = next_jump;
    check_finite(u, "reserve");
    if (u < 0.0) {
      res.injections += std::exp(-q * t) * (-u);
      u = 0.0;
    }
    next_jump = t + wait(rng);
  }
  return res;
}

PathResult run_path(const LevyModel& model, double q, double c, const Barriers& b,
                    const SimConfig& cfg, std::uint64_t seed, double x0) {
  Rng rng(seed);
  if (const auto* bm = std::get_if<BrownianDrift>(&model)) {
    if (!cfg.bridge_correction) return brownian_naive(*bm, q, c, b, cfg, rng, x0);
    return BrownianPath(*bm, q, c, b, cfg, seed).run(x0);
  }
  if (const auto* fj = std::get_if<FixedJumpCL>(&model)) {
    const double a = fj->alpha_jump;
    return jump_path(fj->beta, fj->lambda, [a](Rng&) { return a; }, q, c, b, cfg, rng, x0);
  }
  const auto& ej = std::get<ExpJumpCL>(model);
  std::exponential_distribution<double> size(ej.eta);
  return jump_path(ej.beta, ej.lambda, [&size](Rng& r) { return size(r); }, q, c, b, cfg, rng, x0);
}

std::vector<PathResult> run_all(const LevyModel& model, double q, double c, const Barriers& b,
                                const SimConfig& cfg, double x0) {
  const auto n = cfg.n_paths;
  std::vector<PathResult> out(static_cast<size_t>(n));
  const auto work = [&](std::int64_t first, std::int64_t stride) {
    for (std::int64_t i = first; i < n; i += stride) {
      out[static_cast<size_t>(i)] =
          run_path(model, q, c, b, cfg, path_seed(cfg.seed, static_cast<std::uint64_t>(i)), x0);
    }
  };
  const auto threads = static_cast<std::int64_t>(std::max(1, cfg.threads));
  if (threads == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
  for (std::int64_t k = 0; k < threads; ++k) {
    pool.emplace_back([&, k] {
      try {
        work(k, threads);
      } catch (...) {
        errors[static_cast<size_t>(k)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

template <class F>
Moments moments(const std::vector<PathResult>& v, F get) {
  Moments m;
  const double n = static_cast<double>(v.size());
  for (const auto& r : v) m.mean += get(r);
  m.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (const auto& r : v) ss += (get(r) - m.mean) * (get(r) - m.mean);
    m.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return m;
}

std::string note(const LevyModel& model, const SimConfig& cfg) {
  std::ostringstream os;
  if (std::holds_alternative<BrownianDrift>(model)) {
    if (cfg.bridge_correction) {
      os << "bridge refinement to dt=" << cfg.dt << " at z2 and " << kInjectionLeaf * cfg.dt
         << " at 0; event times taken at leaf midpoints";
    } else {
      os << "euler dt=" << cfg.dt << "; trigger overshoot and clamping bias O(sqrt(dt))";
    }
  } else {
    os << "exact event-driven simulation";
  }
  return os.str();
}

}  // namespace

void validate(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw DomainError("dt must be > 0");
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) throw DomainError("horizon must be > 0");
  if (cfg.n_paths < 1) throw DomainError("n_paths must be >= 1");
  if (cfg.threads < 1) throw DomainError("threads must be >= 1");
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ (index * 0xd1342543de82ef95ULL + 1));
}

std::pair<double, double> simulate_path(const LevyModel& model, const Costs& costs,
                                        const Strategy& strategy, double x0, const SimConfig& cfg,
                                        std::uint64_t seed) {
  validate(model);
  validate(costs);
  validate(strategy, costs);
  validate(cfg);
  if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("simulate_path: x0 must be >= 0");
  const Barriers b{strategy.z2, strategy.z1, false};
  const auto r = run_path(model, costs.q, costs.c, b, cfg, seed, x0);
  return {r.dividends, r.injections};
}

McEstimate estimate_value(const LevyModel& model, const Costs& costs, const Strategy& strategy,
                          double x0, const SimConfig& cfg) {
  validate(model);
  validate(costs);
  validate(strategy, costs);
  validate(cfg);
  if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("estimate_value: x0 must be >= 0");
  const Barriers b{strategy.z2, strategy.z1, false};
  const auto paths = run_all(model, costs.q, costs.c, b, cfg, x0);
  const double phi = costs.phi;
  const auto div = moments(paths, [](const PathResult& r) { return r.dividends; });
  const auto inj = moments(paths, [](const PathResult& r) { return r.injections; });
  const auto val = moments(paths, [phi](const PathResult& r) { return r.dividends - phi * r.injections; });

  McEstimate e;
  e.n_paths = cfg.n_paths;
  e.dividends_mean = div.mean;
  e.injections_mean = inj.mean;
  e.dividends_stderr = div.std_error;
  e.injections_stderr = inj.std_error;
  e.mean = div.mean - phi * inj.mean;
  e.std_error = val.std_error;

  const double psi0 = psi_prime_at_zero(model);
  double tail = 0.0;
  if (const auto* fj = std::get_if<FixedJumpCL>(&model)) {
    // No scale function for q > 0; bound dividends by drift and injections by claims.
    tail = strategy.z2 + (fj->beta + phi * fj->lambda * fj->alpha_jump) / costs.q;
  } else {
    const ValueFunction v(ScaleSet(model, costs.q), costs, strategy);
    tail = std::max(std::abs(v(0.0)), std::abs(v(strategy.z2))) + phi * std::abs(psi0) / costs.q;
  }
  e.truncation_bound = std::exp(-costs.q * cfg.horizon) * tail;
  e.discretization_note = note(model, cfg);
  return e;
}

McEstimate estimate_exit_laplace(const LevyModel& model, double q, const SimConfig& cfg, double x0,
                                 double b) {
  validate(model);
  validate(cfg);
  if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("estimate_exit_laplace: q must be > 0");
  if (!(x0 >= 0.0 && x0 <= b) || !std::isfinite(b)) {
    throw DomainError("estimate_exit_laplace: requires 0 <= x0 <= b");
  }
  const Barriers bar{b, 0.0, true};
  const auto paths = run_all(model, q, 0.0, bar, cfg, x0);
  const auto m = moments(paths, [](const PathResult& r) { return r.exit; });
  McEstimate e;
  e.n_paths = cfg.n_paths;
  e.mean = m.mean;
  e.std_error = m.std_error;
  e.dividends_mean = m.mean;
  e.dividends_stderr = m.std_error;
  e.truncation_bound = std::exp(-q * cfg.horizon);
  e.discretization_note = note(model, cfg);
  return e;
}

}  // namespace idci

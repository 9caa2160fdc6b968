#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "idci/levy_model.hpp"
#include "idci/optimizer.hpp"

namespace idci {

struct SimConfig {
  double dt = 1e-4;
  double horizon = 200.0;
  std::int64_t n_paths = 100000;
  std::uint64_t seed = 20240601;
  /// Brownian paths only. On: exact bridge refinement near the barriers, dividends of
  /// exactly z2 - z1 at the crossing. Off: plain Euler steps of size dt with clamping.
  bool bridge_correction = true;
  int threads = 1;
};

void validate(const SimConfig& cfg);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_paths = 0;
  double dividends_mean = 0.0;
  double injections_mean = 0.0;
  double dividends_stderr = 0.0;
  double injections_stderr = 0.0;
  double truncation_bound = 0.0;
  std::string discretization_note;
};

/// Seed of path `index` in the stream of `seed`.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

/// Discounted net dividends and discounted injections along one path.
std::pair<double, double> simulate_path(const LevyModel& model, const Costs& costs,
                                        const Strategy& strategy, double x0, const SimConfig& cfg,
                                        std::uint64_t seed);

McEstimate estimate_value(const LevyModel& model, const Costs& costs, const Strategy& strategy,
                          double x0, const SimConfig& cfg);

/// E_x[e^{-q T_b+}] for the process reflected at 0; mean carries the estimate.
McEstimate estimate_exit_laplace(const LevyModel& model, double q, const SimConfig& cfg,
                                 double x0, double b);

}  // namespace idci

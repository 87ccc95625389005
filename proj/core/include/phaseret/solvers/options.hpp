#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "phaseret/image.hpp"

namespace phaseret::solvers {

enum class InitKind { flat, random, spectral };

enum class TerminationReason { tolerance, max_iters, divergence };

struct SolverOptions {
  int max_iters = 500;
  double tol = 1e-4;        // relative loss-change stop; 0 disables
  double step_size = 0.0;   // 0 -> 0.1 / mean(I_meas)
  std::optional<Image2D> support_mask;  // nonzero entries mark the support
  std::uint64_t seed = 0;
  InitKind init = InitKind::flat;

  void validate() const {
    if (max_iters < 1) throw ConfigError("SolverOptions: max_iters must be >= 1");
    if (tol < 0) throw ConfigError("SolverOptions: tol must be >= 0");
    if (step_size < 0) throw ConfigError("SolverOptions: step_size must be >= 0");
  }
};

struct RetrievalResult {
  Image2D phase;  // radians
  std::vector<double> loss_trace;  // loss_trace.size() == iterations_run + 1
  int iterations_run = 0;
  TerminationReason terminated_by = TerminationReason::max_iters;
};

const char* to_string(TerminationReason r);

}  // namespace phaseret::solvers

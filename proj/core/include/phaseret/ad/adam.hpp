#pragma once

#include <vector>

#include "phaseret/ad/tensor.hpp"

namespace phaseret::ad {

/// First/second-moment state for Adam. `init` must be called (or the first
/// `adam_step` will call it) before stepping; shapes are pinned to the
/// parameter list at that point.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  void init(const std::vector<Tensor>& params);
  bool initialized() const { return !m.empty(); }
};

/// Standard bias-corrected Adam update from the gradients currently stored in
/// the parameters. Deterministic: plain fixed-order arithmetic.
void adam_step(std::vector<Tensor>& params, AdamState& state, double lr);

/// Plain gradient descent, kept as the un-opinionated fallback optimizer.
void sgd_step(std::vector<Tensor>& params, double lr);

}  // namespace phaseret::ad

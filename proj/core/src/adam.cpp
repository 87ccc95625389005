#include "phaseret/ad/adam.hpp"

#include <cmath>

namespace phaseret::ad {

void AdamState::init(const std::vector<Tensor>& params) {
  m.clear();
  v.clear();
  m.reserve(params.size());
  v.reserve(params.size());
  for (const auto& p : params) {
    m.emplace_back(p.values().size(), 0.0);
    v.emplace_back(p.values().size(), 0.0);
  }
  t = 0;
}

void adam_step(std::vector<Tensor>& params, AdamState& state, double lr) {
  if (lr <= 0.0) throw ConfigError("adam_step: lr must be > 0");
  if (!state.initialized()) state.init(params);
  if (state.m.size() != params.size())
    throw DimensionError("adam_step: state does not match parameter list");

  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.t));

  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& w = params[pi].mutable_values();
    const auto& g = params[pi].grad();
    auto& m = state.m[pi];
    auto& v = state.v[pi];
    if (m.size() != w.size())
      throw DimensionError("adam_step: moment shape does not match parameter");
    for (size_t i = 0; i < w.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
    check_finite(w, "adam_step");
  }
}

void sgd_step(std::vector<Tensor>& params, double lr) {
  if (lr <= 0.0) throw ConfigError("sgd_step: lr must be > 0");
  for (auto& p : params) {
    auto& w = p.mutable_values();
    const auto& g = p.grad();
    for (size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
    check_finite(w, "sgd_step");
  }
}

}  // namespace phaseret::ad

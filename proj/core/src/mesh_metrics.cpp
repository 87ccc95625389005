#include "phaseret/metrics/mesh_metrics.hpp"

namespace phaseret::metrics {

double mesh_mse(const surface::HeightField& a, const surface::HeightField& b) {
  if (!a.u.same_shape(b.u)) throw DimensionError("mesh_mse: shape mismatch");
  require_finite(a.u, "mesh_mse");
  require_finite(b.u, "mesh_mse");
  double acc = 0.0;
  for (size_t i = 0; i < a.u.v.size(); ++i) {
    const double d = a.u.v[i] - b.u.v[i];
    acc += d * d;
  }
  return acc / double(a.u.v.size());
}

}  // namespace phaseret::metrics

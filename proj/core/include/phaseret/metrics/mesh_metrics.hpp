#pragma once

#include "phaseret/surface/eikonal.hpp"

namespace phaseret::metrics {

/// Pixelwise mean squared difference of two equally shaped height fields
/// (both expected normalized to [0,1]). Symmetric, zero iff equal.
double mesh_mse(const surface::HeightField& a, const surface::HeightField& b);

}  // namespace phaseret::metrics

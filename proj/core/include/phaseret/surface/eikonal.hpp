#pragma once

#include <vector>

#include "phaseret/image.hpp"

namespace phaseret::surface {

/// Height field on a regular grid with isotropic spacing.
struct HeightField {
  Image2D u;
  double spacing = 1.0;
};

struct DirichletPoint {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct SweepOptions {
  double tol = 1e-6;
  int max_sweeps = 1000;  // full 4-ordering cycles
};

struct EikonalResult {
  HeightField field;
  int sweeps = 0;          // cycles actually run
  double last_update = 0.0;
  bool converged = false;
  std::vector<double> update_trace;  // max update per cycle
};

/// Shape-from-shading slant: f = sqrt(1/I^2 - 1) for frontal illumination.
/// Input brightness is expected in [eps, 1]; values below eps are clamped.
Image2D brightness_to_speed(const Image2D& brightness, double eps = 1e-3);

/// Solves |grad u| = f with the Lax-Friedrichs sweeping scheme: Gauss-Seidel
/// passes over the four grid orderings, each update the monotone candidate
///   u <- min(u, [f - |Dc u| + (uE+uW)/(2h) + (uN+uS)/(2h)] / (2/h))
/// with central differences Dc and unit viscosity constants. Dirichlet values
/// are held fixed; off-grid neighbors use nonnegative linear extrapolation.
EikonalResult fast_sweep_eikonal(const Image2D& speed,
                                 const std::vector<DirichletPoint>& boundary,
                                 double h, const SweepOptions& opts = {});

std::vector<DirichletPoint> border_dirichlet(int height, int width,
                                             double value = 0.0);

struct SurfaceOptions {
  double clamp_eps = 1e-3;
  SweepOptions sweep;
};

/// Full shape-from-shading pipeline: normalize the phase image to [0,1],
/// convert brightness to slant, sweep with zero border height, normalize the
/// height to [0,1]. Constant inputs produce the flat zero surface.
HeightField reconstruct_surface(const Image2D& phase_img,
                                const SurfaceOptions& opts = {});

}  // namespace phaseret::surface

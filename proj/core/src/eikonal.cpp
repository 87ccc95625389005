#include "phaseret/surface/eikonal.hpp"

#include <algorithm>
#include <cmath>

namespace phaseret::surface {

Image2D brightness_to_speed(const Image2D& brightness, double eps) {
  if (eps <= 0.0 || eps > 1.0) throw ConfigError("brightness_to_speed: bad eps");
  Image2D f(brightness.height, brightness.width);
  for (size_t i = 0; i < brightness.v.size(); ++i) {
    const double I = std::clamp(brightness.v[i], eps, 1.0);
    f.v[i] = std::sqrt(std::max(0.0, 1.0 / (I * I) - 1.0));
  }
  return f;
}

std::vector<DirichletPoint> border_dirichlet(int height, int width, double value) {
  std::vector<DirichletPoint> pts;
  pts.reserve(2 * (height + width));
  for (int j = 0; j < width; ++j) {
    pts.push_back({0, j, value});
    if (height > 1) pts.push_back({height - 1, j, value});
  }
  for (int i = 1; i + 1 < height; ++i) {
    pts.push_back({i, 0, value});
    if (width > 1) pts.push_back({i, width - 1, value});
  }
  return pts;
}

EikonalResult fast_sweep_eikonal(const Image2D& speed,
                                 const std::vector<DirichletPoint>& boundary,
                                 double h, const SweepOptions& opts) {
  const int H = speed.height, W = speed.width;
  if (H < 2 || W < 2) throw DimensionError("fast_sweep_eikonal: grid must be >= 2x2");
  if (h <= 0.0) throw ConfigError("fast_sweep_eikonal: spacing must be > 0");
  if (opts.tol < 0.0 || opts.max_sweeps < 1)
    throw ConfigError("fast_sweep_eikonal: bad sweep options");
  if (boundary.empty()) throw ConfigError("fast_sweep_eikonal: empty Dirichlet set");
  require_finite(speed, "fast_sweep_eikonal speed");
  for (double f : speed.v)
    if (f < 0.0) throw ConfigError("fast_sweep_eikonal: negative speed");

  const double big = 1e10;
  Image2D u(H, W, big);
  std::vector<char> fixed(size_t(H) * W, 0);
  for (const auto& p : boundary) {
    if (p.row < 0 || p.row >= H || p.col < 0 || p.col >= W)
      throw ConfigError("fast_sweep_eikonal: Dirichlet point outside grid");
    if (p.value < 0.0) throw ConfigError("fast_sweep_eikonal: negative Dirichlet value");
    u.at(p.row, p.col) = p.value;
    fixed[size_t(p.row) * W + p.col] = 1;
  }

  // neighbor with nonnegative linear extrapolation at the grid edge
  auto nb = [&](int i, int j, int di, int dj) -> double {
    const int ni = i + di, nj = j + dj;
    if (ni >= 0 && ni < H && nj >= 0 && nj < W) return u.at(ni, nj);
    const int oi = i - di, oj = j - dj;
    double ghost = 2.0 * u.at(i, j) - u.at(oi, oj);
    return std::max(0.0, ghost);
  };

  auto update_point = [&](int i, int j) -> double {
    if (fixed[size_t(i) * W + j]) return 0.0;
    const double uE = nb(i, j, 0, 1), uW = nb(i, j, 0, -1);
    const double uN = nb(i, j, -1, 0), uS = nb(i, j, 1, 0);
    const double p = (uE - uW) / (2.0 * h);
    const double q = (uN - uS) / (2.0 * h);
    double cand = (speed.at(i, j) - std::sqrt(p * p + q * q) +
                   (uE + uW) / (2.0 * h) + (uN + uS) / (2.0 * h)) /
                  (2.0 / h);
    // causality cap: the true solution never exceeds an axis neighbor by
    // more than h * max(f here, f there); keeps f = 0 regions exact
    const double fij = speed.at(i, j);
    const int di[4] = {0, 0, -1, 1}, dj[4] = {1, -1, 0, 0};
    for (int d = 0; d < 4; ++d) {
      const int ni = i + di[d], nj = j + dj[d];
      if (ni < 0 || ni >= H || nj < 0 || nj >= W) continue;
      cand = std::min(cand, u.at(ni, nj) + h * std::max(fij, speed.at(ni, nj)));
    }
    const double old = u.at(i, j);
    if (cand < old) {
      u.at(i, j) = std::max(0.0, cand);
      return old - u.at(i, j);
    }
    return 0.0;
  };

  EikonalResult res;
  for (int cycle = 1; cycle <= opts.max_sweeps; ++cycle) {
    double max_update = 0.0;
    // four sweep orderings
    for (int i = 0; i < H; ++i)
      for (int j = 0; j < W; ++j) max_update = std::max(max_update, update_point(i, j));
    for (int i = 0; i < H; ++i)
      for (int j = W - 1; j >= 0; --j) max_update = std::max(max_update, update_point(i, j));
    for (int i = H - 1; i >= 0; --i)
      for (int j = 0; j < W; ++j) max_update = std::max(max_update, update_point(i, j));
    for (int i = H - 1; i >= 0; --i)
      for (int j = W - 1; j >= 0; --j) max_update = std::max(max_update, update_point(i, j));

    res.update_trace.push_back(max_update);
    res.sweeps = cycle;
    res.last_update = max_update;
    if (max_update < opts.tol) {
      res.converged = true;
      break;
    }
  }

  // any node never reached from the Dirichlet set keeps `big`; clip to the
  // largest reached value so downstream normalization stays meaningful
  double reached_max = 0.0;
  for (double x : u.v)
    if (x < big * 0.5) reached_max = std::max(reached_max, x);
  for (double& x : u.v)
    if (x >= big * 0.5) x = reached_max;

  res.field.u = std::move(u);
  res.field.spacing = h;
  return res;
}

HeightField reconstruct_surface(const Image2D& phase_img, const SurfaceOptions& opts) {
  if (phase_img.height < 2 || phase_img.width < 2)
    throw DimensionError("reconstruct_surface: image must be >= 2x2");
  require_finite(phase_img, "reconstruct_surface");

  const double lo = min_value(phase_img), hi = max_value(phase_img);
  Image2D bright(phase_img.height, phase_img.width, 1.0);
  if (hi - lo > 1e-300) {
    for (size_t i = 0; i < bright.v.size(); ++i)
      bright.v[i] = (phase_img.v[i] - lo) / (hi - lo);
  }
  Image2D f = brightness_to_speed(bright, opts.clamp_eps);
  const double h = 1.0 / double(std::max(phase_img.height, phase_img.width) - 1);
  EikonalResult r = fast_sweep_eikonal(
      f, border_dirichlet(phase_img.height, phase_img.width, 0.0), h, opts.sweep);

  double umax = max_value(r.field.u);
  if (umax > 0.0)
    for (double& x : r.field.u.v) x /= umax;
  return std::move(r.field);
}

}  // namespace phaseret::surface

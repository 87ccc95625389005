#include "phaseret/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "phaseret/rng.hpp"

namespace phaseret {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void rescale(Image2D& img, double lo, double hi) {
  const double mn = min_value(img), mx = max_value(img);
  if (mx - mn < 1e-300) {
    for (double& x : img.v) x = lo;
    return;
  }
  for (double& x : img.v) x = lo + (hi - lo) * (x - mn) / (mx - mn);
}

// smooth value noise: bilinear interpolation of a coarse random lattice
Image2D value_noise(int h, int w, int cell, Rng& rng) {
  const int gh = h / cell + 2, gw = w / cell + 2;
  std::vector<double> lattice(size_t(gh) * gw);
  for (double& x : lattice) x = rng.uniform();
  Image2D out(h, w);
  for (int i = 0; i < h; ++i) {
    const double fy = double(i) / cell;
    const int y0 = int(fy);
    const double ty = fy - y0;
    for (int j = 0; j < w; ++j) {
      const double fx = double(j) / cell;
      const int x0 = int(fx);
      const double tx = fx - x0;
      const double a = lattice[size_t(y0) * gw + x0];
      const double b = lattice[size_t(y0) * gw + x0 + 1];
      const double c = lattice[size_t(y0 + 1) * gw + x0];
      const double d = lattice[size_t(y0 + 1) * gw + x0 + 1];
      const double sy = ty * ty * (3 - 2 * ty);
      const double sx = tx * tx * (3 - 2 * tx);
      out.at(i, j) = (a * (1 - sx) + b * sx) * (1 - sy) + (c * (1 - sx) + d * sx) * sy;
    }
  }
  return out;
}

}  // namespace

Image2D make_blob(int height, int width, std::uint64_t seed, double amplitude,
                  int blobs) {
  Rng rng(seed);
  Image2D img(height, width);
  for (int b = 0; b < blobs; ++b) {
    const double cy = rng.uniform(0.25, 0.75) * height;
    const double cx = rng.uniform(0.25, 0.75) * width;
    const double sy = rng.uniform(0.08, 0.2) * height;
    const double sx = rng.uniform(0.08, 0.2) * width;
    const double amp = rng.uniform(0.5, 1.0);
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        const double dy = (i - cy) / sy;
        const double dx = (j - cx) / sx;
        img.at(i, j) += amp * std::exp(-0.5 * (dx * dx + dy * dy));
      }
    }
  }
  rescale(img, 0.0, amplitude);
  return img;
}

Image2D make_steps(int height, int width, std::uint64_t seed, double amplitude,
                   int levels) {
  Rng rng(seed);
  Image2D img(height, width);
  const double cy = height * rng.uniform(0.4, 0.6);
  const double cx = width * rng.uniform(0.4, 0.6);
  const double rmax = 0.48 * std::min(height, width);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      const double r = std::max(std::abs(i - cy), std::abs(j - cx));  // square rings
      const int level = std::clamp(int(levels * (1.0 - r / rmax)), 0, levels);
      img.at(i, j) = amplitude * double(level) / double(levels);
    }
  }
  return img;
}

Image2D make_text_mask(int height, int width, double amplitude) {
  // 5x7 block glyphs for "PR"
  static const char* glyph_p[7] = {"1111", "1001", "1001", "1111",
                                   "1000", "1000", "1000"};
  static const char* glyph_r[7] = {"1111", "1001", "1001", "1111",
                                   "1010", "1001", "1001"};
  Image2D img(height, width);
  const int rows = 7, cols = 9;  // two glyphs + gap
  const double sy = double(height) * 0.6 / rows;
  const double sx = double(width) * 0.6 / cols;
  const int oy = int(height * 0.2), ox = int(width * 0.2);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      const int gi = int((i - oy) / sy);
      const int gj = int((j - ox) / sx);
      if (i < oy || j < ox || gi < 0 || gi >= rows || gj < 0 || gj >= cols) continue;
      bool on = false;
      if (gj < 4)
        on = glyph_p[gi][gj] == '1';
      else if (gj >= 5)
        on = glyph_r[gi][gj - 5] == '1';
      img.at(i, j) = on ? amplitude : 0.0;
    }
  }
  return img;
}

Image2D make_texture(int height, int width, std::uint64_t seed) {
  Rng rng(seed);
  Image2D img(height, width);
  // 1/f-like octaves
  double weight = 1.0;
  for (int cell = std::max(4, std::min(height, width) / 4); cell >= 2; cell /= 2) {
    Image2D n = value_noise(height, width, cell, rng);
    for (size_t i = 0; i < img.v.size(); ++i) img.v[i] += weight * n.v[i];
    weight *= 0.55;
  }
  // a few occluding discs with sharp edges
  const int discs = 3 + rng.uniform_int(0, 3);
  for (int d = 0; d < discs; ++d) {
    const double cy = rng.uniform(0.1, 0.9) * height;
    const double cx = rng.uniform(0.1, 0.9) * width;
    const double r = rng.uniform(0.05, 0.22) * std::min(height, width);
    const double lift = rng.uniform(-0.5, 0.5);
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        const double dy = i - cy, dx = j - cx;
        if (dy * dy + dx * dx < r * r) img.at(i, j) += lift;
      }
    }
  }
  // soft illumination gradient
  const double gy = rng.uniform(-0.3, 0.3), gx = rng.uniform(-0.3, 0.3);
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j)
      img.at(i, j) += gy * double(i) / height + gx * double(j) / width;

  rescale(img, 0.05, 0.95);
  return img;
}

Image2D make_cosine_mix(int height, int width,
                        const std::vector<std::pair<int, int>>& modes,
                        double amplitude, std::uint64_t seed) {
  Rng rng(seed);
  Image2D img(height, width);
  for (const auto& [ky, kx] : modes) {
    const double phase = rng.uniform(0.0, kTwoPi);
    const double amp = rng.uniform(0.5, 1.0);
    for (int i = 0; i < height; ++i)
      for (int j = 0; j < width; ++j)
        img.at(i, j) += amp * std::cos(kTwoPi * (double(ky) * i / height +
                                                 double(kx) * j / width) +
                                       phase);
  }
  const double peak = std::max(std::abs(min_value(img)), std::abs(max_value(img)));
  if (peak > 0.0)
    for (double& x : img.v) x *= amplitude / peak;
  return img;
}

Image2D make_phantom(const std::string& kind, int height, int width,
                     std::uint64_t seed, double amplitude) {
  if (kind == "blob") return make_blob(height, width, seed, amplitude);
  if (kind == "steps") return make_steps(height, width, seed, amplitude);
  if (kind == "text-mask" || kind == "text") return make_text_mask(height, width, amplitude);
  throw ConfigError("unknown phantom kind: " + kind);
}

}  // namespace phaseret

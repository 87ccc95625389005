#pragma once

#include <cstddef>
#include <vector>

#include "phaseret/errors.hpp"

namespace phaseret {

/// Dense row-major height x width grid of doubles. Plays the roles of
/// measured intensity, phase map and height field throughout the library.
struct Image2D {
  int height = 0;
  int width = 0;
  std::vector<double> v;

  Image2D() = default;
  Image2D(int h, int w, double fill = 0.0);

  double& at(int i, int j) { return v[static_cast<size_t>(i) * width + j]; }
  double at(int i, int j) const { return v[static_cast<size_t>(i) * width + j]; }
  std::size_t size() const { return v.size(); }
  bool same_shape(const Image2D& o) const {
    return height == o.height && width == o.width;
  }
};

double min_value(const Image2D& img);
double max_value(const Image2D& img);
double mean_value(const Image2D& img);
bool all_finite(const Image2D& img);

// Throws NumericError if any entry is non-finite.
void require_finite(const Image2D& img, const char* what);

}  // namespace phaseret

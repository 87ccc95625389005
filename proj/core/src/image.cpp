#include "phaseret/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace phaseret {

Image2D::Image2D(int h, int w, double fill)
    : height(h), width(w), v(static_cast<size_t>(h) * w, fill) {
  if (h < 0 || w < 0) throw DimensionError("Image2D: negative extent");
}

double min_value(const Image2D& img) {
  return *std::min_element(img.v.begin(), img.v.end());
}

double max_value(const Image2D& img) {
  return *std::max_element(img.v.begin(), img.v.end());
}

double mean_value(const Image2D& img) {
  if (img.v.empty()) return 0.0;
  return std::accumulate(img.v.begin(), img.v.end(), 0.0) / double(img.v.size());
}

bool all_finite(const Image2D& img) {
  for (double x : img.v)
    if (!std::isfinite(x)) return false;
  return true;
}

void require_finite(const Image2D& img, const char* what) {
  if (!all_finite(img)) throw NumericError(std::string(what) + ": non-finite value");
}

}  // namespace phaseret

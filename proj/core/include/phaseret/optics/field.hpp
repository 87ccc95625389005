#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "phaseret/image.hpp"

namespace phaseret::optics {

using cplx = std::complex<double>;

/// Row-major H x W complex field (optical field or its spectrum).
struct ComplexField2D {
  int height = 0;
  int width = 0;
  std::vector<cplx> v;

  ComplexField2D() = default;
  ComplexField2D(int h, int w, cplx fill = {0.0, 0.0})
      : height(h), width(w), v(static_cast<size_t>(h) * w, fill) {}

  cplx& at(int i, int j) { return v[static_cast<size_t>(i) * width + j]; }
  cplx at(int i, int j) const { return v[static_cast<size_t>(i) * width + j]; }
  std::size_t size() const { return v.size(); }
  bool same_shape(const ComplexField2D& o) const {
    return height == o.height && width == o.width;
  }
};

/// |psi|^2 pointwise.
Image2D intensity(const ComplexField2D& field);

double total_power(const ComplexField2D& field);  // sum of |psi|^2

bool all_finite(const ComplexField2D& field);

}  // namespace phaseret::optics
